"""Error scenario tests for edge cases and failure conditions."""