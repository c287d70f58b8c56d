"""
SmoothCert Test Suite

Unit, integration and error scenario tests for the certification engine
and its command line.
"""
