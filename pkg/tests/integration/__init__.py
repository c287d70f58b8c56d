"""Integration tests for workflow components."""