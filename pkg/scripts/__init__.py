"""Benchmark scripts for TCVBM."""
