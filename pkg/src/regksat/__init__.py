"""Bounds on the thresholds of regular random k-SAT via moment methods."""
