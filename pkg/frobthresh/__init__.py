"""Exact positive-characteristic singularity invariants: test ideals, F-thresholds and their chain theorems."""
