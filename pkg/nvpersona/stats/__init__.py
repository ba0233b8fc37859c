"""Hypothesis tests behind the comparison tables."""
