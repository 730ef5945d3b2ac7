"""Regression learners, grouped by family."""
