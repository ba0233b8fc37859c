"""Nonverbal action schema, markup parsing and behavior scripts."""
