"""Corpus analysis: verbal, classification and nonverbal sections."""
