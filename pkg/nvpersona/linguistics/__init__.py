"""Lexicon-driven word-category scoring."""
