"""Personality profiles, scenarios, clip descriptions and system prompts."""
