"""Agent-to-agent trials, experiment runs and transcript persistence."""
