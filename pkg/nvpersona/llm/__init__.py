"""Chat-completion gateway and the offline clip-description step."""
