"""nvpersona: personality-conditioned verbal and nonverbal agent behavior."""
