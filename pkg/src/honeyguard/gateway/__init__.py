# Gateway package