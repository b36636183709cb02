"""Configuration package for settings and logging."""
