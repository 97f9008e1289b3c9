"""Configuration, errors and API security."""
