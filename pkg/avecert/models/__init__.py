"""Instance and report models."""
