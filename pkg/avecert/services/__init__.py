"""Linear algebra, certification, solving and experiment services."""
