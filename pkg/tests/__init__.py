"""Tests package for avecert."""
