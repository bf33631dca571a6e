"""Test fixtures for randers-curvature."""
