"""Tests for randers-curvature."""
