"""Curvature of Randers metrics F = alpha + beta and checks of their projective Ricci curvature."""

from __future__ import annotations

__version__ = "0.1.0"
