from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .const import SIGNIFICANT_DIGITS
from .exceptions import InvalidArgument


def direction_frame(n: int) -> np.ndarray:
    """Return the fixed direction frame used to test polynomial identities in y.

    The rows are the unit vectors e_i, the pair sums (e_i + e_j)/sqrt(2) for
    i < j, and the cyclic differences (e_i - e_{i+1 mod n})/sqrt(2). For n = 2
    the cyclic differences repeat up to sign, so only distinct rows are kept.
    """
    if n < 1:
        raise InvalidArgument(f"direction_frame: dimension must be positive, got {n}")

    eye = np.eye(n)
    rows = [eye[i] for i in range(n)]
    rows += [(eye[i] + eye[j]) / np.sqrt(2.0) for i in range(n) for j in range(i + 1, n)]

    for i in range(n):
        candidate = (eye[i] - eye[(i + 1) % n]) / np.sqrt(2.0)
        if not np.any(candidate):
            continue
        if any(np.allclose(candidate, r) or np.allclose(candidate, -r) for r in rows):
            continue
        rows.append(candidate)

    return np.array(rows)


def parse_vector(value: str, dimension: int | None = None) -> np.ndarray:
    """Parse a comma separated vector such as "0.3,0"."""
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise InvalidArgument(f"empty vector '{value}'")

    try:
        vector = np.array([float(p) for p in parts])
    except ValueError:
        raise InvalidArgument(f"invalid vector '{value}': components must be numbers")

    if not np.all(np.isfinite(vector)):
        raise InvalidArgument(f"invalid vector '{value}': components must be finite")

    if dimension is not None and len(vector) != dimension:
        raise InvalidArgument(
            f"vector '{value}' has {len(vector)} components, expected {dimension}"
        )

    return vector


def format_value(value) -> str:
    """Format a scalar, vector or tensor with 15 significant digits."""
    if isinstance(value, np.ndarray):
        return format_value(value.tolist())

    if isinstance(value, Sequence) and not isinstance(value, str):
        return "[" + ", ".join(format_value(v) for v in value) + "]"

    if isinstance(value, bool):
        return str(value).lower()

    return f"{float(value):.{SIGNIFICANT_DIGITS}g}"


def relative_residual(value: float, reference: float, scale: float) -> float:
    """|value - reference| / (|reference| + scale)."""
    return abs(value - reference) / (abs(reference) + scale)


def json_ready(value):
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}

    if isinstance(value, list | tuple):
        return [json_ready(v) for v in value]

    if isinstance(value, np.ndarray):
        return json_ready(value.tolist())

    if isinstance(value, bool | np.bool_):
        return bool(value)

    if isinstance(value, int | np.integer):
        return int(value)

    if isinstance(value, float | np.floating):
        return float(value)

    return value
