"""Run settings: defaults, the settings file schema and loading."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_FINITE_DIFFERENCE_TOLERANCE,
    DEFAULT_HOMOGENEITY_TOLERANCE,
    DEFAULT_IDENTITY_TOLERANCE,
    DEFAULT_REVERSIBILITY_TOLERANCE,
    DEFAULT_SQUARE_TOLERANCE,
    DEFAULT_TRIVIALITY_TOLERANCE,
    DEFAULT_TWO_PATH_TOLERANCE,
    ConfDefaultInt,
    ConfName,
)
from .exceptions import InvalidArgument

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Verdict thresholds used by verifiers and identity checks."""

    identity: float = DEFAULT_IDENTITY_TOLERANCE
    triviality: float = DEFAULT_TRIVIALITY_TOLERANCE
    finite_difference: float = DEFAULT_FINITE_DIFFERENCE_TOLERANCE
    reversibility: float = DEFAULT_REVERSIBILITY_TOLERANCE
    square: float = DEFAULT_SQUARE_TOLERANCE
    two_path: float = DEFAULT_TWO_PATH_TOLERANCE
    homogeneity: float = DEFAULT_HOMOGENEITY_TOLERANCE

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Settings:
    samples: int = ConfDefaultInt.SAMPLES
    seed: int = ConfDefaultInt.SEED
    workers: int = ConfDefaultInt.WORKERS
    timeout: float = float(ConfDefaultInt.TIMEOUT)
    tolerances: Tolerances = field(default_factory=Tolerances)


_TOLERANCE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False, max=1))

TOLERANCES_SCHEMA = vol.Schema(
    {vol.Optional(f.name): _TOLERANCE for f in fields(Tolerances)}
)

SETTINGS_SCHEMA = vol.Schema(
    {
        vol.Optional(f"{ConfName.SAMPLES}"): vol.All(
            vol.Coerce(int), vol.Range(min=1, max=100000)
        ),
        vol.Optional(f"{ConfName.SEED}"): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(f"{ConfName.WORKERS}"): vol.All(
            vol.Coerce(int), vol.Range(min=1, max=64)
        ),
        vol.Optional(f"{ConfName.TIMEOUT}"): vol.All(
            vol.Coerce(float), vol.Range(min=0.1, max=86400)
        ),
        vol.Optional(f"{ConfName.TOLERANCES}"): TOLERANCES_SCHEMA,
    }
)


def settings_from_dict(data: dict[str, Any]) -> Settings:
    """Validate a settings mapping and merge it over the defaults."""
    try:
        valid = SETTINGS_SCHEMA(data)
    except vol.Invalid as e:
        raise InvalidArgument(f"invalid settings: {e}")

    tolerances = replace(Tolerances(), **valid.pop(ConfName.TOLERANCES, {}))
    return Settings(
        **{str(k): v for k, v in valid.items()},
        tolerances=tolerances,
    )


def load_settings(path: str | Path | None = None) -> Settings:
    if path is None:
        return Settings()

    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise InvalidArgument(f"cannot read settings file {path}: {e}")
    except json.JSONDecodeError as e:
        raise InvalidArgument(f"{path}:{e.lineno}:{e.colno}: {e.msg}")

    if not isinstance(data, dict):
        raise InvalidArgument(f"{path}: settings must be a JSON object")

    settings = settings_from_dict(data)
    _LOGGER.debug(f"Loaded settings from {path}: {settings}")
    return settings


def with_overrides(
    settings: Settings,
    *,
    tolerances: dict[str, float | None] | None = None,
    **overrides: Any,
) -> Settings:
    """Apply command-line overrides, ignoring the ones left unset (None)."""
    kept = {k: v for k, v in overrides.items() if v is not None}
    if kept:
        try:
            SETTINGS_SCHEMA(kept)
        except vol.Invalid as e:
            raise InvalidArgument(f"invalid option: {e}")

    changed = {k: v for k, v in (tolerances or {}).items() if v is not None}
    if changed:
        try:
            TOLERANCES_SCHEMA(changed)
        except vol.Invalid as e:
            raise InvalidArgument(f"invalid tolerance: {e}")
        kept[ConfName.TOLERANCES] = replace(settings.tolerances, **changed)

    return replace(settings, **{str(k): v for k, v in kept.items()})
