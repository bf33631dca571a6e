"""Verification results and the report file format."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .config import Settings
from .helpers import json_ready

_LOGGER = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConditionResult:
    name: str
    tolerance: float
    max_residual: float
    passed: bool
    informational: bool = False


@dataclass(frozen=True)
class SampleRecord:
    x: np.ndarray
    y: np.ndarray
    residuals: dict[str, float]
    values: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SkippedPoint:
    x: np.ndarray
    reason: str


@dataclass
class VerificationReport:
    """Outcome of one verifier or identity run.

    The verdict is the conjunction of the non-informational conditions;
    informational conditions are reported but never decide it.
    """

    target: str
    spec_name: str
    conditions: dict[str, ConditionResult]
    records: list[SampleRecord]
    skipped: list[SkippedPoint] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values() if not c.informational)


def summarize_condition(
    name: str,
    records: list[SampleRecord],
    tolerance: float,
    *,
    informational: bool = False,
) -> ConditionResult:
    """Max residual over the records and its verdict against `tolerance`."""
    residuals = np.array([r.residuals[name] for r in records if name in r.residuals], dtype=float)
    if residuals.size == 0:
        worst = 0.0
    elif np.all(np.isfinite(residuals)):
        worst = float(residuals.max())
    else:
        # a non-finite residual is a failed sample, never a pass
        worst = float("nan") if np.isnan(residuals).any() else float("inf")
    return ConditionResult(
        name=name,
        tolerance=tolerance,
        max_residual=worst,
        passed=bool(np.isfinite(worst) and worst <= tolerance),
        informational=informational,
    )


def build_document(
    report: VerificationReport,
    *,
    command: str,
    settings: Settings,
    runtime_seconds: float | None = None,
) -> dict[str, Any]:
    """The report file contents. The summary block holds no timings."""
    summary = {
        "format": REPORT_FORMAT_VERSION,
        "command": command,
        "target": report.target,
        "spec": report.spec_name,
        "seed": settings.seed,
        "samples_requested": settings.samples,
        "samples_evaluated": len(report.records),
        "samples_skipped": len(report.skipped),
        "tolerances": {name: c.tolerance for name, c in report.conditions.items()},
        "max_residuals": {name: c.max_residual for name, c in report.conditions.items()},
        "verdicts": {
            name: ("pass" if c.passed else "fail") for name, c in report.conditions.items()
        },
        "informational": sorted(
            name for name, c in report.conditions.items() if c.informational
        ),
        "verdict": "pass" if report.passed else "fail",
        "extras": report.extras,
    }
    document = {
        "summary": summary,
        "records": [
            {"x": r.x, "y": r.y, "residuals": r.residuals, "values": r.values}
            for r in report.records
        ],
        "skipped": [{"x": s.x, "reason": s.reason} for s in report.skipped],
    }
    if runtime_seconds is not None:
        document["runtime_seconds"] = runtime_seconds
    return json_ready(document)


def write_report(document: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n")
    _LOGGER.info(f"Wrote report to {path}")


def write_csv(document: dict[str, Any], path: str | Path) -> None:
    """One row per evaluated sample: coordinates, residuals and values."""
    records = document["records"]
    residual_names = sorted({k for r in records for k in r["residuals"]})
    value_names = sorted({k for r in records for k in r["values"]})
    n = len(records[0]["x"]) if records else 0

    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [f"x{i + 1}" for i in range(n)]
            + [f"y{i + 1}" for i in range(n)]
            + [f"residual:{name}" for name in residual_names]
            + [f"value:{name}" for name in value_names]
        )
        for r in records:
            writer.writerow(
                list(r["x"])
                + list(r["y"])
                + [r["residuals"].get(name, "") for name in residual_names]
                + [r["values"].get(name, "") for name in value_names]
            )
    _LOGGER.info(f"Wrote CSV export to {path}")
