"""Residual summaries and their JSON form."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["VerificationReport", "summarize", "to_json", "merge"]


@dataclass
class VerificationReport:
    """Residual statistics of one verification task.

    ``passed`` is always ``max_residual <= tolerance``.
    """

    task: str
    samples: int
    max_residual: float
    mean_residual: float
    tolerance: float
    first_violation: dict = None
    details: dict = field(default_factory=dict)
    wall_time_ms: float = None

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)

    def as_dict(self, timing=False):
        out = {
            "task": self.task,
            "samples": int(self.samples),
            "max_residual": float(self.max_residual),
            "mean_residual": float(self.mean_residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "first_violation": self.first_violation,
        }
        if self.details:
            out["details"] = self.details
        if timing and self.wall_time_ms is not None:
            out["wall_time_ms"] = float(self.wall_time_ms)
        return out

    def text(self):
        verdict = "PASS" if self.passed else "FAIL"
        lines = [f"{self.task}: {verdict}  max {self.max_residual:.3e}  mean {self.mean_residual:.3e}"
                 f"  tol {self.tolerance:.1e}  n={self.samples}"]
        for key, val in sorted(self.details.items()):
            lines.append(f"  {key}: {_short(val)}")
        if self.first_violation:
            lines.append(f"  first violation: {_short(self.first_violation)}")
        return "\n".join(lines)


def _short(val):
    if isinstance(val, float):
        return f"{val:.3e}"
    if isinstance(val, dict):
        return ", ".join(f"{k}={_short(v)}" for k, v in sorted(val.items()))
    if isinstance(val, (list, tuple)):
        return "[" + ", ".join(_short(v) for v in val) + "]"
    return str(val)


def summarize(task, residuals, tolerance, points=None, details=None):
    """Report from per-sample residual magnitudes.

    ``points`` (one row per sample) locates the first sample above tolerance.
    """
    r = np.abs(np.asarray(residuals, float)).reshape(len(residuals), -1).max(axis=1) if np.size(residuals) \
        else np.zeros(0)
    violation = None
    bad = np.flatnonzero(~(r <= tolerance))
    if bad.size and points is not None:
        k = int(bad[0])
        violation = {"index": k, "point": [float(v) for v in np.ravel(points[k])], "value": float(r[k])}
    elif bad.size:
        violation = {"index": int(bad[0]), "value": float(r[bad[0]])}
    return VerificationReport(
        task=task,
        samples=int(r.size),
        max_residual=float(np.max(r)) if r.size else 0.0,
        mean_residual=float(np.mean(r)) if r.size else 0.0,
        tolerance=float(tolerance),
        first_violation=violation,
        details=dict(details or {}),
    )


def merge(task, reports, tolerance):
    """One report over several checks, judged against a single ``tolerance``."""
    reports = list(reports)
    total = sum(r.samples for r in reports)
    worst = max(reports, key=lambda r: r.max_residual)
    mean = sum(r.mean_residual * r.samples for r in reports) / total if total else 0.0
    return VerificationReport(
        task=task,
        samples=total,
        max_residual=worst.max_residual,
        mean_residual=mean,
        tolerance=float(tolerance),
        first_violation=({"check": worst.task, **worst.first_violation}
                         if worst.max_residual > tolerance and worst.first_violation else None),
        details={r.task: r.max_residual for r in reports},
    )


def _encode(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in sorted(obj.items())) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        return repr(v)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def to_json(task, config, report, timing=False):
    """Deterministic JSON text: sorted keys, floats in shortest round-trip form."""
    return _encode({"task": task, "config": config, "report": report.as_dict(timing)}) + "\n"
