"""Verification reports: a list of checks plus the environment that produced them."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA = "opalg.report"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    residual: float
    threshold: float
    passed: bool
    skipped: bool = False
    note: str = ""

    @classmethod
    def at_most(cls, id: str, anchor: str, residual: float, threshold: float, note: str = "") -> "Check":
        residual = float(residual)
        return cls(id, anchor, residual, float(threshold), bool(residual <= threshold), note=note)

    @classmethod
    def at_least(cls, id: str, anchor: str, value: float, threshold: float, note: str = "") -> "Check":
        """Pass iff ``value >= threshold`` (stored negated, so ``residual <= threshold`` reads uniformly)."""
        value = float(value)
        return cls(id, anchor, -value, -float(threshold), bool(value >= threshold), note=note)

    @classmethod
    def flag(cls, id: str, anchor: str, ok: bool, note: str = "") -> "Check":
        return cls(id, anchor, 0.0 if ok else 1.0, 0.0, bool(ok), note=note)

    @classmethod
    def skip(cls, id: str, anchor: str, note: str) -> "Check":
        return cls(id, anchor, 0.0, 0.0, True, skipped=True, note=note)

    @classmethod
    def error(cls, id: str, anchor: str, exc: Exception) -> "Check":
        return cls(id, anchor, math.inf, 0.0, False, note=f"{type(exc).__name__}: {exc}")


@dataclass
class Report:
    suites: tuple = ()
    checks: list = field(default_factory=list)
    seed: int = 0
    tolerance: float | None = None
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def extend(self, checks) -> None:
        self.checks.extend(checks)


def _num(x: float):
    """JSON has no infinities; encode them as strings."""
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return x


def report_to_dict(r: Report, timings: bool = False) -> dict:
    out = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "pass": r.passed,
        "seed": r.seed,
        "tolerance": r.tolerance,
        "suites": list(r.suites),
        "checks": [
            {k: (_num(v) if isinstance(v, float) else v) for k, v in asdict(c).items()} for c in r.checks
        ],
        "warnings": list(r.warnings),
    }
    if timings:
        out["timings"] = dict(sorted(r.timings.items()))
    return out


def report_from_dict(d: dict) -> Report:
    if d.get("schema") != SCHEMA or d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("not a report of a supported schema version")

    def num(v):
        return float(v) if isinstance(v, str) else v

    checks = [Check(**{k: (num(v) if k in ("residual", "threshold") else v) for k, v in c.items()}) for c in d["checks"]]
    return Report(tuple(d["suites"]), checks, d["seed"], d["tolerance"], list(d["warnings"]), dict(d.get("timings", {})))


def emit_report(r: Report, fmt: str = "json", timings: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(r, timings), sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        return _text(r, timings)
    raise ValueError(f"unknown format {fmt!r}")


def _text(r: Report, timings: bool) -> str:
    lines = [f"seed {r.seed}   suites {', '.join(r.suites) or '-'}"]
    if r.checks:
        w = max(len(c.id) for c in r.checks)
        lines.append(f"{'check'.ljust(w)}  status  {'residual':>11}  {'threshold':>11}  anchor")
        for c in r.checks:
            status = "skip" if c.skipped else ("ok" if c.passed else "FAIL")
            lines.append(f"{c.id.ljust(w)}  {status:<6}  {c.residual:11.3e}  {c.threshold:11.3e}  {c.anchor}")
            if c.note and (not c.passed or c.skipped):
                lines.append(f"{''.ljust(w)}    {c.note}")
    for msg in r.warnings:
        lines.append(f"warning: {msg}")
    if timings:
        for k, v in sorted(r.timings.items()):
            lines.append(f"time {k}: {v:.3f} s")
    total = len(r.checks)
    lines.append(f"{'PASS' if r.passed else 'FAIL'}: {total - len(r.failures)}/{total} checks passed")
    return "\n".join(lines) + "\n"
