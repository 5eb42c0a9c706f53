"""CheckReport: a named verdict with margin, slack and provenance."""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MixedSweep


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


def decide(margin: float, slack: float, tol: float) -> Verdict:
    """Trichotomy: violated only beyond tol + slack, holds only with slack accounted."""
    if margin < -(tol + slack):
        return Verdict.VIOLATED
    if margin - slack >= -tol:
        return Verdict.HOLDS
    return Verdict.INCONCLUSIVE


def _canonical(obj):
    # deferred import keeps report free of geometry dependencies at import time
    from .core import DirectionSet, HPolytope

    if isinstance(obj, HPolytope):
        return {"dim": obj.dim, "A": obj.normals.tobytes().hex(), "b": obj.offsets.tobytes().hex()}
    if isinstance(obj, DirectionSet):
        return {"U": obj.vectors.tobytes().hex()}
    if isinstance(obj, np.ndarray):
        return {"array": obj.astype(float).tobytes().hex(), "shape": list(obj.shape)}
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj).hex()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def digest(*objs) -> str:
    """Stable short hash of bodies, grids, arrays and plain parameters."""
    payload = json.dumps([_canonical(o) for o in objs], sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _jsonable(x):
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


@dataclass
class CheckReport:
    name: str
    inputs: str
    lhs: float
    rhs: float
    margin: float
    verdict: Verdict
    slack: float = 0.0
    tolerance: float = 1e-9
    certificates: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.verdict = Verdict(self.verdict)

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "name": self.name,
                "inputs": self.inputs,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "margin": self.margin,
                "verdict": self.verdict,
                "slack": self.slack,
                "tolerance": self.tolerance,
                "certificates": list(self.certificates),
                "provenance": self.provenance,
                "params": self.params,
                "details": self.details,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        def num(v):
            return float(v) if isinstance(v, str) else v

        return cls(
            name=d["name"],
            inputs=d["inputs"],
            lhs=num(d["lhs"]),
            rhs=num(d["rhs"]),
            margin=num(d["margin"]),
            verdict=d["verdict"],
            slack=num(d.get("slack", 0.0)),
            tolerance=num(d.get("tolerance", 1e-9)),
            certificates=list(d.get("certificates", [])),
            provenance=dict(d.get("provenance", {})),
            params=dict(d.get("params", {})),
            details=dict(d.get("details", {})),
        )


def exit_code(reports) -> int:
    """0 all hold, 1 any violated, 3 any inconclusive (violation wins)."""
    verdicts = {r.verdict for r in reports}
    if Verdict.VIOLATED in verdicts:
        return 1
    if Verdict.INCONCLUSIVE in verdicts:
        return 3
    return 0


PLOT_COLUMNS = ("parameter", "lhs", "rhs", "margin", "slack")


def emit_plot_data(reports) -> list[dict]:
    """Tidy rows (parameter, lhs, rhs, margin, slack) for external plotting.

    A single report carrying ``details["series"]`` expands into its series;
    otherwise the reports must differ in exactly one entry of ``params``.
    """
    reports = list(reports)
    if len(reports) == 1 and "series" in reports[0].details:
        return [dict(row) for row in reports[0].details["series"]]
    if not reports:
        return []
    names = {r.name for r in reports}
    if len(names) != 1:
        raise MixedSweep(f"reports come from different checks: {sorted(names)}")
    keys = set().union(*(r.params.keys() for r in reports))
    varying = sorted(k for k in keys if len({json.dumps(_jsonable(r.params.get(k))) for r in reports}) > 1)
    if len(varying) != 1:
        raise MixedSweep(f"expected exactly one swept parameter, found {varying or 'none'}")
    key = varying[0]
    rows = [
        {"parameter": r.params[key], "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin, "slack": r.slack}
        for r in reports
    ]
    rows.sort(key=lambda row: row["parameter"])
    return rows


def rows_to_csv(rows) -> str:
    rows = list(rows)
    columns = list(PLOT_COLUMNS)
    for row in rows:
        columns += [k for k in row if k not in columns]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k, "")) for k in columns})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def summary_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "margin", "verdict", "slack"])
    for r in reports:
        writer.writerow([r.name, repr(float(r.margin)), r.verdict.value, repr(float(r.slack))])
    return buf.getvalue()
