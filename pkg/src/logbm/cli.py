"""Batch runner: ``logbm <command> ...``.

Exit codes: 0 all checks hold, 1 a check is violated, 2 input error,
3 a check is inconclusive.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as bio
from .combinations import combine
from .core import EXACT_MAX_DIM, default_directions
from .errors import InputError, LogBMError
from .lab import (
    SearchConfig,
    check_log_bm,
    check_log_minkowski,
    check_lp_bm,
    check_lp_minkowski,
    check_multi_minkowski,
    scan_b_property,
    search_counterexample,
)
from .measures import cone_volume_measure, subspace_concentration, volume
from .report import CheckReport, _jsonable, digest, emit_plot_data, exit_code, rows_to_csv, summary_csv
from .structure import decompose_irreducible

EXIT_INPUT = 2
CHECKS = ("log-bm", "lp-bm", "lp-minkowski", "log-minkowski", "multi-minkowski")


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple = ()
    grid: int | None = None
    mc: int = 10**6
    seed: int | None = None
    tol: float = 1e-9
    output: str | None = None
    fmt: str = "jsonl"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tolerance must be positive", "--tol")
        if self.fmt not in ("jsonl", "csv"):
            raise InputError(f"unknown format {self.fmt!r}", "--format")
        if self.mc < 1000:
            raise InputError("Monte Carlo budget must be at least 1000", "--mc")

    @property
    def digest(self) -> str:
        return digest(dataclasses.asdict(self))

    def require_seed(self) -> int:
        if self.seed is None:
            raise InputError("a seed is required for Monte Carlo paths (use --seed or LOGBM_SEED)", "--seed")
        return self.seed


def _env_seed():
    raw = os.environ.get("LOGBM_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"not an integer: {raw!r}", "LOGBM_SEED") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logbm", description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", dest="fmt", choices=("jsonl", "csv"), default="jsonl")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, mc=False):
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--grid", type=int, help="direction grid size m")
        if mc:
            p.add_argument("--mc", type=float, default=1e6, help="Monte Carlo sample budget")

    p = sub.add_parser("volume", help="volume of a body")
    p.add_argument("--body", required=True)
    common(p, mc=True)

    p = sub.add_parser("combine", help="L^p or logarithmic combination from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--save", help="write the resulting body JSON here")
    common(p)

    p = sub.add_parser("check", help="run an inequality check")
    p.add_argument("--name", required=True, choices=CHECKS)
    p.add_argument("--bodies", nargs="+", required=True)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[0.5])
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--powers", type=float, nargs="+")
    common(p, mc=True)

    p = sub.add_parser("scan-b", help="discrete log-concavity scan of the (B)-property")
    p.add_argument("--mu", required=True)
    p.add_argument("--body", required=True)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--s-min", type=float, default=-2.0)
    p.add_argument("--s-max", type=float, default=2.0)
    p.add_argument("--step", type=float, default=0.1)
    common(p)

    p = sub.add_parser("decompose", help="irreducible product decomposition")
    p.add_argument("--body", required=True)
    common(p)

    p = sub.add_parser("cone-volume", help="cone-volume measure of a body")
    p.add_argument("--body", required=True)
    p.add_argument("--save", help="write the measure JSON here")
    common(p)

    p = sub.add_parser("concentration", help="subspace concentration condition")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--measure")
    g.add_argument("--body", help="use the body's cone-volume measure")
    common(p)

    p = sub.add_parser("search", help="random counterexample search for log-BM")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--archive", help="also write the report JSON here")
    common(p)

    p = sub.add_parser("plot-data", help="tidy CSV series from a JSON-lines report file")
    p.add_argument("--reports", required=True)
    return ap


def config_from_args(args) -> RunConfig:
    skip = {"command", "out", "fmt", "seed", "tol", "grid", "mc"}
    options = {k: v for k, v in vars(args).items() if k not in skip}
    inputs = []
    for k in ("body", "bodies", "spec", "mu", "measure", "reports"):
        v = options.get(k)
        if v is not None:
            inputs.extend([v] if isinstance(v, str) else v)
    seed = getattr(args, "seed", None)
    return RunConfig(
        command=args.command,
        inputs=tuple(inputs),
        grid=getattr(args, "grid", None),
        mc=int(getattr(args, "mc", 1e6)),
        seed=_env_seed() if seed is None else seed,
        tol=getattr(args, "tol", 1e-9),
        output=args.out,
        fmt=args.fmt,
        options=options,
    )


# ---------------------------------------------------------------------------
# commands; each returns (records, reports)


def _stamp(report: CheckReport, cfg: RunConfig) -> CheckReport:
    report.provenance["config"] = cfg.digest
    return report


def _cmd_volume(cfg, o):
    P = bio.load_body(o["body"])
    seed = cfg.require_seed() if P.dim > EXACT_MAX_DIM else (cfg.seed or 0)
    est = volume(P, samples=cfg.mc, seed=seed)
    return [{"command": "volume", "config": cfg.digest, **est.to_dict()}], []


def _cmd_combine(cfg, o):
    spec = bio.load_spec(o["spec"])
    W = combine(spec)
    if o.get("save"):
        bio.save_body(W, o["save"])
    rec = {"command": "combine", "config": cfg.digest, "p": spec.p, "directions": len(spec.directions_or_default())}
    if W.dim <= EXACT_MAX_DIM:
        rec["volume"] = volume(W).value
    rec["body"] = bio.body_to_dict(W)
    return [rec], []


def _cmd_check(cfg, o):
    bodies = [bio.load_body(p) for p in o["bodies"]]
    name = o["name"]
    if name == "multi-minkowski" and len(bodies) < 2:
        raise InputError("multi-minkowski takes a measure body and at least one more", "--bodies")
    if name != "multi-minkowski" and len(bodies) != 2:
        raise InputError(f"{name} takes exactly two bodies", "--bodies")
    if len({B.dim for B in bodies}) != 1:
        raise InputError("bodies have different dimensions", "--bodies")
    K, L = bodies[0], bodies[1]
    U = default_directions(bodies, cfg.grid) if cfg.grid else None
    reports = []
    if name == "log-bm":
        mc_path = K.unconditional and L.unconditional
        seed = cfg.require_seed() if mc_path or K.dim > EXACT_MAX_DIM else 0
        for lam in o["lam"]:
            reports.append(check_log_bm(K, L, lam, U, mc=cfg.mc, seed=seed, tol=cfg.tol))
    elif name == "lp-bm":
        for lam in o["lam"]:
            reports.append(check_lp_bm(K, L, o["p"], lam, U, tol=cfg.tol))
    elif name == "lp-minkowski":
        reports.append(check_lp_minkowski(K, L, o["p"], tol=cfg.tol))
    elif name == "log-minkowski":
        reports.append(check_log_minkowski(K, L, tol=cfg.tol))
    else:
        powers = o.get("powers")
        if not powers or len(powers) != len(bodies) - 1:
            raise InputError("give one power per body after the first", "--powers")
        reports.append(check_multi_minkowski(K, bodies[1:], powers, tol=cfg.tol))
    return [], [_stamp(r, cfg) for r in reports]


def _cmd_scan_b(cfg, o):
    mu, K = bio.load_body(o["mu"]), bio.load_body(o["body"])
    if len(o["t"]) != K.dim:
        raise InputError(f"need {K.dim} entries", "--t")
    k = int(round((o["s_max"] - o["s_min"]) / o["step"]))
    grid = o["s_min"] + o["step"] * np.arange(k + 1)
    return [], [_stamp(scan_b_property(mu, K, o["t"], grid, tol=cfg.tol), cfg)]


def _cmd_decompose(cfg, o):
    D = decompose_irreducible(bio.load_body(o["body"]))
    rec = {"command": "decompose", "config": cfg.digest, **bio.decomposition_to_dict(D)}
    rec["reconstruction_error"] = D.reconstruction_error
    return [rec], []


def _cmd_cone_volume(cfg, o):
    P = bio.load_body(o["body"])
    m = cone_volume_measure(P)
    if o.get("save"):
        bio.write_json(bio.measure_to_dict(m), o["save"])
    return [{"command": "cone-volume", "config": cfg.digest, "mass": m.total, **bio.measure_to_dict(m)}], []


def _cmd_concentration(cfg, o):
    if o.get("measure"):
        sigma = bio.load_measure(o["measure"])
    else:
        sigma = cone_volume_measure(bio.load_body(o["body"]))
    return [], [_stamp(subspace_concentration(sigma, tol=cfg.tol, eq_tol=cfg.tol), cfg)]


def _cmd_search(cfg, o):
    seed = cfg.require_seed()
    if o["dim"] < 2:
        raise InputError("dimension must be at least 2", "--dim")
    if o["iters"] < 1:
        raise InputError("need at least one iteration", "--iters")
    r = search_counterexample(o["dim"], SearchConfig(grid=cfg.grid), seed, o["iters"], tol=cfg.tol)
    r = _stamp(r, cfg)
    if o.get("archive"):
        Path(o["archive"]).write_text(r.to_json() + "\n")
    return [], [r]


def _cmd_plot_data(cfg, o):
    path = Path(o["reports"])
    reports = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(exc.strerror or str(exc), str(path)) from None
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            reports.append(CheckReport.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise InputError(f"bad report: {exc}", f"{path}:{i}") from None
    return emit_plot_data(reports), None


COMMANDS = {
    "volume": _cmd_volume,
    "combine": _cmd_combine,
    "check": _cmd_check,
    "scan-b": _cmd_scan_b,
    "decompose": _cmd_decompose,
    "cone-volume": _cmd_cone_volume,
    "concentration": _cmd_concentration,
    "search": _cmd_search,
    "plot-data": _cmd_plot_data,
}


def _records_csv(records) -> str:
    buf = io.StringIO()
    cols = []
    for r in records:
        cols += [k for k, v in r.items() if k not in cols and not isinstance(v, (dict, list))]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in records:
        w.writerow({k: r.get(k, "") for k in cols})
    return buf.getvalue()


def render(cfg: RunConfig, records, reports) -> str:
    if reports is None:  # plot-data rows
        if cfg.fmt == "csv":
            return rows_to_csv(records)
        return "".join(json.dumps(_jsonable(r), sort_keys=True) + "\n" for r in records)
    if cfg.fmt == "csv":
        return summary_csv(reports) if reports else _records_csv(_jsonable(records))
    lines = [json.dumps(_jsonable(r), sort_keys=True) for r in records]
    lines += [r.to_json() for r in reports]
    return "".join(line + "\n" for line in lines)


def run(cfg: RunConfig) -> tuple[int, str]:
    records, reports = COMMANDS[cfg.command](cfg, cfg.options)
    text = render(cfg, records, reports)
    return (exit_code(reports) if reports else 0), text


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        code, text = run(cfg)
    except LogBMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
