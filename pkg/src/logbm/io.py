"""JSON formats for bodies, spherical measures, combination specs and
product decompositions. Parse failures raise InputError naming the field."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .combinations import CombinationSpec
from .core import HPolytope, angle_grid, direction_grid, facet_normals, fibonacci_grid, merge_directions
from .errors import InputError, LogBMError
from .measures import SphericalMeasure
from .structure import ProductDecomposition


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(exc.strerror or str(exc), str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _field(d, key, where, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"missing field {key!r}", where)
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise InputError(f"field {key!r} has type {type(v).__name__}", f"{where}.{key}")
    return v


def _vector(v, where, n=None):
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise InputError("expected a list of numbers", where) from None
    if a.ndim != 1 or (n is not None and a.shape[0] != n):
        raise InputError(f"expected a vector of length {n}", where)
    if not np.all(np.isfinite(a)):
        raise InputError("non-finite entry", where)
    return a


# ---------------------------------------------------------------------------
# bodies


def body_to_dict(P: HPolytope) -> dict:
    return {
        "dim": P.dim,
        "halfspaces": [{"normal": u.tolist(), "offset": float(b)} for u, b in zip(P.normals, P.offsets)],
        "flags": {"symmetric": bool(P.symmetric), "unconditional": bool(P.unconditional)},
    }


def body_from_dict(d, where="body") -> HPolytope:
    n = _field(d, "dim", where, int)
    if n < 1:
        raise InputError("dim must be positive", f"{where}.dim")
    hs = _field(d, "halfspaces", where, list)
    if not hs:
        raise InputError("no halfspaces", f"{where}.halfspaces")
    A, b = [], []
    for i, h in enumerate(hs):
        w = f"{where}.halfspaces[{i}]"
        A.append(_vector(_field(h, "normal", w), f"{w}.normal", n))
        off = _field(h, "offset", w)
        if not isinstance(off, (int, float)) or isinstance(off, bool):
            raise InputError("offset must be a number", f"{w}.offset")
        b.append(float(off))
    flags = d.get("flags", {})
    if not isinstance(flags, dict):
        raise InputError("flags must be an object", f"{where}.flags")
    try:
        return HPolytope(
            np.array(A), np.array(b), symmetric=flags.get("symmetric"), unconditional=flags.get("unconditional")
        )
    except LogBMError as exc:
        raise InputError(str(exc), where) from None


def load_body(path) -> HPolytope:
    return body_from_dict(read_json(path), str(path))


def save_body(P: HPolytope, path):
    write_json(body_to_dict(P), path)


# ---------------------------------------------------------------------------
# measures


def measure_to_dict(m: SphericalMeasure) -> dict:
    return {
        "dim": m.dim,
        "atoms": [{"u": u.tolist(), "w": float(w)} for u, w in zip(m.directions, m.weights)],
        "even": bool(m.even),
    }


def measure_from_dict(d, where="measure") -> SphericalMeasure:
    n = _field(d, "dim", where, int)
    atoms = _field(d, "atoms", where, list)
    U = [_vector(_field(a, "u", f"{where}.atoms[{i}]"), f"{where}.atoms[{i}].u", n) for i, a in enumerate(atoms)]
    W = [_field(a, "w", f"{where}.atoms[{i}]") for i, a in enumerate(atoms)]
    if not atoms:
        raise InputError("no atoms", f"{where}.atoms")
    try:
        return SphericalMeasure(np.array(U), np.array(W, dtype=float), even=bool(d.get("even", True)))
    except (ValueError, LogBMError) as exc:
        raise InputError(str(exc), where) from None


def load_measure(path) -> SphericalMeasure:
    return measure_from_dict(read_json(path), str(path))


# ---------------------------------------------------------------------------
# combination specs


def grid_from_dict(g, n, where="grid"):
    kind = _field(g, "kind", where, str)
    m = _field(g, "m", where, int)
    if m < 4:
        raise InputError("grid needs m >= 4", f"{where}.m")
    if kind == "angle":
        if n != 2:
            raise InputError("angle grids are planar", f"{where}.kind")
        return angle_grid(m)
    if kind == "fibonacci":
        if n != 3:
            raise InputError("fibonacci grids are 3-dimensional", f"{where}.kind")
        return fibonacci_grid(m)
    raise InputError(f"unknown grid kind {kind!r}", f"{where}.kind")


def spec_from_dict(d, base_dir=".", where="spec") -> CombinationSpec:
    """Body paths resolve relative to ``base_dir``; the grid is merged with
    all bodies' facet normals."""
    p = _field(d, "p", where)
    if p == "log":
        p = 0.0
    elif not isinstance(p, (int, float)) or isinstance(p, bool) or p <= 0:
        raise InputError('p must be a positive number or "log"', f"{where}.p")
    weights = _vector(_field(d, "weights", where, list), f"{where}.weights")
    paths = _field(d, "bodies", where, list)
    bodies = [load_body(Path(base_dir) / str(q)) for q in paths]
    if not bodies:
        raise InputError("no bodies", f"{where}.bodies")
    n = bodies[0].dim
    grid = grid_from_dict(d["grid"], n, f"{where}.grid") if "grid" in d else direction_grid(n)
    U = merge_directions(*[facet_normals(B) for B in bodies], grid)
    try:
        return CombinationSpec(float(p), tuple(weights), tuple(bodies), U)
    except (ValueError, LogBMError) as exc:
        raise InputError(str(exc), where) from None


def load_spec(path) -> CombinationSpec:
    return spec_from_dict(read_json(path), Path(path).parent, str(path))


# ---------------------------------------------------------------------------
# decompositions


def decomposition_to_dict(D: ProductDecomposition) -> dict:
    """Blocks use 0-based coordinate indices."""
    return {"blocks": [list(b) for b in D.blocks], "irreducible": [bool(x) for x in D.irreducible]}
