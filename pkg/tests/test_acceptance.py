"""Acceptance suite: one timed check per criterion.

Run under pytest, or directly with ``python tests/test_acceptance.py`` to get
one PASS/FAIL line per criterion.
"""
from __future__ import annotations

import sys
import time

import numpy as np
import pytest

from logbm.combinations import GeomMeanBody, log_combine
from logbm.core import box, cube, rotate2d, support_values
from logbm.generators import (
    random_product_body,
    random_symmetric_body,
    random_symmetric_polygon,
    random_unconditional_polygon,
)
from logbm.lab import (
    Lattice,
    check_log_bm,
    check_log_minkowski,
    check_lp_bm,
    check_lp_minkowski,
    check_prekopa_leindler,
    scan_b_property,
    search_counterexample,
)
from logbm.measures import (
    cone_volume_measure,
    exact_volume,
    subspace_concentration,
    surface_area_measure,
    volume_mc,
)
from logbm.report import Verdict
from logbm.structure import DiagonalMap, EqualityClass, classify_equality, decompose_irreducible

pytestmark = pytest.mark.slow

CRITERIA = []


def criterion(number, title, budget):
    """Register a check returning (ok, detail); ``budget`` is wall-clock seconds."""

    def wrap(fn):
        CRITERIA.append((number, title, budget, fn))
        return fn

    return wrap


def _pairs(seed, count):
    rng = np.random.default_rng(seed)
    return [(random_unconditional_polygon(rng), random_unconditional_polygon(rng), float(rng.uniform(0.1, 0.9))) for _ in range(count)]


@criterion(1, "cone-volume identity on random symmetric polytopes", 10)
def cone_identity():
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 2
        P = random_symmetric_body(rng, n)
        S = surface_area_measure(P)
        lhs = float(support_values(P, S.directions) @ S.weights)
        worst = max(worst, abs(lhs - n * exact_volume(P)) / max(1.0, lhs))
    return worst <= 1e-9, f"max relative error {worst:.2e}"


@criterion(2, "box equality anchor for the 0-combination", 1)
def box_anchor():
    K, L = box([1, 1]), box([2, 1])
    r = check_log_bm(K, L, 0.5, mc=0)
    ok = abs(r.lhs - 4 * np.sqrt(2)) <= 1e-12 and abs(r.rhs - np.sqrt(32)) <= 1e-12 and abs(r.margin) <= 1e-12
    return ok, f"volume {r.lhs!r}, rhs {r.rhs!r}, margin {r.margin:.1e}"


@criterion(3, "square vs rotated square is strict under refinement", 5)
def rotated_square():
    K = box([1, 1])
    L = rotate2d(K, np.pi / 4)
    margins = [check_log_bm(K, L, 0.5, sweep=[m], mc=0).margin for m in (64, 256, 1024)]
    stable = max(margins) - min(margins) <= 1e-6
    return min(margins) > 1e-3 and stable, "margins " + ", ".join(f"{m:.6f}" for m in margins)


@criterion(4, "geometric-mean points lie in the outer 0-combination", 30)
def geom_mean_inclusion():
    rng = np.random.default_rng(404)
    bad = 0
    for K, L, lam in _pairs(4, 20):
        G = GeomMeanBody(K, L, lam)
        W = log_combine(K, L, lam)
        X = G.sample(10**4, rng)
        w = G.halfwidths
        Y = rng.uniform(-w, w, size=(10**4, 2))
        Y = Y[G.contains(Y)]
        bad += int(np.sum(~W.contains(X, tol=1e-7))) + int(np.sum(~W.contains(Y, tol=1e-7)))
    return bad == 0, f"{bad} points outside"


@criterion(5, "MC volume of the geometric-mean body bounds the product", 120)
def geom_mean_volume():
    worst = np.inf
    for i, (K, L, lam) in enumerate(_pairs(5, 20)):
        G = GeomMeanBody(K, L, lam)
        w = G.halfwidths
        est = volume_mc(G.contains, (-w, w), 10**6, seed=i)
        rhs = exact_volume(K) ** lam * exact_volume(L) ** (1 - lam)
        worst = min(worst, (est.value - rhs + 3 * est.error) / rhs)
    return worst >= 0, f"min (value - rhs + 3 CI) / rhs = {worst:.3e}"


@criterion(6, "L^p and log Minkowski-type margins on unconditional pairs", 60)
def minkowski_family():
    worst = {"lp-bm": np.inf, "lp-minkowski": np.inf, "log-minkowski": np.inf}
    for K, L, lam in _pairs(6, 100):
        for p in (0.25, 0.5, 0.75):
            worst["lp-bm"] = min(worst["lp-bm"], check_lp_bm(K, L, p, lam).margin)
            worst["lp-minkowski"] = min(worst["lp-minkowski"], check_lp_minkowski(K, L, p).margin)
        worst["log-minkowski"] = min(worst["log-minkowski"], check_log_minkowski(K, L).margin)
    ok = all(v >= -1e-9 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items())


@criterion(7, "subspace concentration of cone-volume measures", 30)
def concentration():
    rng = np.random.default_rng(707)
    bad = 0
    for _ in range(100):
        r = subspace_concentration(cone_volume_measure(random_unconditional_polygon(rng)))
        bad += len(r.details["violations"])
    r = subspace_concentration(cone_volume_measure(cube(3)))
    pairs = r.details["equality_pairs"]
    dims = sorted(np.atleast_2d(p["subspace"]).shape[0] for p in pairs)
    ok = bad == 0 and r.verdict is Verdict.HOLDS and dims == [1, 1, 1, 2, 2, 2]
    return ok, f"{bad} violations; cube equality subspace dims {dims}"


@criterion(8, "(B)-property scans against the square", 60)
def b_property():
    rng = np.random.default_rng(808)
    s = np.round(np.arange(-20, 21) * 0.1, 12)
    bad = 0
    for _ in range(50):
        K = random_symmetric_polygon(rng)
        t = np.exp(rng.uniform(-1, 1, size=2))
        bad += scan_b_property(cube(2), K, t, s).details["violations"]
    return bad == 0, f"{bad} second-difference violations"


@criterion(9, "Prekopa-Leindler harness examples", 10)
def prekopa_leindler():
    lat = Lattice.centered(6.0, 0.01)
    gauss = lat.sample(lambda x: np.exp(-(x**2)))
    a = check_prekopa_leindler(gauss, gauss, gauss, lat, 0.5).margin
    off = Lattice.centered(6.0, 0.01, offset=True)

    def ind(r):
        return off.sample(lambda x: (np.abs(x) <= r).astype(float))

    b = check_prekopa_leindler(ind(1), ind(1), ind(1), off, 0.5).margin
    c = check_prekopa_leindler(ind(1), ind(2), ind(1.5), off, 0.5).margin
    errs = [abs(a), abs(b), abs(c - (3 - 2 * np.sqrt(2)))]
    return max(errs) <= 1e-4, "errors " + ", ".join(f"{e:.1e}" for e in errs)


@criterion(10, "planar counterexample search finds nothing", 300)
def planar_search():
    r = search_counterexample(2, seed=2024, iterations=1000)
    return r.margin >= -1e-6 and r.verdict is not Verdict.VIOLATED, f"worst margin {r.margin:.3e} ({r.verdict.value})"


@criterion(11, "product decomposition round trip and equality classification", 30)
def structure_round_trip():
    rng = np.random.default_rng(1111)
    wrong_blocks = discord = checked = 0
    for i in range(100):
        n = 2 + i % 2
        K, blocks = random_product_body(rng, n)
        D = decompose_irreducible(K)
        wrong_blocks += (list(D.blocks) != list(blocks)) or not D.verified
        sweep = [720, 2880] if n == 2 else [300, 1200]
        e = np.ones(n)
        for b in blocks:
            e[list(b)] = rng.uniform(0.5, 2.0)
        L = DiagonalMap(e).apply(K)
        if classify_equality(K, L) is not EqualityClass.EQUALITY:
            discord += 1
        elif i % 4 < 2:
            checked += 1
            discord += abs(check_log_bm(K, L, 0.5, sweep=sweep, mc=0).margin) > 1e-6
        big = [b for b in blocks if len(b) > 1]
        if big:
            e2 = e.copy()
            e2[big[0][0]] *= rng.uniform(1.3, 2.0)
            L2 = DiagonalMap(e2).apply(K)
            if classify_equality(K, L2) is not EqualityClass.STRICT:
                discord += 1
            elif i % 4 < 2:
                checked += 1
                discord += check_log_bm(K, L2, 0.5, sweep=sweep, mc=0).margin < 1e-6
    return wrong_blocks == 0 and discord == 0, f"{wrong_blocks} wrong partitions, {discord} discordant ({checked} margins)"


def run_one(number):
    _, title, budget, fn = next(c for c in CRITERIA if c[0] == number)
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    return ok and elapsed < budget, f"{title}: {detail}; {elapsed:.1f}s of {budget}s"


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_acceptance(number):
    ok, line = run_one(number)
    print(f"{'PASS' if ok else 'FAIL'} [{number}] {line}")
    assert ok, line


def main() -> int:
    failed = 0
    for number, *_ in CRITERIA:
        ok, line = run_one(number)
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} [{number:2d}] {line}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
