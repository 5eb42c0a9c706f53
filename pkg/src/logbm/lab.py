"""Executable inequality checks returning CheckReports.

Every check separates the computed margin from approximation slack; see
``report.decide`` for the verdict rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .combinations import (
    GeomMeanBody,
    _check_weights,
    log_combine,
    log_profile,
    lp_combine,
    lp_profile,
)
from .core import (
    EXACT_MAX_DIM,
    DirectionSet,
    HPolytope,
    default_directions,
    dilate,
    intersect,
    refine_directions,
    support_values,
)
from .combinations import DiagonalScaling, scale_body
from .errors import (
    DimensionMismatch,
    DimensionTooHigh,
    EmptyIntersection,
    InvalidBody,
    LatticeMismatch,
)
from .generators import random_symmetric_body
from .measures import surface_area_measure, volume, volume_mc
from .report import CheckReport, Verdict, decide, digest

EXACT_TOL = 1e-9
MC_SIGMAS = 3.0


def _exact_dim(*bodies):
    n = bodies[0].dim
    if any(B.dim != n for B in bodies):
        raise DimensionMismatch("bodies must share a dimension")
    if n > EXACT_MAX_DIM:
        raise DimensionTooHigh(f"exact facet sums need n <= {EXACT_MAX_DIM}")
    return n


def _vol(P, seed=0):
    est = volume(P, seed=seed)
    return est.value, est.error


def _sweep_sets(bodies, U, sweep):
    """Nested direction sets, coarse to fine."""
    if sweep:
        return [default_directions(bodies, m) for m in sweep]
    U = default_directions(bodies) if U is None else U
    return [U, refine_directions(U)]


# ---------------------------------------------------------------------------
# L^p Brunn-Minkowski and Minkowski-type inequalities


def check_lp_bm(K, L, p, lam, U: DirectionSet | None = None, sweep=None, tol=EXACT_TOL) -> CheckReport:
    """V(K +_p L)^{p/n} against lam V(K)^{p/n} + (1 - lam) V(L)^{p/n}.

    The combination is an outer Wulff body, so a negative margin is a real
    violation while a positive one carries the refinement drift as slack.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    n = K.dim
    sets = _sweep_sets([K, L], U, sweep)
    vols = [_vol(lp_combine(K, L, p, lam, V)) for V in sets]
    vk, ek = _vol(K)
    vl, el = _vol(L)
    lhs = vols[-1][0] ** (p / n)
    rhs = lam * vk ** (p / n) + (1 - lam) * vl ** (p / n)
    drift = max(0.0, vols[-2][0] ** (p / n) - lhs)
    margin = lhs - rhs
    certs = ["outer-approx upper bound on lhs", f"refinement drift {drift:.3e} counted as slack"]
    if p < 1 and not (K.unconditional and L.unconditional):
        certs.append("exploratory: p < 1 is only guaranteed for unconditional pairs")
    return CheckReport(
        name="lp-bm",
        inputs=digest(K, L, p, lam, *sets),
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        verdict=decide(margin, drift, tol),
        slack=drift,
        tolerance=tol,
        certificates=certs,
        provenance={"directions": [len(V) for V in sets]},
        params={"p": p, "lambda": lam},
        details={"combination_volumes": [v for v, _ in vols]},
    )


def _mixed_sum(S, bodies, powers):
    """(1/n) sum_j prod_i h_{L_i}(u_j)^{p_i} S(u_j) over the atoms of S."""
    U = S.directions
    vals = np.ones(len(U))
    for B, q in zip(bodies, powers):
        vals = vals * support_values(B, U) ** q
    return float(np.dot(vals, S.weights)) / S.dim


def _multi_minkowski(K, bodies, powers, tol, name, params):
    n = _exact_dim(K, *bodies)
    S = surface_area_measure(K)
    lhs = _mixed_sum(S, bodies, powers)
    rhs = 1.0
    for B, q in zip(bodies, powers):
        rhs = rhs * volume(B).value ** (q / n)
    rhs = rhs * volume(K).value ** ((n - 1) / n)
    margin = lhs - rhs
    return CheckReport(
        name=name,
        inputs=digest(K, *bodies, list(powers)),
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        verdict=decide(margin, 0.0, tol),
        tolerance=tol,
        certificates=["exact facet sums"],
        provenance={"atoms": len(S)},
        params=params,
    )


def check_multi_minkowski(K, bodies, powers, tol=EXACT_TOL) -> CheckReport:
    """(1/n) int prod h_{L_i}^{p_i} dS_K >= prod V(L_i)^{p_i/n} V(K)^{(n-1)/n}."""
    bodies = list(bodies)
    powers = tuple(float(q) for q in _check_weights(powers))
    if len(powers) != len(bodies):
        raise ValueError("one power per body")
    return _multi_minkowski(K, bodies, powers, tol, "multi-minkowski", {"powers": list(powers)})


def check_lp_minkowski(K, L, p, tol=EXACT_TOL) -> CheckReport:
    """(1/n) int h_K^p h_L^{1-p} dS_L >= V(K)^{p/n} V(L)^{(n-p)/n}.

    Shares its arithmetic with ``check_multi_minkowski([K, L], (p, 1-p))``
    measured against S_L, so the two agree bitwise.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return _multi_minkowski(L, [K, L], (p, 1.0 - p), tol, "lp-minkowski", {"p": p})


def check_log_minkowski(K, L, tol=EXACT_TOL) -> CheckReport:
    """sum log(h_K/h_L) h_L S_L >= V(L) log(V(K)/V(L))."""
    _exact_dim(K, L)
    S = surface_area_measure(L)
    hk = support_values(K, S.directions)
    hl = support_values(L, S.directions)
    if np.any(hk <= 0) or np.any(hl <= 0):
        raise InvalidBody("support values must be positive on the atoms")
    lhs = float(np.sum(np.log(hk / hl) * hl * S.weights))
    vk, vl = volume(K).value, volume(L).value
    rhs = vl * np.log(vk / vl)
    margin = lhs - rhs
    return CheckReport(
        name="log-minkowski",
        inputs=digest(K, L),
        lhs=lhs,
        rhs=float(rhs),
        margin=float(margin),
        verdict=decide(margin, 0.0, tol),
        tolerance=tol,
        certificates=["exact facet sums"],
        provenance={"atoms": len(S)},
    )


# ---------------------------------------------------------------------------
# log-Brunn-Minkowski


def check_log_bm(
    K: HPolytope,
    L: HPolytope,
    lam: float,
    U: DirectionSet | None = None,
    sweep=None,
    mc: int = 10**6,
    seed: int = 0,
    tol: float = EXACT_TOL,
) -> CheckReport:
    """V(0-combination) >= V(K)^lam V(L)^(1-lam) with a two-sided certificate.

    Upper witness: the outer Wulff volume on nested direction sets (finest
    reported). Lower witness, unconditional pairs only: Monte Carlo volume
    of the geometric-mean body, which sits inside the true combination;
    ``mc=0`` skips it.
    """
    n = K.dim
    sets = _sweep_sets([K, L], U, sweep)
    uppers = [_vol(log_combine(K, L, lam, V), seed) for V in sets]
    vk, ek = _vol(K, seed)
    vl, el = _vol(L, seed)
    rhs = vk**lam * vl ** (1 - lam)
    upper, upper_err = uppers[-1]
    drift = max(0.0, uppers[-2][0] - upper) if len(uppers) > 1 else 0.0
    margin = upper - rhs
    slack = drift + upper_err + ek + el
    certs = ["outer-approx upper witness", "upper witness refinement drift counted as slack"]
    details = {"upper_witness": [v for v, _ in uppers], "directions": [len(V) for V in sets]}
    verdict = decide(margin, slack, tol)
    if mc == 0:
        certs.append("inner certificate skipped (mc = 0)")
    elif K.unconditional and L.unconditional and n >= 2:
        G = GeomMeanBody(K, L, lam)
        w = G.halfwidths
        est = volume_mc(G.contains, (-w, w), mc, seed)
        low = est.value - rhs
        details.update(lower_witness=est.value, lower_ci=est.error, lower_margin=low)
        certs.append(f"MC CI (99%) on geometric-mean lower witness, {MC_SIGMAS:g} x CI tolerance")
        if verdict is not Verdict.VIOLATED and low >= -MC_SIGMAS * est.error - tol:
            verdict = Verdict.HOLDS
    else:
        certs.append("no inner certificate: pair is not unconditional")
    return CheckReport(
        name="log-bm",
        inputs=digest(K, L, lam, *sets, mc, seed),
        lhs=upper,
        rhs=rhs,
        margin=margin,
        verdict=verdict,
        slack=slack,
        tolerance=tol,
        certificates=certs,
        provenance={"directions": [len(V) for V in sets], "mc_samples": mc, "seed": seed},
        params={"lambda": lam},
        details=details,
    )


def check_profile_convergence(K, L, lam, U: DirectionSet | None = None, ps=(1.0, 0.5, 0.1, 0.01), tol=1e-4):
    """Relative gap between the p-mean and geometric-mean support profiles.

    The gap must shrink monotonically as p decreases and be at most ``tol``
    at the last p.
    """
    U = default_directions([K, L]) if U is None else U
    w = (lam, 1.0 - lam)
    base = log_profile([K, L], w, U)
    series = []
    for p in ps:
        gap = float(np.max(lp_profile([K, L], w, p, U) / base - 1.0))
        series.append({"parameter": p, "lhs": gap, "rhs": 0.0, "margin": -gap, "slack": 0.0})
    gaps = [row["lhs"] for row in series]
    monotone = all(a >= b - 1e-15 for a, b in zip(gaps, gaps[1:]))
    ok = monotone and gaps[-1] <= tol and min(gaps) >= -1e-15
    return CheckReport(
        name="p-to-zero",
        inputs=digest(K, L, lam, U, list(ps)),
        lhs=gaps[-1],
        rhs=tol,
        margin=tol - gaps[-1],
        verdict=Verdict.HOLDS if ok else Verdict.VIOLATED,
        tolerance=tol,
        certificates=["power-mean monotonicity in p"],
        provenance={"directions": len(U)},
        params={"lambda": lam},
        details={"series": series, "monotone": monotone},
    )


# ---------------------------------------------------------------------------
# Prekopa-Leindler on lattices


@dataclass(frozen=True)
class Lattice:
    """Rectangular lattice origin + k * step, k in [0, shape)."""

    origin: tuple
    step: tuple
    shape: tuple

    def __post_init__(self):
        o, h, s = (tuple(np.ravel(v)) for v in (self.origin, self.step, self.shape))
        if not len(o) == len(h) == len(s):
            raise LatticeMismatch("origin, step and shape must have one entry per axis")
        if any(x <= 0 for x in h) or any(int(x) < 1 for x in s):
            raise LatticeMismatch("steps must be positive and shape entries at least 1")
        object.__setattr__(self, "origin", tuple(float(x) for x in o))
        object.__setattr__(self, "step", tuple(float(x) for x in h))
        object.__setattr__(self, "shape", tuple(int(x) for x in s))

    @classmethod
    def centered(cls, half_width: float, step: float, dim: int = 1, offset: bool = False):
        """Points covering [-half_width, half_width]^dim; with ``offset`` the
        points sit at cell midpoints, so interval indicators sum exactly."""
        k = int(round(2 * half_width / step))
        if offset:
            return cls((-half_width + step / 2,) * dim, (step,) * dim, (k,) * dim)
        return cls((-half_width,) * dim, (step,) * dim, (k + 1,) * dim)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def cell(self) -> float:
        return float(np.prod(self.step))

    def axes(self):
        return [o + h * np.arange(s) for o, h, s in zip(self.origin, self.step, self.shape)]

    def sample(self, fn) -> np.ndarray:
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.asarray(fn(*grids), dtype=float)


def _pl_hypothesis(f, g, h, lam, lat: Lattice, rtol=1e-12, chunk=2048):
    """Worst violation of h(lam x + (1-lam) y) >= f(x)^lam g(y)^(1-lam) over
    lattice pairs whose combination is a lattice point (index rounding 1e-12)."""
    idx = np.indices(lat.shape).reshape(lat.dim, -1).T
    F, G, H = f.ravel(), g.ravel(), h.ravel()
    scale = max(1.0, float(np.max(H)), float(np.max(F)), float(np.max(G)))
    worst, pairs = np.inf, 0
    dims = np.array(lat.shape)
    strides = np.array([int(np.prod(lat.shape[k + 1:])) for k in range(lat.dim)])
    Fl = F**lam
    Gl = G ** (1 - lam)
    for start in range(0, len(idx), chunk):
        I = idx[start:start + chunk]
        M = lam * I[:, None, :] + (1 - lam) * idx[None, :, :]
        R = np.rint(M)
        ok = np.all(np.abs(M - R) <= 1e-12, axis=2) & np.all((R >= 0) & (R < dims), axis=2)
        ii, jj = np.nonzero(ok)
        if len(ii) == 0:
            continue
        k = (R[ii, jj].astype(np.int64) * strides).sum(axis=1)
        gap = H[k] - Fl[start + ii] * Gl[jj]
        worst = min(worst, float(gap.min()))
        pairs += len(ii)
    return worst, pairs, rtol * scale


def check_prekopa_leindler(f, g, h, lattice: Lattice, lam: float, quad_slack: float = 0.0, tol=EXACT_TOL) -> CheckReport:
    """Phase 1: the pointwise hypothesis on lattice-aligned pairs. Phase 2:
    Riemann sums, sum h - (sum f)^lam (sum g)^(1-lam) (1 - quad_slack)."""
    f, g, h = (np.asarray(a, dtype=float) for a in (f, g, h))
    for name, a in (("f", f), ("g", g), ("h", h)):
        if a.shape != lattice.shape:
            raise LatticeMismatch(f"{name} has shape {a.shape}, lattice has {lattice.shape}")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError(f"{name} must be finite and non-negative")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    worst, pairs, htol = _pl_hypothesis(f, g, h, lam, lattice)
    hypothesis = worst >= -htol
    c = lattice.cell
    If, Ig, Ih = f.sum() * c, g.sum() * c, h.sum() * c
    rhs = If**lam * Ig ** (1 - lam) * (1 - quad_slack)
    margin = float(Ih - rhs)
    verdict = decide(margin, 0.0, tol) if hypothesis else Verdict.INCONCLUSIVE
    return CheckReport(
        name="prekopa-leindler",
        inputs=digest(f, g, h, lattice.origin, lattice.step, lam),
        lhs=float(Ih),
        rhs=float(rhs),
        margin=margin,
        verdict=verdict,
        tolerance=tol,
        certificates=["hypothesis checked on lattice-aligned pairs only", "Riemann sums"],
        provenance={"pairs_checked": pairs, "lattice": list(lattice.shape)},
        params={"lambda": lam},
        details={"hypothesis_holds": hypothesis, "hypothesis_worst_gap": worst},
    )


# ---------------------------------------------------------------------------
# (B)-property scans


def scan_b_property(mu_body: HPolytope, K: HPolytope, t, s_grid, tol=EXACT_TOL) -> CheckReport:
    """Discrete log-concavity of f(s) = V(mu_body cap diag(t^s) K) / V(mu_body)."""
    s_grid = np.asarray(s_grid, dtype=float)
    if len(s_grid) < 3:
        raise ValueError("need at least three grid points")
    steps = np.diff(s_grid)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("s grid must be uniform and increasing")
    if mu_body.dim != K.dim:
        raise DimensionMismatch("bodies must share a dimension")
    vmu = volume(mu_body).value
    f = np.array(
        [volume(intersect(mu_body, scale_body(DiagonalScaling(t, s), K))).value / vmu for s in s_grid]
    )
    if np.any(f <= 0):
        raise EmptyIntersection("f vanishes on the grid")
    lhs = f[1:-1] ** 2
    rhs = f[:-2] * f[2:]
    gaps = lhs - rhs
    second = np.log(f[:-2]) - 2 * np.log(f[1:-1]) + np.log(f[2:])
    series = [
        {
            "parameter": float(s),
            "lhs": float(a),
            "rhs": float(b),
            "margin": float(a - b),
            "slack": 0.0,
            "f": float(fs),
            "second_difference": float(d),
        }
        for s, a, b, fs, d in zip(s_grid[1:-1], lhs, rhs, f[1:-1], second)
    ]
    k = int(np.argmin(gaps))
    return CheckReport(
        name="b-property",
        inputs=digest(mu_body, K, np.asarray(t, float), s_grid),
        lhs=float(lhs[k]),
        rhs=float(rhs[k]),
        margin=float(gaps[k]),
        verdict=Verdict.VIOLATED if gaps[k] < -tol else Verdict.HOLDS,
        tolerance=tol,
        certificates=["exact intersection volumes"],
        provenance={"grid_points": len(s_grid)},
        params={"t": [float(x) for x in np.ravel(t)]},
        details={"series": series, "f": f, "violations": int(np.sum(gaps < -tol))},
    )


def scan_weak_b_property(mu_body, K, c: float, s_grid, tol=EXACT_TOL) -> CheckReport:
    """The weak variant: t = (c, ..., c)."""
    return scan_b_property(mu_body, K, np.full(K.dim, float(c)), s_grid, tol)


# ---------------------------------------------------------------------------
# counterexample search


@dataclass
class SearchConfig:
    """Random search with local perturbation over symmetric pairs."""

    perturb_prob: float = 0.5
    perturb_scale: float = 0.1
    inject_dilates_every: int = 50
    grid: int | None = None
    lam_range: tuple = (0.05, 0.95)
    equality_tol: float = 1e-9
    keep_top: int = 5
    extra: dict = field(default_factory=dict)


def _unit_volume(P: HPolytope) -> HPolytope:
    return dilate(P, volume(P).value ** (-1.0 / P.dim))


def _perturb(P: HPolytope, rng, scale) -> HPolytope:
    """Jitter one representative of each antipodal pair, then re-close."""
    anti = np.argmin(np.linalg.norm(P.normals[:, None, :] + P.normals[None, :, :], axis=2), axis=1)
    reps = np.flatnonzero(np.arange(len(P)) < anti)
    A = P.normals[reps] + 0.2 * scale * rng.standard_normal((len(reps), P.dim))
    b = P.offsets[reps] * np.exp(scale * rng.standard_normal(len(reps)))
    try:
        return HPolytope(np.vstack([A, -A]), np.concatenate([b, b]), symmetric=True)
    except InvalidBody:
        return P


def _log_bm_gap(K, L, lam, grid):
    U = default_directions([K, L], grid)
    return volume(log_combine(K, L, lam, U)).value - 1.0, U


def search_counterexample(n: int, config: SearchConfig | None = None, seed: int = 0, iterations: int = 1000, tol=EXACT_TOL) -> CheckReport:
    """Minimize V(0-combination) - V(K)^lam V(L)^(1-lam) over random symmetric
    pairs normalized to unit volume (so the right side is 1)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    cfg = SearchConfig() if config is None else config
    rng = np.random.default_rng(seed)
    best = None
    top, equalities = [], []
    for it in range(iterations):
        lam = float(rng.uniform(*cfg.lam_range))
        if cfg.inject_dilates_every and it % cfg.inject_dilates_every == cfg.inject_dilates_every - 1:
            K = _unit_volume(random_symmetric_body(rng, n))
            L = dilate(K, float(rng.uniform(0.5, 2.0)))
            kind = "dilate"
        elif best is not None and rng.uniform() < cfg.perturb_prob:
            K = _unit_volume(_perturb(best["K"], rng, cfg.perturb_scale))
            L = _unit_volume(_perturb(best["L"], rng, cfg.perturb_scale))
            lam = float(np.clip(best["lambda"] + 0.05 * rng.standard_normal(), *cfg.lam_range))
            kind = "perturbation"
        else:
            K = _unit_volume(random_symmetric_body(rng, n))
            L = _unit_volume(random_symmetric_body(rng, n))
            kind = "random"
        L = _unit_volume(L)
        gap, _ = _log_bm_gap(K, L, lam, cfg.grid)
        rec = {"iteration": it, "kind": kind, "lambda": lam, "margin": gap, "K": K, "L": L}
        if abs(gap) <= cfg.equality_tol:
            equalities.append({"iteration": it, "kind": kind, "margin": gap})
        if best is None or gap < best["margin"]:
            best = rec
        top.append(rec)
        top = sorted(top, key=lambda r: r["margin"])[: cfg.keep_top]

    # confirm the worst candidate under refinement before any verdict
    U = default_directions([best["K"], best["L"]], cfg.grid)
    fine = refine_directions(U)
    refined = volume(log_combine(best["K"], best["L"], best["lambda"], fine)).value - 1.0
    drift = max(0.0, best["margin"] - refined)
    margin = refined
    if margin < -(tol + drift):
        verdict = Verdict.VIOLATED
    elif margin >= -tol:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.INCONCLUSIVE

    def body_dict(P):
        return {"normals": P.normals, "offsets": P.offsets}

    return CheckReport(
        name="log-bm-search",
        inputs=digest(n, seed, iterations, cfg.grid, cfg.perturb_prob, cfg.perturb_scale),
        lhs=margin + 1.0,
        rhs=1.0,
        margin=margin,
        verdict=verdict,
        slack=drift,
        tolerance=tol,
        certificates=["outer-approx upper witness", "worst case re-evaluated on a 4x refined grid"],
        provenance={"iterations": iterations, "seed": seed, "directions": [len(U), len(fine)]},
        params={"n": n},
        details={
            "worst": {
                "iteration": best["iteration"],
                "kind": best["kind"],
                "lambda": best["lambda"],
                "K": body_dict(best["K"]),
                "L": body_dict(best["L"]),
            },
            "top_margins": [{k: r[k] for k in ("iteration", "kind", "lambda", "margin")} for r in top],
            "equality_candidates": equalities,
        },
    )
