"""L^p and logarithmic combinations, geometric-mean bodies, slab and
diagonal-scaling families.

Every combination is realized as a finite-direction Wulff body, i.e. an
outer approximation of the exact combination; refining the direction set
can only shrink it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, xlogy

from .core import (
    DirectionSet,
    HPolytope,
    Membership,
    cube,
    default_directions,
    facet_normals,
    intersect,
    merge_directions,
    support_values,
    vertices,
    wulff,
    direction_grid,
)
from .errors import DimensionMismatch, InvalidBody, NotUnconditional, WeightSumError
from .report import CheckReport, Verdict, digest

WEIGHT_TOL = 1e-12


def _check_pair(bodies):
    dims = {B.dim for B in bodies}
    if len(dims) != 1:
        raise DimensionMismatch(f"bodies have dimensions {sorted(dims)}")
    for B in bodies:
        if not B.symmetric:
            raise InvalidBody("combinations are defined for symmetric bodies")


def _check_weights(weights):
    w = np.asarray(weights, dtype=float).ravel()
    if np.any(w <= 0):
        raise WeightSumError("weights must be positive")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise WeightSumError(f"weights sum to {w.sum()!r}, not 1")
    return w


def log_profile(bodies, weights, U: DirectionSet) -> np.ndarray:
    """prod_i h_{K_i}(u)^{lambda_i} on U."""
    vals = np.ones(len(U))
    for B, w in zip(bodies, weights):
        vals = vals * support_values(B, U) ** w
    return vals


def lp_profile(bodies, weights, p: float, U: DirectionSet) -> np.ndarray:
    """(sum_i lambda_i h_{K_i}(u)^p)^{1/p} on U."""
    acc = np.zeros(len(U))
    for B, w in zip(bodies, weights):
        acc = acc + w * support_values(B, U) ** p
    return acc ** (1.0 / p)


def lp_combine(K: HPolytope, L: HPolytope, p: float, lam: float, U: DirectionSet | None = None) -> HPolytope:
    """Wulff body of the p-mean of h_K, h_L (an outer approximation of the L^p combination)."""
    if not p > 0:
        raise ValueError("p must be positive; use log_combine for p = 0")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    _check_pair([K, L])
    U = default_directions([K, L]) if U is None else U
    return wulff(U, lp_profile([K, L], [lam, 1.0 - lam], p, U))


def log_combine_multi(bodies, weights, U: DirectionSet | None = None) -> HPolytope:
    """Wulff body of prod_i h_{K_i}^{lambda_i}: the multi-entry 0-combination."""
    bodies = list(bodies)
    if len(bodies) < 2:
        raise ValueError("need at least two bodies")
    w = _check_weights(weights)
    if len(w) != len(bodies):
        raise ValueError("one weight per body")
    _check_pair(bodies)
    U = default_directions(bodies) if U is None else U
    return wulff(U, log_profile(bodies, w, U))


def log_combine(K: HPolytope, L: HPolytope, lam: float, U: DirectionSet | None = None) -> HPolytope:
    """Outer approximation of the 0-combination with weights (lam, 1 - lam)."""
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    return log_combine_multi([K, L], [lam, 1.0 - lam], U)


@dataclass(frozen=True, eq=False)
class CombinationSpec:
    """p = 0 means logarithmic; stored exactly rather than as a tiny p."""

    p: float
    weights: tuple
    bodies: tuple
    directions: DirectionSet | None = None

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be >= 0")
        w = _check_weights(self.weights)
        if len(w) != len(self.bodies):
            raise ValueError("one weight per body")
        _check_pair(self.bodies)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "bodies", tuple(self.bodies))

    @property
    def logarithmic(self) -> bool:
        return self.p == 0

    def directions_or_default(self) -> DirectionSet:
        return default_directions(self.bodies) if self.directions is None else self.directions


def combine(spec: CombinationSpec) -> HPolytope:
    U = spec.directions_or_default()
    if spec.logarithmic:
        return log_combine_multi(spec.bodies, spec.weights, U)
    return wulff(U, lp_profile(spec.bodies, spec.weights, spec.p, U))


# ---------------------------------------------------------------------------
# geometric-mean body K^lam . L^(1-lam)

_EPS = 1e-200  # below this the log is continued linearly (keeps the objective concave and finite)
_LOG_EPS = np.log(_EPS)
_WALL = 1e9
GOLDEN_ITERS = 60
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _orthant_rows(P: HPolytope):
    keep = np.all(P.normals >= -1e-12, axis=1)
    return np.clip(P.normals[keep], 0.0, None), P.offsets[keep]


class _Section:
    """First-orthant data of an unconditional body restricted to coordinates S.

    Along the last coordinate of S the boundary height above a point y' of
    the remaining coordinates is min_i (b_i - a_i'.y') / a_ik, which is a
    concave nonincreasing function of y'; composed with y' = exp(eta') it
    stays concave in eta'.
    """

    def __init__(self, A, b, S):
        A = A[:, S]
        used = np.any(A > 0, axis=1)
        A, b = A[used], b[used]
        self.k = len(S)
        pos = A > 0
        self.log_width = np.array(
            [np.log(np.min(b[pos[:, j]] / A[pos[:, j], j])) for j in range(self.k)]
        )
        last = A[:, -1] > 0
        self.ratio_A = A[last, :-1] / A[last, -1:]
        self.ratio_b = b[last] / A[last, -1]
        self.wall_A = A[~last, :-1]
        self.wall_b = b[~last]

    def log_height(self, eta):
        """Concave extension of log(max y_k over the section above exp(eta))."""
        Y = np.exp(eta)
        m = np.min(self.ratio_b - Y @ self.ratio_A.T, axis=1)
        if len(self.wall_b):
            m = m + _WALL * np.minimum(0.0, np.min(self.wall_b - Y @ self.wall_A.T, axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(m >= _EPS, np.log(np.maximum(m, _EPS)), _LOG_EPS + (m - _EPS) / _EPS)


def _golden_max(F, lo, hi, iters=GOLDEN_ITERS):
    """Vectorized golden-section maximization of concave F over [lo, hi] (row-wise)."""
    a, b = lo.copy(), hi.copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = F(c), F(d)
    best = np.maximum(np.maximum(F(a), F(b)), np.maximum(fc, fd))
    for _ in range(iters):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _INVPHI * (b - a)
        new_d = a + _INVPHI * (b - a)
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        x = np.where(left, c, d)
        fx = F(x)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
        best = np.maximum(best, fx)
    return best


def _max_over_box(F, lo, hi, iters=GOLDEN_ITERS):
    """Max of a jointly concave F over a box, by nested golden sections."""
    if lo.shape[1] == 1:
        return _golden_max(lambda t: F(t[:, None]), lo[:, 0], hi[:, 0], iters)

    def outer(t):
        return _max_over_box(
            lambda rest: F(np.column_stack([t, rest])), lo[:, 1:], hi[:, 1:], iters
        )

    return _golden_max(outer, lo[:, 0], hi[:, 0], iters)


@dataclass(frozen=True, eq=False)
class GeomMeanBody:
    """{(|y_i|^lam |z_i|^(1-lam))_i with signs : y in K, z in L} for unconditional K, L."""

    K: HPolytope
    L: HPolytope
    lam: float
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (self.K.unconditional and self.L.unconditional):
            raise NotUnconditional("geometric-mean bodies need unconditional K and L")
        if self.K.dim != self.L.dim:
            raise DimensionMismatch("K and L must have equal dimension")
        if not 0 <= self.lam <= 1:
            raise ValueError("lambda must lie in [0, 1]")

    @property
    def dim(self):
        return self.K.dim

    @property
    def halfwidths(self):
        return self.K.bounding_box**self.lam * self.L.bounding_box ** (1 - self.lam)

    def _sections(self, S):
        if S not in self._cache:
            self._cache[S] = (_Section(*_orthant_rows(self.K), list(S)), _Section(*_orthant_rows(self.L), list(S)))
        return self._cache[S]

    def contains(self, X, tol: float = 1e-9, method: str = "auto") -> np.ndarray:
        """Vectorized decision; x is accepted iff x / (1 + tol) is in the body.

        ``method="auto"`` uses the closed-form planar route when the nonzero
        coordinates of x span two dimensions and nested golden sections
        otherwise; ``"golden"`` forces the latter.
        """
        X = np.abs(np.atleast_2d(np.asarray(X, dtype=float))) / (1.0 + tol)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dim {X.shape[1]}, body has dim {self.dim}")
        lam = self.lam
        if lam == 1:
            return self.K.contains(X)
        if lam == 0:
            return self.L.contains(X)
        out = np.zeros(len(X), dtype=bool)
        todo = np.arange(len(X))
        if method == "auto":
            sure_in, sure_out = self._screen(X)
            out[sure_in] = True
            todo = np.flatnonzero(~(sure_in | sure_out))
            if len(todo) == 0:
                return out
            full, X = out, X[todo]
            out = np.zeros(len(X), dtype=bool)
        nonzero = X > 0
        patterns, inverse = np.unique(nonzero, axis=0, return_inverse=True)
        for p_idx, pattern in enumerate(patterns):
            rows = np.flatnonzero(inverse.ravel() == p_idx)
            S = tuple(int(j) for j in np.flatnonzero(pattern))
            if not S:
                out[rows] = True
                continue
            out[rows] = self._decide(np.log(X[np.ix_(rows, S)]), S, method)
        if method == "auto":
            full[todo] = out
            return full
        return out

    def _screen(self, X):
        """Cheap sufficient tests. Inside: the weighted geometric mean of the
        two gauges is at most 1 (take y, z as dilates of x). Outside: x leaves
        the outer Wulff body of h_K^lam h_L^(1-lam) on a coarse direction set."""
        if "screen" not in self._cache:
            n = self.dim
            U = np.abs(merge_directions(facet_normals(self.K), facet_normals(self.L), direction_grid(n, 64 * n)).vectors)
            U = np.unique(U / np.linalg.norm(U, axis=1, keepdims=True), axis=0)
            h = support_values(self.K, U) ** self.lam * support_values(self.L, U) ** (1 - self.lam)
            self._cache["screen"] = (U, h)
        U, h = self._cache["screen"]
        lam = self.lam
        gk = np.max(X @ self.K.normals.T / self.K.offsets, axis=1)
        gl = np.max(X @ self.L.normals.T / self.L.offsets, axis=1)
        # margins keep both screens strictly conservative under rounding
        inside = gk**lam * gl ** (1 - lam) <= 1.0 - 1e-12
        outside = np.any(X @ U.T > h * (1.0 + 1e-12), axis=1)
        return inside, outside & ~inside

    def _decide(self, xi, S, method="auto"):
        lam = self.lam
        sk, sl = self._sections(S)
        cap = lam * sk.log_width + (1 - lam) * sl.log_width
        ok = np.all(xi <= cap, axis=1)
        res = np.zeros(len(xi), dtype=bool)
        if len(S) == 1:
            return ok
        idx = np.flatnonzero(ok)
        if len(idx) == 0:
            return res
        xi = xi[idx]
        if len(S) == 2 and method in ("auto", "exact"):
            res[idx] = self._log_gap_2d(S, xi) >= 0.0
            return res
        head, target = xi[:, :-1], xi[:, -1]
        hi = np.broadcast_to(sk.log_width[:-1], head.shape).copy()
        lo = (head - (1 - lam) * sl.log_width[:-1]) / lam

        def psi(eta):
            zeta = (head - lam * eta) / (1 - lam)
            return lam * sk.log_height(eta) + (1 - lam) * sl.log_height(zeta)

        best = _max_over_box(psi, lo, hi)
        res[idx] = best >= target
        return res

    def _log_gap_2d(self, S, xi):
        """min over w in [0, 1] of H(w) - w xi_1 - (1 - w) xi_2, where H is the
        support function of the log-image in direction (w, 1 - w)."""
        key = ("pieces", S)
        if key not in self._cache:
            self._cache[key] = _merge_pieces(
                _log_support_pieces(self.K, S), _log_support_pieces(self.L, S), self.lam
            )
        lo, hi, alpha, beta, gamma = self._cache[key]
        gap = np.full(len(xi), np.inf)
        for start in range(0, len(xi), MC_CHUNK_2D):
            x1 = xi[start:start + MC_CHUNK_2D, 0:1]
            x2 = xi[start:start + MC_CHUNK_2D, 1:2]
            slope = gamma - x1 + x2
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                w_star = np.where(alpha > 0, expit(-slope / np.where(alpha > 0, alpha, 1.0)), lo)
            w_star = np.clip(w_star, lo, hi)
            vals = [
                alpha * (xlogy(w, w) + xlogy(1 - w, 1 - w)) + beta - x2 + slope * w
                for w in (np.broadcast_to(lo, slope.shape), np.broadcast_to(hi, slope.shape), w_star)
            ]
            gap[start:start + MC_CHUNK_2D] = np.min(np.minimum(np.minimum(vals[0], vals[1]), vals[2]), axis=1)
        return gap

    def sample(self, N: int, rng) -> np.ndarray:
        """Points y^lam z^(1-lam) (random signs) with y, z uniform in K, L."""
        Y = _uniform_in(self.K, N, rng)
        Z = _uniform_in(self.L, N, rng)
        G = np.abs(Y) ** self.lam * np.abs(Z) ** (1 - self.lam)
        return G * rng.choice([-1.0, 1.0], size=G.shape)


MC_CHUNK_2D = 1 << 15


def _log_support_pieces(P: HPolytope, S):
    """Piecewise form of w -> max_{y in P, y >= 0} w log y_1 + (1 - w) log y_2
    on the coordinate plane S (two indices), as rows (lo, hi, alpha, beta, gamma)
    meaning alpha * ent(w) + beta + gamma * w on [lo, hi]."""
    A, b = _orthant_rows(P)
    A = A[:, list(S)]
    used = np.any(A > 0, axis=1)
    A, b = A[used], b[used]
    # section polygon's first-quadrant boundary chain from the x-axis to the y-axis
    w1 = np.min(b[A[:, 0] > 0] / A[A[:, 0] > 0, 0])
    w2 = np.min(b[A[:, 1] > 0] / A[A[:, 1] > 0, 1])
    if P.dim == 2:
        V = vertices(P)
    else:
        V = vertices(HPolytope(np.vstack([A, -A, [[-1, 0], [0, -1]]]), np.concatenate([b, b, [w1, w2]])))
    scale = max(w1, w2)
    inner = V[(V[:, 0] > 1e-12 * scale) & (V[:, 1] > 1e-12 * scale)]
    inner = inner[np.argsort(np.arctan2(inner[:, 1], inner[:, 0]))]
    chain = np.vstack([[w1, 0.0], inner, [0.0, w2]])
    pieces = []
    normals = []
    for p, q in zip(chain[:-1], chain[1:]):
        a = np.array([q[1] - p[1], p[0] - q[0]])
        normals.append((a, float(a @ p)))
    for k, ((a, off), p, q) in enumerate(zip(normals, chain[:-1], chain[1:])):
        lo, hi = a[0] * q[0] / off, a[0] * p[0] / off
        if a[0] > 0 and a[1] > 0 and hi > lo:
            pieces.append((lo, hi, 1.0, np.log(off / a[1]), np.log(off / a[0]) - np.log(off / a[1])))
        if k + 1 < len(normals):
            a2, off2 = normals[k + 1]
            vlo, vhi = a2[0] * q[0] / off2, a[0] * q[0] / off
            if vhi > vlo:
                pieces.append((vlo, vhi, 0.0, np.log(q[1]), np.log(q[0]) - np.log(q[1])))
    return np.array(sorted(pieces))


def _merge_pieces(pk, pl, lam):
    cuts = np.unique(np.clip(np.concatenate([[0.0, 1.0], pk[:, 0], pk[:, 1], pl[:, 0], pl[:, 1]]), 0, 1))
    lo, hi = cuts[:-1], cuts[1:]
    mid = 0.5 * (lo + hi)

    def pick(pieces):
        idx = np.searchsorted(pieces[:, 0], mid, side="right") - 1
        return pieces[np.clip(idx, 0, len(pieces) - 1), 2:]

    coef = lam * pick(pk) + (1 - lam) * pick(pl)
    return lo, hi, coef[:, 0], coef[:, 1], coef[:, 2]


def _uniform_in(P: HPolytope, N, rng):
    w = P.bounding_box
    out, have = [], 0
    while have < N:
        X = rng.uniform(-w, w, size=(max(2 * (N - have), 1024), P.dim))
        X = X[P.contains(X)]
        out.append(X)
        have += len(X)
    return np.vstack(out)[:N]


def geom_mean_membership(G: GeomMeanBody, x, tol: float = 1e-9) -> Membership:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return Membership.INSIDE if G.contains(np.asarray(x, float)[None, :], tol)[0] else Membership.OUTSIDE


# ---------------------------------------------------------------------------
# slab families and diagonal scalings


@dataclass(frozen=True, eq=False)
class SlabFamily:
    """Slabs |x . v_i| <= r_i^lam s_i^(1-lam)."""

    v: np.ndarray
    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.v, dtype=float))
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        r = np.asarray(self.r, dtype=float).ravel()
        s = np.asarray(self.s, dtype=float).ravel()
        if not (len(v) == len(r) == len(s)):
            raise ValueError("one (v, r, s) triple per slab")
        if len(v) < v.shape[1]:
            raise ValueError("need at least n slabs")
        if np.any(r <= 0) or np.any(s <= 0):
            raise ValueError("widths must be positive")
        if np.linalg.matrix_rank(v) < v.shape[1]:
            raise ValueError("slab normals must span R^n")
        for name, val in (("v", v), ("r", r), ("s", s)):
            object.__setattr__(self, name, val)

    @property
    def dim(self):
        return self.v.shape[1]

    def __len__(self):
        return len(self.r)


def slab_body(F: SlabFamily, lam: float) -> HPolytope:
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    w = F.r**lam * F.s ** (1 - lam)
    return HPolytope(np.vstack([F.v, -F.v]), np.concatenate([w, w]), symmetric=True)


@dataclass(frozen=True)
class DiagonalScaling:
    """The map diag(t_1^s, ..., t_n^s)."""

    t: tuple
    s: float = 1.0

    def __post_init__(self):
        t = tuple(float(x) for x in np.ravel(self.t))
        if any(x <= 0 for x in t):
            raise ValueError("t entries must be positive")
        object.__setattr__(self, "t", t)

    @property
    def diagonal(self) -> np.ndarray:
        return np.asarray(self.t) ** self.s


def scale_body(D: DiagonalScaling, K: HPolytope) -> HPolytope:
    """diag(t^s) K: each normal u maps to u * t^-s before renormalization."""
    t = np.asarray(D.t)
    if t.shape[0] != K.dim:
        raise DimensionMismatch(f"scaling has {t.shape[0]} entries, body has dim {K.dim}")
    return HPolytope(K.normals * t ** (-D.s), K.offsets)


def cube_section_inclusion_check(
    K: HPolytope,
    t,
    s1: float,
    s0: float,
    lam: float,
    m: int | None = None,
    samples: int = 10**4,
    seed: int = 0,
    tol: float = 1e-9,
) -> CheckReport:
    """Sample the 0-combination of Q_1, Q_0 and test membership in Q_lam, where
    Q_a = diag(t^(a s1 + (1-a) s0)) C_n intersected with K."""
    if not K.symmetric:
        raise InvalidBody("K must be symmetric")
    n = K.dim
    C = cube(n)

    def Q(a):
        return intersect(scale_body(DiagonalScaling(t, a * s1 + (1 - a) * s0), C), K)

    Q1, Q0, Ql = Q(1.0), Q(0.0), Q(lam)
    U = merge_directions(
        facet_normals(K), np.eye(n), facet_normals(Q1), facet_normals(Q0), direction_grid(n, m)
    )
    W = log_combine(Q1, Q0, lam, U)
    rng = np.random.default_rng(seed)
    pts = np.vstack([vertices(W), _uniform_in(W, samples, rng)]) if n <= 3 else _uniform_in(W, samples, rng)
    excess = np.max(pts @ Ql.normals.T - Ql.offsets, axis=1)
    bad = excess > tol
    worst = float(excess.max())
    return CheckReport(
        name="cube-section-inclusion",
        inputs=digest(K, np.asarray(t, float), s1, s0, lam, U, samples, seed),
        lhs=0.0,
        rhs=worst,
        margin=-worst,
        verdict=Verdict.VIOLATED if bad.any() else Verdict.HOLDS,
        tolerance=tol,
        certificates=["combination realized as outer Wulff body (only strengthens a pass)"],
        provenance={"directions": len(U), "samples": int(len(pts)), "seed": seed},
        params={"lambda": lam, "s1": s1, "s0": s0},
        details={"violations": pts[bad][:20], "n_violations": int(bad.sum())},
    )
