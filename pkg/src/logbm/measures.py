"""Volumes, surface-area and cone-volume measures, subspace concentration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm

from .core import EXACT_MAX_DIM, HPolytope, _dedupe_points, _match_rows, plane_basis, vertices
from .errors import DegenerateBody, DimensionTooHigh, EmptyMeasure, ZeroHits
from .report import CheckReport, Verdict, digest

Z99 = float(norm.ppf(0.995))
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    method: str  # "exact-triangulation" | "monte-carlo"
    error: float = 0.0  # half-width of the 99% CI for Monte Carlo
    samples: int = 0
    seed: int | None = None

    def __post_init__(self):
        if not self.value > 0:
            raise DegenerateBody(f"non-positive volume {self.value}")
        if self.error < 0:
            raise ValueError("error must be non-negative")
        if self.method == "exact-triangulation" and self.error != 0:
            raise ValueError("exact volumes carry no error")

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "error": self.error,
            "samples": self.samples,
            "seed": self.seed,
        }


def _polygon_area(V):
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def exact_volume(P: HPolytope) -> float:
    """Fan triangulation from the origin over the facet cycles (n <= 3)."""
    n = P.dim
    if n > EXACT_MAX_DIM:
        raise DimensionTooHigh(f"exact volume needs n <= {EXACT_MAX_DIM}")
    V = vertices(P)
    if n == 1:
        return float(V[1, 0] - V[0, 0])
    if n == 2:
        return _polygon_area(V)
    total = 0.0
    for f in P.facets:
        cyc = V[list(f.vertex_ids)]
        v0 = cyc[0]
        for a, b in zip(cyc[1:-1], cyc[2:]):
            total += np.linalg.det(np.array([v0, a, b]))
    return total / 6.0


def volume(P: HPolytope, samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    if P.dim <= EXACT_MAX_DIM:
        return VolumeEstimate(exact_volume(P), "exact-triangulation")
    w = P.bounding_box
    return volume_mc(lambda X: P.contains(X), (-w, w), samples, seed)


def volume_mc(oracle, box, N: int, seed: int, chunk: int = MC_CHUNK) -> VolumeEstimate:
    """Hit-count estimate of the volume of {oracle(x)} inside the box ``(lo, hi)``.

    Chunk k draws from the k-th spawned child of ``seed`` so the estimate
    does not depend on evaluation order.
    """
    lo, hi = (np.asarray(a, dtype=float) for a in box)
    if N < 1000:
        raise ValueError("need at least 10^3 samples")
    box_vol = float(np.prod(hi - lo))
    n_chunks = -(-N // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    for k, child in enumerate(children):
        size = min(chunk, N - k * chunk)
        X = np.random.default_rng(child).uniform(lo, hi, size=(size, lo.shape[0]))
        hits += int(np.count_nonzero(oracle(X)))
    if hits == 0:
        raise ZeroHits("no sample landed inside; check the bounding box")
    p = hits / N
    return VolumeEstimate(
        box_vol * p, "monte-carlo", Z99 * box_vol * np.sqrt(p * (1 - p) / N), N, seed
    )


# ---------------------------------------------------------------------------
# measures on the sphere


@dataclass(frozen=True, eq=False)
class SphericalMeasure:
    """Finitely supported measure: atoms (direction, weight) on S^{n-1}."""

    directions: np.ndarray
    weights: np.ndarray
    even: bool = True

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if U.shape[0] != w.shape[0]:
            raise ValueError("one weight per direction")
        norms = np.linalg.norm(U, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero direction")
        U = U / norms[:, None]
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if len(cKDTree(U).query_pairs(1e-10)) if len(U) > 1 else False:
            raise ValueError("atom directions must be distinct")
        if self.even:
            anti = _match_rows(U, -U, 1e-10)
            if np.any(anti < 0) or not np.allclose(w[anti], w, rtol=1e-9, atol=1e-14):
                raise ValueError("measure flagged even but atoms are not sign-symmetric")
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self):
        return len(self.weights)

    def weight_at(self, u, tol=1e-9) -> float:
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        hit = np.linalg.norm(self.directions - u, axis=1) <= tol
        return float(self.weights[hit].sum())

    def matches(self, other: "SphericalMeasure", angle_tol=1e-9, rtol=1e-9) -> bool:
        """Equal as measures, atoms matched at ``angle_tol``."""
        if self.dim != other.dim or len(self) != len(other):
            return False
        idx = _match_rows(other.directions, self.directions, angle_tol)
        if np.any(idx < 0):
            return False
        return bool(np.allclose(other.weights[idx], self.weights, rtol=rtol, atol=0))


def _facet_areas(P: HPolytope):
    V = vertices(P)
    n = P.dim
    out = []
    for f in P.facets:
        if n == 1:
            area = 1.0
        elif n == 2:
            a, b = V[list(f.vertex_ids)]
            area = float(np.linalg.norm(a - b))
        else:
            e1, e2 = plane_basis(f.normal)
            cyc = V[list(f.vertex_ids)]
            area = abs(_polygon_area(np.column_stack([cyc @ e1, cyc @ e2])))
        out.append((f, area))
    return out


def surface_area_measure(P: HPolytope) -> SphericalMeasure:
    """One atom per facet: (outer normal, facet (n-1)-volume)."""
    if P.dim > EXACT_MAX_DIM:
        raise DimensionTooHigh(f"exact facet areas need n <= {EXACT_MAX_DIM}")
    pairs = _facet_areas(P)
    return SphericalMeasure(
        np.array([f.normal for f, _ in pairs]), np.array([a for _, a in pairs]), even=P.symmetric
    )


def cone_volume_measure(P: HPolytope) -> SphericalMeasure:
    """Atoms h_P(u) * S_P(u); total mass n V(P)."""
    if P.dim > EXACT_MAX_DIM:
        raise DimensionTooHigh(f"exact facet areas need n <= {EXACT_MAX_DIM}")
    pairs = _facet_areas(P)
    return SphericalMeasure(
        np.array([f.normal for f, _ in pairs]),
        np.array([f.offset * a for f, a in pairs]),
        even=P.symmetric,
    )


@dataclass(frozen=True, eq=False)
class SubspaceSpec:
    basis: np.ndarray  # rows orthonormal

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-10):
            raise ValueError("subspace basis must be orthonormal")
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self):
        return self.basis.T @ self.basis

    @classmethod
    def span(cls, vectors):
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        u, s, vt = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > 1e-10 * s[0]))
        return cls(vt[:r])


def candidate_subspaces(directions: np.ndarray, tol=1e-9):
    """Proper subspaces spanned by subsets of ``directions``, deduplicated
    by projector comparison."""
    D = np.atleast_2d(directions)
    n = D.shape[1]
    reps = _dedupe_points(np.vstack([D, -D]), 1e-10)
    # one representative per antipodal pair
    keep, seen = [], np.zeros(len(reps), dtype=bool)
    anti = _match_rows(reps, -reps, 1e-10)
    for i in range(len(reps)):
        if not seen[i]:
            keep.append(i)
            seen[i] = True
            if anti[i] >= 0:
                seen[anti[i]] = True
    reps = reps[keep]
    out = []
    for d in range(1, n):
        projs, subs = [], []
        for combo in itertools.combinations(range(len(reps)), d):
            S = SubspaceSpec.span(reps[list(combo)])
            if S.dim != d:
                continue
            projs.append(S.projector.ravel())
            subs.append(S)
        if not subs:
            continue
        uniq = _dedupe_points(np.array(projs), tol)
        # map unique projectors back to their subspaces
        idx = _match_rows(np.array(projs), uniq, tol)
        out.extend(subs[i] for i in idx)
    return out


def subspace_concentration(sigma: SphericalMeasure, tol: float = 1e-9, eq_tol: float = 1e-9) -> CheckReport:
    """Check conditions (i) and (ii) over the candidate subspace family."""
    if len(sigma) == 0 or sigma.total <= 0:
        raise EmptyMeasure("measure has no mass")
    if not sigma.even:
        raise ValueError("subspace concentration is checked for even measures only")
    n = sigma.dim
    total = sigma.total
    scale = max(1.0, total)
    subs = candidate_subspaces(sigma.directions[sigma.weights > 0])
    rows = []
    for S in subs:
        resid = np.linalg.norm(sigma.directions - sigma.directions @ S.projector, axis=1)
        mass = float(sigma.weights[resid <= 1e-9].sum())
        bound = S.dim / n * total
        rows.append((S, mass, bound))
    violations = [
        {"basis": S.basis, "mass": m, "bound": b} for S, m, b in rows if m > b + tol * scale
    ]
    equal = [i for i, (S, m, b) in enumerate(rows) if abs(m - b) <= eq_tol * scale]
    pairs, unmatched = [], []
    for i in equal:
        Si = rows[i][0]
        partner = None
        for j in equal:
            Sj = rows[j][0]
            if Si.dim + Sj.dim == n and np.linalg.matrix_rank(np.vstack([Si.basis, Sj.basis]), tol=1e-9) == n:
                partner = j
                break
        if partner is None:
            unmatched.append({"basis": Si.basis, "mass": rows[i][1]})
        else:
            pairs.append({"subspace": Si.basis, "complement": rows[partner][0].basis})
    margin = min((b - m for _, m, b in rows), default=float("inf"))
    if violations or unmatched:
        verdict = Verdict.VIOLATED
    else:
        verdict = Verdict.HOLDS
    return CheckReport(
        name="subspace-concentration",
        inputs=digest(sigma.directions, sigma.weights),
        lhs=margin,
        rhs=0.0,
        margin=margin,
        verdict=verdict,
        tolerance=tol,
        certificates=[
            "candidate subspaces restricted to spans of support subsets",
            "condition (ii) partners searched within the candidate family only",
        ],
        provenance={"candidates": len(rows), "atoms": len(sigma)},
        details={
            "total": total,
            "violations": violations,
            "equality_pairs": pairs,
            "unmatched_equalities": unmatched,
        },
    )
