"""Halfspace bodies, direction sets, support functions and Wulff shapes.

Every body is stored as a finite intersection of halfspaces ``x . u <= b``
with unit normals and strictly positive offsets, so the origin is always
an interior point. Vertex data are derived lazily and only for n <= 3.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import (
    DegenerateBody,
    DimensionMismatch,
    DimensionTooHigh,
    InvalidBody,
    SingularInput,
    UnboundedBody,
    UnboundedResult,
)

NORMAL_TOL = 1e-12
ANGLE_TOL = 1e-10
LP_TOL = 1e-9
VERTEX_TOL = 1e-9
FLAG_TOL = 1e-12
EXACT_MAX_DIM = 3


class Membership(str, enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def _unit_rows(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise SingularInput("zero or non-finite direction vector")
    return A / norms[:, None], norms


def _near_pairs(X, tol):
    """Index pairs (i < j) of rows within Euclidean distance ``tol``."""
    if len(X) < 2:
        return np.empty((0, 2), dtype=int)
    return cKDTree(X).query_pairs(tol, output_type="ndarray")


def _match_rows(X, Y, tol):
    """For each row of Y, the index of a row of X within ``tol`` (or -1)."""
    dist, idx = cKDTree(X).query(Y, k=1)
    return np.where(dist <= tol, idx, -1)


def _dedupe_halfspaces(A, b):
    # parallel normals: keep the tightest offset
    pairs = _near_pairs(A, ANGLE_TOL)
    if len(pairs) == 0:
        return A, b
    keep = np.ones(len(A), dtype=bool)
    for i, j in pairs:
        if not (keep[i] and keep[j]):
            continue
        if b[j] < b[i]:
            keep[i] = False
        else:
            keep[j] = False
    return A[keep], b[keep]


def _closed_under(A, b, signs):
    """True when the halfspace list is invariant under x -> signs * x."""
    idx = _match_rows(A, A * signs, ANGLE_TOL)
    if np.any(idx < 0):
        return False
    return bool(np.all(np.abs(b[idx] - b) <= FLAG_TOL * np.maximum(1.0, b)))


def _positively_spans(A):
    """n + 1 cone-membership probes: the simplex directions e_1..e_n, -sum e_i."""
    n = A.shape[1]
    if 2 <= n <= EXACT_MAX_DIM and len(A) > n:
        # origin strictly inside conv(rows) iff the rows positively span
        try:
            return bool(np.all(ConvexHull(A).equations[:, -1] < -1e-9))
        except QhullError:
            pass
    probes = np.vstack([np.eye(n), -np.ones((1, n)) / np.sqrt(n)])
    for d in probes:
        _, residual = nnls(A.T, d)
        if residual > 1e-9:
            return False
    return True


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Convex body ``{x : normals @ x <= offsets}`` containing the origin.

    Normals are normalized on ingest (offsets rescaled accordingly) and
    duplicated normals collapse to the tightest offset. ``symmetric`` and
    ``unconditional`` describe closure of the halfspace list: ``None``
    detects them, ``True`` is verified, ``False`` is stored as given.
    """

    normals: np.ndarray
    offsets: np.ndarray
    symmetric: bool | None = None
    unconditional: bool | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).ravel()
        if A.shape[0] != b.shape[0]:
            raise InvalidBody(f"{A.shape[0]} normals but {b.shape[0]} offsets")
        if A.shape[1] < 1:
            raise InvalidBody("dimension must be positive")
        if not np.all(np.isfinite(b)):
            raise InvalidBody("offsets must be finite")
        try:
            A, norms = _unit_rows(A)
        except SingularInput as exc:
            raise InvalidBody(str(exc)) from None
        b = b / norms
        if np.any(b <= 0):
            raise InvalidBody("all offsets must be positive (origin interior)")
        A, b = _dedupe_halfspaces(A, b)
        if not _positively_spans(A):
            raise UnboundedBody("normals do not positively span R^n")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

        n = A.shape[1]
        sym = _closed_under(A, b, -np.ones(n))
        uncond = sym and all(
            _closed_under(A, b, np.where(np.arange(n) == i, -1.0, 1.0)) for i in range(n)
        )
        if self.symmetric and not sym:
            raise InvalidBody("symmetric flag set but halfspaces not closed under x -> -x")
        if self.unconditional and not uncond:
            raise InvalidBody("unconditional flag set but halfspaces not closed under sign flips")
        object.__setattr__(self, "symmetric", sym if self.symmetric is None else bool(self.symmetric))
        object.__setattr__(
            self, "unconditional", uncond if self.unconditional is None else bool(self.unconditional)
        )
        if self.unconditional:
            object.__setattr__(self, "symmetric", True)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def __len__(self):
        return self.normals.shape[0]

    def __repr__(self):
        flags = [f for f in ("symmetric", "unconditional") if getattr(self, f)]
        return f"HPolytope(dim={self.dim}, halfspaces={len(self)}, flags={flags})"

    def contains(self, X, tol=0.0):
        """Vectorized closed membership with slack ``tol``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all(X @ self.normals.T <= self.offsets + tol, axis=1)

    @cached_property
    def _vertex_data(self):
        return _enumerate_vertices(self)

    @cached_property
    def facets(self):
        return _facets(self)

    @cached_property
    def bounding_box(self):
        """Per-coordinate half-width max |x_i| (exact support at +-e_i)."""
        n = self.dim
        hi = support_values(self, np.eye(n))
        lo = support_values(self, -np.eye(n))
        return np.maximum(hi, lo)


# ---------------------------------------------------------------------------
# vertices and facets


def _enumerate_vertices(P):
    n, A, b = P.dim, P.normals, P.offsets
    if n > EXACT_MAX_DIM:
        raise DimensionTooHigh(f"exact vertex enumeration needs n <= {EXACT_MAX_DIM}, got {n}")
    if n == 1:
        a = A[:, 0]
        V = np.array([[-np.min(b[a < 0] / -a[a < 0])], [np.min(b[a > 0] / a[a > 0])]])
    else:
        # polar duality: vertices of P <-> facets of conv{a_i / b_i}
        try:
            hull = ConvexHull(A / b[:, None])
        except QhullError as exc:
            raise DegenerateBody(f"vertex enumeration failed: {exc.args[0].splitlines()[0]}") from None
        W, c = hull.equations[:, :-1], hull.equations[:, -1]
        if np.any(c >= 0):
            raise DegenerateBody("origin not interior to the polar body")
        V = W / -c[:, None]
        V = _dedupe_points(V, VERTEX_TOL * max(1.0, np.max(np.abs(V))))
        V = _refine_vertices(A, b, V)
        V = _dedupe_points(V, VERTEX_TOL * max(1.0, np.max(np.abs(V))))
    if len(V) < n + 1:
        raise DegenerateBody(f"only {len(V)} vertices in dimension {n}")
    if n == 2:
        V = V[np.argsort(np.arctan2(V[:, 1], V[:, 0]), kind="stable")]
    V.setflags(write=False)
    scale = max(1.0, float(np.max(b)))
    incidence = np.abs(A @ V.T - b[:, None]) <= VERTEX_TOL * scale
    return V, incidence


def _dedupe_points(V, tol):
    pairs = _near_pairs(V, tol)
    if len(pairs) == 0:
        return V
    keep = np.ones(len(V), dtype=bool)
    for i, j in pairs:
        if keep[i] and keep[j]:
            keep[j] = False
    return V[keep]


def _refine_vertices(A, b, V):
    # re-solve each vertex from the constraints active at it; keep the
    # re-solved point only when it is at least as feasible as the input
    scale = max(1.0, float(np.max(b)))
    active = np.abs(A @ V.T - b[:, None]) <= VERTEX_TOL * scale
    out = V.copy()
    for k in range(V.shape[0]):
        rows = active[:, k]
        if rows.sum() < A.shape[1]:
            continue
        if rows.sum() == A.shape[1]:
            try:
                sol = np.linalg.solve(A[rows], b[rows])
            except np.linalg.LinAlgError:
                continue
        else:
            sol, *_ = np.linalg.lstsq(A[rows], b[rows], rcond=None)
        before = max(float(np.max(A @ V[k] - b)), 0.0)
        after = float(np.max(A @ sol - b))
        if after <= max(before, 1e-15 * scale):
            out[k] = sol
    return out


def vertices(P: HPolytope) -> np.ndarray:
    """All vertices of ``P`` (n <= 3); counterclockwise when n = 2."""
    return P._vertex_data[0]


@dataclass(frozen=True)
class Facet:
    index: int  # row of P.normals
    normal: np.ndarray
    offset: float
    vertex_ids: tuple  # cyclic order, counterclockwise seen from outside


def _facets(P):
    V, incidence = P._vertex_data
    n = P.dim
    scale = max(1.0, float(np.max(np.abs(V))))
    out = []
    for i in range(len(P)):
        ids = np.flatnonzero(incidence[i])
        if len(ids) < n:
            continue
        if n == 1:
            out.append(Facet(i, P.normals[i], float(P.offsets[i]), tuple(ids[:1])))
            continue
        pts = V[ids]
        centered = pts - pts.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        if np.sum(sv > VERTEX_TOL * scale) != n - 1:
            continue
        u = P.normals[i]
        if n == 2:
            # counterclockwise about the outer normal: along the tangent (-u2, u1)
            t = np.array([-u[1], u[0]])
            order = ids[np.argsort(centered @ t)]
            order = (order[0], order[-1])
        else:
            e1, e2 = plane_basis(u)
            ang = np.arctan2(centered @ e2, centered @ e1)
            order = tuple(ids[np.argsort(ang, kind="stable")])
        out.append(Facet(i, u, float(P.offsets[i]), tuple(int(k) for k in order)))
    return tuple(out)


def plane_basis(u):
    """Orthonormal (e1, e2) with e1 x e2 = u, for a unit vector u in R^3."""
    u = np.asarray(u, dtype=float)
    helper = np.eye(3)[np.argmin(np.abs(u))]
    e1 = np.cross(helper, u)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def facet_indices(P: HPolytope) -> np.ndarray:
    """Rows of ``P`` that are facets. Uses vertex data for n <= 3, LPs above."""
    if P.dim <= EXACT_MAX_DIM:
        return np.array([f.index for f in P.facets], dtype=int)
    keep = []
    A, b = P.normals, P.offsets
    for i in range(len(P)):
        mask = np.arange(len(P)) != i
        # relax the i-th constraint slightly; redundant iff it stays inactive
        res = linprog(
            -A[i],
            A_ub=np.vstack([A[mask], A[i]]),
            b_ub=np.concatenate([b[mask], [b[i] * (1 + 1e-6) + 1e-9]]),
            bounds=[(None, None)] * P.dim,
            method="highs",
        )
        if res.status == 0 and -res.fun > b[i] + LP_TOL * max(1.0, b[i]):
            keep.append(i)
    return np.array(keep, dtype=int)


def irredundant(P: HPolytope) -> HPolytope:
    """Same body with non-facet halfspaces removed."""
    idx = facet_indices(P)
    return HPolytope(P.normals[idx], P.offsets[idx])


# ---------------------------------------------------------------------------
# support and membership


def support(P: HPolytope, u) -> float:
    """h_P(u) = max x.u over P, by linear programming."""
    u = np.asarray(u, dtype=float).ravel()
    if u.shape[0] != P.dim:
        raise DimensionMismatch(f"direction has dim {u.shape[0]}, body has dim {P.dim}")
    if not np.any(u):
        raise SingularInput("zero direction")
    res = linprog(
        -u,
        A_ub=P.normals,
        b_ub=P.offsets,
        bounds=[(None, None)] * P.dim,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 3:
        raise UnboundedBody("support LP unbounded")
    if res.status != 0:
        raise UnboundedBody(f"support LP failed: {res.message}")
    return float(-res.fun)


def support_values(P: HPolytope, U) -> np.ndarray:
    """Support function on many directions (rows of U).

    Exact max over vertices when n <= 3, one LP per direction otherwise.
    """
    U = np.atleast_2d(np.asarray(U.vectors if isinstance(U, DirectionSet) else U, dtype=float))
    if U.shape[1] != P.dim:
        raise DimensionMismatch(f"directions have dim {U.shape[1]}, body has dim {P.dim}")
    if P.dim <= EXACT_MAX_DIM:
        return np.max(U @ vertices(P).T, axis=1)
    return np.array([support(P, u) for u in U])


def membership(P: HPolytope, x, tol: float = 1e-9) -> Membership:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != P.dim:
        raise DimensionMismatch(f"point has dim {x.shape[0]}, body has dim {P.dim}")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    slack = P.offsets - P.normals @ x
    if np.all(slack >= tol):
        return Membership.INSIDE
    if np.all(slack >= -tol):
        return Membership.BOUNDARY
    return Membership.OUTSIDE


# ---------------------------------------------------------------------------
# direction sets


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Finite sign-closed set of unit vectors (rows of ``vectors``)."""

    vectors: np.ndarray
    source: str = "grid"

    def __post_init__(self):
        U, _ = _unit_rows(self.vectors)
        if len(_near_pairs(U, ANGLE_TOL)):
            raise ValueError("directions must be pairwise distinct")
        anti = _match_rows(U, -U, ANGLE_TOL)
        if np.any(anti < 0):
            raise ValueError("direction set is not closed under negation")
        if not _positively_spans(U):
            raise ValueError("directions do not positively span R^n")
        U.setflags(write=False)
        anti.setflags(write=False)
        object.__setattr__(self, "vectors", U)
        object.__setattr__(self, "antipode", anti)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f"DirectionSet(dim={self.dim}, size={len(self)}, source={self.source!r})"

    def contains_all(self, other: "DirectionSet") -> bool:
        return bool(np.all(_match_rows(self.vectors, other.vectors, ANGLE_TOL) >= 0))


def merge_directions(*groups, source="merged") -> DirectionSet:
    """Union of direction groups (DirectionSets or arrays), sign-closed and
    deduplicated; earlier groups win ties so exact facet normals survive."""
    rows = []
    for g in groups:
        arr = g.vectors if isinstance(g, DirectionSet) else np.atleast_2d(np.asarray(g, float))
        arr, _ = _unit_rows(arr)
        rows.append(arr)
        rows.append(-arr)
    U = np.vstack(rows)
    U = _dedupe_points(U, ANGLE_TOL)
    return DirectionSet(U, source=source)


def angle_grid(m: int = 720) -> DirectionSet:
    """m equally spaced planar directions (m rounded up to even)."""
    half = (int(m) + 1) // 2
    theta = np.pi * np.arange(half) / half
    H = np.column_stack([np.cos(theta), np.sin(theta)])
    H[np.abs(H) < 1e-15] = 0.0
    return DirectionSet(np.vstack([H, -H]), source="grid")


def fibonacci_grid(m: int = 2000) -> DirectionSet:
    """Symmetrized Fibonacci sphere: m/2 points on the upper hemisphere and their negatives."""
    half = (int(m) + 1) // 2
    i = np.arange(half)
    z = (i + 0.5) / half
    r = np.sqrt(1 - z**2)
    phi = i * np.pi * (3 - np.sqrt(5))
    H = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return DirectionSet(np.vstack([H, -H]), source="grid")


def random_sphere_grid(n: int, m: int, seed: int = 0) -> DirectionSet:
    rng = np.random.default_rng(seed)
    H = rng.standard_normal(((int(m) + 1) // 2, n))
    H = np.vstack([np.eye(n), H])
    return merge_directions(H, source="grid")


def direction_grid(n: int, m: int | None = None) -> DirectionSet:
    """Default grid per dimension: 720 angles (2-D), 2000 Fibonacci points (3-D)."""
    if n == 1:
        return DirectionSet(np.array([[1.0], [-1.0]]))
    if n == 2:
        return angle_grid(720 if m is None else m)
    if n == 3:
        return fibonacci_grid(2000 if m is None else m)
    return random_sphere_grid(n, 2000 if m is None else m)


def facet_normals(P: HPolytope) -> np.ndarray:
    if P.dim <= EXACT_MAX_DIM:
        return P.normals[facet_indices(P)]
    return P.normals


def default_directions(bodies, m: int | None = None) -> DirectionSet:
    """Default grid merged with the facet normals of every body."""
    bodies = list(bodies)
    n = bodies[0].dim
    return merge_directions(*[facet_normals(B) for B in bodies], direction_grid(n, m))


def refine_directions(U: DirectionSet, factor: int = 4) -> DirectionSet:
    """A superset of U built from a grid ``factor`` times larger."""
    n = U.dim
    return merge_directions(U, direction_grid(n, factor * len(U)))


@dataclass(frozen=True, eq=False)
class SupportProfile:
    """Positive even values attached to a direction set."""

    directions: DirectionSet
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.values, dtype=float).ravel()
        if f.shape[0] != len(self.directions):
            raise ValueError(f"{f.shape[0]} values for {len(self.directions)} directions")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("profile values must be finite and positive")
        if not np.allclose(f[self.directions.antipode], f, rtol=1e-9, atol=0):
            raise ValueError("profile is not even")
        f.setflags(write=False)
        object.__setattr__(self, "values", f)


def profile(P: HPolytope, U: DirectionSet) -> SupportProfile:
    return SupportProfile(U, support_values(P, U))


# ---------------------------------------------------------------------------
# Wulff construction and symmetrization


def wulff(U: DirectionSet, f) -> HPolytope:
    """Intersection of the halfspaces x.u <= f(u) over u in U."""
    if isinstance(f, SupportProfile):
        if f.directions is not U and not (
            len(f.directions) == len(U) and np.array_equal(f.directions.vectors, U.vectors)
        ):
            raise ValueError("profile is attached to a different direction set")
        values = f.values
    else:
        values = SupportProfile(U, f).values
    try:
        return HPolytope(U.vectors, values)
    except UnboundedBody as exc:
        raise UnboundedResult(str(exc)) from None


def normalize_unconditional(P) -> HPolytope:
    """Close the halfspace list under all coordinate sign flips.

    ``P`` may also be a raw ``(normals, offsets)`` pair, which need not be
    bounded before closure.
    """
    if isinstance(P, HPolytope):
        A0, b0 = P.normals, P.offsets
    else:
        A0, norms = _unit_rows(P[0])
        b0 = np.asarray(P[1], dtype=float).ravel() / norms
    n = A0.shape[1]
    signs = np.array(list(itertools.product([1.0, -1.0], repeat=n)))
    A = np.vstack([A0 * s for s in signs])
    b = np.tile(b0, len(signs))
    return HPolytope(A, b, unconditional=True)


def intersect(*bodies: HPolytope) -> HPolytope:
    dims = {B.dim for B in bodies}
    if len(dims) != 1:
        raise DimensionMismatch(f"bodies have dimensions {sorted(dims)}")
    return HPolytope(np.vstack([B.normals for B in bodies]), np.concatenate([B.offsets for B in bodies]))


def linear_image(P: HPolytope, M) -> HPolytope:
    """{M x : x in P} for an invertible matrix M."""
    M = np.asarray(M, dtype=float)
    if M.shape != (P.dim, P.dim):
        raise DimensionMismatch(f"matrix shape {M.shape} for dim {P.dim}")
    Minv = np.linalg.inv(M)
    return HPolytope(P.normals @ Minv, P.offsets)


def dilate(P: HPolytope, c: float) -> HPolytope:
    return HPolytope(P.normals, c * P.offsets)


def product(*bodies: HPolytope) -> HPolytope:
    """Cartesian product, coordinates concatenated in order."""
    n = sum(B.dim for B in bodies)
    rows, offs, start = [], [], 0
    for B in bodies:
        block = np.zeros((len(B), n))
        block[:, start:start + B.dim] = B.normals
        rows.append(block)
        offs.append(B.offsets)
        start += B.dim
    return HPolytope(np.vstack(rows), np.concatenate(offs))


# ---------------------------------------------------------------------------
# standard bodies


def box(halfwidths) -> HPolytope:
    w = np.asarray(halfwidths, dtype=float).ravel()
    n = w.shape[0]
    return HPolytope(np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([w, w]))


def cube(n: int) -> HPolytope:
    """C_n = [-1/2, 1/2]^n."""
    return box(np.full(n, 0.5))


def cross_polytope(n: int, radius: float = 1.0) -> HPolytope:
    """{x : sum |x_i| <= radius}."""
    signs = np.array(list(itertools.product([1.0, -1.0], repeat=n)))
    return HPolytope(signs, np.full(len(signs), radius))


def regular_polygon(k: int, inradius: float = 1.0, phase: float = 0.0) -> HPolytope:
    theta = phase + 2 * np.pi * np.arange(k) / k
    return HPolytope(np.column_stack([np.cos(theta), np.sin(theta)]), np.full(k, inradius))


def ball_polytope(n: int, m: int = 256) -> HPolytope:
    """Circumscribed polytope of the unit ball with m sign-closed facet normals."""
    U = direction_grid(n, m)
    return HPolytope(U.vectors, np.ones(len(U)))


def rotate2d(P: HPolytope, angle: float) -> HPolytope:
    c, s = np.cos(angle), np.sin(angle)
    return linear_image(P, np.array([[c, -s], [s, c]]))


def from_vertices(points) -> HPolytope:
    """H-representation of conv(points); the origin must be interior."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] == 1:
        lo, hi = pts.min(), pts.max()
        return HPolytope(np.array([[1.0], [-1.0]]), np.array([hi, -lo]))
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateBody(str(exc).splitlines()[0]) from None
    eq = hull.equations
    return HPolytope(eq[:, :-1], -eq[:, -1])
