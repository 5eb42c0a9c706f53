"""Product decomposition of unconditional bodies, dilate and diagonal fits,
and the equality-case classifier for the unconditional log-BM inequality."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import (
    EXACT_MAX_DIM,
    HPolytope,
    direction_grid,
    facet_normals,
    irredundant,
    merge_directions,
    support_values,
)
from .errors import DimensionMismatch, NotUnconditional
from .measures import volume

COUPLING_TOL = 1e-10
PROFILE_RTOL = 1e-8
RECON_TOL = 1e-9
SPREAD_EQUAL = 1e-8
SPREAD_STRICT = 1e-6


def probe_directions(*bodies, m: int | None = None):
    """A ~10^3 direction grid (smaller above n = 3, where support costs an LP)
    merged with the bodies' facet normals and the coordinate axes."""
    n = bodies[0].dim
    if m is None:
        m = 1000 if n <= EXACT_MAX_DIM else 200
    return merge_directions(*[facet_normals(B) for B in bodies], np.eye(n), direction_grid(n, m))


@dataclass(frozen=True, eq=False)
class ProductDecomposition:
    blocks: tuple  # tuples of coordinate indices, sorted by first index
    factors: tuple  # one HPolytope per block
    irreducible: tuple
    reconstruction_error: float = 0.0

    def __post_init__(self):
        flat = sorted(i for b in self.blocks for i in b)
        if flat != list(range(len(flat))):
            raise ValueError("blocks must partition the coordinates")
        if len(self.factors) != len(self.blocks) or len(self.irreducible) != len(self.blocks):
            raise ValueError("one factor and one flag per block")

    @property
    def dim(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def verified(self) -> bool:
        return self.reconstruction_error <= RECON_TOL

    def rebuild(self) -> HPolytope:
        """Product of the factors, coordinates placed back in their blocks."""
        n = self.dim
        rows, offs = [], []
        for block, F in zip(self.blocks, self.factors):
            R = np.zeros((len(F), n))
            R[:, list(block)] = F.normals
            rows.append(R)
            offs.append(F.offsets)
        return HPolytope(np.vstack(rows), np.concatenate(offs))


def _section(P: HPolytope, block) -> HPolytope:
    """P intersected with the coordinate subspace of ``block``."""
    A = P.normals[:, list(block)]
    keep = np.linalg.norm(A, axis=1) > COUPLING_TOL
    return HPolytope(A[keep], P.offsets[keep])


def decompose_irreducible(P: HPolytope) -> ProductDecomposition:
    """Blocks are the connected components of the coordinate-coupling graph of
    P's facet normals; the split is confirmed by comparing support functions."""
    if not P.unconditional:
        raise NotUnconditional("decomposition needs an unconditional body")
    n = P.dim
    Q = irredundant(P)
    support_mask = np.abs(Q.normals) > COUPLING_TOL
    I, J = [], []
    for row in support_mask:
        idx = np.flatnonzero(row)
        I.extend(np.repeat(idx[0], len(idx)))
        J.extend(idx)
    graph = coo_matrix((np.ones(len(I)), (I, J)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    blocks = []
    for lab in dict.fromkeys(labels):
        blocks.append(tuple(int(i) for i in np.flatnonzero(labels == lab)))
    blocks.sort()
    factors = tuple(_section(Q, b) for b in blocks)
    U = probe_directions(Q)
    h = support_values(Q, U)
    # the support function of a product is the sum of the factors' supports
    h_prod = np.zeros(len(U))
    for b, F in zip(blocks, factors):
        V = U.vectors[:, list(b)]
        nz = np.linalg.norm(V, axis=1) > 0
        h_prod[nz] += support_values(F, V[nz])
    err = float(np.max(np.abs(h - h_prod) / h))
    return ProductDecomposition(tuple(blocks), factors, tuple(True for _ in blocks), err)


def fit_dilate(K: HPolytope, L: HPolytope, rtol: float = PROFILE_RTOL):
    """c with L = cK, or None. The candidate comes from volumes (n <= 3) and
    is accepted only if the support profiles agree on the test grid."""
    if K.dim != L.dim:
        raise DimensionMismatch("bodies must share a dimension")
    n = K.dim
    U = probe_directions(K, L)
    hk, hl = support_values(K, U), support_values(L, U)
    if n <= EXACT_MAX_DIM:
        c = (volume(L).value / volume(K).value) ** (1.0 / n)
    else:
        c = float(hl[0] / hk[0])
    if np.all(np.abs(hl - c * hk) <= rtol * hk):
        return float(c)
    return None


@dataclass(frozen=True)
class DiagonalMap:
    entries: tuple

    def __post_init__(self):
        e = tuple(float(x) for x in np.ravel(self.entries))
        if any(not x > 0 for x in e):
            raise ValueError("diagonal entries must be positive")
        object.__setattr__(self, "entries", e)

    def apply(self, P: HPolytope) -> HPolytope:
        return HPolytope(P.normals / np.asarray(self.entries), P.offsets)


def fit_diagonal(K: HPolytope, L: HPolytope, rtol: float = PROFILE_RTOL):
    """T = diag(t) with L = T K, or None; t_i = h_L(e_i) / h_K(e_i)."""
    if not (K.unconditional and L.unconditional):
        raise NotUnconditional("diagonal fitting needs unconditional bodies")
    if K.dim != L.dim:
        raise DimensionMismatch("bodies must share a dimension")
    n = K.dim
    E = np.eye(n)
    t = support_values(L, E) / support_values(K, E)
    U = probe_directions(K, L)
    # h_{TK}(u) = h_K(T u)
    hl = support_values(L, U)
    htk = support_values(K, U.vectors * t)
    if np.all(np.abs(hl - htk) <= rtol * hl):
        return DiagonalMap(tuple(t))
    return None


class EqualityClass(str, enum.Enum):
    EQUALITY = "equality-case"
    STRICT = "strict"
    UNDETERMINED = "undetermined"


def block_spread(T: DiagonalMap, blocks) -> float:
    """Largest relative spread (max - min) / max of T's entries within a block."""
    e = np.asarray(T.entries)
    return max(float(np.ptp(e[list(b)]) / np.max(e[list(b)])) for b in blocks)


def classify_equality(K: HPolytope, L: HPolytope, lam: float | None = None) -> EqualityClass:
    """Equality case iff L = T K with T diagonal and constant on every
    irreducible block of K. ``lam`` does not affect the answer for lam in
    (0, 1) and is accepted for signature symmetry with the checks."""
    if lam is not None and not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if not (K.unconditional and L.unconditional):
        raise NotUnconditional("classification needs unconditional bodies")
    T = fit_diagonal(K, L)
    if T is None:
        return EqualityClass.STRICT
    spread = block_spread(T, decompose_irreducible(K).blocks)
    if spread <= SPREAD_EQUAL:
        return EqualityClass.EQUALITY
    if spread > SPREAD_STRICT:
        return EqualityClass.STRICT
    return EqualityClass.UNDETERMINED
