"""Random symmetric and unconditional polytopes for tests and searches.

All generators build H-representations directly, so symmetry and
unconditionality hold exactly in the stored halfspace lists.
"""
from __future__ import annotations

import numpy as np

from .core import HPolytope, normalize_unconditional


def random_symmetric_polygon(rng, k_min=2, k_max=7, offsets=(0.5, 1.5)) -> HPolytope:
    """Centrally symmetric polygon with 2k random edge normals (some may be redundant)."""
    k = int(rng.integers(k_min, k_max + 1))
    while True:
        theta = np.sort(rng.uniform(0, np.pi, size=k))
        # at least two directions apart by a visible angle, else the body is thin
        if k >= 2 and np.ptp(theta) > 0.3 and np.ptp(theta) < np.pi - 0.3:
            break
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    b = rng.uniform(*offsets, size=k)
    return HPolytope(np.vstack([U, -U]), np.concatenate([b, b]), symmetric=True)


def random_unconditional_polygon(rng, k_min=0, k_max=4, offsets=(0.5, 1.5)) -> HPolytope:
    """Axis facets plus k random first-quadrant normals, closed under sign flips."""
    k = int(rng.integers(k_min, k_max + 1))
    theta = rng.uniform(0.05, np.pi / 2 - 0.05, size=k)
    U = np.vstack([np.eye(2), np.column_stack([np.cos(theta), np.sin(theta)])])
    b = rng.uniform(*offsets, size=k + 2)
    return normalize_unconditional((U, b))


def random_symmetric_polytope(rng, n=3, k_min=None, k_max=None, offsets=(0.5, 1.5)) -> HPolytope:
    k_min = n if k_min is None else k_min
    k_max = 3 * n if k_max is None else k_max
    k = int(rng.integers(k_min, k_max + 1))
    while True:
        U = rng.standard_normal((k, n))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        if np.linalg.svd(U, compute_uv=False)[-1] > 0.2:
            break
    b = rng.uniform(*offsets, size=k)
    return HPolytope(np.vstack([U, -U]), np.concatenate([b, b]), symmetric=True)


def random_unconditional_polytope(rng, n=3, k_min=0, k_max=None, offsets=(0.5, 1.5)) -> HPolytope:
    k_max = 2 * n if k_max is None else k_max
    k = int(rng.integers(k_min, k_max + 1))
    U = np.abs(rng.standard_normal((k, n))) + 0.05
    U = np.vstack([np.eye(n), U / np.linalg.norm(U, axis=1, keepdims=True)])
    b = rng.uniform(*offsets, size=k + n)
    return normalize_unconditional((U, b))


def random_symmetric_body(rng, n):
    if n == 2:
        return random_symmetric_polygon(rng)
    return random_symmetric_polytope(rng, n)


def random_unconditional_body(rng, n):
    if n == 2:
        return random_unconditional_polygon(rng)
    return random_unconditional_polytope(rng, n)


def random_irreducible_unconditional(rng, n, k_max=3, offsets=(0.5, 1.5)) -> HPolytope:
    """Unconditional body whose facets couple all n coordinates.

    Every extra normal a is strictly positive and gets offset rho * a.w with
    rho < 1, so it cuts the corner w of the axis box and at least one such
    facet survives.
    """
    w = rng.uniform(*offsets, size=n)
    if n == 1:
        return HPolytope(np.array([[1.0], [-1.0]]), np.array([w[0], w[0]]), unconditional=True)
    k = int(rng.integers(1, k_max + 1))
    U = np.abs(rng.standard_normal((k, n))) + 0.2
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    b = rng.uniform(0.6, 0.95, size=k) * (U @ w)
    return normalize_unconditional((np.vstack([np.eye(n), U]), np.concatenate([w, b])))


def random_product_body(rng, n, max_block=3):
    """(body, blocks): a product of irreducible unconditional factors placed on
    a random partition of the coordinates."""
    perm = rng.permutation(n)
    blocks, start = [], 0
    while start < n:
        size = int(rng.integers(1, min(max_block, n - start) + 1))
        blocks.append(tuple(sorted(int(i) for i in perm[start:start + size])))
        start += size
    rows, offs = [], []
    for block in blocks:
        F = random_irreducible_unconditional(rng, len(block))
        R = np.zeros((len(F), n))
        R[:, list(block)] = F.normals
        rows.append(R)
        offs.append(F.offsets)
    body = HPolytope(np.vstack(rows), np.concatenate(offs), unconditional=True)
    return body, sorted(blocks)
