import itertools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_force_vertices(P, tol=1e-9):
    """Solve every n-subset of constraints and keep feasible points."""
    A, b = P.normals, P.offsets
    n = P.dim
    pts = []
    for idx in itertools.combinations(range(len(b)), n):
        M = A[list(idx)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b[list(idx)])
        if np.all(A @ x <= b + tol):
            pts.append(x)
    out = []
    for x in pts:
        if all(np.linalg.norm(x - y) > 1e-7 for y in out):
            out.append(x)
    return np.array(out)
