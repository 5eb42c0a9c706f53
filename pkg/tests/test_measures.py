import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from logbm.core import box, cross_polytope, cube, support_values, vertices
from logbm.errors import DimensionTooHigh, EmptyMeasure, ZeroHits
from logbm.generators import random_symmetric_body, random_symmetric_polygon, random_symmetric_polytope
from logbm.measures import (
    SphericalMeasure,
    SubspaceSpec,
    VolumeEstimate,
    candidate_subspaces,
    cone_volume_measure,
    subspace_concentration,
    surface_area_measure,
    volume,
    volume_mc,
)
from logbm.report import Verdict

seeds = st.integers(0, 2**32 - 1)


def test_standard_volumes():
    assert volume(cube(2)).value == 1.0
    assert volume(cube(3)).value == pytest.approx(1.0, abs=1e-15)
    assert volume(cross_polytope(2)).value == 2.0
    assert volume(cross_polytope(3)).value == pytest.approx(8 / 6, abs=1e-15)
    assert volume(cube(2)).method == "exact-triangulation"


@given(seeds)
def test_exact_volume_matches_qhull(seed):
    P = random_symmetric_body(np.random.default_rng(seed), 2 + seed % 2)
    assert volume(P).value == pytest.approx(ConvexHull(vertices(P)).volume, rel=1e-12)


def test_exact_3d_within_mc_ci(rng):
    P = random_symmetric_polytope(rng, 3)
    w = P.bounding_box
    est = volume_mc(P.contains, (-w, w), 10**6, 11)
    assert abs(est.value - volume(P).value) <= est.error


def test_volume_estimate_invariants():
    with pytest.raises(ValueError):
        VolumeEstimate(1.0, "exact-triangulation", error=0.1)
    with pytest.raises(ValueError):
        VolumeEstimate(1.0, "monte-carlo", error=-1)


def test_monte_carlo_volume_of_square():
    C = cube(2)
    est = volume_mc(C.contains, (-np.ones(2), np.ones(2)), 10**6, 0)
    assert abs(est.value - 1.0) <= min(est.error, 0.004)
    # 99% half-width for p = 1/4 in a box of volume 4
    assert est.error == pytest.approx(2.5758 * 4 * np.sqrt(0.25 * 0.75 / 10**6), rel=1e-2)
    again = volume_mc(C.contains, (-np.ones(2), np.ones(2)), 10**6, 0)
    assert again == est
    with pytest.raises(ZeroHits):
        volume_mc(C.contains, (np.full(2, 5.0), np.full(2, 6.0)), 10**4, 0)
    with pytest.raises(ValueError):
        volume_mc(C.contains, (-np.ones(2), np.ones(2)), 10, 0)


def test_monte_carlo_high_dimension():
    est = volume(cube(4), samples=2 * 10**5, seed=1)
    assert est.method == "monte-carlo"
    assert abs(est.value - 1.0) <= est.error


def test_ci_halves_with_doubled_samples():
    C = cross_polytope(2)
    box_ = (-np.ones(2), np.ones(2))
    ratios = [
        volume_mc(C.contains, box_, 20_000, 2 * k + 1).error / volume_mc(C.contains, box_, 10_000, 2 * k).error
        for k in range(20)
    ]
    assert 0.6 <= np.mean(ratios) <= 0.82


def test_surface_area_of_cubes():
    S = surface_area_measure(cube(2))
    assert len(S) == 4 and np.allclose(S.weights, 1)
    S3 = surface_area_measure(cube(3))
    assert len(S3) == 6 and np.allclose(S3.weights, 1)
    with pytest.raises(DimensionTooHigh):
        surface_area_measure(cube(4))


@given(seeds)
def test_surface_area_matches_edge_lengths(seed):
    P = random_symmetric_polygon(np.random.default_rng(seed))
    V = vertices(P)
    edges = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
    S = surface_area_measure(P)
    assert np.sort(S.weights) == pytest.approx(np.sort(edges), abs=1e-12)
    assert S.even


def test_cone_volume_of_cubes():
    S = cone_volume_measure(cube(2))
    assert np.allclose(S.weights, 0.5) and S.total == pytest.approx(2)
    S3 = cone_volume_measure(cube(3))
    assert np.allclose(S3.weights, 0.5) and S3.total == pytest.approx(3)


@given(seeds)
def test_cone_identity(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    P = random_symmetric_body(rng, n)
    assert cone_volume_measure(P).total == pytest.approx(n * volume(P).value, abs=1e-9)


@given(seeds)
def test_minkowski_first_inequality(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    K, L = random_symmetric_body(rng, n), random_symmetric_body(rng, n)
    S = surface_area_measure(K)
    lhs = np.dot(support_values(L, S.directions), S.weights) / n
    assert lhs >= volume(L).value ** (1 / n) * volume(K).value ** ((n - 1) / n) - 1e-9


def test_measure_validation():
    with pytest.raises(ValueError):
        SphericalMeasure([[1, 0], [-1, 0]], [1, 2])
    with pytest.raises(ValueError):
        SphericalMeasure([[1, 0], [1, 1e-12]], [1, 1], even=False)
    m = SphericalMeasure([[2, 0], [-1, 0]], [1, 1])
    assert m.weight_at([1, 0]) == 1 and m.matches(SphericalMeasure([[-1, 0], [1, 0]], [1, 1]))


def test_subspace_basis():
    S = SubspaceSpec.span([[1, 1, 0], [2, 2, 0]])
    assert S.dim == 1
    with pytest.raises(ValueError):
        SubspaceSpec([[1, 1]])
    assert len(candidate_subspaces(np.eye(3))) == 6


def test_concentration_cube_equality_pairs():
    r = subspace_concentration(cone_volume_measure(cube(2)))
    assert r.verdict is Verdict.HOLDS
    assert len(r.details["equality_pairs"]) == 2
    assert r.margin == pytest.approx(0.0, abs=1e-12)


def test_concentration_violation():
    r = subspace_concentration(SphericalMeasure([[1, 0], [-1, 0]], [1, 1]))
    assert r.verdict is Verdict.VIOLATED
    assert len(r.details["violations"]) == 1


def test_concentration_random_polygons(rng):
    for _ in range(20):
        assert subspace_concentration(cone_volume_measure(random_symmetric_polygon(rng))).holds


def test_concentration_empty():
    with pytest.raises(EmptyMeasure):
        subspace_concentration(SphericalMeasure([[1, 0], [-1, 0]], [0, 0]))


def test_box_cone_volume_is_not_concentrated_beyond_half():
    r = subspace_concentration(cone_volume_measure(box([3, 0.2])))
    assert r.holds
