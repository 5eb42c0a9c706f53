import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logbm.core import box, cross_polytope, cube, dilate, product, rotate2d
from logbm.errors import NotUnconditional
from logbm.generators import random_product_body, random_unconditional_polygon, random_unconditional_polytope
from logbm.lab import check_log_bm
from logbm.measures import cone_volume_measure
from logbm.structure import (
    DiagonalMap,
    EqualityClass,
    classify_equality,
    decompose_irreducible,
    fit_diagonal,
    fit_dilate,
)

seeds = st.integers(0, 2**32 - 1)


def test_cube_splits_into_segments():
    D = decompose_irreducible(cube(3))
    assert D.blocks == ((0,), (1,), (2,))
    assert all(F.dim == 1 for F in D.factors)
    assert D.verified


def test_cross_polytope_is_irreducible():
    D = decompose_irreducible(cross_polytope(2))
    assert D.blocks == ((0, 1),) and D.irreducible == (True,)


def test_square_times_cross_polytope():
    D = decompose_irreducible(product(cube(2), cross_polytope(2)))
    assert D.blocks == ((0,), (1,), (2, 3))
    assert D.verified


def test_redundant_diagonal_does_not_couple():
    P = product(cube(1), cube(1))
    from logbm.core import HPolytope, normalize_unconditional

    Q = normalize_unconditional(HPolytope(np.vstack([P.normals, [[1, 1]]]), np.concatenate([P.offsets, [5.0]])))
    assert decompose_irreducible(Q).blocks == ((0,), (1,))


def test_decompose_needs_unconditional():
    with pytest.raises(NotUnconditional):
        decompose_irreducible(rotate2d(cube(2), 0.4))


@given(seeds)
def test_product_round_trip(seed):
    rng = np.random.default_rng(seed)
    P, blocks = random_product_body(rng, int(rng.integers(2, 4)))
    D = decompose_irreducible(P)
    assert [list(b) for b in D.blocks] == [list(b) for b in blocks]
    assert D.verified
    R = D.rebuild()
    assert np.allclose(R.bounding_box, P.bounding_box)


def test_fit_dilate_examples():
    K = cube(2)
    assert fit_dilate(K, dilate(K, 3)) == pytest.approx(3)
    assert fit_dilate(K, K) == pytest.approx(1)
    assert fit_dilate(box([1, 1]), rotate2d(box([1, 1]), np.pi / 4)) is None


def test_fit_diagonal_examples():
    X = cross_polytope(2)
    T = fit_diagonal(X, DiagonalMap((2, 3)).apply(X))
    assert T.entries == pytest.approx((2, 3))
    assert fit_diagonal(cube(2), cross_polytope(2, 0.5)) is None
    assert fit_diagonal(X, X).entries == pytest.approx((1, 1))


@given(seeds)
def test_fit_diagonal_recovers_scaling(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    K = random_unconditional_polygon(rng) if n == 2 else random_unconditional_polytope(rng, 3)
    t = rng.uniform(0.3, 3.0, n)
    T = fit_diagonal(K, DiagonalMap(t).apply(K))
    assert T is not None
    assert np.allclose(T.entries, t, rtol=1e-10)


def test_classify_examples():
    assert classify_equality(box([1, 1]), box([2, 3]), 0.5) is EqualityClass.EQUALITY
    X = cross_polytope(2)
    assert classify_equality(X, DiagonalMap((1, 2)).apply(X), 0.5) is EqualityClass.STRICT
    assert classify_equality(X, dilate(X, 2), 0.5) is EqualityClass.EQUALITY
    near = DiagonalMap((1, 1 + 1e-7)).apply(X)
    assert classify_equality(X, near, 0.5) is EqualityClass.UNDETERMINED


@given(st.floats(0.2, 5.0))
def test_classify_dilates(c):
    X = cross_polytope(2)
    assert classify_equality(X, dilate(X, c), 0.3) is EqualityClass.EQUALITY


def test_classification_concords_with_margins():
    X = cross_polytope(2)
    strict = check_log_bm(X, DiagonalMap((1, 2)).apply(X), 0.5, mc=10**4, seed=0)
    assert strict.margin >= 1e-6
    equal = check_log_bm(X, dilate(X, 2), 0.5, mc=10**4, seed=0)
    assert abs(equal.margin) <= 1e-6


def test_equal_cone_volume_measures_for_product_dilates(rng):
    from logbm.core import product as prod

    K1, K2 = random_unconditional_polygon(rng), cube(1)
    c1 = 1.7
    c2 = c1 ** (-2.0)  # c1^2 c2^1 = 1 keeps every facet's cone volume
    K = prod(K1, K2)
    L = prod(dilate(K1, c1), dilate(K2, c2))
    assert cone_volume_measure(K).matches(cone_volume_measure(L), angle_tol=1e-9, rtol=1e-9)
