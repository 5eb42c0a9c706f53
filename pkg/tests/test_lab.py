import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logbm.core import box, cube, dilate, rotate2d
from logbm.errors import DimensionTooHigh, LatticeMismatch, WeightSumError
from logbm.generators import random_symmetric_polygon, random_unconditional_polygon
from logbm.lab import (
    Lattice,
    SearchConfig,
    check_log_bm,
    check_log_minkowski,
    check_lp_bm,
    check_lp_minkowski,
    check_multi_minkowski,
    check_prekopa_leindler,
    scan_b_property,
    scan_weak_b_property,
    search_counterexample,
)
from logbm.report import CheckReport, Verdict, decide, emit_plot_data

seeds = st.integers(0, 2**32 - 1)


def test_decide_trichotomy():
    assert decide(-1.0, 0.1, 1e-9) is Verdict.VIOLATED
    assert decide(0.5, 0.1, 1e-9) is Verdict.HOLDS
    assert decide(0.05, 0.1, 1e-9) is Verdict.INCONCLUSIVE
    assert decide(-0.05, 0.1, 1e-9) is Verdict.INCONCLUSIVE


def test_lp_bm_anchors(rng):
    K = random_symmetric_polygon(rng)
    assert abs(check_lp_bm(K, K, 0.5, 0.3).margin) <= 1e-12
    r = check_lp_bm(box([1, 1]), box([3, 3]), 1, 0.5)
    assert r.lhs == pytest.approx(4) and r.rhs == pytest.approx(4)
    assert abs(r.margin) <= 1e-9


@given(seeds)
def test_lp_bm_unconditional_half(seed):
    rng = np.random.default_rng(seed)
    K, L = random_unconditional_polygon(rng), random_unconditional_polygon(rng)
    r = check_lp_bm(K, L, 0.5, float(rng.uniform(0.1, 0.9)))
    assert r.margin >= -1e-6 and r.verdict is not Verdict.VIOLATED


def test_lp_minkowski_anchors(rng):
    K = random_unconditional_polygon(rng)
    assert abs(check_lp_minkowski(K, K, 0.4).margin) <= 1e-12
    assert abs(check_lp_minkowski(dilate(K, 2), K, 0.4).margin) <= 1e-9
    with pytest.raises(DimensionTooHigh):
        check_lp_minkowski(cube(4), cube(4), 0.5)


@given(seeds)
def test_lp_minkowski_unconditional(seed):
    rng = np.random.default_rng(seed)
    K, L = random_unconditional_polygon(rng), random_unconditional_polygon(rng)
    assert check_lp_minkowski(K, L, 0.3).margin >= -1e-9


def test_log_minkowski_anchors(rng):
    K = random_unconditional_polygon(rng)
    assert abs(check_log_minkowski(K, K).margin) <= 1e-12
    r = check_log_minkowski(dilate(K, 1.7), K)
    assert abs(r.margin) <= 1e-9 * max(1.0, abs(r.lhs))


@given(seeds)
def test_log_minkowski_unconditional(seed):
    rng = np.random.default_rng(seed)
    K, L = random_unconditional_polygon(rng), random_unconditional_polygon(rng)
    assert check_log_minkowski(K, L).margin >= -1e-9


def test_multi_minkowski_reductions(rng):
    K, L1 = random_symmetric_polygon(rng), random_unconditional_polygon(rng)
    a = check_multi_minkowski(K, [L1, K], [0.3, 0.7])
    b = check_lp_minkowski(L1, K, 0.3)
    assert (a.lhs, a.rhs, a.margin) == (b.lhs, b.rhs, b.margin)
    classic = check_multi_minkowski(K, [L1], [1.0])
    assert classic.margin >= -1e-9
    triple = [random_unconditional_polygon(rng) for _ in range(3)]
    assert check_multi_minkowski(K, triple, [0.5, 0.25, 0.25]).margin >= -1e-9
    with pytest.raises(WeightSumError):
        check_multi_minkowski(K, triple, [0.5, 0.25, 0.3])


def test_log_bm_anchors():
    K = box([1, 1])
    same = check_log_bm(K, K, 0.5, mc=10**4, seed=1)
    assert same.margin == pytest.approx(0, abs=1e-12) and same.holds
    r = check_log_bm(K, box([2, 1]), 0.5, mc=10**5, seed=1)
    assert r.lhs == pytest.approx(4 * np.sqrt(2), abs=1e-12)
    assert r.rhs == pytest.approx(np.sqrt(32), abs=1e-12)
    assert abs(r.margin) <= 1e-12 and r.holds


def test_log_bm_rotated_square_is_strict():
    K = box([1, 1])
    r = check_log_bm(K, rotate2d(K, np.pi / 4), 0.5, sweep=[64, 256, 1024])
    ups = r.details["upper_witness"]
    assert all(a >= b - 1e-12 for a, b in zip(ups, ups[1:]))
    assert r.margin > 1e-3 and r.holds
    # square and diamond are both unconditional, so an inner witness exists
    assert r.details["lower_margin"] > 0


def test_log_bm_lower_witness_for_unconditional(rng):
    K, L = random_unconditional_polygon(rng), random_unconditional_polygon(rng)
    r = check_log_bm(K, L, 0.4, mc=2 * 10**5, seed=5)
    d = r.details
    assert d["lower_witness"] <= r.lhs + 3 * d["lower_ci"]
    assert r.holds


def test_log_bm_reports_are_deterministic(rng):
    K, L = random_unconditional_polygon(rng), random_unconditional_polygon(rng)
    a = check_log_bm(K, L, 0.4, mc=10**4, seed=5).to_json()
    b = check_log_bm(K, L, 0.4, mc=10**4, seed=5).to_json()
    assert a == b
    assert CheckReport.from_dict(__import__("json").loads(a)).to_json() == a


def _gauss_lattice():
    return Lattice.centered(6.0, 0.01)


def test_prekopa_leindler_gaussian():
    lat = _gauss_lattice()
    f = lat.sample(lambda x: np.exp(-(x**2)))
    r = check_prekopa_leindler(f, f, f, lat, 0.5)
    assert r.details["hypothesis_holds"]
    assert r.margin >= -1e-6 and abs(r.margin) <= 1e-4
    assert r.lhs == pytest.approx(np.sqrt(np.pi), abs=1e-4)


def test_prekopa_leindler_indicators():
    lat = Lattice.centered(6.0, 0.01, offset=True)
    ind = lambda a: lat.sample(lambda x: (np.abs(x) <= a).astype(float))  # noqa: E731
    same = check_prekopa_leindler(ind(1), ind(1), ind(1), lat, 0.5)
    assert abs(same.margin) <= 1e-12
    r = check_prekopa_leindler(ind(1), ind(2), ind(1.5), lat, 0.5)
    assert r.details["hypothesis_holds"]
    assert r.margin == pytest.approx(3 - 2 * np.sqrt(2), abs=1e-4)


def test_prekopa_leindler_failed_hypothesis_is_inconclusive():
    lat = Lattice.centered(3.0, 0.05)
    ind = lambda a: lat.sample(lambda x: (np.abs(x) <= a).astype(float))  # noqa: E731
    r = check_prekopa_leindler(ind(1), ind(2), ind(0.5), lat, 0.5)
    assert r.verdict is Verdict.INCONCLUSIVE


def test_prekopa_leindler_lattice_mismatch():
    lat = Lattice.centered(1.0, 0.1)
    with pytest.raises(LatticeMismatch):
        check_prekopa_leindler(np.ones(5), np.ones(5), np.ones(5), lat, 0.5)


def test_prekopa_leindler_two_dimensional():
    lat = Lattice.centered(2.0, 0.1, dim=2)
    f = lat.sample(lambda x, y: np.exp(-(x**2) - 2 * y**2))
    g = lat.sample(lambda x, y: np.exp(-2 * x**2 - y**2))
    h = lat.sample(lambda x, y: np.exp(-(x**2) - y**2))
    r = check_prekopa_leindler(f, g, h, lat, 0.5)
    assert r.details["hypothesis_holds"] and r.holds


def test_b_scan_cube_closed_form():
    c, t = 0.8, np.array([1.5, 0.7])
    s = np.round(np.arange(-20, 21) * 0.1, 12)
    K = dilate(cube(2), c)
    r = scan_b_property(cube(2), K, t, s)
    expect = np.prod(np.minimum(1.0, c * t[None, :] ** s[:, None]), axis=1)
    assert np.allclose(r.details["f"], expect, atol=1e-12)
    assert r.holds and r.details["violations"] == 0
    assert all(row["f"] <= 1 + 1e-12 for row in r.details["series"])


def test_b_scan_trivial_t(rng):
    K = random_symmetric_polygon(rng)
    r = scan_b_property(cube(2), K, [1, 1], np.linspace(-1, 1, 11))
    assert np.ptp(r.details["f"]) == 0 and r.holds
    w = scan_weak_b_property(cube(2), K, 1.3, np.linspace(-1, 1, 11))
    assert w.holds


def test_b_scan_rows_feed_plot_data(rng):
    r = scan_b_property(cube(2), random_symmetric_polygon(rng), [2, 0.5], np.linspace(-2, 2, 41))
    rows = emit_plot_data([r])
    assert len(rows) == 39 and {"f", "second_difference"} <= set(rows[0])


def test_search_planar_small():
    r = search_counterexample(2, SearchConfig(inject_dilates_every=10), seed=3, iterations=40)
    assert r.margin >= -1e-6
    assert r.verdict is not Verdict.VIOLATED
    assert len(r.details["equality_candidates"]) >= 4
    again = search_counterexample(2, SearchConfig(inject_dilates_every=10), seed=3, iterations=40)
    assert again.to_json() == r.to_json()
