import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedrobust.errors import MethodInapplicable
from mixedrobust.expr import parse
from mixedrobust.param import AxisEllipsoid, Box, DiscreteSet, ParamBox
from mixedrobust.poly import StabilityKind, is_hurwitz
from mixedrobust.robust import (CERTIFIED, SAMPLED, Auto, CoefficientMap, GridFallback, Kharitonov,
                                ZeroExclusion, choose_method, indicator_batch, indicator_f,
                                kharitonov_hurwitz, necessary_batch, necessary_indicator,
                                sufficient_batch, sufficient_indicator, zero_exclusion_affine)


def _all_roots_left(coeffs_ascending) -> bool:
    return bool(np.all(np.roots(np.asarray(coeffs_ascending)[::-1]).real < 0))


def _worst_real_part(C):
    """Largest root real part per row of ascending coefficients, via batched companion eigenvalues."""
    C = np.atleast_2d(np.asarray(C, float))
    k = C.shape[1] - 1
    comp = np.zeros((C.shape[0], k, k))
    comp[:, 0, :] = -C[:, -2::-1] / C[:, -1:]
    comp[:, np.arange(1, k), np.arange(k - 1)] = 1.0
    return np.max(np.linalg.eigvals(comp).real, axis=1)


def _dense_oracle(cmap, points, delta):
    """Worst root real part over explicit q points."""
    d = list(np.atleast_1d(np.asarray(delta, float)))
    C = cmap.evaluate([points[:, i] for i in range(cmap.n)], d)
    return float(np.max(_worst_real_part(C)))


# -- indicator on the distance family -----------------------------------------

def test_distance_family_interior_point(distance_map):
    res = indicator_f(distance_map, Box([1.0], [1.5]), [1.25])
    assert res.stable
    assert res.guarantee == SAMPLED  # abs() rules out the affine methods


def test_distance_family_far_point(distance_map):
    assert not indicator_f(distance_map, Box([1.0], [1.5]), [0.4]).stable


def test_distance_family_batch_matches_closed_form(distance_map):
    deltas = np.linspace(0.5, 2.0, 61)
    off = np.abs(deltas - 1.0) < 1e-9
    off |= np.abs(deltas - 1.5) < 1e-9
    mask, _ = indicator_batch(distance_map, Box([1.0], [1.5]), deltas[:, None])
    expected = (deltas > 1.0) & (deltas < 1.5)
    assert np.array_equal(mask[~off], expected[~off])


# -- ellipse example ----------------------------------------------------------

def test_ellipse_interior_point_agrees_with_dense_grid(ellipse_map, ellipse_set):
    delta = [-3.0, -4.5]
    res = indicator_f(ellipse_map, ellipse_set, delta)
    assert res == (True, CERTIFIED)
    assert indicator_f(ellipse_map, ellipse_set, delta, GridFallback(41)).stable
    assert _dense_oracle(ellipse_map, ellipse_set.enumerate(81), delta) < 0


def _nominal_only_points(ellipse_map, ellipse_set):
    """Points stable at q = 0 whose dense-grid worst case over Q is clearly unstable."""
    nominal = Box([0.0, 0.0], [0.0, 0.0])
    d1, d2 = np.meshgrid(np.linspace(-4, -2, 21), np.linspace(-7, -2, 21))
    deltas = np.stack([d1.ravel(), d2.ravel()], axis=1)
    nom, _ = indicator_batch(ellipse_map, nominal, deltas, GridFallback(2))
    pts = ellipse_set.enumerate(61)
    out = []
    for d in deltas[nom]:
        if _dense_oracle(ellipse_map, pts, d) > 1e-3:
            out.append(d)
    return np.array(out)


def test_ellipse_nominal_only_points_are_rejected(ellipse_map, ellipse_set):
    pts = _nominal_only_points(ellipse_map, ellipse_set)
    assert len(pts) > 0
    for d in pts[:: max(1, len(pts) // 25)]:
        assert not zero_exclusion_affine(ellipse_map, ellipse_set, d)


def test_point_set_reduces_to_point_test(ellipse_map):
    point = Box([0.1, -0.2], [0.1, -0.2])
    for d in ([-3.0, -4.5], [-2.1, -6.9], [-3.9, -2.0]):
        c = ellipse_map.evaluate([0.1, -0.2], d)
        assert zero_exclusion_affine(ellipse_map, point, d) == is_hurwitz(c)


# -- zero exclusion vs grid on random affine families -------------------------

def _random_affine_map(rng, degree, n):
    base = np.real(np.poly(-rng.uniform(0.2, 3.0, degree)))  # Hurwitz, descending
    terms = []
    for j, c in enumerate(base):
        t = repr(float(c))
        for i in range(n):
            if rng.random() < 0.6:
                t += f" + {float(rng.normal(scale=0.3 * abs(c) + 0.1))!r}*q{i + 1}"
        terms.append(t)
    return CoefficientMap.from_strings(terms, n, 0)


def _worst_margin_on_grid(cmap, Q, resolution):
    pts = np.concatenate([Q.enumerate(resolution), Q.vertices()]) if isinstance(Q, Box) else Q.enumerate(resolution)
    C = cmap.evaluate([pts[:, i] for i in range(cmap.n)], [])
    return float(-np.max(_worst_real_part(C)))


@pytest.mark.parametrize("shape", ["box", "ellipse"])
def test_zero_exclusion_agrees_with_fine_grid(shape):
    rng = np.random.default_rng(11 if shape == "box" else 12)
    checked = 0
    for _ in range(60):
        cmap = _random_affine_map(rng, int(rng.integers(2, 5)), 2)
        scale = rng.uniform(0.2, 1.5)
        Q = Box([-scale] * 2, [scale] * 2) if shape == "box" else AxisEllipsoid([1.0, 2.0], [0, 0], scale ** 2)
        ze = indicator_f(cmap, Q, (), ZeroExclusion()).stable
        margin = _worst_margin_on_grid(cmap, Q, 41)
        if abs(margin) < 1e-4:
            continue
        assert ze == (margin > 0)
        checked += 1
    assert checked >= 50


def test_zero_exclusion_rejects_bad_settings():
    with pytest.raises(ValueError):
        ZeroExclusion(omega_points=10)
    with pytest.raises(ValueError):
        GridFallback(1)


# -- Kharitonov ---------------------------------------------------------------

def test_kharitonov_point_interval():
    c = [3, 2, 2, 1]
    assert kharitonov_hurwitz([[x, x] for x in c])


def test_kharitonov_unstable_point():
    assert not kharitonov_hurwitz([[x, x] for x in [3, 2, 0.1, 1]])


def test_kharitonov_rejects_inverted_interval():
    with pytest.raises(ValueError):
        kharitonov_hurwitz([[1, 0], [1, 1]])


def test_kharitonov_on_point_polynomials_matches_routh(rng):
    for _ in range(1000):
        c = rng.uniform(-1, 5, int(rng.integers(2, 8)))
        if abs(c[-1]) < 1e-3:
            continue
        assert kharitonov_hurwitz(np.stack([c, c], axis=1)) == is_hurwitz(c)


def _interval_family(rng, max_degree):
    k = int(rng.integers(1, max_degree + 1))
    center = np.real(np.poly(-rng.uniform(0.3, 2.5, k)))[::-1]
    width = rng.uniform(0, 0.4, k + 1) * np.abs(center)
    return np.stack([center - width, center + width], axis=1)


def _grid_stable(iv, per_axis=5):
    axes = [np.linspace(a, b, per_axis) for a, b in iv]
    for c in itertools.product(*axes):
        if not _all_roots_left(c):
            return False
    return True


def test_kharitonov_matches_vertex_grid(rng):
    for _ in range(60):
        iv = _interval_family(rng, 4)
        assert kharitonov_hurwitz(iv) == _grid_stable(iv, 3)


def test_kharitonov_needs_hurwitz_kind():
    cmap = CoefficientMap.from_strings(["1", "q1"], 1, 0, StabilityKind.SCHUR)
    with pytest.raises(MethodInapplicable):
        indicator_f(cmap, Box([0], [0.1]), (), Kharitonov())
    with pytest.raises(MethodInapplicable):
        indicator_f(cmap, Box([0], [0.1]), (), ZeroExclusion())


def test_kharitonov_needs_independent_entries():
    cmap = CoefficientMap.from_strings(["1", "2 + q1", "1 + q1"], 1, 0)
    assert not cmap.independent_intervals
    with pytest.raises(MethodInapplicable):
        choose_method(cmap, Box([0], [0.1]), Kharitonov())


# -- method selection and guarantees -----------------------------------------

def test_auto_selection():
    indep = CoefficientMap.from_strings(["1", "2 + q1", "3 + q2"], 2, 0)
    shared = CoefficientMap.from_strings(["1", "2 + q1", "3 + q1"], 1, 0)
    curved = CoefficientMap.from_strings(["1", "2 + q1*q1", "3"], 1, 0)
    box2, box1 = Box([0, 0], [1, 1]), Box([0], [1])
    assert isinstance(choose_method(indep, box2, Auto()), Kharitonov)
    assert isinstance(choose_method(shared, box1, Auto()), ZeroExclusion)
    assert isinstance(choose_method(shared, AxisEllipsoid([1], [0], 1), Auto()), ZeroExclusion)
    assert isinstance(choose_method(curved, box1, Auto()), GridFallback)
    assert isinstance(choose_method(indep, DiscreteSet([[0, 0]]), Auto()), GridFallback)


def test_discrete_set_is_certified():
    cmap = CoefficientMap.from_strings(["1", "q1"], 1, 0)
    assert indicator_f(cmap, DiscreteSet([[1.0], [2.0]])) == (True, CERTIFIED)
    assert indicator_f(cmap, DiscreteSet([[1.0], [-2.0]])) == (False, CERTIFIED)


def test_empty_param_box_is_vacuously_stable():
    cmap = CoefficientMap.from_strings(["1", "-1 + 0*q1 + d1"], 1, 1)
    Q = ParamBox((parse("1 - d1/3", 0, 1),), (parse("2 - d1", 0, 1),))
    assert indicator_f(cmap, Q, [1.8]) == (True, CERTIFIED)   # empty, d1 - 1 > 0 anyway
    assert indicator_f(cmap, Q, [0.5]).stable is False
    assert sufficient_indicator(cmap, Q, [1.8])
    assert necessary_indicator(cmap, Q, [1.8])


def test_schur_family_uses_grid():
    cmap = CoefficientMap.from_strings(["1", "q1"], 1, 0, StabilityKind.SCHUR)
    res = indicator_f(cmap, Box([-0.5], [0.5]))
    assert res == (True, SAMPLED)
    assert not indicator_f(cmap, Box([-0.5], [1.5])).stable


# -- necessary / sufficient ---------------------------------------------------

def test_negative_coefficient_fails_necessary():
    cmap = CoefficientMap.from_strings(["1", "-1", "2 + q1"], 1, 0)
    assert not necessary_indicator(cmap, Box([0], [1]))


def test_distance_family_sufficient(distance_map):
    assert sufficient_indicator(distance_map, Box([1.0], [1.5]), [1.25])


def test_surrogates_are_hurwitz_only():
    cmap = CoefficientMap.from_strings(["1", "q1"], 1, 0, StabilityKind.SCHUR)
    with pytest.raises(MethodInapplicable):
        necessary_indicator(cmap, Box([0], [0.1]))
    with pytest.raises(MethodInapplicable):
        sufficient_indicator(cmap, Box([0], [0.1]))


def test_sandwich_on_random_affine_instances():
    rng = np.random.default_rng(5)
    strict = 0
    for _ in range(500):
        cmap = _random_affine_map(rng, int(rng.integers(2, 5)), 2)
        s = rng.uniform(0.05, 1.0)
        Q = Box([-s, -s], [s, s]) if rng.random() < 0.5 else AxisEllipsoid([1, 1], [0, 0], s * s)
        lo = sufficient_indicator(cmap, Q)
        f = indicator_f(cmap, Q).stable
        hi = necessary_indicator(cmap, Q)
        assert lo <= f <= hi
        strict += lo < hi
    assert strict > 0


# -- monotonicity in Q --------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 1.0), st.floats(1.0, 3.0))
def test_shrinking_the_box_preserves_stability(seed, inner, factor):
    rng = np.random.default_rng(seed)
    cmap = _random_affine_map(rng, 3, 2)
    small = Box([-inner] * 2, [inner] * 2)
    large = Box([-inner * factor] * 2, [inner * factor] * 2)
    if indicator_f(cmap, large).stable:
        assert indicator_f(cmap, small).stable


def test_batch_and_pointwise_agree(ellipse_map, ellipse_set, rng):
    deltas = np.column_stack([rng.uniform(-4, -2, 40), rng.uniform(-7, -2, 40)])
    mask, _ = indicator_batch(ellipse_map, ellipse_set, deltas)
    assert mask.tolist() == [indicator_f(ellipse_map, ellipse_set, d).stable for d in deltas]
    n = necessary_batch(ellipse_map, ellipse_set, deltas)
    s = sufficient_batch(ellipse_map, ellipse_set, deltas)
    assert np.all(s <= mask) and np.all(mask <= n)
