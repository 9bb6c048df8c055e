import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mixedrobust.errors import DimensionMismatch, EmptySet, InvalidParams
from mixedrobust.expr import parse
from mixedrobust.param import (AxisEllipsoid, Box, DiscretePMF, DiscreteSet, DistributionSpec, Laplace,
                               Normal, ParamBox, Uniform, cdf_scalar, enumerate_q, membership)

MARGINALS = [
    (Uniform(-1.0, 3.0), stats.uniform(-1.0, 4.0)),
    (Normal(2.0, 0.1), stats.norm(2.0, 0.1)),
    (Laplace(1.0, 0.1), stats.laplace(1.0, 0.1)),
    (DiscretePMF((0.0, 1.0, 2.5), (0.25, 0.5, 0.25)),
     stats.rv_discrete(values=([0, 1, 2.5], [0.25, 0.5, 0.25]))),
]


def test_normal_interval_mass():
    mg = Normal(2, 0.1)
    assert cdf_scalar(mg, 2.21) - cdf_scalar(mg, -0.11) == pytest.approx(0.982, abs=5e-4)


def test_laplace_interval_mass():
    mg = Laplace(1, 0.1)
    assert cdf_scalar(mg, 1.125) - cdf_scalar(mg, 0.75) == pytest.approx(0.8157, abs=5e-4)


def test_uniform_median():
    assert cdf_scalar(Uniform(0, 1), 0.5) == 0.5


@pytest.mark.parametrize("mg, ref", MARGINALS)
def test_cdf_matches_reference_implementation(mg, ref):
    x = np.linspace(-2, 5, 701)
    assert np.allclose(cdf_scalar(mg, x), ref.cdf(x), atol=1e-12)


@pytest.mark.parametrize("mg, ref", MARGINALS)
def test_cdf_monotone_with_limits(mg, ref):
    x = np.linspace(-50, 50, 1000)
    f = cdf_scalar(mg, x)
    assert np.all(np.diff(f) >= 0)
    assert f[0] == pytest.approx(0.0, abs=1e-12) and f[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("mg, ref", MARGINALS[:3])
def test_samples_follow_the_cdf(mg, ref):
    x = DistributionSpec((mg,)).sample(seed=3, count=100_000)[:, 0]
    assert stats.kstest(x, lambda t: cdf_scalar(mg, t)).statistic < 0.01


def test_discrete_sample_frequencies():
    mg = MARGINALS[3][0]
    x = DistributionSpec((mg,)).sample(seed=3, count=100_000)[:, 0]
    for v, p in zip(mg.values, mg.probs):
        assert np.mean(x == v) == pytest.approx(p, abs=0.01)


def test_discrete_cdf_is_right_continuous():
    mg = DiscretePMF((1.0, 2.0), (0.5, 0.5))
    assert cdf_scalar(mg, 1.0) == 0.5
    assert cdf_scalar(mg, np.nextafter(1.0, 0)) == 0.0


@pytest.mark.parametrize("mg", [
    Uniform(1, 1), Normal(0, 0), Laplace(0, -1), DiscretePMF((1, 2), (0.5, 0.6)), DiscretePMF((1,), (-1,)),
])
def test_invalid_parameters_rejected(mg):
    with pytest.raises(InvalidParams):
        cdf_scalar(mg, 0.0)


def test_unresolved_marginal_rejected():
    with pytest.raises(InvalidParams):
        cdf_scalar(Normal(parse("q1", 1, 0), 1.0), 0.0)


def test_degenerate_law_samples():
    spec = DistributionSpec((DiscretePMF((7.0,), (1.0,)),))
    for seed in (0, 1, 99):
        assert spec.sample(seed=seed, count=3)[:, 0].tolist() == [7.0, 7.0, 7.0]


def test_uniform_sample_mean():
    x = DistributionSpec((Uniform(0, 1),)).sample(seed=42, count=100_000)
    assert x.mean() == pytest.approx(0.5, abs=0.01)


def test_normal_sample_symmetry():
    x = DistributionSpec((Normal(0, 1),)).sample(seed=7, count=100_000)
    assert np.mean(x <= 0) == pytest.approx(0.5, abs=0.01)


def test_sampling_is_deterministic_per_seed():
    spec = DistributionSpec((Uniform(0, 1), Normal(0, 1), Laplace(0, 1)))
    a = spec.sample(seed=5, count=50)
    assert np.array_equal(a, spec.sample(seed=5, count=50))
    assert not np.array_equal(a, spec.sample(seed=6, count=50))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**63), st.lists(st.integers(0, 40), min_size=1, max_size=5))
def test_partitioned_sampling_matches_one_pass(seed, sizes):
    spec = DistributionSpec((Uniform(-1, 1), Normal(0, 2), DiscretePMF((0, 1), (0.3, 0.7))))
    total = sum(sizes)
    whole = spec.sample(seed=seed, count=total)
    parts, start = [], 0
    for k in sizes:
        parts.append(spec.sample(seed=seed, count=k, start=start))
        start += k
    assert np.array_equal(np.concatenate(parts, axis=0), whole)


def test_q_dependent_law_needs_q():
    spec = DistributionSpec((Normal(parse("1.4 - 0.5*q1", 1, 0), parse("q1/8", 1, 0)),))
    assert spec.depends_on_q
    with pytest.raises(InvalidParams):
        spec.sample(count=1)
    mg = spec.resolve([0.8]).marginals[0]
    assert (mg.mean, mg.std) == pytest.approx((1.0, 0.1))


def test_box_mass_of_product_law():
    spec = DistributionSpec((Uniform(-4, -2), Uniform(-7, -2)))
    assert spec.box_mass([-3, -7], [-2, -2])[0] == pytest.approx(0.5)
    assert spec.box_mass([-10, -10], [10, 10])[0] == pytest.approx(1.0)


def test_search_box_truncates_unbounded_axes():
    spec = DistributionSpec((Uniform(0, 1), Normal(0, 1)))
    lo, hi = spec.search_box(1e-6)
    assert (lo[0], hi[0]) == (0.0, 1.0)
    assert stats.norm.cdf(hi[1]) - stats.norm.cdf(lo[1]) >= 1 - 1e-6 - 1e-12


# -- sets ---------------------------------------------------------------------

ELLIPSE = AxisEllipsoid([100, 25], [0, 0], 9)


def test_ellipse_boundary_point_is_inside():
    assert membership(ELLIPSE, [0.3, 0.0])
    assert not membership(ELLIPSE, [0.31, 0.0])


def test_box_membership_outside():
    assert not membership(Box([-1, -1], [1, 1]), [0, 2])


def test_param_box_collapses_to_point():
    pb = ParamBox((parse("1 - d1/3", 0, 1),), (parse("2 - d1", 0, 1),))
    assert membership(pb, [0.5], [1.5])
    assert not membership(pb, [0.6], [1.5])
    assert not membership(pb, [0.5], [1.6])  # empty there
    with pytest.raises(EmptySet):
        enumerate_q(pb, 5, [1.6])


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        membership(Box([0, 0], [1, 1]), [0.5])


def test_enumerations():
    assert enumerate_q(DiscreteSet([[1.0], [2.0]]), 0).tolist() == [[1.0], [2.0]]
    assert enumerate_q(Box([0], [1]), 3).tolist() == [[0.0], [0.5], [1.0]]
    pts = enumerate_q(ELLIPSE, 21)
    assert len(pts) > 21
    assert all(membership(ELLIPSE, p) for p in pts)


def test_invalid_sets_rejected():
    with pytest.raises(InvalidParams):
        Box([1], [0])
    with pytest.raises(InvalidParams):
        AxisEllipsoid([1, -1], [0, 0], 1)
    with pytest.raises(InvalidParams):
        AxisEllipsoid([1], [0], 0)
    with pytest.raises(InvalidParams):
        DiscreteSet(np.zeros((0, 2)))


_rational = st.integers(-8, 8).map(lambda k: k / 4)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(_rational, _rational, _rational), min_size=1, max_size=3))
def test_box_membership_is_componentwise(rows):
    lo = [min(a, b) for a, b, _ in rows]
    hi = [max(a, b) for a, b, _ in rows]
    q = [c for _, _, c in rows]
    expected = all(a <= c <= b for a, b, c in zip(lo, hi, q))
    assert membership(Box(lo, hi), q) == expected
