"""Solvers for the three mixed robust/probabilistic stability problems.

* ``q_delta``: robust over a fixed set Q, probability over the random d.
* ``q_of_delta``: the robust set Q(d) moves with the random parameter.
* ``delta_of_q``: the law of d depends on q; the answer is the worst
  (smallest) stability probability over Q.

Each problem can be solved through the stable set of d (the two-step route,
for m <= 2), by sampling, or exactly when the random part is discrete.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (DimensionMismatch, DimensionTooHigh, DomainError, InvalidProblem,
                     NotDiscrete, UnboundedSupport)
from .estimate import ProbabilityEstimate
from .param import AxisEllipsoid, Box, DiscreteSet, DistributionSpec, ParamBox
from .poly import stable_mask
from .region import measure, stability_intervals_1d, stability_region_2d
from .robust import (CERTIFIED, SAMPLED, Auto, CoefficientMap, IndicatorResult,
                     indicator_batch, indicator_f, necessary_batch, sufficient_batch)


class Problem(str, enum.Enum):
    Q_DELTA = "q_delta"
    Q_OF_DELTA = "q_of_delta"
    DELTA_OF_Q = "delta_of_q"


@dataclass(frozen=True)
class ProblemSpec:
    map: CoefficientMap
    q_set: object
    delta_dist: DistributionSpec
    problem: Problem

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        if self.q_set.n != self.map.n:
            raise DimensionMismatch(f"q_set has dimension {self.q_set.n}, the map has n={self.map.n}")
        if self.delta_dist.m != self.map.m:
            raise DimensionMismatch(f"the law has m={self.delta_dist.m}, the map has m={self.map.m}")
        moving_q = isinstance(self.q_set, ParamBox)
        moving_law = self.delta_dist.depends_on_q
        if self.problem is Problem.Q_DELTA and (moving_q or moving_law):
            raise InvalidProblem("q_delta needs a fixed Q and a law free of q")
        if self.problem is Problem.Q_OF_DELTA and moving_law:
            raise InvalidProblem("q_of_delta needs a law free of q")
        if self.problem is Problem.DELTA_OF_Q and moving_q:
            raise InvalidProblem("delta_of_q needs a Q that does not depend on d")


# -- strategies --------------------------------------------------------------

@dataclass(frozen=True)
class TwoStep:
    """Stable set of d first, then its probability.

    ``search`` overrides the scanned range: ``(lo, hi)`` when m = 1,
    ``((lo1, hi1), (lo2, hi2))`` when m = 2.  Without it the support is used,
    cut to its central ``1 - truncation`` box for unbounded laws.
    """

    resolution: int = 400
    refine_depth: int = 2
    h: Optional[float] = None
    tol: float = 1e-6
    search: Optional[tuple] = None
    truncation: float = 1e-12
    method: object = Auto()


@dataclass(frozen=True)
class Scenario:
    """Monte Carlo estimate with a Chernoff-sized sample.

    ``indicator`` may swap the exact robust test for the cheaper
    ``"necessary"`` (upper estimate) or ``"sufficient"`` (lower estimate)
    surrogate.
    """

    epsilon: float = 0.01
    theta: float = 1e-7
    seed: int = 0
    samples: Optional[int] = None
    indicator: str = "exact"
    method: object = Auto()

    def __post_init__(self):
        if self.indicator not in ("exact", "necessary", "sufficient"):
            raise InvalidProblem(f"unknown indicator {self.indicator!r}")


@dataclass(frozen=True)
class AutoStrategy:
    """Two-step for m <= 2, scenario otherwise."""

    two_step: TwoStep = field(default_factory=TwoStep)
    scenario: Scenario = field(default_factory=Scenario)


def _worse(*guarantees: str) -> str:
    return SAMPLED if SAMPLED in guarantees else CERTIFIED


# -- scenario ----------------------------------------------------------------

def chernoff_sample_size(epsilon: float, theta: float) -> int:
    """Samples so that the empirical frequency is within ``epsilon`` w.p. ``1 - theta``."""
    if not (0 < epsilon < 1 and 0 < theta < 1):
        raise DomainError(f"epsilon and theta must lie in (0, 1), got {epsilon}, {theta}")
    return max(1, math.ceil(math.log(2.0 / theta) / (2.0 * epsilon * epsilon)))


CHERNOFF_NOTE = "sample size N = ceil(ln(2/theta) / (2 epsilon^2))"

_CHUNK = 1 << 15


def _indicator_rows(spec: ProblemSpec, deltas, method, indicator: str):
    cmap, Q = spec.map, spec.q_set
    if indicator == "necessary":
        return necessary_batch(cmap, Q, deltas), CERTIFIED
    if indicator == "sufficient":
        return sufficient_batch(cmap, Q, deltas), CERTIFIED
    return indicator_batch(cmap, Q, deltas, method)


def scenario_estimate(spec: ProblemSpec, scenario: Scenario = Scenario()) -> ProbabilityEstimate:
    """Fraction of sampled d values at which the system is robustly stable.

    Samples are drawn by index from a counter-based stream, and successes
    are summed as integers, so the result depends on the seed alone.
    """
    if spec.problem is Problem.DELTA_OF_Q:
        raise InvalidProblem("the scenario estimate covers q_delta and q_of_delta")
    N = scenario.samples if scenario.samples is not None else \
        chernoff_sample_size(scenario.epsilon, scenario.theta)
    if N < 1:
        raise DomainError("sample count must be positive")
    hits = 0
    guarantee = CERTIFIED
    for start in range(0, N, _CHUNK):
        count = min(_CHUNK, N - start)
        d = spec.delta_dist.sample(seed=scenario.seed, count=count, start=start)
        mask, g = _indicator_rows(spec, d, scenario.method, scenario.indicator)
        hits += int(np.count_nonzero(mask))
        guarantee = _worse(guarantee, g)
    notes = [CHERNOFF_NOTE]
    if scenario.indicator != "exact":
        side = "upper" if scenario.indicator == "necessary" else "lower"
        notes.append(f"{scenario.indicator} surrogate test: estimates an {side} bound")
    return ProbabilityEstimate(hits / N, "scenario", guarantee, epsilon=scenario.epsilon,
                               theta=scenario.theta, samples=N, successes=hits,
                               notes=tuple(notes))


# -- two-step ----------------------------------------------------------------

def stability_set(spec: ProblemSpec, strategy: TwoStep = TwoStep()):
    """The stable set of d for ``q_delta`` / ``q_of_delta`` (m = 1 or 2)."""
    m = spec.map.m
    if m > 2:
        raise DimensionTooHigh(f"the two-step route handles m <= 2, got m = {m}")
    if m == 0:
        raise DimensionTooHigh("no random parameter: there is no stable set to build")
    if strategy.search is not None:
        box = np.asarray(strategy.search, float).reshape(m, 2)
    else:
        lo, hi = spec.delta_dist.search_box(strategy.truncation)
        box = np.stack([lo, hi], axis=1)
    if m == 1:
        return stability_intervals_1d(spec.map, spec.q_set, box[0], strategy.h,
                                      strategy.tol, strategy.method)
    return stability_region_2d(spec.map, spec.q_set, box, strategy.resolution,
                               strategy.refine_depth, strategy.method)


def _deterministic(spec: ProblemSpec, method) -> ProbabilityEstimate:
    ok, g = indicator_f(spec.map, spec.q_set, (), method)
    return ProbabilityEstimate(float(ok), "discrete_sum", g, exact=g == CERTIFIED,
                               notes=("no random parameter: the probability is 0 or 1",))


def two_step(spec: ProblemSpec, strategy: TwoStep = TwoStep()):
    """(estimate, region) via the stable set; region is None when m = 0."""
    if spec.map.m == 0:
        return _deterministic(spec, strategy.method), None
    region = stability_set(spec, strategy)
    est = measure(region, spec.delta_dist)
    lo, hi = spec.delta_dist.support_box()
    if strategy.search is None and not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        est = replace(est, notes=est.notes + (
            f"unbounded law: search range cut to its central {1 - strategy.truncation:.12g} box",))
    return est, region


def _solve(spec: ProblemSpec, strategy) -> ProbabilityEstimate:
    if isinstance(strategy, AutoStrategy):
        strategy = strategy.two_step if spec.map.m <= 2 else strategy.scenario
    if isinstance(strategy, Scenario):
        if spec.map.m == 0:
            return _deterministic(spec, strategy.method)
        return scenario_estimate(spec, strategy)
    if isinstance(strategy, TwoStep):
        return two_step(spec, strategy)[0]
    raise InvalidProblem(f"unknown strategy {strategy!r}")


def solve_q_delta(spec: ProblemSpec, strategy=AutoStrategy()) -> ProbabilityEstimate:
    if spec.problem is not Problem.Q_DELTA:
        raise InvalidProblem(f"expected a q_delta problem, got {spec.problem.value}")
    return _solve(spec, strategy)


def solve_q_of_delta(spec: ProblemSpec, strategy=AutoStrategy()) -> ProbabilityEstimate:
    """Same pipeline as :func:`solve_q_delta`, with Q(d) resolved at every d."""
    if spec.problem is not Problem.Q_OF_DELTA:
        raise InvalidProblem(f"expected a q_of_delta problem, got {spec.problem.value}")
    return _solve(spec, strategy)


# -- guaranteed probability over Q -------------------------------------------

def _q_grid(Q, resolution: int) -> np.ndarray:
    if isinstance(Q, DiscreteSet):
        return Q.points
    if isinstance(Q, Box):
        pts = np.concatenate([Q.enumerate(resolution), Q.vertices()], axis=0)
        return np.unique(pts, axis=0)
    if isinstance(Q, AxisEllipsoid):
        return np.unique(Q.enumerate(resolution), axis=0)
    raise InvalidProblem(f"cannot grid a {type(Q).__name__}")


def _local_grid(Q, center, spacing, resolution):
    """Grid of the box ``center +- spacing`` clipped to Q's bounding box."""
    if isinstance(Q, Box):
        blo, bhi = Q.lo, Q.hi
    else:
        blo, bhi = Q.center - Q.radii, Q.center + Q.radii
    lo = np.maximum(center - spacing, blo)
    hi = np.minimum(center + spacing, bhi)
    pts = Box(lo, hi).enumerate(resolution)
    if isinstance(Q, AxisEllipsoid):
        keep = np.array([Q.membership(p) for p in pts], bool)
        pts = pts[keep]
    return pts


def p_of_q(spec: ProblemSpec, q, strategy: TwoStep = TwoStep()) -> ProbabilityEstimate:
    """Stability probability at one fixed q (the law resolved at q)."""
    q = np.atleast_1d(np.asarray(q, float))
    sub = ProblemSpec(spec.map, DiscreteSet(q[None, :]), spec.delta_dist.resolve(q),
                      Problem.Q_DELTA)
    return two_step(sub, strategy)[0]


def solve_delta_of_q(spec: ProblemSpec, q_grid: int = 21, refine: int = 2,
                     strategy: TwoStep = TwoStep()) -> ProbabilityEstimate:
    """Smallest stability probability over a grid on Q, refined near the minimum.

    The grid minimum is an upper bound on the infimum over Q.  Ties go to
    the lexicographically smallest q.
    """
    if spec.problem is not Problem.DELTA_OF_Q:
        raise InvalidProblem(f"expected a delta_of_q problem, got {spec.problem.value}")
    if spec.map.m > 2:
        raise DimensionTooHigh(f"per-q probabilities need m <= 2, got m = {spec.map.m}")
    if q_grid < 2 or refine < 0:
        raise InvalidProblem("q_grid must be >= 2 and refine >= 0")
    Q = spec.q_set
    probes: dict[tuple, ProbabilityEstimate] = {}

    def run(points):
        for q in points:
            key = tuple(float(x) for x in q)
            if key not in probes:
                probes[key] = p_of_q(spec, key, strategy)

    def best():
        return min(probes, key=lambda k: (probes[k].value, k))

    run(_q_grid(Q, q_grid))
    rounds = 0
    if not isinstance(Q, DiscreteSet):
        if isinstance(Q, Box):
            spacing = (Q.hi - Q.lo) / (q_grid - 1)
        else:
            spacing = 2 * Q.radii / (q_grid - 1)
        for _ in range(refine):
            if not np.any(spacing > 0):
                break
            run(_local_grid(Q, np.array(best()), spacing, q_grid))
            spacing = 2 * spacing / (q_grid - 1)
            rounds += 1

    q_star = best()
    top = probes[q_star]
    guarantee = _worse(*(e.guarantee for e in probes.values()))
    bracket = None
    if all(e.bracket is not None for e in probes.values()):
        bracket = (min(e.bracket[0] for e in probes.values()), top.bracket[1])
    elif top.bracket is not None:
        bracket = top.bracket
    notes = (f"minimum over {len(probes)} probes (grid {q_grid} per axis, "
             f"{rounds} refinement rounds); an upper bound on the infimum over Q",)
    notes += tuple(n for n in top.notes if n not in notes)
    return ProbabilityEstimate(
        top.value, top.method, guarantee, bracket=bracket, exact=False, worst_q=q_star,
        probes=tuple((k, probes[k].value) for k in sorted(probes)), notes=notes)


# -- discrete random parameters ----------------------------------------------

def _stable_pairs(cmap: CoefficientMap, q_points, deltas) -> np.ndarray:
    """Stability at every (delta_j, q_k) pair, shape (J, K)."""
    qp = np.asarray(q_points, float).reshape(-1, cmap.n)
    dp = np.asarray(deltas, float).reshape(-1, cmap.m)
    q = [qp[None, :, i] for i in range(cmap.n)]
    d = [dp[:, None, j] for j in range(cmap.m)]
    C = cmap.evaluate(q, d)
    C = np.broadcast_to(C, (dp.shape[0], qp.shape[0], cmap.degree + 1))
    return stable_mask(C, cmap.kind)


def discrete_q_delta(cmap: CoefficientMap, q_points, deltas, probs) -> float:
    """``sum_j p_j * prod_k I[stable at (q_k, d_j)]``."""
    ok = np.all(_stable_pairs(cmap, q_points, deltas), axis=1)
    return math.fsum(p for p, good in zip(probs, ok) if good)


def discrete_q_of_delta(cmap: CoefficientMap, q_sets: Sequence, deltas, probs) -> float:
    """``sum_j p_j * prod_k I[stable at (q_{j,k}, d_j)]``; ``q_sets[j]`` belongs to ``d_j``."""
    deltas = np.asarray(deltas, float).reshape(-1, cmap.m)
    total = []
    for qs, d, p in zip(q_sets, deltas, probs):
        if np.all(_stable_pairs(cmap, qs, d[None, :])):
            total.append(p)
    return math.fsum(total)


def discrete_delta_of_q(cmap: CoefficientMap, q_points, delta_sets: Sequence,
                        prob_sets: Sequence) -> tuple[float, int]:
    """``min_k sum_j p_{k,j} * I[stable at (q_k, d_{k,j})]`` and its first minimizer."""
    q_points = np.asarray(q_points, float).reshape(-1, cmap.n)
    values = []
    for q, ds, ps in zip(q_points, delta_sets, prob_sets):
        ok = _stable_pairs(cmap, q[None, :], ds)[:, 0]
        values.append(math.fsum(p for p, good in zip(ps, ok) if good))
    k = int(np.argmin(values))
    return values[k], k


def solve_discrete(spec: ProblemSpec, method=Auto()) -> ProbabilityEstimate:
    """Exact sums over the atoms of a discrete law."""
    dist, Q, cmap = spec.delta_dist, spec.q_set, spec.map
    if not dist.is_discrete:
        raise NotDiscrete("the law of d must be discrete for the exact sum")
    if spec.problem is Problem.DELTA_OF_Q:
        if not isinstance(Q, DiscreteSet):
            raise NotDiscrete("delta_of_q exact sums need a discrete Q")
        d_sets, p_sets = [], []
        for q in Q.points:
            pts, probs = dist.resolve(q).atoms()
            d_sets.append(pts)
            p_sets.append(probs)
        order = np.lexsort(Q.points.T[::-1])
        pts_sorted = Q.points[order]
        value, k = discrete_delta_of_q(cmap, pts_sorted, [d_sets[i] for i in order],
                                       [p_sets[i] for i in order])
        return ProbabilityEstimate(value, "discrete_sum", CERTIFIED, exact=True,
                                   worst_q=pts_sorted[k])
    pts, probs = dist.atoms()
    if isinstance(Q, DiscreteSet):
        return ProbabilityEstimate(discrete_q_delta(cmap, Q.points, pts, probs),
                                   "discrete_sum", CERTIFIED, exact=True)
    mask, g = indicator_batch(cmap, Q, pts, method)
    value = math.fsum(p for p, good in zip(probs, mask) if good)
    return ProbabilityEstimate(value, "discrete_sum", g, exact=g == CERTIFIED)


# -- bounds through fixed sets -----------------------------------------------

def _range_grid(lo, hi, m: int) -> np.ndarray:
    per_axis = {1: 2001, 2: 201}.get(m, 11)
    return Box(lo, hi).enumerate(per_axis)


def _param_box_extent(Q: ParamBox, points: np.ndarray):
    """(union hull or None, intersection or None) of Q(d) over the points."""
    lo, hi = Q.bounds([points[:, j] for j in range(points.shape[1])])
    B = points.shape[0]
    lo = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in lo], axis=1)
    hi = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in hi], axis=1)
    nonempty = np.all(lo <= hi, axis=1)
    union = None
    if np.any(nonempty):
        union = Box(lo[nonempty].min(axis=0), hi[nonempty].max(axis=0))
    inter = None
    if np.all(nonempty):
        ilo, ihi = lo.max(axis=0), hi.min(axis=0)
        if np.all(ilo <= ihi):
            inter = Box(ilo, ihi)
    return union, inter


def _support_for_bounds(dist: DistributionSpec, truncation: Optional[float]):
    lo, hi = dist.support_box()
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return lo, hi, None
    if truncation is None:
        raise UnboundedSupport("unbounded law: a truncation level is required")
    lo, hi = dist.search_box(truncation)
    return lo, hi, f"d range cut to its central {1 - truncation:.12g} box"


def bounds_q_of_delta(spec: ProblemSpec, strategy=AutoStrategy(),
                      truncation: Optional[float] = 1e-9):
    """(lower, upper) estimates from the union hull and the intersection of Q(d).

    Robustness over the hull of all Q(d) implies robustness over each one,
    and robustness over each Q(d) implies robustness over their common part.
    The bounds of Q(d) are scanned on a grid over the support of d.
    """
    if spec.problem is not Problem.Q_OF_DELTA or not isinstance(spec.q_set, ParamBox):
        raise InvalidProblem("bounds need a q_of_delta problem with a parameter box")
    lo, hi, cut = _support_for_bounds(spec.delta_dist, truncation)
    union, inter = _param_box_extent(spec.q_set, _range_grid(lo, hi, spec.map.m))
    extra = (cut,) if cut else ()

    def fixed(Q, label):
        if Q is None:
            note = f"{label} of Q(d) is empty: the bound is 1 vacuously"
            return ProbabilityEstimate(1.0, "exact_cdf", CERTIFIED, exact=True,
                                       notes=(note,) + extra)
        sub = ProblemSpec(spec.map, Q, spec.delta_dist, Problem.Q_DELTA)
        est = solve_q_delta(sub, strategy)
        desc = f"{label} of Q(d) = [{', '.join(f'{a:.6g}..{b:.6g}' for a, b in zip(Q.lo, Q.hi))}]"
        return replace(est, notes=est.notes + (desc,) + extra)

    return fixed(union, "union hull"), fixed(inter, "intersection")


def quantile_lower_bound(spec: ProblemSpec, p: float, method=Auto(),
                         resolution: int = 21) -> IndicatorResult:
    """True certifies a stability probability of at least ``p``.

    A box Q_p with probability at least ``p`` is built from central
    marginal intervals, and d is then treated as a second deterministic
    parameter ranging over Q_p.
    """
    if p <= 0:
        return IndicatorResult(True, CERTIFIED)
    if p > 1:
        raise DomainError(f"target level {p} exceeds 1")
    dist, Q, cmap = spec.delta_dist, spec.q_set, spec.map
    if spec.problem is Problem.DELTA_OF_Q:
        # a box that holds mass p under the law at every q
        boxes = [dist.resolve(q).quantile_box(p) for q in _q_grid(Q, resolution)]
        plo = np.min([b[0] for b in boxes], axis=0)
        phi = np.max([b[1] for b in boxes], axis=0)
    else:
        plo, phi = dist.quantile_box(p)
    if not (np.all(np.isfinite(plo)) and np.all(np.isfinite(phi))):
        raise UnboundedSupport(f"no bounded quantile box at level {p}")
    if spec.problem is Problem.Q_OF_DELTA and isinstance(Q, ParamBox):
        union, _ = _param_box_extent(Q, _range_grid(plo, phi, cmap.m))
        if union is None:
            return IndicatorResult(True, CERTIFIED)
        Q = union
    return _robust_over_product(cmap, Q, plo, phi, method, resolution)


def _robust_over_product(cmap, Q, plo, phi, method, resolution) -> IndicatorResult:
    """Robust stability over Q x [plo, phi] with d treated as deterministic."""
    if isinstance(Q, Box):
        joint = Box(np.concatenate([Q.lo, plo]), np.concatenate([Q.hi, phi]))
        return indicator_f(cmap.lift(), joint, (), method)
    guarantee = CERTIFIED
    if isinstance(Q, AxisEllipsoid):
        points, guarantee = Q.enumerate(resolution), SAMPLED
    else:
        points = Q.points
    for q in points:
        ok, g = indicator_f(cmap.fix_q(q).lift(), Box(plo, phi), (), method)
        guarantee = _worse(guarantee, g)
        if not ok:
            return IndicatorResult(False, guarantee)
    return IndicatorResult(True, guarantee)
