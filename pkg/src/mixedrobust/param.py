"""Deterministic uncertainty sets and laws of the random parameters.

Marginal parameters may be plain numbers or :class:`~mixedrobust.expr.Expression`
objects over ``q`` (distributions that depend on the deterministic parameter);
call :meth:`DistributionSpec.resolve` with a concrete ``q`` before using
them.  Components of the random vector are independent.

Sampling is counter based: uniform number ``t`` of a stream is taken from a
Philox block keyed by the seed, so sample ``i`` depends on ``(seed, i)``
only and any split of the index range reproduces the same values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.random import Philox
from scipy import special

from .errors import DimensionMismatch, EmptySet, InvalidParams
from .expr import Expression, evaluate

Param = Union[float, Expression]

MEMBERSHIP_RTOL = 1e-12


def _value(p: Param, q) -> float:
    if isinstance(p, Expression):
        if q is None:
            raise InvalidParams(f"parameter {p.source!r} depends on q but no q was given")
        return float(evaluate(p, q, ()))
    return float(p)


def _is_expr(p) -> bool:
    return isinstance(p, Expression)


# -- marginals ---------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    lo: Param
    hi: Param

    def params(self):
        return (self.lo, self.hi)

    def resolve(self, q=None) -> "Uniform":
        lo, hi = _value(self.lo, q), _value(self.hi, q)
        if not lo < hi:
            raise InvalidParams(f"uniform needs lo < hi, got [{lo}, {hi}]")
        return Uniform(lo, hi)

    def cdf(self, x):
        return np.clip((np.asarray(x, float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, u):
        return self.lo + np.asarray(u) * (self.hi - self.lo)

    def support(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class Normal:
    mean: Param
    std: Param

    def params(self):
        return (self.mean, self.std)

    def resolve(self, q=None) -> "Normal":
        mean, std = _value(self.mean, q), _value(self.std, q)
        if not std > 0:
            raise InvalidParams(f"normal needs std > 0, got {std}")
        return Normal(mean, std)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, float) - self.mean) / self.std)

    def ppf(self, u):
        return self.mean + self.std * special.ndtri(np.asarray(u))

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class Laplace:
    location: Param
    scale: Param

    def params(self):
        return (self.location, self.scale)

    def resolve(self, q=None) -> "Laplace":
        loc, scale = _value(self.location, q), _value(self.scale, q)
        if not scale > 0:
            raise InvalidParams(f"laplace needs scale > 0, got {scale}")
        return Laplace(loc, scale)

    def cdf(self, x):
        z = (np.asarray(x, float) - self.location) / self.scale
        with np.errstate(over="ignore"):
            return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)),
                            1.0 - 0.5 * np.exp(-np.maximum(z, 0)))

    def ppf(self, u):
        u = np.asarray(u)
        return self.location - self.scale * np.sign(u - 0.5) * np.log1p(-2 * np.abs(u - 0.5))

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class DiscretePMF:
    values: tuple
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "probs", tuple(self.probs))

    def params(self):
        return self.values + self.probs

    def resolve(self, q=None) -> "DiscretePMF":
        vals = np.array([_value(v, q) for v in self.values])
        probs = np.array([_value(p, q) for p in self.probs])
        if len(vals) == 0 or len(vals) != len(probs):
            raise InvalidParams("discrete law needs matching, non-empty values and probs")
        if np.any(probs < 0) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise InvalidParams("discrete probabilities must be nonnegative and sum to 1")
        order = np.argsort(vals, kind="stable")
        return DiscretePMF(tuple(vals[order].tolist()), tuple(probs[order].tolist()))

    @property
    def _cum(self):
        return np.cumsum(self.probs)

    def cdf(self, x):
        x = np.asarray(x, float)
        idx = np.searchsorted(np.asarray(self.values), x, side="right")
        cum = np.concatenate([[0.0], self._cum])
        return np.minimum(cum[idx], 1.0)

    def ppf(self, u):
        cum = self._cum
        idx = np.searchsorted(cum, np.asarray(u), side="left")
        idx = np.minimum(idx, len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def support(self):
        return (min(self.values), max(self.values))


Marginal = Union[Uniform, Normal, Laplace, DiscretePMF]


def cdf_scalar(marginal: Marginal, x):
    """CDF of a marginal whose parameters are already constants."""
    if any(_is_expr(p) for p in marginal.params()):
        raise InvalidParams("marginal still depends on q; resolve it first")
    r = marginal.resolve().cdf(x)
    return float(r) if np.ndim(r) == 0 else r


def central_interval(marginal: Marginal, level: float) -> tuple[float, float]:
    """Shortest-by-quantile central interval holding at least ``level`` mass."""
    level = min(max(level, 0.0), 1.0)
    lo, hi = marginal.ppf((1 - level) / 2), marginal.ppf((1 + level) / 2)
    lo, hi = float(lo), float(hi)
    s_lo, s_hi = marginal.support()
    return max(lo, s_lo), min(hi, s_hi)


# -- the joint law -----------------------------------------------------------

def _uniform_stream(seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms in (0, 1) for draws ``start .. start+count`` of ``width`` each."""
    if count <= 0 or width == 0:
        return np.zeros((max(count, 0), width))
    first = start * width
    total = count * width
    block0, skip = divmod(first, 4)
    bg = Philox(key=int(seed) & (2**64 - 1), counter=block0)
    raw = bg.random_raw(skip + total)[skip:]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return u.reshape(count, width)


@dataclass(frozen=True)
class DistributionSpec:
    marginals: tuple

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def m(self) -> int:
        return len(self.marginals)

    @property
    def depends_on_q(self) -> bool:
        return any(_is_expr(p) for mg in self.marginals for p in mg.params())

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(mg, DiscretePMF) for mg in self.marginals)

    @property
    def is_uniform(self) -> bool:
        return all(isinstance(mg, Uniform) for mg in self.marginals)

    def resolve(self, q=None) -> "DistributionSpec":
        return DistributionSpec(tuple(mg.resolve(q) for mg in self.marginals))

    def _resolved(self, q=None) -> "DistributionSpec":
        if self.depends_on_q and q is None:
            raise InvalidParams("distribution depends on q; supply q")
        return self.resolve(q)

    def sample(self, q=None, seed: int = 0, count: int = 1, start: int = 0) -> np.ndarray:
        """Samples ``start .. start+count`` as an array of shape (count, m)."""
        dist = self._resolved(q)
        u = _uniform_stream(seed, start, count, self.m)
        cols = [np.asarray(mg.ppf(u[:, j]), float) for j, mg in enumerate(dist.marginals)]
        return np.stack(cols, axis=1) if cols else np.zeros((count, 0))

    def box_mass(self, lo, hi):
        """Probability of the product cell ``(lo, hi]``; arrays broadcast over cells."""
        lo = np.atleast_2d(np.asarray(lo, float))
        hi = np.atleast_2d(np.asarray(hi, float))
        mass = np.ones(lo.shape[0])
        for j, mg in enumerate(self.marginals):
            mass = mass * (mg.cdf(hi[:, j]) - mg.cdf(lo[:, j]))
        return mass

    def support_box(self):
        s = [mg.support() for mg in self.marginals]
        return np.array([a for a, _ in s]), np.array([b for _, b in s])

    def quantile_box(self, level: float):
        """Per-axis central intervals at level ``level**(1/m)``; joint mass >= level."""
        per_axis = level ** (1.0 / self.m) if self.m else 1.0
        s = [central_interval(mg, per_axis) for mg in self.marginals]
        return np.array([a for a, _ in s]), np.array([b for _, b in s])

    def search_box(self, truncation: float = 1e-12):
        """Support if bounded, else the central box holding ``1 - truncation``."""
        lo, hi = self.support_box()
        if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
            return lo, hi
        qlo, qhi = self.quantile_box(1.0 - truncation)
        return np.where(np.isfinite(lo), lo, qlo), np.where(np.isfinite(hi), hi, qhi)

    def atoms(self):
        """Joint support points and probabilities of a discrete law."""
        if not self.is_discrete:
            raise InvalidParams("atoms() needs discrete marginals")
        pts, probs = [], []
        for combo in itertools.product(*[zip(mg.values, mg.probs) for mg in self.marginals]):
            pts.append([v for v, _ in combo])
            probs.append(math.prod(p for _, p in combo))
        return np.array(pts, float).reshape(len(pts), self.m), probs


# -- deterministic sets ------------------------------------------------------

def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, float))


def _check_dim(q, n):
    q = _vec(q)
    if q.shape[-1] != n:
        raise DimensionMismatch(f"expected a q vector of length {n}, got {q.shape[-1]}")
    return q


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if lo.shape != hi.shape:
            raise InvalidParams("box bounds differ in length")
        if np.any(lo > hi):
            raise InvalidParams(f"box needs lo <= hi, got {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return self.lo.size

    @property
    def center(self):
        return (self.lo + self.hi) / 2

    def membership(self, q, d=None) -> bool:
        q = _check_dim(q, self.n)
        return bool(np.all((self.lo <= q) & (q <= self.hi)))

    def vertices(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi)))).reshape(-1, self.n)

    def enumerate(self, resolution: int, d=None) -> np.ndarray:
        axes = [np.linspace(a, b, resolution) if b > a else np.array([a])
                for a, b in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1).reshape(-1, self.n)


@dataclass(frozen=True)
class AxisEllipsoid:
    """``sum_i weights[i] * (q[i] - center[i])**2 <= bound``."""

    weights: np.ndarray
    center: np.ndarray
    bound: float

    def __post_init__(self):
        w, c = _vec(self.weights), _vec(self.center)
        if w.shape != c.shape:
            raise InvalidParams("ellipsoid weights and center differ in length")
        if np.any(w <= 0) or not self.bound > 0:
            raise InvalidParams("ellipsoid needs positive weights and bound")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self.bound / self.weights)

    def membership(self, q, d=None) -> bool:
        q = _check_dim(q, self.n)
        val = float(np.sum(self.weights * (q - self.center) ** 2))
        return val <= self.bound * (1 + MEMBERSHIP_RTOL)

    def enumerate(self, resolution: int, d=None) -> np.ndarray:
        r = self.radii
        box = Box(self.center - r, self.center + r).enumerate(resolution)
        inside = np.sum(self.weights * (box - self.center) ** 2, axis=1) <= self.bound
        pts = [box[inside]]
        if self.n == 1:
            pts.append(np.array([self.center - r, self.center + r]).reshape(2, 1))
        t = np.linspace(0, 2 * np.pi, resolution, endpoint=False)
        for i, j in itertools.combinations(range(self.n), 2):
            arc = np.tile(self.center, (resolution, 1))
            arc[:, i] += r[i] * np.cos(t)
            arc[:, j] += r[j] * np.sin(t)
            pts.append(arc)
        return np.concatenate(pts, axis=0)


@dataclass(frozen=True)
class DiscreteSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] == 0:
            raise InvalidParams("discrete set needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def membership(self, q, d=None) -> bool:
        q = _check_dim(q, self.n)
        return bool(np.any(np.all(self.points == q, axis=1)))

    def enumerate(self, resolution: int = 0, d=None) -> np.ndarray:
        return self.points.copy()


@dataclass(frozen=True)
class ParamBox:
    """Box whose bounds are expressions in the random parameter."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(self.lo))
        object.__setattr__(self, "hi", tuple(self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise InvalidParams("param box needs matching, non-empty bound lists")
        for e in self.lo + self.hi:
            if isinstance(e, Expression) and e.uses("q"):
                raise InvalidParams(f"param box bound {e.source!r} may not use q")

    @property
    def n(self) -> int:
        return len(self.lo)

    def bounds(self, d):
        """Evaluate the bounds; ``d`` entries may be arrays (batch)."""
        def ev(e):
            return evaluate(e, (), d) if isinstance(e, Expression) else float(e)

        return [ev(e) for e in self.lo], [ev(e) for e in self.hi]

    def resolve(self, d) -> Optional[Box]:
        if d is None:
            raise InvalidParams("param box needs the random parameter value")
        lo, hi = self.bounds(_vec(d))
        lo, hi = np.array(lo, float), np.array(hi, float)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def membership(self, q, d=None) -> bool:
        box = self.resolve(d)
        return False if box is None else box.membership(q)

    def enumerate(self, resolution: int, d=None) -> np.ndarray:
        box = self.resolve(d)
        if box is None:
            raise EmptySet(f"parameter box is empty at d={list(_vec(d))}")
        return box.enumerate(resolution)


UncertaintySet = Union[Box, AxisEllipsoid, DiscreteSet, ParamBox]


def membership(s: UncertaintySet, q, d=None) -> bool:
    if isinstance(s, ParamBox) and d is None:
        raise InvalidParams("param box membership needs d")
    return s.membership(q, d)


def enumerate_q(s: UncertaintySet, resolution: int, d=None) -> np.ndarray:
    return s.enumerate(resolution, d)
