"""Robust stability of a polynomial family over a deterministic set Q.

For a fixed value of the random parameter ``d`` the indicator
``F(d) = [P(s, q, d) is stable for every q in Q]`` is decided by one of

* Kharitonov's four vertex polynomials (Hurwitz, box Q, each ``q_i``
  entering a single coefficient affinely) -- certified;
* zero exclusion of the value set ``{P(iw, q, d) : q in Q}`` over a
  frequency sweep (Hurwitz, coefficients affine in q, box or ellipsoid Q)
  -- certified up to the sweep resolution;
* stability on a grid of q points -- labelled ``sampled``; exhaustive and
  therefore ``certified`` when Q is a finite set.

Everything is vectorized over a batch of ``d`` values (``*_batch``
functions); the scalar entry points wrap a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .errors import DimensionMismatch, MethodInapplicable
from .expr import Const, Var, affine_in, evaluate, parse, substitute
from .param import AxisEllipsoid, Box, DiscreteSet, ParamBox
from .poly import LEADING_TOL, Polynomial, StabilityKind, hurwitz_mask, stable_mask

CERTIFIED = "certified"
SAMPLED = "sampled"

_BATCH_BUDGET = 1 << 18  # rows x points handled per vectorized chunk


@dataclass(frozen=True)
class CoefficientMap:
    """``(q, d) -> coefficients`` of the characteristic polynomial (ascending)."""

    kind: StabilityKind
    n: int
    m: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) < 2:
            raise ValueError("a coefficient map needs at least two coefficients")
        for e in self.coeffs:
            if e.n > self.n or e.m > self.m:
                raise DimensionMismatch(f"expression {e.source!r} exceeds dims n={self.n}, m={self.m}")

    @classmethod
    def from_strings(cls, descending: Sequence[str], n: int, m: int,
                     kind: StabilityKind = StabilityKind.HURWITZ) -> "CoefficientMap":
        exprs = [parse(str(t), n, m) for t in descending]
        return cls(kind, n, m, tuple(reversed(exprs)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, q, d) -> np.ndarray:
        """Coefficient array; entries of ``q``/``d`` may be broadcastable arrays."""
        vals = [evaluate(e, q, d) for e in self.coeffs]
        shape = np.broadcast_shapes(*[np.shape(v) for v in vals],
                                    *[np.shape(x) for x in q], *[np.shape(x) for x in d])
        return np.stack([np.broadcast_to(np.asarray(v, float), shape) for v in vals], axis=-1)

    def polynomial(self, q=(), d=()) -> Polynomial:
        return Polynomial(tuple(self.evaluate(list(np.atleast_1d(q)) if self.n else [],
                                              list(np.atleast_1d(d)) if self.m else [])))

    @cached_property
    def affine(self):
        """Per-coefficient affine decomposition in q, or None."""
        forms = [affine_in(e, "q") for e in self.coeffs]
        return None if any(f is None for f in forms) else tuple(forms)

    @cached_property
    def independent_intervals(self) -> bool:
        """True when each q_i enters at most one coefficient (Kharitonov exact)."""
        if self.affine is None:
            return False
        zero_q, zero_d = [0.0] * self.n, [0.0] * self.m

        def unused(e):
            return e.is_constant and float(evaluate(e, zero_q, zero_d)) == 0.0

        for i in range(self.n):
            users = sum(not unused(f.coeffs[i]) for f in self.affine)
            if users > 1:
                return False
        return True

    def fix_q(self, q) -> "CoefficientMap":
        """The map with q frozen to a concrete value (n becomes 0)."""
        q = np.atleast_1d(np.asarray(q, float))
        mapping = {("q", i): Const(float(v)) for i, v in enumerate(q)}
        return CoefficientMap(self.kind, 0, self.m,
                              tuple(substitute(e, mapping, 0, self.m) for e in self.coeffs))

    def lift(self) -> "CoefficientMap":
        """Treat d_j as an extra deterministic parameter q_{n+j} (m becomes 0)."""
        mapping = {("d", j): Var("q", self.n + j) for j in range(self.m)}
        n = self.n + self.m
        return CoefficientMap(self.kind, n, 0,
                              tuple(substitute(e, mapping, n, 0) for e in self.coeffs))


# -- methods -----------------------------------------------------------------

@dataclass(frozen=True)
class Auto:
    grid_resolution: int = 21


@dataclass(frozen=True)
class Kharitonov:
    pass


@dataclass(frozen=True)
class ZeroExclusion:
    omega_max: Optional[float] = None
    omega_points: int = 1024
    max_depth: int = 30

    def __post_init__(self):
        if self.omega_points < 64:
            raise ValueError("zero exclusion needs omega_points >= 64")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")


@dataclass(frozen=True)
class GridFallback:
    resolution: int = 21

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("grid fallback needs resolution >= 2")


RobustMethod = Auto | Kharitonov | ZeroExclusion | GridFallback


class IndicatorResult(NamedTuple):
    stable: bool
    guarantee: str


def _is_boxlike(Q) -> bool:
    return isinstance(Q, (Box, ParamBox))


def choose_method(cmap: CoefficientMap, Q, method) -> RobustMethod:
    """Resolve ``Auto`` and validate explicit choices."""
    hurwitz = cmap.kind is StabilityKind.HURWITZ
    if isinstance(method, Auto):
        if isinstance(Q, DiscreteSet):
            return GridFallback(method.grid_resolution)
        if hurwitz and cmap.affine is not None:
            if _is_boxlike(Q) and cmap.independent_intervals:
                return Kharitonov()
            if isinstance(Q, (Box, ParamBox, AxisEllipsoid)):
                return ZeroExclusion()
        return GridFallback(method.grid_resolution)
    if isinstance(method, Kharitonov):
        if not hurwitz:
            raise MethodInapplicable("Kharitonov's theorem has no discrete-time analogue")
        if not _is_boxlike(Q) or not cmap.independent_intervals:
            raise MethodInapplicable(
                "Kharitonov needs a box Q with each q_i entering one coefficient affinely")
    if isinstance(method, ZeroExclusion):
        if not hurwitz:
            raise MethodInapplicable("the zero-exclusion sweep is implemented for Hurwitz stability")
        if cmap.affine is None:
            raise MethodInapplicable("zero exclusion needs coefficients affine in q")
        if not isinstance(Q, (Box, ParamBox, AxisEllipsoid)):
            raise MethodInapplicable("zero exclusion needs a box or ellipsoid Q")
    return method


def _guarantee(Q, method) -> str:
    if isinstance(method, GridFallback) and not isinstance(Q, DiscreteSet):
        return SAMPLED
    return CERTIFIED


# -- shared batch helpers ----------------------------------------------------

def _cols(x: np.ndarray) -> list:
    return [x[..., j] for j in range(x.shape[-1])]


def _set_geometry(Q, deltas: np.ndarray):
    """Center, shape tag, per-row scale and emptiness mask of Q for each d row."""
    B = deltas.shape[0]
    if isinstance(Q, ParamBox):
        lo, hi = Q.bounds(_cols(deltas))
        lo = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in lo], axis=1)
        hi = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in hi], axis=1)
        empty = np.any(lo > hi, axis=1)
        hi = np.where(empty[:, None], lo, hi)
        return (lo + hi) / 2, "box", (hi - lo) / 2, empty
    if isinstance(Q, Box):
        c = np.broadcast_to(Q.center, (B, Q.n))
        return c, "box", np.broadcast_to((Q.hi - Q.lo) / 2, (B, Q.n)), np.zeros(B, bool)
    if isinstance(Q, AxisEllipsoid):
        c = np.broadcast_to(Q.center, (B, Q.n))
        return c, "ellipse", np.broadcast_to(Q.radii, (B, Q.n)), np.zeros(B, bool)
    raise MethodInapplicable(f"no affine geometry for {type(Q).__name__}")


def _affine_parts(cmap: CoefficientMap, deltas: np.ndarray):
    """Constant (B, k+1) and linear (B, k+1, n) parts evaluated per d row."""
    B = deltas.shape[0]
    d = _cols(deltas)
    k1 = cmap.degree + 1
    A0 = np.empty((B, k1))
    A1 = np.empty((B, k1, cmap.n))
    for j, form in enumerate(cmap.affine):
        A0[:, j] = np.broadcast_to(evaluate(form.constant, [0.0] * cmap.n, d), (B,))
        for i, ce in enumerate(form.coeffs):
            A1[:, j, i] = np.broadcast_to(evaluate(ce, [0.0] * cmap.n, d), (B,))
    return A0, A1


def _coefficient_ranges(A0c, A1, shape, scale):
    """Exact coefficient ranges over a box (interval) or ellipsoid (Euclidean)."""
    if shape == "box":
        rad = np.sum(np.abs(A1) * scale[:, None, :], axis=2)
    else:
        rad = np.sqrt(np.sum((A1 * scale[:, None, :]) ** 2, axis=2))
    return A0c - rad, A0c + rad


def _kharitonov_mask(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Kharitonov test on coefficient intervals, ascending, shape (B, k+1)."""
    lead_lo, lead_hi = lo[:, -1], hi[:, -1]
    ok = (lead_lo > LEADING_TOL) | (lead_hi < -LEADING_TOL)
    neg = lead_hi < 0
    lo, hi = np.where(neg[:, None], -hi, lo), np.where(neg[:, None], -lo, hi)
    k1 = lo.shape[1]
    pattern = np.array([[0, 0, 1, 1], [1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1]], bool)
    for row in pattern:
        pick_hi = row[np.arange(k1) % 4]
        poly = np.where(pick_hi[None, :], hi, lo)
        ok &= hurwitz_mask(poly)
    return ok


def kharitonov_hurwitz(intervals: Sequence[Sequence[float]]) -> bool:
    """Robust Hurwitz stability of an interval polynomial (ascending coefficients)."""
    iv = np.asarray(intervals, float)
    if iv.ndim != 2 or iv.shape[1] != 2 or np.any(iv[:, 0] > iv[:, 1]):
        raise ValueError("intervals must be a list of [low, high] pairs with low <= high")
    return bool(_kharitonov_mask(iv[None, :, 0], iv[None, :, 1])[0])


# -- zero exclusion ------------------------------------------------------------

@njit(cache=True)
def _clearance(a0, a1, is_box, w, gr, gi):
    """(origin excluded, lower bound on origin distance) of the value set at w."""
    k1, n = a1.shape
    c1 = 0.0
    c2 = 0.0
    for i in range(n):
        gr[i] = 0.0
        gi[i] = 0.0
    pr, pim = 1.0, 0.0
    for j in range(k1):
        c1 += a0[j] * pr
        c2 += a0[j] * pim
        for i in range(n):
            gr[i] += a1[j, i] * pr
            gi[i] += a1[j, i] * pim
        pr, pim = -pim * w, pr * w
    size = abs(c1) + abs(c2)
    for i in range(n):
        size += abs(gr[i]) + abs(gi[i])
    margin = 1e-12 * size
    if is_box:
        # separating axes: the zonotope's edge normals, its generators and
        # the center direction
        sep = -np.inf
        for dk in range(2 * n + 1):
            if dk < n:
                nr, ni = gr[dk], gi[dk]
            elif dk < 2 * n:
                nr, ni = -gi[dk - n], gr[dk - n]
            else:
                nr, ni = c1, c2
            nn = np.hypot(nr, ni)
            if nn == 0.0:
                continue
            val = abs(c1 * nr + c2 * ni) / nn
            for i in range(n):
                val -= abs(gr[i] * nr + gi[i] * ni) / nn
            sep = max(sep, val)
        if sep == -np.inf:
            sep = 0.0
        return sep > margin, sep
    s11 = 0.0
    s22 = 0.0
    s12 = 0.0
    for i in range(n):
        s11 += gr[i] * gr[i]
        s22 += gi[i] * gi[i]
        s12 += gr[i] * gi[i]
    det = s11 * s22 - s12 * s12
    tr = s11 + s22
    disc = np.sqrt(max((tr / 2) ** 2 - det, 0.0))
    lam_min = max(tr / 2 - disc, 0.0)
    lam_max = tr / 2 + disc
    if det > 1e-12 * tr * tr:
        quad = (s22 * c1 * c1 - 2 * s12 * c1 * c2 + s11 * c2 * c2) / det
        clear = max((np.sqrt(quad) - 1.0) * np.sqrt(lam_min),
                    np.hypot(c1, c2) - np.sqrt(lam_max))
        return quad > 1.0 + 1e-12, clear
    # rank <= 1: a segment along the principal axis, or a point
    if s12 != 0.0:
        ex, ey = lam_max - s22, s12
    elif s11 >= s22:
        ex, ey = 1.0, 0.0
    else:
        ex, ey = 0.0, 1.0
    en = np.hypot(ex, ey)
    along = abs(c1 * ex + c2 * ey) / en
    perp = abs(c1 * ey - c2 * ex) / en
    clear = max(perp, along - np.sqrt(lam_max))
    return clear > margin, clear


@njit(cache=True)
def _speed(a0, a1, w):
    """Bound on how fast any value-set point moves with frequency on [0, w]."""
    k1, n = a1.shape
    total = 0.0
    wp = 1.0
    for j in range(1, k1):
        mag = abs(a0[j])
        for i in range(n):
            mag += abs(a1[j, i])
        total += j * mag * wp
        wp *= w
    return total


@njit(cache=True)
def _sweep_kernel(A0c, A1s, is_box, omega_max, points, max_depth):
    """Origin exclusion over [0, omega_max] per row.

    The base grid has ``points`` frequencies.  An interval between samples
    counts as covered when the endpoint clearances outweigh the distance
    the value set can travel across it; otherwise it is bisected, up to
    ``max_depth`` times, before the row is rejected.  Grid points already
    covered by the previous sample's clearance are skipped.
    """
    B = A0c.shape[0]
    n = A1s.shape[2]
    excluded = np.ones(B, np.bool_)
    gr = np.empty(n)
    gi = np.empty(n)
    stack_w = np.empty((max_depth + 2, 2))
    stack_c = np.empty((max_depth + 2, 2))
    stack_d = np.empty(max_depth + 2, np.int64)
    for b in range(B):
        a0 = A0c[b]
        a1 = A1s[b]
        h = omega_max[b] / (points - 1)
        ok, c_prev = _clearance(a0, a1, is_box, 0.0, gr, gi)
        if not ok:
            excluded[b] = False
            continue
        t = 0
        while t < points - 1:
            # grid points inside the certified reach of the last sample are
            # covered without evaluating them
            jump = 1
            while (t + 2 * jump <= points - 1
                   and 2 * jump * h * _speed(a0, a1, h * (t + 2 * jump)) < c_prev):
                jump *= 2
            w_lo = h * t
            t += jump
            w_hi = h * t
            ok, c_next = _clearance(a0, a1, is_box, w_hi, gr, gi)
            if not ok:
                excluded[b] = False
                break
            stack_w[0, 0], stack_w[0, 1] = w_lo, w_hi
            stack_c[0, 0], stack_c[0, 1] = c_prev, c_next
            stack_d[0] = 0
            top = 1
            while top > 0:
                top -= 1
                wa, wb = stack_w[top, 0], stack_w[top, 1]
                ca, cb = stack_c[top, 0], stack_c[top, 1]
                depth = stack_d[top]
                if ca + cb > _speed(a0, a1, wb) * (wb - wa):
                    continue
                if depth >= max_depth:
                    ok = False
                    break
                wm = 0.5 * (wa + wb)
                ok, cm = _clearance(a0, a1, is_box, wm, gr, gi)
                if not ok:
                    break
                stack_w[top, 0], stack_w[top, 1] = wa, wm
                stack_c[top, 0], stack_c[top, 1] = ca, cm
                stack_d[top] = depth + 1
                stack_w[top + 1, 0], stack_w[top + 1, 1] = wm, wb
                stack_c[top + 1, 0], stack_c[top + 1, 1] = cm, cb
                stack_d[top + 1] = depth + 1
                top += 2
            if not ok:
                excluded[b] = False
                break
            c_prev = c_next
    return excluded


def _root_bound(lo, hi, lead_ok):
    """Smaller of the Cauchy and Fujiwara root-modulus bounds over coefficient ranges."""
    k = lo.shape[1] - 1
    big = np.maximum(np.abs(lo[:, :-1]), np.abs(hi[:, :-1]))
    small = np.where(lead_ok, np.minimum(np.abs(lo[:, -1]), np.abs(hi[:, -1])), 1.0)
    ratio = big / small[:, None]
    cauchy = 1.0 + np.max(ratio, axis=1)
    expo = 1.0 / (k - np.arange(k))
    ratio[:, 0] /= 2.0
    fujiwara = 2.0 * np.max(ratio ** expo[None, :], axis=1)
    return np.minimum(cauchy, fujiwara)


def _zero_exclusion_core(cmap, Q, deltas, method: ZeroExclusion):
    center, shape, scale, empty = _set_geometry(Q, deltas)
    A0, A1 = _affine_parts(cmap, deltas)
    A0c = A0 + np.einsum("bji,bi->bj", A1, center)
    lo, hi = _coefficient_ranges(A0c, A1, shape, scale)
    lead_ok = (lo[:, -1] > LEADING_TOL) | (hi[:, -1] < -LEADING_TOL)
    ok = hurwitz_mask(A0c) & lead_ok
    if method.omega_max is not None:
        wmax = np.full(deltas.shape[0], float(method.omega_max))
    else:
        wmax = 1.0 + _root_bound(lo, hi, lead_ok)
    A1s = np.ascontiguousarray(A1 * scale[:, None, :])
    A0c = np.ascontiguousarray(A0c)
    rows = np.flatnonzero(ok & ~empty)
    if rows.size:
        ok[rows] = _sweep_kernel(A0c[rows], A1s[rows], shape == "box", wmax[rows],
                                 method.omega_points, method.max_depth)
    return ok | empty


def zero_exclusion_affine(cmap: CoefficientMap, Q, delta, omega_max=None,
                          omega_points: int = 1024) -> bool:
    method = choose_method(cmap, Q, ZeroExclusion(omega_max, omega_points))
    deltas = np.atleast_1d(np.asarray(delta, float)).reshape(1, cmap.m)
    return bool(_zero_exclusion_core(cmap, Q, deltas, method)[0])


# -- grid fallback -----------------------------------------------------------

def _grid_points(Q, deltas, resolution):
    """q points of shape (B or 1, G, n) and an emptiness mask (B,)."""
    B = deltas.shape[0]
    if isinstance(Q, ParamBox):
        lo, hi = Q.bounds(_cols(deltas))
        lo = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in lo], axis=1)
        hi = np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in hi], axis=1)
        empty = np.any(lo > hi, axis=1)
        unit = Box(np.zeros(Q.n), np.ones(Q.n)).enumerate(resolution)
        pts = lo[:, None, :] + unit[None, :, :] * (hi - lo)[:, None, :]
        # pin the far vertex exactly; lo + 1*(hi - lo) can round past hi
        far = np.all(unit == 1.0, axis=1)
        pts[:, far, :] = hi[:, None, :]
        return pts, empty
    if isinstance(Q, Box):
        pts = np.concatenate([Q.enumerate(resolution), Q.vertices()], axis=0)
    else:
        pts = Q.enumerate(resolution)
    return pts[None, :, :], np.zeros(B, bool)


def _grid_core(cmap, Q, deltas, resolution):
    pts, empty = _grid_points(Q, deltas, resolution)
    B, G = deltas.shape[0], pts.shape[1]
    out = np.empty(B, bool)
    step = max(1, _BATCH_BUDGET // G)
    for start in range(0, B, step):
        sl = slice(start, start + step)
        p = pts[sl] if pts.shape[0] > 1 else pts
        d = [deltas[sl, j][:, None] for j in range(cmap.m)]
        C = cmap.evaluate(_cols(p), d)
        C = np.broadcast_to(C, (deltas[sl].shape[0], G, cmap.degree + 1))
        out[sl] = np.all(stable_mask(C, cmap.kind), axis=1)
    return out | empty


# -- public indicator --------------------------------------------------------

def _check_dims(cmap, Q, deltas):
    if Q.n != cmap.n:
        raise DimensionMismatch(f"Q has dimension {Q.n}, the map expects n={cmap.n}")
    if deltas.shape[1] != cmap.m:
        raise DimensionMismatch(f"d has dimension {deltas.shape[1]}, the map expects m={cmap.m}")


def _as_rows(cmap, deltas) -> np.ndarray:
    deltas = np.asarray(deltas, float)
    if deltas.ndim < 2:
        deltas = deltas.reshape(-1, cmap.m) if cmap.m else deltas.reshape(1, 0)
    return deltas


def indicator_batch(cmap: CoefficientMap, Q, deltas, method=Auto()):
    """``F`` for every row of ``deltas`` (shape (B, m)); returns (mask, guarantee)."""
    deltas = _as_rows(cmap, deltas)
    _check_dims(cmap, Q, deltas)
    method = choose_method(cmap, Q, method)
    if deltas.shape[0] == 0:
        return np.zeros(0, bool), _guarantee(Q, method)
    if isinstance(method, GridFallback):
        mask = _grid_core(cmap, Q, deltas, method.resolution)
    elif isinstance(method, ZeroExclusion):
        mask = _zero_exclusion_core(cmap, Q, deltas, method)
    else:
        center, shape, scale, empty = _set_geometry(Q, deltas)
        A0, A1 = _affine_parts(cmap, deltas)
        A0c = A0 + np.einsum("bji,bi->bj", A1, center)
        lo, hi = _coefficient_ranges(A0c, A1, shape, scale)
        mask = _kharitonov_mask(lo, hi) | empty
    return mask, _guarantee(Q, method)


def indicator_f(cmap: CoefficientMap, Q, delta=(), method=Auto()) -> IndicatorResult:
    """Robust stability over Q at one value of the random parameter.

    An empty ``Q(d)`` is vacuously robust (certified).
    """
    deltas = np.atleast_1d(np.asarray(delta, float)).reshape(1, cmap.m)
    mask, guarantee = indicator_batch(cmap, Q, deltas, method)
    return IndicatorResult(bool(mask[0]), guarantee)


# -- necessary / sufficient surrogates ---------------------------------------

def _hull_batch(cmap, Q, deltas, resolution):
    """Coefficient ranges over Q: exact for affine maps on convex Q, grid hull otherwise."""
    if cmap.affine is not None and isinstance(Q, (Box, ParamBox, AxisEllipsoid)):
        center, shape, scale, empty = _set_geometry(Q, deltas)
        A0, A1 = _affine_parts(cmap, deltas)
        A0c = A0 + np.einsum("bji,bi->bj", A1, center)
        lo, hi = _coefficient_ranges(A0c, A1, shape, scale)
        return lo, hi, empty
    pts, empty = _grid_points(Q, deltas, resolution)
    d = [deltas[:, j][:, None] for j in range(cmap.m)]
    C = cmap.evaluate(_cols(pts), d)
    C = np.broadcast_to(C, (deltas.shape[0], pts.shape[1], cmap.degree + 1))
    return C.min(axis=1), C.max(axis=1), empty


def _require_hurwitz(cmap):
    if cmap.kind is not StabilityKind.HURWITZ:
        raise MethodInapplicable("coefficient-sign and Kharitonov surrogates are Hurwitz-only")


def necessary_batch(cmap, Q, deltas, resolution: int = 21) -> np.ndarray:
    """Same strict sign for every coefficient over Q (necessary for Hurwitz)."""
    _require_hurwitz(cmap)
    deltas = _as_rows(cmap, deltas)
    _check_dims(cmap, Q, deltas)
    if cmap.affine is not None and isinstance(Q, (Box, ParamBox, AxisEllipsoid)):
        lo, hi, empty = _hull_batch(cmap, Q, deltas, resolution)
        pos = np.all(lo > 0, axis=1)
        neg = np.all(hi < 0, axis=1)
        return pos | neg | empty
    pts, empty = _grid_points(Q, deltas, resolution)
    d = [deltas[:, j][:, None] for j in range(cmap.m)]
    C = cmap.evaluate(_cols(pts), d)
    C = C * np.sign(C[..., -1:])
    return np.all(np.all(C > 0, axis=-1), axis=-1) | empty


def sufficient_batch(cmap, Q, deltas, resolution: int = 21) -> np.ndarray:
    """Kharitonov over the coefficient-range hull (sufficient for Hurwitz)."""
    _require_hurwitz(cmap)
    deltas = _as_rows(cmap, deltas)
    _check_dims(cmap, Q, deltas)
    lo, hi, empty = _hull_batch(cmap, Q, deltas, resolution)
    return _kharitonov_mask(lo, hi) | empty


def necessary_indicator(cmap, Q, delta=(), resolution: int = 21) -> bool:
    return bool(necessary_batch(cmap, Q, np.atleast_1d(np.asarray(delta, float)), resolution)[0])


def sufficient_indicator(cmap, Q, delta=(), resolution: int = 21) -> bool:
    return bool(sufficient_batch(cmap, Q, np.atleast_1d(np.asarray(delta, float)), resolution)[0])
