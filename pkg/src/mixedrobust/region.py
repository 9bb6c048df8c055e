"""Sets of stabilizing random-parameter values and their probability.

In one dimension the set is a union of intervals found by a scan plus
bisection.  In two dimensions a square grid is classified cell by cell,
boundary cells are subdivided, and marching squares turns the final
classification into polygons.  The probability itself is always computed
from the cells, so the polygons are only a picture of the result.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from skimage import measure as skmeasure

from .errors import DegeneratePolygon, DimensionMismatch, InvalidParams
from .estimate import ProbabilityEstimate
from .param import DistributionSpec
from .robust import CERTIFIED, Auto, CoefficientMap, indicator_batch


# -- one dimension -----------------------------------------------------------

@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint intervals ``(a, b]`` in increasing order.

    ``search`` is the scanned range; an interval ending on it may continue
    beyond.  ``h`` and ``tol`` record the scan step and endpoint accuracy.
    """

    intervals: tuple[tuple[float, float], ...]
    search: Optional[tuple[float, float]] = None
    h: Optional[float] = None
    tol: Optional[float] = None
    guarantee: str = CERTIFIED

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        for a, b in iv:
            if not a < b:
                raise ValueError(f"empty interval ({a}, {b}]")
        for (_, b0), (a1, _) in zip(iv, iv[1:]):
            if not b0 < a1:
                raise ValueError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", iv)
        if self.search is not None:
            object.__setattr__(self, "search", (float(self.search[0]), float(self.search[1])))

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def contains(self, x):
        x = np.asarray(x, float)
        out = np.zeros(x.shape, bool)
        for a, b in self.intervals:
            out |= (x > a) & (x <= b)
        return out if out.ndim else bool(out)

    @property
    def length(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)


def _bisect(cmap, Q, left, right, left_value, tol, method):
    """Shrink every bracket ``[left, right]`` (F differs at the ends) below ``tol``."""
    left, right = left.copy(), right.copy()
    while left.size and np.max(right - left) > tol:
        mid = 0.5 * (left + right)
        active = right - left > tol
        f, _ = indicator_batch(cmap, Q, mid[active][:, None], method)
        same = np.zeros_like(active)
        same[active] = f == left_value[active]
        left = np.where(same, mid, left)
        right = np.where(active & ~same, mid, right)
    return 0.5 * (left + right)


def stability_intervals_1d(cmap: CoefficientMap, Q, search: Sequence[float],
                           h: Optional[float] = None, tol: float = 1e-6,
                           method=Auto()) -> IntervalUnion:
    """Scan F on a grid of step ``h`` over ``search`` and bisect each sign change.

    Features of F narrower than ``h`` can be missed.  Intervals touching
    the ends of ``search`` are cut there.
    """
    if cmap.m != 1:
        raise DimensionMismatch(f"1-D region needs m = 1, the map has m = {cmap.m}")
    lo, hi = (float(x) for x in search)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidParams(f"search range must be finite with lo < hi, got [{lo}, {hi}]")
    h = (hi - lo) / 2000 if h is None else float(h)
    if not h > 0 or not tol > 0:
        raise InvalidParams("scan step and tolerance must be positive")

    count = int(math.ceil((hi - lo) / h - 1e-9))
    grid = lo + h * np.arange(count + 1)
    grid[-1] = hi
    f, guarantee = indicator_batch(cmap, Q, grid[:, None], method)

    flips = np.flatnonzero(f[:-1] != f[1:])
    edges = _bisect(cmap, Q, grid[flips], grid[flips + 1], f[flips], tol, method)
    rising = ~f[flips]

    intervals = []
    start = lo if f[0] else None
    for x, up in zip(edges, rising):
        if up:
            start = x
        elif start is not None:
            if x > start:
                intervals.append((start, x))
            start = None
    if start is not None and hi > start:
        intervals.append((start, hi))
    return IntervalUnion(tuple(intervals), (lo, hi), h, tol, guarantee)


# -- two dimensions ----------------------------------------------------------

def polygon_area(polygon) -> float:
    """Signed shoelace area; counterclockwise is positive."""
    p = np.asarray(polygon, float)
    if p.ndim != 2 or p.shape[0] < 3:
        raise DegeneratePolygon("a polygon needs at least 3 vertices")
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def contour_polygons(mask: np.ndarray, lo: Sequence[float], hi: Sequence[float]) -> list:
    """Marching-squares boundary of a pixel mask over the rectangle ``[lo, hi]``.

    ``mask[i, j]`` is the value of the cell centered at the ``i``-th step
    along the first axis and the ``j``-th along the second.  Outer
    boundaries come out counterclockwise and holes clockwise.
    """
    mask = np.asarray(mask, bool)
    if not mask.any():
        return []
    step = (np.asarray(hi, float) - np.asarray(lo, float)) / np.asarray(mask.shape)
    padded = np.pad(mask.astype(float), 1)
    polys = []
    for c in skmeasure.find_contours(padded, 0.5, positive_orientation="high"):
        if np.allclose(c[0], c[-1]):
            c = c[:-1]
        if c.shape[0] < 3:
            continue
        pts = np.asarray(lo, float) + (c - 0.5) * step
        if polygon_area(pts) != 0.0:
            polys.append(pts)
    return polys


@dataclass(frozen=True)
class PolygonRegion:
    """Classified cells of a 2-D region plus their polygonal outline.

    ``inside`` and ``boundary`` hold cell rectangles as rows
    ``(x0, x1, y0, y1)``; the stable set lies between the union of the
    first and the union of both.  ``cell_bracket`` gives those two areas
    as fractions of the ``bounds`` rectangle.
    """

    polygons: tuple
    bounds: tuple[tuple[float, float], tuple[float, float]]
    resolution: int
    refine_depth: int
    inside: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    guarantee: str = CERTIFIED

    @property
    def cell_bracket(self) -> dict:
        (x0, x1), (y0, y1) = self.bounds
        total = (x1 - x0) * (y1 - y0)

        def area(r):
            return math.fsum((r[:, 1] - r[:, 0]) * (r[:, 3] - r[:, 2])) / total

        return {"inside_mass": area(self.inside), "boundary_mass": area(self.boundary)}

    def area(self) -> float:
        return math.fsum(polygon_area(p) for p in self.polygons)


def _lattice_points(idx: np.ndarray, lo, hi, denom: int) -> np.ndarray:
    return lo[None, :] + idx * ((hi - lo)[None, :] / denom)


def stability_region_2d(cmap: CoefficientMap, Q, bounds, resolution: int = 400,
                        refine_depth: int = 2, method=Auto()) -> PolygonRegion:
    """Classify F over an R x R grid on ``bounds`` with adaptive boundary refinement.

    A cell is committed when F agrees at its four corners and its center;
    otherwise it is split in four, up to ``refine_depth`` times.  Cells
    still mixed at the finest level form the boundary band.
    """
    if cmap.m != 2:
        raise DimensionMismatch(f"2-D region needs m = 2, the map has m = {cmap.m}")
    R, depth = int(resolution), int(refine_depth)
    if R < 16 or depth < 0:
        raise InvalidParams("resolution must be >= 16 and refine_depth >= 0")
    b = np.asarray(bounds, float)
    if b.shape != (2, 2) or not np.all(np.isfinite(b)) or np.any(b[:, 0] >= b[:, 1]):
        raise InvalidParams("bounds must be finite [[lo1, hi1], [lo2, hi2]] with lo < hi")
    lo, hi = b[:, 0], b[:, 1]

    # all coordinates live on one integer lattice with 2 * R * 2**depth steps,
    # so shared points evaluate identically at every level
    denom = 2 * R * 2**depth
    fine = R * 2**depth
    label = np.zeros((fine, fine), bool)
    inside_cells, boundary_cells = [], []
    guarantee = CERTIFIED

    ij = np.stack(np.meshgrid(np.arange(R), np.arange(R), indexing="ij"), -1).reshape(-1, 2)
    for level in range(depth + 1):
        if ij.size == 0:
            break
        span = denom // (R * 2**level)
        offsets = np.array([[0, 0], [2, 0], [0, 2], [2, 2], [1, 1]]) * (span // 2)
        pts = ij[:, None, :] * span + offsets[None, :, :]
        uniq, inv = np.unique(pts.reshape(-1, 2), axis=0, return_inverse=True)
        f, g = indicator_batch(cmap, Q, _lattice_points(uniq, lo, hi, denom), method)
        if g != CERTIFIED:
            guarantee = g
        vals = f[inv.reshape(-1)].reshape(-1, 5)
        agree = np.all(vals == vals[:, :1], axis=1)
        block = fine // (R * 2**level)

        yes = ij[agree & vals[:, 0]]
        inside_cells.append((yes, level))
        mixed = ij[~agree]
        coarse = np.zeros((R * 2**level,) * 2, bool)
        coarse[yes[:, 0], yes[:, 1]] = True
        if level == depth:
            # unresolved cells take the value at their center
            hit = mixed[vals[~agree, 4]]
            coarse[hit[:, 0], hit[:, 1]] = True
        label |= np.repeat(np.repeat(coarse, block, axis=0), block, axis=1)
        if level == depth:
            boundary_cells.append((mixed, level))
            break
        kids = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
        ij = (2 * mixed[:, None, :] + kids[None, :, :]).reshape(-1, 2)

    def rects(groups):
        out = [np.zeros((0, 4))]
        for cells, level in groups:
            if cells.size == 0:
                continue
            n = R * 2**level
            w = (hi - lo) / n
            x0 = lo[0] + cells[:, 0] * w[0]
            y0 = lo[1] + cells[:, 1] * w[1]
            x1 = np.where(cells[:, 0] + 1 == n, hi[0], x0 + w[0])
            y1 = np.where(cells[:, 1] + 1 == n, hi[1], y0 + w[1])
            out.append(np.stack([x0, x1, y0, y1], axis=1))
        return np.concatenate(out, axis=0)

    polys = tuple(contour_polygons(label, lo, hi))
    return PolygonRegion(polys, ((lo[0], hi[0]), (lo[1], hi[1])), R, depth,
                         rects(inside_cells), rects(boundary_cells), guarantee)


# -- probability -------------------------------------------------------------

def _check_law(dist: DistributionSpec, m: int):
    if dist.m != m:
        raise DimensionMismatch(f"region has dimension {m}, the law has m = {dist.m}")
    if dist.depends_on_q:
        dist = dist.resolve(None)  # raises with a clear message
    return dist


def measure(region, dist: DistributionSpec) -> ProbabilityEstimate:
    """Probability that the random parameter falls into ``region``."""
    if isinstance(region, IntervalUnion):
        dist = _check_law(dist, 1)
        mg = dist.marginals[0]
        value = math.fsum(float(mg.cdf(b)) - float(mg.cdf(a)) for a, b in region)
        notes = []
        spill = 0.0
        if region.search is not None:
            s_lo, s_hi = region.search
            # stable intervals cut at the scan range may continue past it
            if region.intervals and region.intervals[0][0] == s_lo:
                spill += float(mg.cdf(s_lo))
            if region.intervals and region.intervals[-1][1] == s_hi:
                spill += 1.0 - float(mg.cdf(s_hi))
        bracket = None
        if spill > 0:
            bracket = (value, min(value + spill, 1.0))
            notes.append(f"stable set reaches the scan range; up to {spill:.3g} mass unresolved")
        return ProbabilityEstimate(value, "exact_cdf", region.guarantee, bracket=bracket,
                                   exact=bracket is None, notes=tuple(notes))
    if isinstance(region, PolygonRegion):
        dist = _check_law(dist, 2)
        (x0, x1), (y0, y1) = region.bounds

        def mass(r):
            if r.shape[0] == 0:
                return 0.0
            return math.fsum(dist.box_mass(r[:, [0, 2]], r[:, [1, 3]]))

        inside = mass(region.inside)
        outside = 1.0 - float(dist.box_mass([[x0, y0]], [[x1, y1]])[0])
        unresolved = mass(region.boundary) + max(outside, 0.0)
        lo_b, hi_b = inside, min(inside + unresolved, 1.0)
        kind = "geometric" if dist.is_uniform else "quadrature"
        notes = []
        if outside > 1e-12:
            notes.append(f"{outside:.3g} probability mass lies outside the region bounds")
        return ProbabilityEstimate((lo_b + hi_b) / 2, kind, region.guarantee,
                                   bracket=(lo_b, hi_b), notes=tuple(notes))
    raise TypeError(f"cannot measure {type(region).__name__}")


# -- export ------------------------------------------------------------------

def region_csv(region) -> str:
    """CSV text: ``interval_id,a,b`` rows or ``polygon_id,vertex_index,delta1,delta2`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(region, IntervalUnion):
        w.writerow(["interval_id", "a", "b"])
        for k, (a, b) in enumerate(region):
            w.writerow([k, repr(a), repr(b)])
    else:
        w.writerow(["polygon_id", "vertex_index", "delta1", "delta2"])
        for k, poly in enumerate(region.polygons):
            for v, (x, y) in enumerate(poly):
                w.writerow([k, v, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def read_polygon_csv(text: str) -> list:
    """Polygons back from :func:`region_csv` output."""
    polys: dict[int, list] = {}
    for row in csv.DictReader(io.StringIO(text)):
        polys.setdefault(int(row["polygon_id"]), []).append(
            (int(row["vertex_index"]), float(row["delta1"]), float(row["delta2"])))
    out = []
    for k in sorted(polys):
        rows = sorted(polys[k])
        out.append(np.array([[x, y] for _, x, y in rows]))
    return out
