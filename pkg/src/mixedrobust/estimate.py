"""The result type shared by the region measure and the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

METHODS = ("exact_cdf", "geometric", "quadrature", "scenario", "discrete_sum")

_SLACK = 1e-12


@dataclass(frozen=True)
class ProbabilityEstimate:
    """A stability probability together with what backs it up.

    ``bracket`` is set by the region methods, the ``epsilon``/``theta``/
    ``samples`` triple by the scenario method, and ``exact`` by closed-form
    sums.  ``probes`` holds ``(q, p(q))`` pairs for the guaranteed-probability
    problem.
    """

    value: float
    method: str
    guarantee: str
    bracket: Optional[tuple[float, float]] = None
    epsilon: Optional[float] = None
    theta: Optional[float] = None
    samples: Optional[int] = None
    successes: Optional[int] = None
    exact: bool = False
    worst_q: Optional[tuple[float, ...]] = None
    probes: tuple = ()
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown estimate method {self.method!r}")
        v = float(self.value)
        if not -_SLACK <= v <= 1 + _SLACK:
            raise ValueError(f"probability {v} outside [0, 1]")
        object.__setattr__(self, "value", min(max(v, 0.0), 1.0))
        if self.bracket is not None:
            lo, hi = (min(max(float(x), 0.0), 1.0) for x in self.bracket)
            if not lo - _SLACK <= self.value <= hi + _SLACK:
                raise ValueError(f"value {self.value} outside its bracket [{lo}, {hi}]")
            object.__setattr__(self, "bracket", (lo, hi))
        if self.worst_q is not None:
            object.__setattr__(self, "worst_q", tuple(float(x) for x in self.worst_q))
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def half_width(self) -> Optional[float]:
        if self.bracket is None:
            return None
        return (self.bracket[1] - self.bracket[0]) / 2
