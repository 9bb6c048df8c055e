"""Real polynomials and strict Hurwitz / Schur stability tests.

Coefficient arrays are ascending throughout: index ``i`` holds the
coefficient of ``s**i``.  The batch testers (:func:`hurwitz_mask`,
:func:`schur_mask`) take any array of shape ``(..., k + 1)`` and are the
workhorses of the region and scenario code; the scalar functions are thin
wrappers over them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ZeroPolynomial

LEADING_TOL = 1e-12


class StabilityKind(enum.Enum):
    HURWITZ = "hurwitz"
    SCHUR = "schur"


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with ascending real coefficients."""

    coeffs: tuple[float, ...]
    leading_tol: float = LEADING_TOL

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if not c:
            raise ValueError("coefficient list must be non-empty")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_descending(cls, coeffs: Sequence[float]) -> "Polynomial":
        return cls(tuple(coeffs)[::-1])

    @property
    def degree(self) -> int:
        big = np.flatnonzero(np.abs(self.coeffs) > self.leading_tol)
        if big.size == 0:
            raise ZeroPolynomial(f"all coefficients below {self.leading_tol:g}")
        return int(big[-1])

    def trimmed(self) -> "Polynomial":
        return Polynomial(self.coeffs[: self.degree + 1], self.leading_tol)

    def __call__(self, x):
        return np.polyval(self.coeffs[::-1], x)


def _as_coeffs(p) -> np.ndarray:
    if isinstance(p, Polynomial):
        p = p.trimmed()
        c = np.asarray(p.coeffs)
    else:
        c = np.asarray(p, dtype=float)
        c = Polynomial(tuple(c)).trimmed().coeffs
        c = np.asarray(c)
    if c.size < 2:
        raise ValueError("stability tests need degree >= 1")
    return c


def roots(p) -> np.ndarray:
    """Roots with multiplicity, as eigenvalues of the companion matrix."""
    c = _as_coeffs(p)
    k = c.size - 1
    comp = np.zeros((k, k))
    comp[0, :] = -c[-2::-1] / c[-1]
    comp[np.arange(1, k), np.arange(k - 1)] = 1.0
    return np.linalg.eigvals(comp)


def hurwitz_mask(coeffs, leading_tol: float = LEADING_TOL) -> np.ndarray:
    """Routh test over the last axis.

    A vanished leading coefficient, a zero or negative pivot, or any
    non-finite entry classifies as not Hurwitz.
    """
    C = np.asarray(coeffs, dtype=float)
    k = C.shape[-1] - 1
    flat = C.reshape(-1, k + 1)
    desc = flat[:, ::-1]
    lead = desc[:, 0]
    ok = np.abs(lead) > leading_tol
    desc = desc * np.sign(lead)[:, None]

    width = k // 2 + 1
    r0 = np.zeros((flat.shape[0], width + 1))
    r1 = np.zeros_like(r0)
    even, odd = desc[:, 0::2], desc[:, 1::2]
    r0[:, : even.shape[1]] = even
    r1[:, : odd.shape[1]] = odd
    for _ in range(k):
        piv = r1[:, 0]
        ok &= piv > 0
        safe = np.where(ok, piv, 1.0)[:, None]
        nxt = np.zeros_like(r0)
        nxt[:, :-1] = (safe * r0[:, 1:] - r0[:, :1] * r1[:, 1:]) / safe
        r0, r1 = r1, nxt
    return ok.reshape(C.shape[:-1])


def schur_mask(coeffs, leading_tol: float = LEADING_TOL) -> np.ndarray:
    """Schur-Cohn reflection-coefficient recursion over the last axis.

    Each step requires ``|a_0| < |a_k|`` strictly; equality (a root pair on
    the unit circle or a degenerate recursion) classifies as not Schur.
    """
    C = np.asarray(coeffs, dtype=float)
    k = C.shape[-1] - 1
    A = C.reshape(-1, k + 1).copy()
    ok = np.abs(A[:, -1]) > leading_tol
    A[~ok] = 1.0
    A = A / A[:, -1:]
    for deg in range(k, 0, -1):
        a0 = A[:, 0]
        ok &= np.abs(a0) < 1.0
        refl = np.where(ok, a0, 0.0)[:, None]
        nxt = A[:, 1 : deg + 1] - refl * A[:, deg - 1 :: -1][:, :deg]
        lead = nxt[:, -1:]
        A = nxt / np.where(lead == 0, 1.0, lead)
    return ok.reshape(C.shape[:-1])


def stable_mask(coeffs, kind: StabilityKind) -> np.ndarray:
    if kind is StabilityKind.HURWITZ:
        return hurwitz_mask(coeffs)
    return schur_mask(coeffs)


def is_hurwitz(p) -> bool:
    return bool(hurwitz_mask(_as_coeffs(p)))


def is_schur(p) -> bool:
    return bool(schur_mask(_as_coeffs(p)))


def is_stable(p, kind: StabilityKind) -> bool:
    return is_hurwitz(p) if kind is StabilityKind.HURWITZ else is_schur(p)


def stability_margin(p, kind: StabilityKind) -> float:
    """``-max Re(root)`` (Hurwitz) or ``1 - max|root|`` (Schur); positive iff stable."""
    r = roots(p)
    if kind is StabilityKind.HURWITZ:
        return float(-np.max(r.real))
    return float(1.0 - np.max(np.abs(r)))
