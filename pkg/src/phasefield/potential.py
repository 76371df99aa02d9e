"""Polynomial nonlinear potentials and the step-size bounds they induce.

A potential is stored as the coefficients of F (ascending powers); f = F'
and f' are obtained by exact term-by-term differentiation, so the three
evaluations are always mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "PotentialKind",
    "PotentialSpec",
    "StabilityBounds",
    "ValidationReport",
    "RootFindingFailure",
    "double_well",
    "polynomial",
    "eval_F",
    "eval_f",
    "eval_fprime",
    "stability_bounds",
    "validate_hypotheses",
    "extrema_on_interval",
]

# Coefficients of F(u) = (1/4)(u^2 - 1)^2, ascending powers.
DOUBLE_WELL_COEFFS = (0.25, 0.0, -0.5, 0.0, 0.25)


class RootFindingFailure(Exception):
    """Companion-matrix eigenvalue solve for polynomial roots did not converge."""


class PotentialKind(str, Enum):
    DOUBLE_WELL = "double_well"
    POLYNOMIAL = "polynomial"


def _differentiate(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    # Exact term-by-term derivative; the zero polynomial stays representable.
    if len(coeffs) <= 1:
        return (0.0,)
    return tuple(float(i) * c for i, c in enumerate(coeffs) if i >= 1)


def _horner(coeffs: tuple[float, ...], u):
    result = 0.0
    for c in reversed(coeffs):
        result = result * u + c
    return result


@dataclass(frozen=True)
class PotentialSpec:
    """A polynomial potential F together with its invariant interval.

    ``coeffs`` are the coefficients of F in ascending powers.  ``gamma_minus``
    and ``gamma_plus`` bound the interval the solution is expected to stay in;
    whether f actually vanishes there is evaluated by ``validate_hypotheses``
    rather than enforced at construction.
    """

    kind: PotentialKind
    coeffs: tuple[float, ...]
    gamma_minus: float
    gamma_plus: float

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("potential needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("potential coefficients must be finite")
        if not self.gamma_minus < self.gamma_plus:
            raise ValueError(
                f"invalid invariant interval: gamma_minus={self.gamma_minus} "
                f"must be < gamma_plus={self.gamma_plus}"
            )

    @cached_property
    def f_coeffs(self) -> tuple[float, ...]:
        return _differentiate(self.coeffs)

    @cached_property
    def fprime_coeffs(self) -> tuple[float, ...]:
        return _differentiate(self.f_coeffs)


def double_well(gamma_minus: float = -1.0, gamma_plus: float = 1.0) -> PotentialSpec:
    """The standard double well F(u) = (1/4)(u^2 - 1)^2 with wells at +-1."""
    return PotentialSpec(PotentialKind.DOUBLE_WELL, DOUBLE_WELL_COEFFS, gamma_minus, gamma_plus)


def polynomial(coeffs, gamma_minus: float, gamma_plus: float) -> PotentialSpec:
    """A general polynomial potential from coefficients of F (ascending powers)."""
    return PotentialSpec(
        PotentialKind.POLYNOMIAL, tuple(float(c) for c in coeffs), gamma_minus, gamma_plus
    )


def eval_F(p: PotentialSpec, u):
    """Evaluate F(u) by Horner's rule.  Accepts scalars or numpy arrays."""
    return _horner(p.coeffs, u)


def eval_f(p: PotentialSpec, u):
    """Evaluate f(u) = F'(u)."""
    return _horner(p.f_coeffs, u)


def eval_fprime(p: PotentialSpec, u):
    """Evaluate f'(u)."""
    return _horner(p.fprime_coeffs, u)


def _real_roots(coeffs: tuple[float, ...]) -> list[float]:
    """Real roots of a polynomial given in ascending coefficients."""
    desc = list(reversed(coeffs))
    while len(desc) > 1 and desc[0] == 0.0:
        desc.pop(0)
    if len(desc) <= 1:
        return []
    try:
        roots = np.roots(desc)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailure(f"eigenvalue solve for polynomial roots failed: {exc}") from exc
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)):
            out.append(float(r.real))
    return out


def extrema_on_interval(coeffs: tuple[float, ...], lo: float, hi: float) -> tuple[float, float]:
    """Exact (min, max) of a polynomial on [lo, hi].

    Candidates are the endpoints plus the real roots of the derivative that
    fall inside the interval; roots just outside by round-off are clamped in.
    """
    if not lo < hi:
        raise ValueError("empty interval")
    slack = 1e-12 * (1.0 + hi - lo)
    candidates = [lo, hi]
    for r in _real_roots(_differentiate(coeffs)):
        if lo - slack <= r <= hi + slack:
            candidates.append(min(max(r, lo), hi))
    values = [_horner(coeffs, u) for u in candidates]
    return min(values), max(values)


@dataclass(frozen=True)
class StabilityBounds:
    """Extrema of f' over the invariant interval and the admissible step.

    ``dt_max`` is the largest time step with dt * max f' <= 1 (infinite when
    f' never exceeds zero, in which case the step condition is vacuous).
    """

    max_fprime: float
    lipschitz_L: float
    dt_max: float


@lru_cache(maxsize=None)
def stability_bounds(p: PotentialSpec) -> StabilityBounds:
    """Compute max f', L = -min f' and dt_max on [gamma_minus, gamma_plus].

    Extrema come from the roots of f'' (companion-matrix solve) plus the
    endpoints, not from sampling, so the bounds are sharp to round-off.
    """
    mn, mx = extrema_on_interval(p.fprime_coeffs, p.gamma_minus, p.gamma_plus)
    dt_max = math.inf if mx <= 0.0 else 1.0 / mx
    return StabilityBounds(max_fprime=mx, lipschitz_L=-mn, dt_max=dt_max)


@dataclass(frozen=True)
class ValidationReport:
    """Whether the potential satisfies the monitor hypotheses.

    ``endpoints_vanish`` requires f to vanish at both interval endpoints;
    ``f_vanishes_at_zero`` additionally requires f(0) = 0 with the interval
    strictly bracketing zero.  Offending values are attached so a failed
    check can be reported, not just flagged.
    """

    endpoints_vanish: bool
    f_vanishes_at_zero: bool
    f_at_gamma_minus: float
    f_at_gamma_plus: float
    f_at_zero: float
    interval_brackets_zero: bool
    tolerance: float


@lru_cache(maxsize=None)
def validate_hypotheses(p: PotentialSpec) -> ValidationReport:
    """Evaluate the hypothesis flags for ``p``.  Reports, never raises."""
    tol = 1e-12 * (1.0 + max(abs(p.gamma_minus), abs(p.gamma_plus)))
    f_lo = float(eval_f(p, p.gamma_minus))
    f_hi = float(eval_f(p, p.gamma_plus))
    f_zero = float(eval_f(p, 0.0))
    brackets = p.gamma_minus < 0.0 < p.gamma_plus
    return ValidationReport(
        endpoints_vanish=abs(f_lo) <= tol and abs(f_hi) <= tol,
        f_vanishes_at_zero=brackets and abs(f_zero) <= tol,
        f_at_gamma_minus=f_lo,
        f_at_gamma_plus=f_hi,
        f_at_zero=f_zero,
        interval_brackets_zero=brackets,
        tolerance=tol,
    )
