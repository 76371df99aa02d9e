"""Time steppers for the 1-D periodic Allen-Cahn equation.

Three one-step maps are provided:

* ``step_semi_implicit`` -- diffusion implicit, reaction explicit; one cyclic
  tridiagonal solve per step.
* ``step_explicit`` -- forward Euler on the full right-hand side.
* ``step_convex_splitting`` -- cubic term implicit, linear term explicit
  (double well only); Newton iteration with a cyclic tridiagonal Jacobian.

Indices are 0-based with periodic wraparound: phi[-1] == phi[J-1] and
phi[J] == phi[0].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .linalg import CyclicTridiagonalSystem, solve_cyclic, solve_cyclic_variable
from .potential import PotentialKind, PotentialSpec, eval_f

__all__ = [
    "GridSpec",
    "SchemeParams",
    "FieldState",
    "NewtonParams",
    "NewtonDivergence",
    "InvalidInitialData",
    "RandomUniform",
    "SineWave",
    "TanhFront",
    "make_initial",
    "step_semi_implicit",
    "step_explicit",
    "step_convex_splitting",
]

logger = logging.getLogger(__name__)


class NewtonDivergence(Exception):
    """Newton iteration did not converge; the time step is too large for it."""


class InvalidInitialData(Exception):
    """Requested initial profile cannot fit inside the invariant interval."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with J nodes at x_j = j*dx, j = 0..J-1."""

    J: int
    dx: float
    length: float

    def __post_init__(self):
        if self.J < 3:
            raise ValueError("periodic grid needs J >= 3")
        if not (self.dx > 0.0 and math.isfinite(self.dx)):
            raise ValueError("dx must be positive and finite")
        if abs(self.length - self.J * self.dx) > 1e-14 * abs(self.length):
            raise ValueError("length must equal J*dx")

    @classmethod
    def from_length(cls, J: int, length: float) -> "GridSpec":
        return cls(J=J, dx=length / J, length=length)

    def nodes(self) -> np.ndarray:
        return self.dx * np.arange(self.J)


@dataclass(frozen=True)
class SchemeParams:
    """Interface width, time step, and the mesh ratio lam = eps^2*dt/dx^2.

    ``epsilon`` may be zero (pure reaction dynamics, lam = 0); ``dt`` is
    strictly positive.
    """

    epsilon: float
    dt: float
    lam: float

    def __post_init__(self):
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be finite and >= 0")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError("lam must be finite and >= 0")

    @classmethod
    def for_grid(cls, epsilon: float, dt: float, grid: GridSpec) -> "SchemeParams":
        return cls(epsilon=epsilon, dt=dt, lam=epsilon**2 * dt / grid.dx**2)


@dataclass
class FieldState:
    """Discrete solution at one time level; steppers keep time = step*dt.

    Values are finite for any admissible run; runs pushed past the stability
    bound may overflow, which downstream monitors record rather than reject.
    """

    values: np.ndarray
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("field values must be a 1-D array")


@dataclass(frozen=True)
class NewtonParams:
    tol: float = 1e-12
    max_iters: int = 50


@dataclass(frozen=True)
class RandomUniform:
    """I.i.d. uniform draws over the invariant interval, reproducible by seed."""

    seed: int


@dataclass(frozen=True)
class SineWave:
    """Single- or multi-mode sine around the interval midpoint."""

    amplitude: float
    modes: int = 1


@dataclass(frozen=True)
class TanhFront:
    """Smooth front connecting gamma_minus to gamma_plus around ``center``."""

    center: float
    width: float


InitialCondition = RandomUniform | SineWave | TanhFront


def make_initial(init: InitialCondition, p: PotentialSpec, g: GridSpec) -> FieldState:
    """Build the t = 0 state; values are clamped into [gamma_minus, gamma_plus]."""
    lo, hi = p.gamma_minus, p.gamma_plus
    if isinstance(init, RandomUniform):
        rng = np.random.default_rng(init.seed)
        values = rng.uniform(lo, hi, g.J)
    elif isinstance(init, SineWave):
        mid = 0.5 * (lo + hi)
        if abs(init.amplitude) > 0.5 * (hi - lo):
            raise InvalidInitialData(
                f"sine amplitude {init.amplitude} does not fit in [{lo}, {hi}]"
            )
        values = mid + init.amplitude * np.sin(2.0 * np.pi * init.modes * g.nodes() / g.length)
    elif isinstance(init, TanhFront):
        if not init.width > 0.0:
            raise InvalidInitialData("tanh front width must be positive")
        profile = 0.5 * (1.0 + np.tanh((g.nodes() - init.center) / init.width))
        values = lo + (hi - lo) * profile
    else:
        raise TypeError(f"unknown initial condition {init!r}")

    clamped = np.clip(values, lo, hi)
    n_clamped = int(np.count_nonzero(clamped != values))
    if n_clamped:
        logger.warning("clamped %d initial values into [%g, %g]", n_clamped, lo, hi)
    return FieldState(values=clamped, time=0.0, step=0)


def step_semi_implicit(
    state: FieldState, p: PotentialSpec, g: GridSpec, s: SchemeParams
) -> FieldState:
    """One step of (1+2*lam)u_j - lam*(u_{j+1}+u_{j-1}) = phi_j - dt*f(phi_j)."""
    v = state.values
    rhs = v - s.dt * eval_f(p, v)
    new = solve_cyclic(CyclicTridiagonalSystem(diag=1.0 + 2.0 * s.lam, off=-s.lam, rhs=rhs))
    return FieldState(values=new, time=(state.step + 1) * s.dt, step=state.step + 1)


def step_explicit(
    state: FieldState, p: PotentialSpec, g: GridSpec, s: SchemeParams
) -> FieldState:
    """Forward Euler: phi + lam*(phi_{j+1} - 2 phi_j + phi_{j-1}) - dt*f(phi)."""
    v = state.values
    lap = np.roll(v, -1) - 2.0 * v + np.roll(v, 1)
    new = v + s.lam * lap - s.dt * eval_f(p, v)
    return FieldState(values=new, time=(state.step + 1) * s.dt, step=state.step + 1)


def step_convex_splitting(
    state: FieldState,
    p: PotentialSpec,
    g: GridSpec,
    s: SchemeParams,
    newton: NewtonParams = NewtonParams(),
) -> FieldState:
    """One step treating u^3 implicitly and -u explicitly (double well only).

    Solves (1+2L)u_j - L*u_{j+1} - L*u_{j-1} + dt*u_j^3 = phi_j + dt*phi_j by
    Newton iteration started from phi^n; each update solves a cyclic
    tridiagonal system whose diagonal gains the 3*dt*u_j^2 term.
    """
    if p.kind is not PotentialKind.DOUBLE_WELL:
        raise ValueError("convex splitting is implemented for the double-well potential only")
    v = state.values
    target = v + s.dt * v
    base_diag = 1.0 + 2.0 * s.lam
    x = v.copy()
    for _ in range(newton.max_iters):
        residual = base_diag * x - s.lam * (np.roll(x, -1) + np.roll(x, 1)) + s.dt * x**3 - target
        jac_diag = base_diag + 3.0 * s.dt * x**2
        delta = solve_cyclic_variable(jac_diag, -s.lam, -residual)
        x = x + delta
        if float(np.max(np.abs(delta))) <= newton.tol:
            return FieldState(values=x, time=(state.step + 1) * s.dt, step=state.step + 1)
    raise NewtonDivergence(
        f"no convergence in {newton.max_iters} iterations (dt={s.dt} too large?)"
    )
