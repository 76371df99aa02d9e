"""Per-step diagnostics: discrete energy, L1 norm, and stability monitors.

Each monitor carries an ``active`` flag (do the hypotheses of the
corresponding statement hold for this run?) separate from ``satisfied``
(did the inequality hold numerically?).  Runs outside the hypotheses
still record satisfaction so parameter sweeps produce data instead of
spurious failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import PotentialSpec, eval_F, stability_bounds, validate_hypotheses
from .scheme import FieldState, GridSpec, SchemeParams

__all__ = [
    "MAX_PRINCIPLE",
    "L1_BOUND",
    "ENERGY_DECAY",
    "MONITOR_NAMES",
    "MonitorVerdict",
    "StepRecord",
    "discrete_energy",
    "l1_norm",
    "evaluate_monitors",
    "make_record",
]

MAX_PRINCIPLE = "max_principle"
L1_BOUND = "l1_bound"
ENERGY_DECAY = "energy_decay"
MONITOR_NAMES = (MAX_PRINCIPLE, L1_BOUND, ENERGY_DECAY)


@dataclass(frozen=True)
class MonitorVerdict:
    name: str
    active: bool
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics for one time level, in the order they appear in run CSVs."""

    step: int
    time: float
    energy: float
    l1_norm: float
    min_val: float
    max_val: float
    monitors: tuple[MonitorVerdict, ...]

    def monitor(self, name: str) -> MonitorVerdict:
        for m in self.monitors:
            if m.name == name:
                return m
        raise KeyError(name)


def discrete_energy(state: FieldState, p: PotentialSpec, g: GridSpec, s: SchemeParams) -> float:
    """E_h = (eps^2/2) * sum_j (forward_diff phi_j)^2 dx + sum_j F(phi_j) dx.

    Forward differences wrap periodically, so the j = J-1 term uses
    (phi_0 - phi_{J-1}) / dx.
    """
    v = state.values
    diff = np.roll(v, -1) - v
    gradient_term = 0.5 * s.epsilon**2 * float(np.sum(diff * diff)) / g.dx
    potential_term = float(np.sum(eval_F(p, v))) * g.dx
    return gradient_term + potential_term


def l1_norm(state: FieldState, g: GridSpec) -> float:
    """Discrete L1 norm sum_j |phi_j| dx."""
    return float(np.sum(np.abs(state.values))) * g.dx


def _verdicts(
    p: PotentialSpec,
    s: SchemeParams,
    prev_energy: float,
    prev_l1: float,
    curr_energy: float,
    curr_l1: float,
    min_val: float,
    max_val: float,
) -> tuple[MonitorVerdict, ...]:
    bounds = stability_bounds(p)
    report = validate_hypotheses(p)
    lo, hi = p.gamma_minus, p.gamma_plus
    bound_tol = 1e-12 * (1.0 + max(abs(lo), abs(hi)))

    mp_active = report.endpoints_vanish and s.dt <= bounds.dt_max
    mp_satisfied = bool(lo - bound_tol <= min_val and max_val <= hi + bound_tol)
    mp_margin = min(min_val - lo, hi - max_val)
    max_principle = MonitorVerdict(MAX_PRINCIPLE, mp_active, mp_satisfied, mp_margin)

    ldt = bounds.lipschitz_L * s.dt
    growth = math.inf if ldt > 709.0 else math.exp(ldt)
    l1_limit = growth * prev_l1 * (1.0 + 1e-12) + 1e-14
    l1_satisfied = bool(curr_l1 <= l1_limit)
    l1_margin = growth - curr_l1 / prev_l1 if prev_l1 > 0.0 else 0.0
    l1_bound = MonitorVerdict(
        L1_BOUND, mp_active and report.f_vanishes_at_zero, l1_satisfied, l1_margin
    )

    energy_limit = prev_energy + 1e-12 * (1.0 + abs(prev_energy))
    energy_decay = MonitorVerdict(
        ENERGY_DECAY, mp_active, bool(curr_energy <= energy_limit), prev_energy - curr_energy
    )

    return (max_principle, l1_bound, energy_decay)


def evaluate_monitors(
    prev: StepRecord,
    curr_state: FieldState,
    p: PotentialSpec,
    g: GridSpec,
    s: SchemeParams,
) -> tuple[MonitorVerdict, ...]:
    """Judge the three per-step inequalities for ``curr_state`` against ``prev``.

    ``prev`` must be the record of the immediately preceding step of the same
    run; the L1 and energy monitors compare one step to the next.
    """
    v = curr_state.values
    return _verdicts(
        p,
        s,
        prev_energy=prev.energy,
        prev_l1=prev.l1_norm,
        curr_energy=discrete_energy(curr_state, p, g, s),
        curr_l1=l1_norm(curr_state, g),
        min_val=float(np.min(v)),
        max_val=float(np.max(v)),
    )


def make_record(
    state: FieldState,
    p: PotentialSpec,
    g: GridSpec,
    s: SchemeParams,
    prev: StepRecord | None = None,
) -> StepRecord:
    """Full diagnostics record for ``state``.

    Without a predecessor (step 0) the step-to-step monitors compare the
    state against itself, which the inequalities satisfy with zero margin.
    """
    energy = discrete_energy(state, p, g, s)
    l1 = l1_norm(state, g)
    min_val = float(np.min(state.values))
    max_val = float(np.max(state.values))
    prev_energy = energy if prev is None else prev.energy
    prev_l1 = l1 if prev is None else prev.l1_norm
    monitors = _verdicts(p, s, prev_energy, prev_l1, energy, l1, min_val, max_val)
    return StepRecord(
        step=state.step,
        time=state.time,
        energy=energy,
        l1_norm=l1,
        min_val=min_val,
        max_val=max_val,
        monitors=monitors,
    )
