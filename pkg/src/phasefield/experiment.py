"""Run orchestration: single runs, dt sweeps, convergence studies, persistence.

Configs are TOML files with three required sections (``[potential]``,
``[grid]``, ``[initial]``) plus top-level scalars; see README for the full
key reference.  Unknown keys are rejected.  Results are written as CSV with
a JSON summary sidecar; floats are printed with 17 significant digits so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .diagnostics import (
    ENERGY_DECAY,
    MAX_PRINCIPLE,
    MONITOR_NAMES,
    StepRecord,
    make_record,
)
from .potential import (
    PotentialKind,
    PotentialSpec,
    double_well,
    polynomial,
    stability_bounds,
    validate_hypotheses,
)
from .scheme import (
    FieldState,
    GridSpec,
    InitialCondition,
    RandomUniform,
    SchemeParams,
    SineWave,
    TanhFront,
    make_initial,
    step_convex_splitting,
    step_explicit,
    step_semi_implicit,
)

__all__ = [
    "ConfigError",
    "SchemeName",
    "RunConfig",
    "RunResult",
    "SweepConfig",
    "SweepRow",
    "ConvergenceRow",
    "run",
    "sweep",
    "convergence_study",
    "load_config_file",
    "apply_overrides",
    "potential_from_config",
    "run_config_from_dict",
    "sweep_config_from_dict",
    "convergence_spec_from_dict",
    "write_run_outputs",
    "write_sweep_csv",
    "write_convergence_csv",
    "RUN_CSV_NAME",
    "SUMMARY_JSON_NAME",
    "SWEEP_CSV_NAME",
    "CONVERGENCE_CSV_NAME",
]

RUN_CSV_NAME = "run.csv"
SUMMARY_JSON_NAME = "summary.json"
SWEEP_CSV_NAME = "sweep.csv"
CONVERGENCE_CSV_NAME = "convergence.csv"

RUN_CSV_COLUMNS = (
    "step",
    "time",
    "energy",
    "l1_norm",
    "min_val",
    "max_val",
    "maxprin_active",
    "maxprin_ok",
    "l1_active",
    "l1_ok",
    "energy_active",
    "energy_ok",
)

SWEEP_CSV_COLUMNS = (
    "dt",
    "within_bound",
    "first_bound_violation_step",
    "first_energy_increase_step",
    "final_energy",
)

CONVERGENCE_CSV_COLUMNS = ("h", "error", "observed_order")


class ConfigError(Exception):
    """Configuration file or override is malformed or inconsistent."""


class SchemeName(str, Enum):
    SEMI_IMPLICIT = "semi_implicit"
    EXPLICIT = "explicit"
    CONVEX_SPLITTING = "convex_splitting"


def _stepper_for(name: SchemeName):
    return {
        SchemeName.SEMI_IMPLICIT: step_semi_implicit,
        SchemeName.EXPLICIT: step_explicit,
        SchemeName.CONVEX_SPLITTING: step_convex_splitting,
    }[name]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed for one deterministic run."""

    potential: PotentialSpec
    grid: GridSpec
    scheme: SchemeName
    epsilon: float
    dt: float | str
    steps: int
    initial: InitialCondition
    output: str = "out"
    record_every: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise ConfigError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if isinstance(self.dt, str):
            if self.dt != "auto":
                raise ConfigError(f'dt must be a positive number or "auto", got {self.dt!r}')
        elif not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive and finite, got {self.dt}")
        if (
            self.scheme is SchemeName.CONVEX_SPLITTING
            and self.potential.kind is not PotentialKind.DOUBLE_WELL
        ):
            raise ConfigError("convex_splitting requires the double_well potential")

    def resolve_dt(self) -> float:
        """The configured dt, with "auto" resolved to the stability bound."""
        if not isinstance(self.dt, str):
            return float(self.dt)
        dt_max = stability_bounds(self.potential).dt_max
        if not (math.isfinite(dt_max) and dt_max > 0.0):
            raise ConfigError(
                "dt = 'auto' is undefined: max f' <= 0 puts no upper bound on the step"
            )
        return dt_max


@dataclass
class RunResult:
    records: list[StepRecord]
    final_state: FieldState
    summary: dict


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    dt_grid: tuple[float, ...]
    steps: int

    def __post_init__(self):
        if not self.dt_grid:
            raise ConfigError("sweep needs a non-empty dt grid")
        if any(not (dt > 0.0 and math.isfinite(dt)) for dt in self.dt_grid):
            raise ConfigError("sweep dt values must be positive and finite")
        if list(self.dt_grid) != sorted(self.dt_grid):
            raise ConfigError("sweep dt values must be sorted ascending")
        if self.steps < 1:
            raise ConfigError(f"sweep step budget must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class SweepRow:
    dt: float
    within_bound: bool
    first_bound_violation_step: int | None
    first_energy_increase_step: int | None
    final_energy: float
    error: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    error: float
    observed_order: float | None
    # Name of a monitor that failed while active during the rung, if any;
    # informational only, not part of the tabulated output.
    active_violation: str | None = field(default=None, compare=False)


def _initial_summary(init: InitialCondition) -> dict:
    if isinstance(init, RandomUniform):
        return {"kind": "random_uniform", "seed": init.seed}
    if isinstance(init, SineWave):
        return {"kind": "sine_wave", "amplitude": init.amplitude, "modes": init.modes}
    return {"kind": "tanh_front", "center": init.center, "width": init.width}


def run(cfg: RunConfig) -> RunResult:
    """Advance the configured scheme for ``cfg.steps`` steps.

    Records are kept at step 0, every ``record_every``-th step, and the final
    step; monitors and run extrema are tracked at every step regardless.
    Runs past the stability bound may overflow; overflow is recorded, not
    raised.
    """
    t_start = time.perf_counter()
    pot, grid = cfg.potential, cfg.grid
    dt = cfg.resolve_dt()
    params = SchemeParams.for_grid(cfg.epsilon, dt, grid)
    stepper = _stepper_for(cfg.scheme)

    state = make_initial(cfg.initial, pot, grid)
    record = make_record(state, pot, grid, params)
    records = [record]

    run_min, run_max = record.min_val, record.max_val
    saw_nonfinite = not (math.isfinite(record.min_val) and math.isfinite(record.max_val))
    first_violation: dict | None = None
    first_unsatisfied: dict[str, int | None] = {name: None for name in MONITOR_NAMES}

    def scan(rec: StepRecord) -> None:
        nonlocal first_violation
        for m in rec.monitors:
            if not m.satisfied and first_unsatisfied[m.name] is None:
                first_unsatisfied[m.name] = rec.step
            if m.active and not m.satisfied and first_violation is None:
                first_violation = {"step": rec.step, "monitor": m.name}

    scan(record)
    prev = record
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, cfg.steps + 1):
            state = stepper(state, pot, grid, params)
            rec = make_record(state, pot, grid, params, prev)
            scan(rec)
            if math.isnan(rec.min_val) or math.isnan(rec.max_val):
                saw_nonfinite = True
            else:
                run_min = min(run_min, rec.min_val)
                run_max = max(run_max, rec.max_val)
                if not (math.isfinite(rec.min_val) and math.isfinite(rec.max_val)):
                    saw_nonfinite = True
            if n % cfg.record_every == 0 or n == cfg.steps:
                records.append(rec)
            prev = rec

    bounds = stability_bounds(pot)
    report = validate_hypotheses(pot)
    summary = {
        "scheme": cfg.scheme.value,
        "dt": dt,
        "epsilon": cfg.epsilon,
        "lambda": params.lam,
        "J": grid.J,
        "dx": grid.dx,
        "length": grid.length,
        "steps": cfg.steps,
        "record_every": cfg.record_every,
        "potential": {
            "kind": pot.kind.value,
            "coeffs": list(pot.coeffs),
            "gamma": [pot.gamma_minus, pot.gamma_plus],
        },
        "initial": _initial_summary(cfg.initial),
        "stability": {
            "max_fprime": bounds.max_fprime,
            "lipschitz_L": bounds.lipschitz_L,
            "dt_max": bounds.dt_max,
        },
        "hypotheses": {
            "endpoints_vanish": report.endpoints_vanish,
            "f_vanishes_at_zero": report.f_vanishes_at_zero,
        },
        "min_val": run_min,
        "max_val": run_max,
        "all_finite": not saw_nonfinite,
        "first_violation": first_violation,
        "first_unsatisfied": dict(first_unsatisfied),
        "all_active_satisfied": first_violation is None,
        "wall_time_s": time.perf_counter() - t_start,
    }
    return RunResult(records=records, final_state=state, summary=summary)


def _sweep_row(cfg: RunConfig) -> SweepRow:
    dt = float(cfg.dt)
    try:
        result = run(cfg)
    except Exception as exc:  # one failing dt must not abort the sweep
        return SweepRow(
            dt=dt,
            within_bound=dt <= stability_bounds(cfg.potential).dt_max,
            first_bound_violation_step=None,
            first_energy_increase_step=None,
            final_energy=math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )
    summary = result.summary
    return SweepRow(
        dt=dt,
        within_bound=dt <= summary["stability"]["dt_max"],
        first_bound_violation_step=summary["first_unsatisfied"][MAX_PRINCIPLE],
        first_energy_increase_step=summary["first_unsatisfied"][ENERGY_DECAY],
        final_energy=result.records[-1].energy,
    )


def _sweep_workers(n_rows: int, max_workers: int | None) -> int:
    if max_workers is None:
        env = os.environ.get("PHASEFIELD_THREADS")
        if env is not None:
            try:
                max_workers = int(env)
            except ValueError as exc:
                raise ConfigError(f"PHASEFIELD_THREADS must be an integer, got {env!r}") from exc
        else:
            max_workers = os.cpu_count() or 1
    return max(1, min(max_workers, n_rows))


def sweep(cfg: SweepConfig, max_workers: int | None = None) -> list[SweepRow]:
    """Run the base config once per dt value; rows come back in dt order.

    Rows are independent and run in parallel processes, capped by
    ``max_workers`` or the PHASEFIELD_THREADS environment variable.
    """
    row_cfgs = [
        replace(cfg.base, dt=dt, steps=cfg.steps, output=cfg.base.output)
        for dt in cfg.dt_grid
    ]
    workers = _sweep_workers(len(row_cfgs), max_workers)
    if workers == 1:
        return [_sweep_row(c) for c in row_cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_row, row_cfgs))


def _steps_for(final_time: float, dt: float, what: str) -> int:
    steps = round(final_time / dt)
    if steps < 1 or abs(steps * dt - final_time) > 1e-9 * final_time:
        raise ConfigError(f"{what}: dt={dt} does not divide final_time={final_time}")
    return steps


def convergence_study(
    base: RunConfig,
    ladder: Sequence[tuple[float, int]],
    reference: RunConfig,
    final_time: float,
) -> list[ConvergenceRow]:
    """Errors and observed orders of ladder runs against a finer reference.

    ``ladder`` lists (dt, J) rungs.  The reference grid must contain every
    rung grid (J_ref divisible by each rung J) so the comparison is plain
    grid-point injection; all runs must hit ``final_time`` exactly.  The
    tabulated mesh parameter h is dt when the ladder varies dt, else dx.
    """
    if not ladder:
        raise ConfigError("convergence ladder must not be empty")
    if not (final_time > 0.0 and math.isfinite(final_time)):
        raise ConfigError(f"final_time must be positive, got {final_time}")

    ref_dt = reference.resolve_dt()
    ref_J = reference.grid.J
    ref_steps = _steps_for(final_time, ref_dt, "reference")
    for dt, J in ladder:
        if not (dt > 0.0 and math.isfinite(dt)):
            raise ConfigError(f"ladder dt must be positive, got {dt}")
        if ref_J % J != 0:
            raise ConfigError(f"ladder grid J={J} is not a coarsening of reference J={ref_J}")
        if not (ref_dt <= dt and ref_J >= J and (ref_dt < dt or ref_J > J)):
            raise ConfigError(
                f"reference (dt={ref_dt}, J={ref_J}) is not strictly finer than "
                f"ladder rung (dt={dt}, J={J})"
            )
        _steps_for(final_time, dt, "ladder rung")

    ref_cfg = replace(reference, dt=ref_dt, steps=ref_steps, record_every=ref_steps)
    ref_values = run(ref_cfg).final_state.values

    dts = [dt for dt, _ in ladder]
    js = [J for _, J in ladder]
    use_dt = any(dt != dts[0] for dt in dts)

    rows: list[ConvergenceRow] = []
    for dt, J in ladder:
        steps = _steps_for(final_time, dt, "ladder rung")
        rung_cfg = replace(
            base,
            dt=dt,
            steps=steps,
            grid=GridSpec.from_length(J, base.grid.length),
            record_every=steps,
        )
        rung = run(rung_cfg)
        stride = ref_J // J
        error = float(np.max(np.abs(rung.final_state.values - ref_values[::stride])))
        h = dt if use_dt else base.grid.length / J
        violation = rung.summary["first_violation"]
        rows.append(
            ConvergenceRow(
                h=h,
                error=error,
                observed_order=None,
                active_violation=None if violation is None else violation["monitor"],
            )
        )

    for i in range(1, len(rows)):
        h_prev, h_curr = rows[i - 1].h, rows[i].h
        e_prev, e_curr = rows[i - 1].error, rows[i].error
        order = None
        if (
            h_prev != h_curr
            and e_prev > 0.0
            and e_curr > 0.0
            and math.isfinite(e_prev)
            and math.isfinite(e_curr)
        ):
            order = math.log(e_prev / e_curr) / math.log(h_prev / h_curr)
        rows[i] = replace(rows[i], observed_order=order)
    return rows


# --- configuration files ---------------------------------------------------

_TOP_LEVEL_KEYS = {
    "scheme",
    "epsilon",
    "dt",
    "steps",
    "record_every",
    "output",
    "potential",
    "grid",
    "initial",
    "sweep",
    "converge",
}


def load_config_file(path: str | Path) -> dict:
    """Parse a TOML config file; the raw dict is validated when used."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {p}: {exc}") from exc


def _parse_override_value(raw: str):
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw.strip()


def apply_overrides(data: dict, assignments: Sequence[str]) -> dict:
    """Apply ``key=value`` / ``section.key=value`` overrides; last one wins."""
    out = copy.deepcopy(data)
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {key!r} descends into non-section key {part!r}")
            node = nxt
        node[parts[-1]] = _parse_override_value(raw)
    return out


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section[key]


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _potential_from_dict(section) -> PotentialSpec:
    if not isinstance(section, dict):
        raise ConfigError("[potential] must be a section")
    _check_keys(section, {"kind", "coeffs", "gamma"}, "[potential]")
    kind = _require(section, "kind", "[potential]")
    gamma = section.get("gamma")
    if gamma is not None:
        if not (isinstance(gamma, list) and len(gamma) == 2):
            raise ConfigError("potential.gamma must be a two-element list [g_minus, g_plus]")
        gamma = [_as_float(g, "potential.gamma entries") for g in gamma]
    try:
        if kind == "double_well":
            if "coeffs" in section:
                raise ConfigError("potential.coeffs is only valid for kind = 'polynomial'")
            lo, hi = gamma if gamma is not None else (-1.0, 1.0)
            return double_well(lo, hi)
        if kind == "polynomial":
            coeffs = _require(section, "coeffs", "[potential]")
            if not (isinstance(coeffs, list) and coeffs):
                raise ConfigError("potential.coeffs must be a non-empty list")
            if gamma is None:
                raise ConfigError("potential.gamma is required for polynomial potentials")
            return polynomial([_as_float(c, "potential.coeffs entries") for c in coeffs], *gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"potential.kind must be 'double_well' or 'polynomial', got {kind!r}")


def _grid_from_dict(section) -> GridSpec:
    if not isinstance(section, dict):
        raise ConfigError("[grid] must be a section")
    _check_keys(section, {"J", "length"}, "[grid]")
    J = _as_int(_require(section, "J", "[grid]"), "grid.J")
    length = _as_float(_require(section, "length", "[grid]"), "grid.length")
    try:
        return GridSpec.from_length(J, length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_from_dict(section) -> InitialCondition:
    if not isinstance(section, dict):
        raise ConfigError("[initial] must be a section")
    kind = _require(section, "kind", "[initial]")
    if kind == "random_uniform":
        _check_keys(section, {"kind", "seed"}, "[initial]")
        return RandomUniform(seed=_as_int(_require(section, "seed", "[initial]"), "initial.seed"))
    if kind == "sine_wave":
        _check_keys(section, {"kind", "amplitude", "modes"}, "[initial]")
        return SineWave(
            amplitude=_as_float(_require(section, "amplitude", "[initial]"), "initial.amplitude"),
            modes=_as_int(section.get("modes", 1), "initial.modes"),
        )
    if kind == "tanh_front":
        _check_keys(section, {"kind", "center", "width"}, "[initial]")
        return TanhFront(
            center=_as_float(_require(section, "center", "[initial]"), "initial.center"),
            width=_as_float(_require(section, "width", "[initial]"), "initial.width"),
        )
    raise ConfigError(
        f"initial.kind must be 'random_uniform', 'sine_wave' or 'tanh_front', got {kind!r}"
    )


def potential_from_config(data: dict) -> PotentialSpec:
    """Extract just the potential from a config dict (used by ``check``).

    Validates the top-level key set and the [potential] section, but does not
    require the run-only keys, so a bounds check needs only a potential.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a table of keys and sections")
    _check_keys(data, _TOP_LEVEL_KEYS, "top level")
    return _potential_from_dict(_require(data, "potential", "top level"))


def run_config_from_dict(data: dict, output_override: str | None = None) -> RunConfig:
    """Validate a parsed config dict and build a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a table of keys and sections")
    _check_keys(data, _TOP_LEVEL_KEYS, "top level")

    scheme_raw = _require(data, "scheme", "top level")
    try:
        scheme = SchemeName(scheme_raw)
    except ValueError:
        valid = ", ".join(s.value for s in SchemeName)
        raise ConfigError(f"scheme must be one of {valid}, got {scheme_raw!r}") from None

    dt_raw = _require(data, "dt", "top level")
    dt: float | str = dt_raw if isinstance(dt_raw, str) else _as_float(dt_raw, "dt")

    output = output_override if output_override is not None else data.get("output", "out")
    if not isinstance(output, str):
        raise ConfigError(f"output must be a path string, got {output!r}")

    return RunConfig(
        potential=_potential_from_dict(_require(data, "potential", "top level")),
        grid=_grid_from_dict(_require(data, "grid", "top level")),
        scheme=scheme,
        epsilon=_as_float(_require(data, "epsilon", "top level"), "epsilon"),
        dt=dt,
        steps=_as_int(_require(data, "steps", "top level"), "steps"),
        initial=_initial_from_dict(_require(data, "initial", "top level")),
        output=output,
        record_every=_as_int(data.get("record_every", 1), "record_every"),
    )


def sweep_config_from_dict(data: dict, output_override: str | None = None) -> SweepConfig:
    """Build a SweepConfig from a config dict with a [sweep] section."""
    base = run_config_from_dict(data, output_override)
    section = data.get("sweep")
    if not isinstance(section, dict):
        raise ConfigError("sweep requires a [sweep] section")
    _check_keys(section, {"dt_grid", "dt_lo", "dt_hi", "dt_count", "steps"}, "[sweep]")

    if "dt_grid" in section:
        if {"dt_lo", "dt_hi", "dt_count"} & set(section):
            raise ConfigError("give either sweep.dt_grid or the geometric lo/hi/count spec")
        raw = section["dt_grid"]
        if not isinstance(raw, list):
            raise ConfigError("sweep.dt_grid must be a list of time steps")
        dt_grid = tuple(_as_float(v, "sweep.dt_grid entries") for v in raw)
    else:
        lo = _as_float(_require(section, "dt_lo", "[sweep]"), "sweep.dt_lo")
        hi = _as_float(_require(section, "dt_hi", "[sweep]"), "sweep.dt_hi")
        count = _as_int(_require(section, "dt_count", "[sweep]"), "sweep.dt_count")
        if not (0.0 < lo <= hi) or count < 1:
            raise ConfigError("geometric sweep needs 0 < dt_lo <= dt_hi and dt_count >= 1")
        dt_grid = tuple(float(v) for v in np.geomspace(lo, hi, count))

    steps = _as_int(section.get("steps", base.steps), "sweep.steps")
    return SweepConfig(base=base, dt_grid=dt_grid, steps=steps)


def convergence_spec_from_dict(
    data: dict, output_override: str | None = None
) -> tuple[RunConfig, list[tuple[float, int]], RunConfig, float]:
    """Build (base, ladder, reference, final_time) from a [converge] section."""
    base = run_config_from_dict(data, output_override)
    section = data.get("converge")
    if not isinstance(section, dict):
        raise ConfigError("converge requires a [converge] section")
    _check_keys(
        section, {"dt_values", "J_values", "ref_dt", "ref_J", "final_time"}, "[converge]"
    )

    dts_raw = _require(section, "dt_values", "[converge]")
    js_raw = _require(section, "J_values", "[converge]")
    if not (isinstance(dts_raw, list) and dts_raw and isinstance(js_raw, list) and js_raw):
        raise ConfigError("converge.dt_values and converge.J_values must be non-empty lists")
    dts = [_as_float(v, "converge.dt_values entries") for v in dts_raw]
    js = [_as_int(v, "converge.J_values entries") for v in js_raw]
    if len(dts) == 1 and len(js) > 1:
        dts = dts * len(js)
    if len(js) == 1 and len(dts) > 1:
        js = js * len(dts)
    if len(dts) != len(js):
        raise ConfigError("converge.dt_values and converge.J_values lengths do not match")

    ref_dt = _as_float(_require(section, "ref_dt", "[converge]"), "converge.ref_dt")
    ref_J = _as_int(_require(section, "ref_J", "[converge]"), "converge.ref_J")
    final_time = _as_float(_require(section, "final_time", "[converge]"), "converge.final_time")
    try:
        ref_grid = GridSpec.from_length(ref_J, base.grid.length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    reference = replace(base, dt=ref_dt, grid=ref_grid)
    return base, list(zip(dts, js)), reference, final_time


# --- persistence -------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def _record_row(rec: StepRecord) -> list[str]:
    by_name = {m.name: m for m in rec.monitors}
    cells = [rec.step, rec.time, rec.energy, rec.l1_norm, rec.min_val, rec.max_val]
    for name in MONITOR_NAMES:
        m = by_name[name]
        cells.extend([m.active, m.satisfied])
    return [_fmt(c) for c in cells]


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_run_outputs(result: RunResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write run.csv and summary.json into ``out_dir``; returns both paths."""
    out = Path(out_dir)
    csv_path = out / RUN_CSV_NAME
    _write_csv(csv_path, RUN_CSV_COLUMNS, (_record_row(r) for r in result.records))
    json_path = out / SUMMARY_JSON_NAME
    json_path.write_text(json.dumps(_json_safe(result.summary), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def write_sweep_csv(rows: Sequence[SweepRow], out_dir: str | Path) -> Path:
    path = Path(out_dir) / SWEEP_CSV_NAME
    _write_csv(
        path,
        SWEEP_CSV_COLUMNS,
        (
            [
                _fmt(r.dt),
                _fmt(r.within_bound),
                _fmt(r.first_bound_violation_step),
                _fmt(r.first_energy_increase_step),
                _fmt(r.final_energy),
            ]
            for r in rows
        ),
    )
    return path


def write_convergence_csv(rows: Sequence[ConvergenceRow], out_dir: str | Path) -> Path:
    path = Path(out_dir) / CONVERGENCE_CSV_NAME
    _write_csv(
        path,
        CONVERGENCE_CSV_COLUMNS,
        ([_fmt(r.h), _fmt(r.error), _fmt(r.observed_order)] for r in rows),
    )
    return path
