"""Command-line interface: run, sweep, converge, and check subcommands.

Exit codes: 0 = success with every active monitor satisfied, 1 = bad
configuration, I/O failure, or solver breakdown, 2 = an inequality the
scheme guarantees under its hypotheses was violated (a regression signal,
never expected).
"""

from __future__ import annotations

import argparse
import sys

from .experiment import (
    ConfigError,
    apply_overrides,
    convergence_spec_from_dict,
    convergence_study,
    load_config_file,
    potential_from_config,
    run,
    run_config_from_dict,
    sweep,
    sweep_config_from_dict,
    write_convergence_csv,
    write_run_outputs,
    write_sweep_csv,
)
from .linalg import SingularSystem
from .potential import RootFindingFailure, stability_bounds, validate_hypotheses
from .scheme import InvalidInitialData, NewtonDivergence

__all__ = ["main", "entry"]

_OPERATIONAL_ERRORS = (
    ConfigError,
    OSError,
    NewtonDivergence,
    SingularSystem,
    RootFindingFailure,
    InvalidInitialData,
)


class _Parser(argparse.ArgumentParser):
    # Usage errors are configuration errors; keep exit code 2 reserved for
    # monitor violations.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="phasefield",
        description="Semi-implicit Allen-Cahn solver with runtime stability monitors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("run", cmd_run, "advance one configured run and write CSV + JSON summary"),
        ("sweep", cmd_sweep, "run the config once per dt value and tabulate violations"),
        ("converge", cmd_converge, "measure errors against a finer reference run"),
        ("check", cmd_check, "report stability bounds and hypothesis flags, no simulation"),
    ]
    for name, func, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="path to the TOML config file")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted paths address sections); repeatable",
        )
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
        sp.set_defaults(func=func)
    return parser


def _load(args) -> dict:
    data = load_config_file(args.config)
    return apply_overrides(data, args.overrides)


def cmd_run(args) -> int:
    cfg = run_config_from_dict(_load(args), output_override=args.out)
    result = run(cfg)
    csv_path, json_path = write_run_outputs(result, cfg.output)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    violation = result.summary["first_violation"]
    if violation is not None:
        print(
            f"MONITOR VIOLATION: {violation['monitor']} failed at step {violation['step']} "
            "although its hypotheses hold",
            file=sys.stderr,
        )
        return 2
    return 0


def cmd_sweep(args) -> int:
    cfg = sweep_config_from_dict(_load(args), output_override=args.out)
    rows = sweep(cfg)
    path = write_sweep_csv(rows, cfg.base.output)
    print(f"wrote {path}")
    for row in rows:
        if row.error is not None:
            print(f"dt={row.dt:g}: run failed: {row.error}", file=sys.stderr)
    hypotheses_hold = validate_hypotheses(cfg.base.potential).endpoints_vanish
    violated = [
        row
        for row in rows
        if hypotheses_hold
        and row.within_bound
        and row.error is None
        and (
            row.first_bound_violation_step is not None
            or row.first_energy_increase_step is not None
        )
    ]
    for row in violated:
        print(
            f"MONITOR VIOLATION: dt={row.dt:g} is within the stability bound but "
            f"violated a guaranteed inequality",
            file=sys.stderr,
        )
    return 2 if violated else 0


def cmd_converge(args) -> int:
    base, ladder, reference, final_time = convergence_spec_from_dict(
        _load(args), output_override=args.out
    )
    rows = convergence_study(base, ladder, reference, final_time)
    path = write_convergence_csv(rows, base.output)
    print(f"wrote {path}")
    print(f"{'h':>14} {'error':>14} {'order':>8}")
    for row in rows:
        order = f"{row.observed_order:.3f}" if row.observed_order is not None else "-"
        print(f"{row.h:>14.6g} {row.error:>14.6g} {order:>8}")
    violated = [row for row in rows if row.active_violation is not None]
    for row in violated:
        print(
            f"MONITOR VIOLATION: {row.active_violation} failed during the h={row.h:g} rung",
            file=sys.stderr,
        )
    return 2 if violated else 0


def _flag(value: bool) -> str:
    return "true" if value else "false"


def cmd_check(args) -> int:
    data = _load(args)
    pot = potential_from_config(data)
    bounds = stability_bounds(pot)
    report = validate_hypotheses(pot)

    print(f"potential: {pot.kind.value}")
    print(f"coeffs of F (ascending): {list(pot.coeffs)}")
    print(f"invariant interval: [{pot.gamma_minus:g}, {pot.gamma_plus:g}]")
    print(f"max f' on interval: {bounds.max_fprime:.17g}")
    print(f"L = -min f' on interval: {bounds.lipschitz_L:.17g}")
    print(f"dt_max (largest dt with dt * max f' <= 1): {bounds.dt_max:.17g}")
    print(
        f"endpoints_vanish: {_flag(report.endpoints_vanish)} "
        f"(f(gamma-) = {report.f_at_gamma_minus:.3g}, f(gamma+) = {report.f_at_gamma_plus:.3g})"
    )
    print(
        f"f_vanishes_at_zero: {_flag(report.f_vanishes_at_zero)} "
        f"(f(0) = {report.f_at_zero:.3g}, "
        f"interval brackets zero: {_flag(report.interval_brackets_zero)})"
    )
    dt = data.get("dt")
    if isinstance(dt, (int, float)) and not isinstance(dt, bool):
        print(f"configured dt: {dt:g} (dt <= dt_max: {_flag(dt <= bounds.dt_max)})")
    elif dt == "auto":
        print(f"configured dt: auto (resolves to {bounds.dt_max:.17g})")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _OPERATIONAL_ERRORS as exc:
        print(f"phasefield {args.command}: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
