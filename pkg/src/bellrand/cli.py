#!/usr/bin/env python3
"""
Command-line interface for Bell-test randomness bounds
"""

import argparse
import logging
import sys
from importlib.metadata import PackageNotFoundError, version

from .bell_core import ch_value, chsh_value, is_no_signaling
from .closed_form import build_attack, ch_bound_delta, optimal_value
from .config import DEFAULT_GRID_N
from .errors import ComputationError, ValidationError
from .io import dumps, read_ensemble, render_csv, write_csv, write_json
from .lhv_model import ensemble_bell_value, induced_joint, validate_ensemble
from .models.distribution import Functional
from .models.ensemble import RandomnessBounds
from .models.results import CONDITIONS, ConditionFlags, SimConfig, SweepMode, SweepSpec
from .oracle import optimize
from .simulator import make_rng, simulate
from .sweep import header, run_sweep, sweep_conditions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COMPUTATION = 3


def _bounds(args) -> RandomnessBounds:
    """RandomnessBounds from --P/--Q or --delta"""
    delta = getattr(args, "delta", None)
    P, Q = getattr(args, "P", None), getattr(args, "Q", None)
    if delta is not None:
        if P is not None or Q is not None:
            raise ValidationError("give either --delta or --P/--Q, not both")
        return RandomnessBounds.from_delta(delta)
    if P is None or Q is None:
        raise ValidationError("both --P and --Q are required (or --delta)")
    return RandomnessBounds(P, Q)


def _condition(args) -> ConditionFlags:
    return ConditionFlags.from_name(getattr(args, "cond", "general"))


def _functional(args) -> Functional:
    return Functional(getattr(args, "func", "ch"))


def _emit(args, data) -> None:
    """Print JSON, or write it to --out"""
    out = getattr(args, "out", None)
    if out:
        write_json(out, data)
        logger.info("wrote %s", out)
    else:
        print(dumps(data))


# =============================================================================
# Commands
# =============================================================================


def cmd_bound(args):
    """Optimal LHVM value from the closed forms"""
    cond, functional = _condition(args), _functional(args)
    rb = _bounds(args)
    result = optimal_value(cond, rb, functional)
    data = result.to_dict()
    if rb.delta is not None:
        data["delta"] = rb.delta
        if functional is Functional.CH:
            data["value"] = ch_bound_delta(cond, rb.delta)
    _emit(args, data)


def cmd_attack(args):
    """Build an achieving ensemble and write it as JSON"""
    cond, functional = _condition(args), _functional(args)
    rb = _bounds(args)
    method = getattr(args, "method", "analytic")
    grid_n = getattr(args, "grid", DEFAULT_GRID_N)
    ensemble = build_attack(cond, rb, functional, method=method, grid_n=grid_n)

    report = validate_ensemble(ensemble, rb, factorizable=cond.factorizable)
    achieved = ensemble_bell_value(ensemble, functional)
    closed = optimal_value(cond, rb, functional).value
    write_json(args.out, ensemble.to_dict())

    summary = {
        "out": str(args.out),
        "label": ensemble.label,
        "atoms": len(ensemble),
        "achieved": achieved,
        "closed_form": closed,
        "valid": report.ok,
    }
    if getattr(args, "json", False):
        print(dumps(summary))
    else:
        status = "valid" if report.ok else "INVALID"
        print(
            f"{cond.name} {functional.value} attack ({ensemble.label}, {len(ensemble)} atoms): "
            f"achieved {achieved:.12g}, closed form {closed:.12g}, {status}"
        )


def cmd_oracle(args):
    """Numerical optimum with its certificate and the closed-form gap"""
    cond, functional = _condition(args), _functional(args)
    rb = _bounds(args)
    grid_n = getattr(args, "grid", DEFAULT_GRID_N)
    result = optimize(cond, functional, rb, grid_n=grid_n, method=getattr(args, "method", "highs"))
    closed = optimal_value(cond, rb, functional).value

    data = result.to_dict()
    data["condition"] = cond.name
    data["closed_form"] = closed
    data["gap"] = abs(result.value - closed)
    if not getattr(args, "witness", False):
        data.pop("witness", None)
    _emit(args, data)


def cmd_sweep(args):
    """Tabulate closed-form values (and optionally oracle values) over a grid"""
    mode = SweepMode(getattr(args, "mode", "pq"))
    spec = SweepSpec(
        conditions=sweep_conditions(args.cond),
        mode=mode,
        p_range=getattr(args, "p_range", None),
        q_range=getattr(args, "q_range", None),
        delta_range=getattr(args, "delta_range", None),
        functional=_functional(args),
        with_oracle=getattr(args, "oracle", False),
        grid_n=getattr(args, "grid", DEFAULT_GRID_N),
        j_target=getattr(args, "target", None),
    )
    rows = run_sweep(spec, workers=getattr(args, "workers", None))
    columns = header(spec)

    if getattr(args, "json", False):
        _emit(args, [dict(zip(columns, row)) for row in rows])
        return
    out = getattr(args, "out", None)
    if out:
        write_csv(out, columns, rows)
        print(f"{len(rows)} rows written to {out}")
    else:
        sys.stdout.write(render_csv(columns, rows))


def cmd_simulate(args):
    """Sample trials from an ensemble and estimate the CH value"""
    ensemble = read_ensemble(args.ensemble)
    seed = getattr(args, "seed", None)
    seed = 0 if seed is None else seed
    cfg = SimConfig(n_trials=args.n, seed=seed, ensemble=ensemble)
    report = simulate(cfg, make_rng(seed))
    _emit(args, report.to_dict())


def _meta_bounds(args, meta) -> RandomnessBounds:
    P = getattr(args, "P", None)
    Q = getattr(args, "Q", None)
    P = meta.get("P", 1.0) if P is None else P
    Q = meta.get("Q", 0.0) if Q is None else Q
    return RandomnessBounds(P, Q)


def cmd_verify(args) -> int:
    """Check an ensemble file against every model constraint"""
    ensemble = read_ensemble(args.ensemble)
    meta = ensemble.extras
    rb = _meta_bounds(args, meta)
    cond_name = getattr(args, "cond", None) or meta.get("condition", "general")
    cond = ConditionFlags.from_name(cond_name)

    report = validate_ensemble(ensemble, rb, factorizable=cond.factorizable)
    data = {"ok": report.ok, "condition": cond.name, **rb.to_dict(), **report.to_dict()}
    if report.ok:
        data["ch"] = ensemble_bell_value(ensemble, Functional.CH)
        data["chsh"] = ensemble_bell_value(ensemble, Functional.CHSH)
        joint = induced_joint(ensemble)
        no_signaling, residual = is_no_signaling(joint)
        data["no_signaling"] = no_signaling
        data["ns_residual"] = residual
        data["joint_ch"] = ch_value(joint)
        data["joint_chsh"] = chsh_value(joint)
        if "P" in meta or getattr(args, "P", None) is not None:
            functional = Functional(meta.get("functional", "ch"))
            closed = optimal_value(cond, rb, functional).value
            data["closed_form"] = closed
            data["gap"] = abs(data[functional.value] - closed)

    if getattr(args, "json", False):
        print(dumps(data))
    else:
        label = "<stdin>" if args.ensemble == "-" else args.ensemble
        print(f"File: {label}")
        print(f"Atoms: {len(ensemble)}")
        print(f"Bounds: P={rb.P:g} Q={rb.Q:g} ({cond.name})")
        if report.ok:
            print(f"CH: {data['ch']:.12g}")
            print(f"CHSH: {data['chsh']:.12g}")
            print(f"No-signaling residual: {data['ns_residual']:.3g}")
            if "gap" in data:
                print(f"Closed form: {data['closed_form']:.12g} (gap {data['gap']:.3g})")
            print("Valid")
        else:
            for violation in report.violations:
                print(f"  {violation}")
            print(f"INVALID: {', '.join(report.constraints())}")

    return EXIT_OK if report.ok else EXIT_INVALID


# =============================================================================
# Argument parsing
# =============================================================================


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        return tuple(float(v) for v in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range {text!r}") from None


def _package_version() -> str:
    try:
        return version("bellrand")
    except PackageNotFoundError:
        return "unknown"


def _add_bounds(p):
    p.add_argument(
        "--cond",
        choices=list(CONDITIONS),
        default="general",
        help="Condition on the attack (default: general)",
    )
    p.add_argument("--func", choices=[f.value for f in Functional], default="ch", help="Functional")
    p.add_argument("--P", type=float, help="Upper bound on every input probability")
    p.add_argument("--Q", type=float, help="Lower bound on every input probability")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="More logging (-vv for debug)"
    )
    json_flag = argparse.ArgumentParser(add_help=False)
    json_flag.add_argument("--json", action="store_true", help="Machine-readable output")
    out_flag = argparse.ArgumentParser(add_help=False)
    out_flag.add_argument("--out", help="Output file (default: stdout)")

    parser = argparse.ArgumentParser(
        description="Optimal local-hidden-variable attacks on CH/CHSH tests with biased inputs"
    )
    parser.add_argument(
        "-V", "--version", action="version", version=f"bellrand {_package_version()}"
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Bound
    p = subparsers.add_parser(
        "bound", parents=[common, out_flag], help="Closed-form optimal value"
    )
    _add_bounds(p)
    p.add_argument("--delta", type=float, help="Symmetric bias: P = 1/4 + d, Q = 1/4 - d")

    # Attack
    p = subparsers.add_parser(
        "attack", parents=[common, json_flag, out_flag], help="Build an achieving ensemble"
    )
    _add_bounds(p)
    p.add_argument("--delta", type=float, help="Symmetric bias: P = 1/4 + d, Q = 1/4 - d")
    p.add_argument("--method", choices=["analytic", "search"], default="analytic")
    p.add_argument("--grid", type=_positive_int, default=DEFAULT_GRID_N, help="Search grid size")

    # Oracle
    p = subparsers.add_parser("oracle", parents=[common, out_flag], help="Numerical optimum")
    _add_bounds(p)
    p.add_argument("--delta", type=float, help="Symmetric bias: P = 1/4 + d, Q = 1/4 - d")
    p.add_argument(
        "--grid", type=_positive_int, default=DEFAULT_GRID_N, help="Factorized grid size"
    )
    p.add_argument("--method", choices=["highs", "enumerate"], default="highs", help="LP solver")
    p.add_argument("--witness", action="store_true", help="Include the optimal ensemble")

    # Sweep
    p = subparsers.add_parser(
        "sweep",
        parents=[common, json_flag, out_flag],
        help="Tabulate values over a grid",
        description="Ranges are inclusive start:stop:step. Infeasible points are skipped.",
    )
    p.add_argument(
        "--cond",
        choices=list(CONDITIONS),
        action="append",
        required=True,
        help="Condition (repeat for several)",
    )
    p.add_argument("--func", choices=[f.value for f in Functional], default="ch")
    p.add_argument("--mode", choices=[m.value for m in SweepMode], default="pq")
    p.add_argument("--P", dest="p_range", type=_range, help="P range")
    p.add_argument("--Q", dest="q_range", type=_range, help="Q range")
    p.add_argument("--delta", dest="delta_range", type=_range, help="Delta range")
    p.add_argument("--target", type=float, help="Target CH value for critical curves")
    p.add_argument("--oracle", action="store_true", help="Add oracle and gap columns")
    p.add_argument("--grid", type=_positive_int, default=DEFAULT_GRID_N)
    p.add_argument("--workers", type=_positive_int, help="Worker processes")

    # Simulate
    p = subparsers.add_parser(
        "simulate", parents=[common, out_flag], help="Sample trials from an ensemble"
    )
    p.add_argument("ensemble", help="Ensemble JSON file (- for stdin)")
    p.add_argument("-n", "--n", dest="n", type=_positive_int, required=True, help="Trials")
    p.add_argument("--seed", type=int, help="Random seed (default: 0)")

    # Verify
    p = subparsers.add_parser(
        "verify", parents=[common, json_flag], help="Check an ensemble file"
    )
    p.add_argument("ensemble", help="Ensemble JSON file (- for stdin)")
    p.add_argument("--cond", choices=list(CONDITIONS), help="Override the recorded condition")
    p.add_argument("--P", type=float, help="Override the recorded P")
    p.add_argument("--Q", type=float, help="Override the recorded Q")

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_INVALID

    _configure_logging(args.verbose)
    if args.command == "attack" and not args.out:
        parser.error("attack requires --out")

    commands = {
        "bound": cmd_bound,
        "attack": cmd_attack,
        "oracle": cmd_oracle,
        "sweep": cmd_sweep,
        "simulate": cmd_simulate,
        "verify": cmd_verify,
    }
    try:
        status = commands[args.command](args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ComputationError as e:
        print(f"computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
