"""Command-line entry point.

Settings are resolved as: built-in defaults, then the ``--config`` JSON file,
then explicit command-line flags.
"""
from __future__ import annotations

import argparse
import json
import sys

from .correlations import PoleError
from .dynamics import DegenerateParametersError, StepSizeError
from .oracle import CapacityError
from .params import InvalidParameterError
from .sweep import (
    ConfigError,
    SweepConfig,
    load_config,
    parse_grid,
    run_csi,
    run_dynamics,
    run_map,
    run_oracle_check,
    run_resolution,
    write_dynamics_result,
    write_grid_result,
    write_resolution_result,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CAPACITY = 2
EXIT_DEVIATION = 3


def _triple(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return vals


def _n_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _seed(text: str) -> None:
    if text.lower() != "none":
        raise argparse.ArgumentTypeError("no randomness is used; only 'none' is accepted")
    return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--n-atoms", type=int, dest="n_atoms")
    common.add_argument("--spacing", type=float, help="nearest-neighbour spacing r0/lambda")
    common.add_argument("--pair", action="append", dest="pairs",
                        help="band pair such as LL or LR; repeat or comma-separate")
    common.add_argument("--grid", help="min:max:steps for both detector axes, e.g. 0:pi:201")
    common.add_argument("--grid2", help="min:max:steps for the second axis only")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="output path; a summary is printed if omitted")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument("--rabi", type=float, help="Rabi frequency Omega/gamma (dynamics)")
    common.add_argument("--detuning", type=float, help="detuning Delta/gamma (dynamics)")
    common.add_argument("--gammas", type=_triple, help="gamma(w-),gamma(wL),gamma(w+)")
    common.add_argument("--coupling", choices=["perpendicular", "axial"])
    common.add_argument("--t-end", type=float, dest="t_end")
    common.add_argument("--dt", type=float)
    common.add_argument("--initial", type=_triple, help="initial x,y,z")
    common.add_argument("--omega", type=float, dest="saturation",
                        help="weak-field Omega/gamma (resolution)")
    common.add_argument("--profile-steps", type=int, dest="profile_steps")
    common.add_argument("--n-range", type=_n_range, dest="n_range", help="e.g. 2:6 or 2,3,5")
    common.add_argument("--delta-steps", type=int, dest="delta_steps")

    parser = argparse.ArgumentParser(prog="mollowg2", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    sub.add_parser("map", parents=[common], help="g2 maps over detector angles")
    sub.add_parser("csi", parents=[common], help="Cauchy-Schwarz parameter map")
    sub.add_parser("dynamics", parents=[common], help="two-atom dressed-state trajectory")
    sub.add_parser("oracle-check", parents=[common], help="compare closed forms with exact operator algebra")
    sub.add_parser("resolution", parents=[common], help="weak- vs strong-field fringe profiles")
    return parser


_OVERRIDES = ("n_atoms", "spacing", "workers", "out", "format", "rabi", "detuning",
              "gammas", "coupling", "t_end", "dt", "initial", "saturation",
              "profile_steps", "n_range", "delta_steps")


def resolve_config(args: argparse.Namespace) -> SweepConfig:
    data = {}
    if args.config:
        data = load_config(args.config).to_dict()
    data["mode"] = args.mode
    for key in _OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.mode == "oracle-check" and args.n_atoms is not None and args.n_range is None:
        data["n_range"] = [args.n_atoms]
    if args.pairs:
        data["pairs"] = [p.strip() for item in args.pairs for p in item.split(",") if p.strip()]
    if args.grid:
        data["grid1"] = data["grid2"] = parse_grid(args.grid)
    if args.grid2:
        data["grid2"] = parse_grid(args.grid2)
    return SweepConfig.from_dict(data).validate()


def _emit(summary: dict) -> None:
    print(json.dumps(summary, indent=2, sort_keys=True))


def run(config: SweepConfig) -> int:
    mode = config.mode
    if mode in ("map", "csi"):
        result = run_map(config) if mode == "map" else run_csi(config)
        if config.out:
            files = write_grid_result(result, config.out, config.format)
            _emit({"files": [str(f) for f in files], "stats": result.metadata["stats"]})
        else:
            _emit({"stats": result.metadata["stats"]})
        return EXIT_OK
    if mode == "dynamics":
        result = run_dynamics(config)
        if config.out:
            write_dynamics_result(result, config.out, config.format)
        meta = result.metadata
        _emit({k: meta[k] for k in ("final", "steady_state", "residual", "steady_deviation")})
        return EXIT_OK
    if mode == "resolution":
        result = run_resolution(config)
        if config.out:
            write_resolution_result(result, config.out, config.format)
        _emit({"period_ratio": result.ratio, "saturation": config.saturation})
        return EXIT_OK
    report = run_oracle_check(config)
    text = report.to_json()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if report.passed else EXIT_DEVIATION


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return run(config)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except StepSizeError as exc:
        print(f"step-size error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, InvalidParameterError, PoleError, DegenerateParametersError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
