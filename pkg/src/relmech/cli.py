"""``relmech`` command line: run scenarios, validate configs, print the perihelion advance."""

import argparse
import sys
import time

from . import __version__
from .errors import ConfigError, RelmechError
from .scenario import emit_report, help_config, load_config, precession_summary, run, simulated_precession
from .worldline import format_float

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relmech", description=__doc__)
    p.add_argument("--version", action="version", version=f"relmech {__version__}")
    p.add_argument("--help-config", action="store_true", help="list every configuration key and exit")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run the scenario in a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (RELMECH_OUT takes precedence)")
    r.add_argument("--seed", type=int, help="seed for randomised checks")

    c = sub.add_parser("check", help="parse and validate a config without running it")
    c.add_argument("config")

    pr = sub.add_parser("precession", help="closed-form perihelion advance, optionally simulated")
    pr.add_argument("--GM", type=float, required=True, help="central GM in m^3/s^2")
    pr.add_argument("--a", type=float, required=True, help="semi-major axis in m")
    pr.add_argument("--e", type=float, required=True, help="eccentricity")
    pr.add_argument("--c", type=float, default=299792458.0)
    pr.add_argument("--revs", type=float, help="also integrate this many revolutions and measure the shift")
    pr.add_argument("--gm-scale", type=float, default=1e4, help="GM factor for the simulation (default 1e4)")
    pr.add_argument("--steps-per-rev", type=int, default=2000)
    pr.add_argument("--tolerance", type=float, default=0.05, help="allowed measured/closed-form deviation")
    return p


def _print_pairs(pairs: dict):
    width = max(len(k) for k in pairs)
    for k, v in pairs.items():
        print(f"{k.ljust(width)} = {format_float(v) if isinstance(v, float) else v}")


def _precession(args) -> int:
    if not (args.GM > 0 and args.a > 0 and 0 <= args.e < 1 and args.c > 0):
        print("relmech: need GM > 0, a > 0, 0 <= e < 1 and c > 0", file=sys.stderr)
        return EXIT_ERROR
    _print_pairs(precession_summary(args.GM, args.a, args.e, args.c))
    if args.revs is None:
        return EXIT_OK
    sim = simulated_precession(args.GM, args.a, args.e, args.revs, args.gm_scale, args.steps_per_rev, args.c)
    _print_pairs({f"simulated.{k}": v for k, v in sim.items()})
    return EXIT_OK if abs(sim["relative_deviation"]) <= args.tolerance else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.help_config:
        sys.stdout.write(help_config())
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_ERROR
    try:
        if args.command == "precession":
            return _precession(args)
        cfg = load_config(args.config)
        if args.command == "check":
            cfg.validate()
            print(f"{args.config}: ok ({cfg.scenario})")
            return EXIT_OK
        t0 = time.perf_counter()
        report = run(cfg, args.out, args.seed)
        sys.stdout.write(emit_report(report, "text").decode())
        sys.stdout.flush()
        print(f"wall_time = {time.perf_counter() - t0:.3f} s", file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED
    except (ConfigError, RelmechError, OSError, ValueError) as exc:
        print(f"relmech: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
