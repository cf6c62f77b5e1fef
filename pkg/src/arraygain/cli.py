"""Command-line entry point: ``arraygain <subcommand> ...``.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
error, 3 I/O error.
"""
import argparse
import csv
import logging
import re
import sys

import numpy as np

from .exceptions import DegenerateChannelError, ValidationError
from .experiment import (
    ScenarioConfig,
    emit_results,
    gain_stats_report,
    load_config,
    resolve_pattern,
    run_scenario,
    with_overrides,
)
from .geometry import ArrayGeometry, Direction, steering_vector, wavelength_from_frequency
from .linkbudget import LinkBudget, budget_breakdown, format_breakdown

log = logging.getLogger("arraygain")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _geometry_arg(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected RxC, e.g. 4x8, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _extra_arg(text):
    name, sep, value = text.rpartition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=dB, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric dB value in {text!r}") from None


def cmd_simulate(args):
    config = load_config(args.config) if args.config else ScenarioConfig()
    config = with_overrides(config, seed=args.seed, trials=args.trials)
    log.info("simulating %d case(s), %d trials, seed %d", len(config.array_cases), config.trials, config.seed)
    curves = run_scenario(config, workers=args.workers)
    csv_path, _ = emit_results(curves, args.out)
    print(f"wrote {len(curves)} records to {csv_path}")


def cmd_gain_stats(args):
    rows, cols = args.geometry
    geom = ArrayGeometry(rows, cols, args.spacing_m, wavelength_from_frequency(args.freq_hz))
    pattern = resolve_pattern(args.pattern, geom.num_elements, args.pattern_seed)
    written = gain_stats_report(pattern, args.out, geom)
    for path in written.values():
        print(path)


def cmd_link_budget(args):
    budget = LinkBudget.from_frequency(args.tx_dbm, args.tx_gain_dbi, args.rx_gain_dbi,
                                       args.distance_m, args.freq_hz, args.extra)
    rows = budget_breakdown(budget)
    print(format_breakdown(rows))
    if args.csv:
        try:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["item", "db", "running_total_dbm"])
                for r in rows:
                    w.writerow([r.name, repr(r.db), repr(r.running_total)])
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {args.csv}: {exc.strerror}", args.csv) from None


def cmd_steering(args):
    rows, cols = args.geometry
    geom = ArrayGeometry.from_frequency(rows, cols, args.spacing_m, args.freq_hz)
    a = steering_vector(geom, Direction.from_degrees(args.theta_deg, args.phi_deg))
    p, q = geom.grid_indices()
    print("element,row,col,real,imag,phase_deg")
    for m in range(geom.num_elements):
        print(f"{m},{p[m]},{q[m]},{a[m].real:.12g},{a[m].imag:.12g},{np.angle(a[m], deg=True):.6g}")


def build_parser():
    parser = argparse.ArgumentParser(prog="arraygain", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the two-user good/bad experiment")
    p.add_argument("--config", help="JSON scenario document (defaults apply when omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1, help="worker threads (results are identical)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gain-stats", help="gain variation, dynamic range and panel maps")
    p.add_argument("--pattern", required=True, help="CSV path or builtin:patch|dipole|reference")
    p.add_argument("--geometry", type=_geometry_arg, default=(4, 8))
    p.add_argument("--spacing-m", type=float, default=0.071)
    p.add_argument("--freq-hz", type=float, default=2.6e9)
    p.add_argument("--pattern-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gain_stats)

    p = sub.add_parser("link-budget", help="Friis budget breakdown")
    p.add_argument("--tx-dbm", type=float, required=True)
    p.add_argument("--tx-gain-dbi", type=float, required=True)
    p.add_argument("--rx-gain-dbi", type=float, required=True)
    p.add_argument("--distance-m", type=float, required=True)
    p.add_argument("--freq-hz", type=float, required=True)
    p.add_argument("--extra", type=_extra_arg, action="append", default=[], metavar="NAME=DB")
    p.add_argument("--csv", help="also write the breakdown as CSV")
    p.set_defaults(func=cmd_link_budget)

    p = sub.add_parser("steering", help="dump a steering vector")
    p.add_argument("--geometry", type=_geometry_arg, required=True)
    p.add_argument("--spacing-m", type=float, required=True)
    p.add_argument("--freq-hz", type=float, required=True)
    p.add_argument("--theta-deg", type=float, required=True)
    p.add_argument("--phi-deg", type=float, required=True)
    p.set_defaults(func=cmd_steering)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateChannelError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
