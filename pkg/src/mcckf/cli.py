"""Command-line entry point.

    mcckf example1 [--trials 100 --steps 300 --seed 42 --out land_vehicle.csv]
    mcckf example2 [--delta-exponents 2,3,4,5,6,7 --out sensor_sweep.csv]
    mcckf custom --config model.ini [--out custom.csv]

Exit status: 0 on success (numerical filter failures are results, not
errors), 1 on usage errors, 2 on I/O errors.
"""

import argparse
import csv
import sys

from . import bench
from .config import ConfigError, load_config
from .filters import FILTERS, CORRENTROPY_FILTERS, KernelConfig
from .model import DEFAULT_MIXTURE_WEIGHT, DEFAULT_SHOT_PROB, DEFAULT_SHOT_SCALE, NoiseOverrides

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2
DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("exponents must be positive integers")
    return values


def _filter_list(text):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    unknown = [n for n in names if n not in FILTERS]
    if not names or unknown:
        raise argparse.ArgumentTypeError(f"unknown filter(s) {unknown}; choose from {', '.join(FILTERS)}")
    return names


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trials", type=_positive_int, default=100, help="Monte Carlo trials (default 100)")
    common.add_argument("--steps", type=_positive_int, default=300, help="time steps per trial (default 300)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    common.add_argument("--filters", type=_filter_list, default=CORRENTROPY_FILTERS,
                        help=f"comma-separated subset of {','.join(FILTERS)} (default {','.join(CORRENTROPY_FILTERS)})")
    common.add_argument("--kernel", choices=("adaptive", "fixed"), default="adaptive")
    common.add_argument("--sigma", type=float, default=None, help="kernel size for --kernel fixed")
    common.add_argument("--shot-prob", type=float, default=DEFAULT_SHOT_PROB)
    common.add_argument("--shot-scale", type=float, default=DEFAULT_SHOT_SCALE)
    common.add_argument("--mixture-weight", type=float, default=DEFAULT_MIXTURE_WEIGHT)
    common.add_argument("--sample-initial", action="store_true", help="draw the true x0 from N(x0, P0)")
    common.add_argument("--timing", action="store_true",
                        help="record mean seconds per filter step (makes output run-dependent)")
    common.add_argument("--workers", type=_positive_int, default=1, help="worker processes for trials")

    parser = _Parser(prog="mcckf", description="Maximum-correntropy Kalman filter benchmarks.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("example1", parents=[common], help="land-vehicle model, shot and mixture noise")
    p2 = sub.add_parser("example2", parents=[common], help="ill-conditioned sensor sweep")
    p2.add_argument("--delta-exponents", type=_int_list, default=bench.DEFAULT_DELTA_EXPONENTS,
                    help="delta = 10**-e for each e (default 2,3,4,5,6,7)")
    p3 = sub.add_parser("custom", parents=[common], help="model and noise from a config file")
    p3.add_argument("--config", required=True, help="model/noise config file")
    return parser


def _mc_config(args, case=1, exponents=()):
    if args.kernel == "fixed":
        if args.sigma is None or not args.sigma > 0:
            raise UsageError("--kernel fixed requires a positive --sigma")
        kernel = KernelConfig.fixed(args.sigma)
    else:
        if args.sigma is not None:
            raise UsageError("--sigma is only valid with --kernel fixed")
        kernel = KernelConfig.adaptive()
    if not 0.0 <= args.shot_prob <= 1.0 or args.shot_scale <= 0 or not 0.0 <= args.mixture_weight <= 1.0:
        raise UsageError("noise overrides out of range")
    return bench.MonteCarloConfig(
        trials=args.trials,
        steps=args.steps,
        master_seed=args.seed,
        filters=args.filters,
        noise_case=case,
        delta_exponents=exponents,
        kernel=kernel,
        overrides=NoiseOverrides(args.shot_prob, args.shot_scale, args.mixture_weight),
        sample_initial=args.sample_initial,
        timing=args.timing,
        workers=args.workers,
    )


def _reports(args):
    if args.command == "example1":
        return [r for case in (1, 2) for r in bench.run_monte_carlo(_mc_config(args, case))]
    if args.command == "example2":
        return [r for case in (1, 2)
                for r in bench.ill_conditioning_sweep(_mc_config(args, case, args.delta_exponents))]
    cfg = _mc_config(args)
    model, w_spec, v_spec = load_config(args.config)
    return bench.run_monte_carlo(cfg, model, (w_spec, v_spec), case="custom")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        reports = _reports(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mcckf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"mcckf: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mcckf: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.out is None:
            csv.writer(sys.stdout, lineterminator="\n").writerows(bench.csv_rows(reports))
        else:
            bench.write_csv(reports, args.out)
    except OSError as exc:
        print(f"mcckf: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
