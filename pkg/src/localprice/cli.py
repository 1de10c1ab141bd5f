"""Command-line entry point: ``localprice --experiment fig7 --seed 42 --out results``.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import experiments as ex
from .dynamics import ConfigError, SimConfig, dimension_to_mq, log_checkpoints
from .io import FORMATS, OutputError, OutputSpec, write_records
from .model import ModelError

EXPERIMENTS = ("fig1", "fig3", "fig4", "fig5", "fig6", "fig7", "custom")
ONE_DIMENSIONAL = ("fig3", "fig4", "fig5", "fig6")

log = logging.getLogger("localprice")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bin_width(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bin width must be a positive integer or 'auto', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"bin width must be positive, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="localprice", description="Spin-pair local price model experiments.")
    p.add_argument("--experiment", choices=EXPERIMENTS, default="custom")
    p.add_argument("--nodes", type=int, default=1024, help="ring size N")
    p.add_argument("--extra-neighbors", type=int, default=None, help="number of long-range offsets M")
    p.add_argument("--q", type=float, default=None, help="selection weight of long-range neighbours")
    p.add_argument("--dimension", type=float, default=None,
                   help="effective dimension; sets M and q by factorisation")
    p.add_argument("--sweeps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=int, default=16)
    p.add_argument("--offsets", type=_int_list, default=None, help="explicit long-range offsets, e.g. 8,64")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--force", action="store_true", help="overwrite existing output files")
    p.add_argument("--bin-width", type=_bin_width, default=None, help="histogram bin width or 'auto'")
    p.add_argument("--smooth-window", type=int, default=ex.DEFAULT_ESTIMATOR.window)
    p.add_argument("--plot-data", action="store_true", help="also write gnuplot .dat files")
    p.add_argument("--dimensions", type=_float_list, default=None, help="dimension grid for fig1/fig7")
    p.add_argument("--sizes", type=_int_list, default=None, help="ring sizes for fig6")
    p.add_argument("--checkpoints-per-decade", type=int, default=2)
    p.add_argument("--workers", type=int, default=1, help="threads for replica parallelism")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


@dataclasses.dataclass(frozen=True)
class Invocation:
    experiment: str
    config: SimConfig
    output: OutputSpec
    estimator: ex.Estimator
    dimensions: tuple[float, ...] | None = None
    sizes: tuple[int, ...] | None = None
    workers: int = 1
    verbose: bool = False


def parse_cli(argv: list[str]) -> Invocation:
    """Parse and validate arguments; usage errors exit with status 2."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.dimension is not None:
        for flag, value in (("--extra-neighbors", args.extra_neighbors), ("--q", args.q)):
            if value is not None:
                parser.error(f"--dimension cannot be combined with {flag}")
    if args.q is not None and not 0.0 <= args.q <= 1.0:
        parser.error(f"--q must lie in [0, 1], got {args.q}")
    if args.smooth_window < 1 or args.smooth_window % 2 == 0:
        parser.error(f"--smooth-window must be an odd positive integer, got {args.smooth_window}")
    if args.workers < 1:
        parser.error(f"--workers must be positive, got {args.workers}")
    if args.checkpoints_per_decade < 1:
        parser.error("--checkpoints-per-decade must be positive")

    if args.dimension is not None:
        try:
            m, q = dimension_to_mq(args.dimension)
        except ConfigError as exc:
            parser.error(f"--dimension: {exc}")
    else:
        m = args.extra_neighbors
        if m is None:
            m = len(args.offsets) if args.offsets is not None else 0
        q = args.q if args.q is not None else (1.0 if m else 0.0)
    if args.offsets is not None and len(args.offsets) != m:
        parser.error(f"--offsets lists {len(args.offsets)} offsets but the configuration needs M={m}")
    if args.experiment in ONE_DIMENSIONAL and m != 0:
        parser.error(f"--experiment {args.experiment} runs on a one-dimensional ring; "
                     f"drop --dimension/--extra-neighbors/--offsets")
    if args.sweeps < 1:
        parser.error(f"--sweeps must be positive, got {args.sweeps}")

    try:
        config = SimConfig(
            n_nodes=args.nodes, m_extra=m, q=q, sweeps=args.sweeps, seed=args.seed,
            replicas=args.replicas, offsets=args.offsets,
            checkpoints=log_checkpoints(args.sweeps, args.checkpoints_per_decade),
        )
    except (ConfigError, ModelError) as exc:
        parser.error(str(exc))

    dimensions = args.dimensions
    if dimensions is None and args.dimension is not None and args.experiment in ("fig1", "fig7"):
        dimensions = (args.dimension,)
    if dimensions is not None:
        for d in dimensions:
            try:
                ex.config_for_dimension(config, d)
            except (ConfigError, ModelError) as exc:
                parser.error(f"--dimensions: {exc}")

    output = OutputSpec(args.out, args.format, args.plot_data, args.force)
    estimator = ex.Estimator(args.bin_width, args.smooth_window)
    return Invocation(args.experiment, config, output, estimator, dimensions, args.sizes,
                      args.workers, args.verbose)


def run_invocation(inv: Invocation) -> list:
    """Run the selected experiment and return its RunRecords."""
    cfg, est, w = inv.config, inv.estimator, inv.workers
    if inv.experiment == "fig1":
        results = ex.experiment_pdf_vs_dimension(cfg, inv.dimensions or ex.FIG1_DIMENSIONS, est, w)
        return ex.pdf_vs_dimension_records(results)
    if inv.experiment == "fig3":
        return [ex.experiment_pdf_evolution(cfg, est, w)]
    if inv.experiment == "fig4":
        series = ex.experiment_peak_vs_time(cfg, est, w)
        return [ex.series_record(cfg, "peak_price", series, label="peak vs time")]
    if inv.experiment == "fig5":
        series, fit = ex.experiment_domains_vs_time(cfg, workers=w)
        return [ex.series_record(cfg, "domain_walls", series, label="domains vs time",
                                 fit=dataclasses.asdict(fit))]
    if inv.experiment == "fig6":
        series = ex.experiment_peak_vs_size(cfg, inv.sizes or ex.FIG6_SIZES, est, w)
        return [ex.series_record(cfg, "peak_price", series, label="peak vs size")]
    if inv.experiment == "fig7":
        points = ex.experiment_risk_vs_dimension(cfg, inv.dimensions or ex.FIG7_DIMENSIONS, w)
        return [ex.risk_record(cfg, points)]
    return [ex.ensemble_record(cfg, w, est)]


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse_cli(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if inv.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        records = run_invocation(inv)
        paths = write_records(records, inv.output, prefix=inv.experiment)
    except (OutputError, ConfigError, ModelError, OSError) as exc:
        log.error("%s", exc)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
