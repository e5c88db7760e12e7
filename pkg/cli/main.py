"""
Command-line front end: spinfisher {simulate, estimate, phasespace, scan}.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from analysis.ScanAnalyzer import ScanAnalyzer
from analysis.TimeScan import TimeScan
from meanfield.phase_space import (
    ClassicalParams,
    PhasePoint,
    fixed_points,
    separatrix,
    trajectories,
)
from measure.histogram_io import atomic_write_text
from pipeline.MeasurementDataset import MeasurementDataset
from pipeline.Pipeline import AnalysisPipeline, SimulationPipeline
from pipeline.RunConfig import ConfigError, RunConfig, load_config
from spin.errors import NumericalError

THREADS_ENV = "SPINFISHER_THREADS"
CSV_FLOAT = "%.12g"


def _frame_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=CSV_FLOAT, lineterminator="\n")


def resolve_threads(cli_value: Optional[int]) -> int:
    """--threads, then the SPINFISHER_THREADS variable, then 1"""
    if cli_value is not None:
        value = cli_value
    else:
        raw = os.environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return 1
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer")
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value


def _config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    threads = resolve_threads(args.threads)
    out = Path(args.out or config.output_dir)
    SimulationPipeline(config, out, threads=threads, verbose=not args.quiet).run()
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    config = _config(args)
    threads = resolve_threads(args.threads)
    dataset = MeasurementDataset.from_directory(args.input, kind=args.kind)
    out = Path(args.out or args.input)
    pipeline = AnalysisPipeline(
        dataset,
        config.analysis,
        seed=config.sampling.seed,
        output_dir=out,
        threads=threads,
        verbose=not args.quiet,
    )
    pipeline.run()
    path = pipeline.write()
    if not args.quiet:
        print(f"Results written to {path}")
    return 0


def cmd_phasespace(args: argparse.Namespace) -> int:
    config = _config(args)
    threads = resolve_threads(args.threads)
    exp, ps = config.experiment, config.phasespace
    params = ClassicalParams(
        lambda_=exp.lambda_ if ps.lambda_ is None else ps.lambda_,
        delta_over_omega=ps.delta_over_omega,
        n_omega=exp.n_atoms * exp.omega / 2.0,
        omega=exp.omega,
    )
    out = Path(args.out or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    points = fixed_points(params)
    frame = pd.DataFrame(
        [p.to_dict() for p in points], columns=["z", "phi", "stability"]
    )
    atomic_write_text(out / "fixed_points.csv", _frame_text(frame))
    if not args.quiet:
        print(f"{len(points)} fixed points for Lambda={params.lambda_:g}")

    if any(not p.stable for p in points):
        atomic_write_text(out / "separatrix.csv", _frame_text(separatrix(params, ps.n_phi)))

    starts = [PhasePoint(z, math.radians(phi_deg)) for z, phi_deg in ps.trajectories]
    paths = trajectories(starts, params, (0.0, ps.t_max_ms * 1e-3), ps.dt_ms * 1e-3, threads)
    for i, path in enumerate(paths):
        atomic_write_text(out / f"trajectory_{i:03d}.csv", _frame_text(path.to_frame()))
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    config = _config(args)
    exp = config.experiment
    noise = None if config.noise.apply == "none" else config.noise.model()
    scan = TimeScan(
        n_atoms=exp.n_atoms,
        lambda_=exp.lambda_,
        omega=exp.omega,
        delta=2.0 * math.pi * exp.delta_hz,
        noise=noise,
        which=config.noise.apply,
        n_alpha=args.n_alpha,
        verbose=not args.quiet,
    )
    analyzer = ScanAnalyzer(scan.run(np.asarray(exp.evolution_times)))
    out = Path(args.out or config.output_dir)
    path = analyzer.write(out / "ideal_model.csv")
    if args.plot:
        analyzer.plot(save_path=str(out / "ideal_model.png"))
    if not args.quiet:
        t_max, value = analyzer.max_inverse_xi2()
        print(f"max 1/xi2 = {value:.2f} at {t_max:g} ms; table written to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinfisher",
        description="Simulate spin dynamics from an unstable fixed point and estimate Fisher information.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = False) -> None:
        p.add_argument("--config", type=str, required=config_required, help="JSON run configuration")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("simulate", help="simulate and sample histograms")
    common(p, config_required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="analyze a directory of histograms")
    common(p)
    p.add_argument("--input", type=str, required=True, help="directory with histogram CSVs and sidecars")
    p.add_argument("--kind", choices=["sampled", "exact"], default="sampled")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("phasespace", help="mean-field fixed points, separatrix and trajectories")
    common(p)
    p.set_defaults(func=cmd_phasespace)

    p = sub.add_parser("scan", help="ideal-model curves over the evolution times")
    common(p)
    p.add_argument("--n-alpha", type=int, default=180, help="tomography angles in the coarse scan")
    p.add_argument("--plot", action="store_true", help="also save ideal_model.png")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
