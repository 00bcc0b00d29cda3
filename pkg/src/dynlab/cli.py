"""Command line entry point.

    dynlab list
    dynlab --algorithm mQSO --benchmark GMPB --dimension 5 --runs 31 ...

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .core import BENCHMARK_IDS, ConfigError, ProblemSpec
from .edoas import ALGORITHMS, EdoaConfig
from .runner import ExperimentConfig, run_experiment, write_outputs


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    p = _Parser(prog="dynlab", description="Run dynamic optimization experiments.")
    p.add_argument("--algorithm", default=d.algorithm)
    p.add_argument("--benchmark", default=d.benchmark)
    p.add_argument("--dimension", type=int, default=d.dimension)
    p.add_argument("--peaks", type=int, default=d.peak_count)
    p.add_argument("--change-frequency", type=int, default=d.change_frequency)
    p.add_argument("--shift-severity", type=float, default=d.shift_severity)
    p.add_argument("--environments", type=int, default=d.environment_count)
    p.add_argument("--runs", type=int, default=d.run_count)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--output-dir", default=d.output_dir)
    p.add_argument("--emit-error-series", action="store_true")
    p.add_argument("--emit-frames", action="store_true",
                   help="education mode: one 2-D run with landscape and position dumps")
    p.add_argument("--grid-resolution", type=int, default=d.grid_resolution)
    p.add_argument("--education-seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=d.jobs, help="parallel worker processes")
    p.add_argument("--timestamp", default=None, help="pin the timestamp used in file names")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="algorithm or benchmark parameter override (repeatable)")
    return p


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def split_params(pairs) -> tuple[dict, dict]:
    """Route ``KEY=VALUE`` overrides to the benchmark or the algorithm."""
    problem, algorithm = {}, {}
    problem_keys = set(ProblemSpec.field_names())
    algorithm_keys = EdoaConfig.parameter_names()
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"--param expects KEY=VALUE, got {pair!r}")
        key = key.strip().replace("-", "_")
        if key in problem_keys:
            problem[key] = _parse_value(value)
        elif key in algorithm_keys:
            algorithm[key] = _parse_value(value)
        else:
            raise ConfigError(f"unknown parameter {key!r}")
    return problem, algorithm


def config_from_args(args) -> ExperimentConfig:
    problem, algorithm = split_params(args.param)
    return ExperimentConfig(
        algorithm=args.algorithm, benchmark=args.benchmark, dimension=args.dimension,
        peak_count=args.peaks, change_frequency=args.change_frequency,
        shift_severity=args.shift_severity, environment_count=args.environments,
        run_count=args.runs, seed=args.seed, emit_error_series=args.emit_error_series,
        emit_frames=args.emit_frames, grid_resolution=args.grid_resolution,
        output_dir=args.output_dir, problem_overrides=problem, algorithm_overrides=algorithm,
        jobs=args.jobs, education_seed=args.education_seed,
    )


def _progress(run_index, env):
    print(f"run {run_index + 1} environment {env}", file=sys.stderr, flush=True)


def cli_main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["list"]:
        print("algorithms: " + " ".join(ALGORITHMS))
        print("benchmarks: " + " ".join(BENCHMARK_IDS))
        return 0
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        config.problem_spec()
        config.edoa_config()
    except (_ArgumentError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        summary = run_experiment(config, progress=_progress)
        paths = write_outputs(summary, config, args.timestamp)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in summary.results:
        print(f"run {r.run_index + 1}: offline_error={r.offline_error!r} e_bbc={r.e_bbc!r}")
    for name, stats in summary.statistics.items():
        print(f"{name}: " + " ".join(f"{k}={v!r}" for k, v in stats.items()))
    for key, path in paths.items():
        print(f"wrote {key}: {path}")
    return 0


def main():
    sys.exit(cli_main())
