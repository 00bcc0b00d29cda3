"""Experiment orchestration and output files."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .benchmarks import EnvironmentSequence, generate_sequence, sequence_digest
from .core import BENCHMARK_IDS, ConfigError, ProblemSpec, RandomStreams
from .edoas import EdoaConfig, get_algorithm
from .evaluation import BlackBox, BudgetExhausted, EducationRecorder, EvaluationLedger
from .indicators import INDICATORS, ExperimentSummary, RunResult, summarize

STAT_ROWS = ("mean", "median", "standard_error")


@dataclass
class ExperimentConfig:
    algorithm: str = "mQSO"
    benchmark: str = "GMPB"
    dimension: int = 5
    peak_count: int = 10
    change_frequency: int = 5000
    shift_severity: float = 1.0
    environment_count: int = 100
    run_count: int = 31
    seed: int = 1
    emit_error_series: bool = False
    emit_frames: bool = False
    grid_resolution: int = 100
    output_dir: str = "results"
    problem_overrides: dict = field(default_factory=dict)
    algorithm_overrides: dict = field(default_factory=dict)
    jobs: int = 1
    # education mode draws a fresh benchmark seed unless pinned here
    education_seed: Optional[int] = None

    def __post_init__(self):
        if self.run_count < 1:
            raise ConfigError("run_count must be at least 1")
        if self.benchmark not in BENCHMARK_IDS:
            raise ConfigError(
                f"unknown benchmark {self.benchmark!r}; valid: {', '.join(BENCHMARK_IDS)}")
        get_algorithm(self.algorithm)
        if self.emit_frames and self.dimension != 2:
            raise ConfigError("education mode requires dimension 2")
        if self.grid_resolution < 2:
            raise ConfigError("grid_resolution must be at least 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")

    def problem_spec(self) -> ProblemSpec:
        unknown = set(self.problem_overrides) - set(ProblemSpec.field_names())
        if unknown:
            raise ConfigError(f"unknown benchmark parameters {sorted(unknown)}")
        kwargs = dict(
            dimension=self.dimension, peak_count=self.peak_count,
            change_frequency=self.change_frequency, shift_severity=self.shift_severity,
            environment_count=self.environment_count, benchmark_id=self.benchmark,
        )
        kwargs.update(self.problem_overrides)
        return ProblemSpec(**kwargs)

    def edoa_config(self) -> EdoaConfig:
        return get_algorithm(self.algorithm).default_config(**self.algorithm_overrides)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        d.pop("jobs")
        return d


def execute_run(algorithm_cls, edoa_config: EdoaConfig, sequence: EnvironmentSequence,
                algorithm_stream: np.random.Generator, run_index: int = 0,
                recorder: Optional[EducationRecorder] = None,
                on_change: Optional[Callable] = None) -> RunResult:
    """One run: initialize, then iterate until the budget is spent.

    The change flag is polled after initialization and after every iteration.
    """
    ledger = EvaluationLedger(sequence)
    algo = algorithm_cls(edoa_config, BlackBox(ledger), algorithm_stream)
    iteration = 0
    try:
        algo.initialize()
        if recorder:
            recorder.record_frame(ledger, [algo.positions()], iteration)
        while True:
            if ledger.consume_change_flag():
                if on_change:
                    on_change(run_index, ledger.current_env)
                algo.react_to_change()
            before = ledger.fe_counter
            algo.iterate()
            iteration += 1
            if ledger.fe_counter == before:
                raise RuntimeError(f"{algorithm_cls.name} iteration consumed no evaluations")
            if recorder:
                recorder.record_frame(ledger, [algo.positions()], iteration)
    except BudgetExhausted:
        pass
    if recorder:
        if not recorder.frames or recorder.frames[-1].fe != ledger.fe_counter:
            recorder.record_frame(ledger, [algo.positions()], iteration)
        recorder.finalize(sequence)
    return RunResult.from_ledger(ledger, run_index)


def _run_job(args) -> RunResult:
    name, edoa_config, sequence, seed, run_index = args
    return execute_run(get_algorithm(name), edoa_config, sequence,
                       RandomStreams.algorithm(seed, run_index), run_index)


def _check_writable(output_dir) -> Path:
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def build_sequence(config: ExperimentConfig, benchmark_seed: int) -> EnvironmentSequence:
    return generate_sequence(config.problem_spec(), RandomStreams.benchmark(benchmark_seed))


def run_experiment(config: ExperimentConfig, progress: Optional[Callable] = None,
                   check_output: bool = True) -> ExperimentSummary:
    """Run every configured run and summarize.

    ``progress(run_index, env_index)`` is called at the start of each run
    and at every environmental change.
    """
    if check_output:
        _check_writable(config.output_dir)
    algorithm_cls = get_algorithm(config.algorithm)
    edoa_config = config.edoa_config()

    recorder = None
    if config.emit_frames:
        benchmark_seed = (config.education_seed if config.education_seed is not None
                          else int(np.random.SeedSequence().entropy % 2**63))
        run_count = 1
        recorder = EducationRecorder(True, config.grid_resolution)
    else:
        benchmark_seed = config.seed
        run_count = config.run_count
    sequence = build_sequence(config, benchmark_seed)

    def on_change(run_index, env):
        if progress:
            progress(run_index, env)

    if config.jobs > 1 and run_count > 1 and recorder is None:
        jobs = [(config.algorithm, edoa_config, sequence, config.seed, r) for r in range(run_count)]
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = []
        for r in range(run_count):
            on_change(r, 1)
            results.append(execute_run(algorithm_cls, edoa_config, sequence,
                                       RandomStreams.algorithm(config.seed, r), r,
                                       recorder, on_change))

    summary = summarize(results, {
        "benchmark_seed": benchmark_seed,
        "sequence_sha256": sequence_digest(sequence),
        "fe_max": sequence.spec.fe_max,
        "problem": dataclasses.asdict(sequence.spec),
        "algorithm": dataclasses.asdict(edoa_config),
    })
    summary.recorder = recorder
    return summary


def timestamp_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def _fmt(x) -> str:
    return repr(float(x))


def _results_csv(summary: ExperimentSummary, config: ExperimentConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", *INDICATORS])
    for r in summary.results:
        w.writerow([r.run_index + 1, _fmt(r.offline_error), _fmt(r.e_bbc)])
    for stat in STAT_ROWS:
        w.writerow([stat, *(_fmt(summary.statistics[name][stat]) for name in INDICATORS)])
    w.writerow([])
    w.writerow(["parameter", "value"])
    w.writerow(["algorithm", config.algorithm])
    w.writerow(["benchmark", config.benchmark])
    for key, value in summary.metadata["problem"].items():
        if key != "benchmark_id":
            w.writerow([key, value])
    w.writerow(["run_count", summary.run_count])
    w.writerow(["seed", summary.metadata["benchmark_seed"]])
    return buf.getvalue()


def _series_csv(name: str, values: np.ndarray) -> str:
    lines = [f"fe,{name}"]
    lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(values, start=1))
    return "\n".join(lines) + "\n"


def _grid_text(env: int, grid: np.ndarray, bounds) -> str:
    lo, hi = bounds
    lines = [f"{env},{grid.shape[0]},{_fmt(lo)},{_fmt(hi)}"]
    lines.extend(",".join(_fmt(v) for v in row) for row in grid)
    return "\n".join(lines) + "\n"


def write_outputs(summary: ExperimentSummary, config: ExperimentConfig,
                  timestamp: Optional[str] = None) -> dict:
    """Write results CSV, summary JSON and optional series/frame files; return their paths."""
    out = _check_writable(config.output_dir)
    stem = f"{config.algorithm}_{config.benchmark}_{timestamp or timestamp_now()}"
    paths = {}

    def put(key, filename, text):
        path = out / filename
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths[key] = path

    put("results", f"{stem}.csv", _results_csv(summary, config))

    series_files = {}
    if config.emit_error_series:
        put("offline_error_series", f"{stem}_offline_error.csv",
            _series_csv("offline_error", summary.offline_error_series))
        put("current_error_series", f"{stem}_current_error.csv",
            _series_csv("current_error", summary.current_error_series))
        series_files = {k: paths[k].name for k in ("offline_error_series", "current_error_series")}

    frame_files = {}
    recorder = summary.recorder
    if config.emit_frames and recorder is not None:
        put("frames", f"{stem}_frames.jsonl",
            "".join(json.dumps(f.to_dict()) + "\n" for f in recorder.frames))
        bounds = (summary.metadata["problem"]["min_coordinate"],
                  summary.metadata["problem"]["max_coordinate"])
        grids = []
        for env in sorted(recorder.grids):
            key = f"grid_{env}"
            put(key, f"{stem}_grid_{env:04d}.csv", _grid_text(env, recorder.grids[env], bounds))
            grids.append(paths[key].name)
        frame_files = {"frames": paths["frames"].name, "grids": grids}

    doc = {
        "config": config.echo(),
        "benchmark_seed": summary.metadata["benchmark_seed"],
        "sequence_sha256": summary.metadata["sequence_sha256"],
        "problem": summary.metadata["problem"],
        "algorithm_parameters": summary.metadata["algorithm"],
        "per_run": [{"run": r.run_index + 1, "offline_error": r.offline_error, "e_bbc": r.e_bbc}
                    for r in summary.results],
        "statistics": summary.statistics,
        "series": series_files,
        "education": frame_files,
        "results_file": paths["results"].name,
    }
    put("summary", f"{stem}.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return paths
