"""Offline error, average error before changes, and cross-run statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

INDICATORS = ("offline_error", "e_bbc")


def offline_error(per_fe_error) -> float:
    """Mean error of the best-so-far solution over every evaluation."""
    errors = np.asarray(per_fe_error, dtype=float)
    if errors.size == 0:
        raise ValueError("offline error of an empty error log")
    # same summation as offline_error_series so its last entry matches exactly
    return float(np.cumsum(errors)[-1] / errors.size)


def e_bbc(last_error_per_env) -> float:
    """Mean of the last error attained in each environment."""
    errors = np.asarray(last_error_per_env, dtype=float)
    if errors.size == 0:
        raise ValueError("E_BBC needs at least one environment")
    return float(np.mean(errors))


def offline_error_series(per_fe_error) -> np.ndarray:
    """Running mean of the per-evaluation error; its last entry equals E_O."""
    errors = np.asarray(per_fe_error, dtype=float)
    return np.cumsum(errors) / np.arange(1, errors.size + 1)


def standard_error(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


@dataclass
class RunResult:
    run_index: int
    offline_error: float
    e_bbc: float
    per_fe_error: np.ndarray
    last_error_per_env: np.ndarray
    # raw logs kept for replay checks; not serialized
    fitness_log: Optional[np.ndarray] = field(default=None, repr=False)
    env_of_fe: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_ledger(cls, ledger, run_index: int) -> "RunResult":
        n = ledger.fe_counter
        per_fe = ledger.per_fe_error[:n].copy()
        last = ledger.last_error_per_env.copy()
        return cls(run_index, offline_error(per_fe), e_bbc(last), per_fe, last,
                   ledger.fitness_log[:n].copy(), ledger.env_of_fe[:n].copy())


@dataclass
class ExperimentSummary:
    results: list
    statistics: dict
    offline_error_series: np.ndarray
    current_error_series: np.ndarray
    metadata: dict = field(default_factory=dict)
    # EducationRecorder of an education-mode run
    recorder: object = field(default=None, repr=False)

    @property
    def run_count(self) -> int:
        return len(self.results)


def summarize(results: list, metadata: Optional[dict] = None) -> ExperimentSummary:
    """Aggregate runs.  Runs are ordered by ``run_index`` first, so input order never matters."""
    if not results:
        raise ValueError("cannot summarize zero runs")
    ordered = sorted(results, key=lambda r: r.run_index)
    stats = {}
    for name in INDICATORS:
        values = np.array([getattr(r, name) for r in ordered])
        stats[name] = {
            "mean": float(np.mean(values)),
            "median": float(np.median(values)),
            "standard_error": standard_error(values),
        }
    current = np.mean([r.per_fe_error for r in ordered], axis=0)
    offline = np.mean([offline_error_series(r.per_fe_error) for r in ordered], axis=0)
    return ExperimentSummary(ordered, stats, offline, current, dict(metadata or {}))
