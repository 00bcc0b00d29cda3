"""The single fitness gateway.

Every counted evaluation goes through :class:`EvaluationLedger`, which owns
the evaluation counter, advances the environment every ``change_frequency``
evaluations, and logs the per-evaluation error used by the indicators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmarks import EnvironmentSequence, baseline
from .core import EnvironmentState


class BudgetExhausted(Exception):
    """Raised when an evaluation is requested after the budget is spent.

    Not a fault: the run loop catches it and stops cleanly.
    """


def peek_fitness(x, state: EnvironmentState):
    """Evaluate the baseline without counting or logging anything."""
    return baseline(state)(x, state)


class EvaluationLedger:
    def __init__(self, sequence: EnvironmentSequence):
        spec = sequence.spec
        self.sequence = sequence
        self.change_frequency = spec.change_frequency
        self.environment_count = spec.environment_count
        self.fe_max = spec.fe_max
        self.fe_counter = 0
        self.current_env = 1
        self.best_so_far = -math.inf
        self.per_fe_error = np.zeros(self.fe_max)
        self.fitness_log = np.zeros(self.fe_max)
        self.env_of_fe = np.zeros(self.fe_max, dtype=np.int64)
        self.last_error_per_env = np.full(self.environment_count, np.nan)
        self.change_flag = False
        self.budget_exhausted = False

    @property
    def state(self) -> EnvironmentState:
        return self.sequence[self.current_env]

    @property
    def current_error(self) -> float:
        """Error logged at the most recent evaluation (``nan`` before the first)."""
        if self.fe_counter == 0:
            return math.nan
        return float(self.per_fe_error[self.fe_counter - 1])

    def evaluate(self, x):
        """Evaluate one point ``(d,)`` or a batch ``(n, d)`` in order.

        A batch straddling a change is split: later rows are scored against
        the new environment.  If the budget runs out mid-batch, the rows that
        fit are counted and :class:`BudgetExhausted` is raised.
        """
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        n = X.shape[0]
        out = np.empty(n)
        i = 0
        while i < n:
            if self.fe_counter >= self.fe_max:
                self.budget_exhausted = True
                raise BudgetExhausted(f"budget of {self.fe_max} evaluations spent")
            env_end = self.current_env * self.change_frequency
            k = min(env_end - self.fe_counter, n - i)
            state = self.state
            vals = np.atleast_1d(baseline(state)(X[i:i + k], state))
            best = np.maximum.accumulate(np.concatenate(([self.best_so_far], vals)))[1:]
            lo, hi = self.fe_counter, self.fe_counter + k
            self.fitness_log[lo:hi] = vals
            self.per_fe_error[lo:hi] = state.optimum_value - best
            self.env_of_fe[lo:hi] = self.current_env
            self.best_so_far = float(best[-1])
            self.fe_counter = hi
            out[i:i + k] = vals
            i += k
            if self.fe_counter == env_end:
                self.last_error_per_env[self.current_env - 1] = self.per_fe_error[hi - 1]
                if self.fe_counter < self.fe_max:
                    self.current_env += 1
                    self.best_so_far = -math.inf
                    self.change_flag = True
                else:
                    self.budget_exhausted = True
        return float(out[0]) if single else out

    def consume_change_flag(self) -> bool:
        flag = self.change_flag
        self.change_flag = False
        return flag


class BlackBox:
    """The only view of the problem an algorithm receives.

    Exposes the public problem description (dimension, bounds) and a counted
    ``evaluate``; benchmark internals stay behind the ledger.
    """

    __slots__ = ("_ledger", "dimension", "lo", "hi")

    def __init__(self, ledger: EvaluationLedger):
        spec = ledger.sequence.spec
        self._ledger = ledger
        self.dimension = spec.dimension
        self.lo, self.hi = spec.bounds

    @property
    def bounds(self) -> tuple[float, float]:
        return self.lo, self.hi

    def evaluate(self, x):
        return self._ledger.evaluate(x)


@dataclass
class EducationFrame:
    env: int
    iter: int
    fe: int
    positions: list
    current_error: float
    visible_centers: Optional[list] = None
    optimum_position: Optional[list] = None

    def to_dict(self) -> dict:
        d = {"env": self.env, "iter": self.iter, "fe": self.fe,
             "positions": self.positions, "current_error": self.current_error}
        if self.visible_centers is not None:
            d["visible_centers"] = self.visible_centers
            d["optimum_position"] = self.optimum_position
        return d


def visible_peaks(state: EnvironmentState, tol: float = 1e-9) -> np.ndarray:
    """Indices of peaks not covered by another peak at their own center."""
    at_centers = np.atleast_1d(peek_fitness(state.centers, state))
    return np.flatnonzero(at_centers <= state.heights + tol)


def landscape_grid(state: EnvironmentState, bounds, resolution: int) -> np.ndarray:
    """``resolution x resolution`` fitness samples; row ``i`` is the i-th y value."""
    axis = np.linspace(bounds[0], bounds[1], resolution)
    xx, yy = np.meshgrid(axis, axis)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return np.asarray(peek_fitness(pts, state)).reshape(resolution, resolution)


@dataclass
class EducationRecorder:
    enabled: bool = True
    grid_resolution: int = 100
    frames: list = field(default_factory=list)
    grids: dict = field(default_factory=dict)

    def record_frame(self, ledger: EvaluationLedger, populations, iteration: int):
        """Append a frame; the first frame of an environment also samples its landscape."""
        if not self.enabled:
            return
        if ledger.sequence.spec.dimension != 2:
            raise ValueError("education frames require a 2-dimensional problem")
        positions = np.vstack([np.asarray(p, dtype=float) for p in populations]) \
            if len(populations) else np.zeros((0, 2))
        frame = EducationFrame(ledger.current_env, iteration, ledger.fe_counter,
                               positions.tolist(), ledger.current_error)
        if ledger.current_env not in self.grids:
            self._snapshot(ledger.sequence, ledger.current_env, frame)
        self.frames.append(frame)

    def _snapshot(self, sequence: EnvironmentSequence, env: int, frame=None):
        state = sequence[env]
        self.grids[env] = landscape_grid(state, sequence.spec.bounds, self.grid_resolution)
        if frame is not None:
            frame.visible_centers = state.centers[visible_peaks(state)].tolist()
            frame.optimum_position = state.optimum_position.tolist()

    def finalize(self, sequence: EnvironmentSequence):
        """Sample landscapes of environments no frame landed in (``cf`` below iteration cost)."""
        if not self.enabled:
            return
        for env in range(1, len(sequence) + 1):
            if env not in self.grids:
                self._snapshot(sequence, env)


def record_frame(recorder: EducationRecorder, ledger: EvaluationLedger, populations,
                 iteration: int = 0):
    recorder.record_frame(ledger, populations, iteration)
