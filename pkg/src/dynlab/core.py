"""Domain types, bounds handling and random streams shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

BENCHMARK_IDS = ("MPB", "GMPB")
ROLES = ("neutral", "quantum", "brownian", "plain")


class ConfigError(ValueError):
    """Invalid experiment, problem or algorithm configuration."""


@dataclass(frozen=True)
class ProblemSpec:
    """Static configuration of a dynamic problem instance.

    The five leading fields are the commonly varied parameters; the rest are
    the finer-grained benchmark controls (severities and attribute ranges).
    """

    dimension: int = 5
    peak_count: int = 10
    change_frequency: int = 5000
    shift_severity: float = 1.0
    environment_count: int = 100
    benchmark_id: str = "GMPB"
    min_coordinate: float = -50.0
    max_coordinate: float = 50.0
    height_severity: float = 7.0
    width_severity: float = 1.0
    tau_severity: float = 0.05
    eta_severity: float = 2.0
    angle_severity: float = math.pi / 9
    min_height: float = 30.0
    max_height: float = 70.0
    min_width: float = 1.0
    max_width: float = 12.0
    min_angle: float = -math.pi
    max_angle: float = math.pi
    min_tau: float = 0.0
    max_tau: float = 0.4
    min_eta: float = 10.0
    max_eta: float = 25.0

    def __post_init__(self):
        if self.benchmark_id not in BENCHMARK_IDS:
            raise ConfigError(
                f"unknown benchmark {self.benchmark_id!r}; valid: {', '.join(BENCHMARK_IDS)}"
            )
        for name in ("dimension", "peak_count", "change_frequency", "environment_count"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.min_coordinate < self.max_coordinate:
            raise ConfigError("min_coordinate must be below max_coordinate")
        for attr in ("height", "width", "angle", "tau", "eta"):
            if getattr(self, f"min_{attr}") > getattr(self, f"max_{attr}"):
                raise ConfigError(f"min_{attr} exceeds max_{attr}")
        for name in ("shift_severity", "height_severity", "width_severity",
                     "tau_severity", "eta_severity", "angle_severity"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")

    @property
    def bounds(self) -> tuple[float, float]:
        return self.min_coordinate, self.max_coordinate

    @property
    def fe_max(self) -> int:
        return self.change_frequency * self.environment_count

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True, eq=False)
class EnvironmentState:
    """Peak parameters of one stationary environment.

    ``widths`` is ``(m,)`` for MPB and ``(m, d)`` for GMPB.  The GMPB-only
    arrays (taus, etas, angles, rotations) are ``None`` for MPB.
    """

    env_index: int
    benchmark_id: str
    centers: np.ndarray
    heights: np.ndarray
    widths: np.ndarray
    taus: Optional[np.ndarray] = None
    etas: Optional[np.ndarray] = None
    angles: Optional[np.ndarray] = None
    rotations: Optional[np.ndarray] = None
    optimum_value: float = field(default=float("nan"))
    optimum_position: Optional[np.ndarray] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                value.setflags(write=False)

    @property
    def peak_count(self) -> int:
        return self.heights.shape[0]

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]


@dataclass
class Individual:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_value: float
    current_value: float
    role: str = "neutral"


class SubPopulation:
    """A group of individuals stored as parallel arrays.

    Row ``i`` of every array describes member ``i``.  ``members`` returns
    detached :class:`Individual` snapshots; mutate the arrays directly.
    """

    def __init__(self, positions, values, roles, id: int = 0, velocities=None):
        self.positions = np.array(positions, dtype=float, ndmin=2)
        n, d = self.positions.shape
        self.values = np.array(values, dtype=float).reshape(n)
        self.velocities = (np.zeros((n, d)) if velocities is None
                           else np.array(velocities, dtype=float).reshape(n, d))
        self.pbest_positions = self.positions.copy()
        self.pbest_values = self.values.copy()
        if isinstance(roles, str):
            roles = [roles] * n
        self.roles = np.array(roles, dtype="<U8")
        if self.roles.shape != (n,):
            raise ValueError("one role per member required")
        bad = set(self.roles) - set(ROLES)
        if bad:
            raise ValueError(f"unknown roles {sorted(bad)}")
        self.id = id
        self.converged = False
        self.is_free = True
        self.last_change_gbest: Optional[np.ndarray] = None
        self.gbest_position = np.zeros(d)
        self.gbest_value = -np.inf
        self.update_gbest()

    @classmethod
    def from_members(cls, members: list[Individual], id: int = 0) -> "SubPopulation":
        sp = cls([m.position for m in members], [m.current_value for m in members],
                 [m.role for m in members], id=id,
                 velocities=[m.velocity for m in members])
        sp.pbest_positions = np.array([m.pbest_position for m in members], dtype=float)
        sp.pbest_values = np.array([m.pbest_value for m in members], dtype=float)
        sp.update_gbest()
        return sp

    def __len__(self):
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def members(self) -> list[Individual]:
        return [
            Individual(self.positions[i].copy(), self.velocities[i].copy(),
                       self.pbest_positions[i].copy(), float(self.pbest_values[i]),
                       float(self.values[i]), str(self.roles[i]))
            for i in range(len(self))
        ]

    def role_mask(self, role: str) -> np.ndarray:
        return self.roles == role

    def update_gbest(self):
        best = int(np.argmax(self.pbest_values))
        self.gbest_value = float(self.pbest_values[best])
        self.gbest_position = self.pbest_positions[best].copy()

    def absorb_values(self, idx: np.ndarray, positions: np.ndarray, values: np.ndarray):
        """Store freshly evaluated positions for members ``idx`` and refresh the bests."""
        self.positions[idx] = positions
        self.values[idx] = values
        better = values > self.pbest_values[idx]
        rows = np.asarray(idx)[better]
        self.pbest_positions[rows] = positions[better]
        self.pbest_values[rows] = values[better]
        self.update_gbest()


class RandomStreams:
    """Separate deterministic generators for the benchmark and the algorithm.

    The benchmark stream depends only on ``experiment_seed`` so every
    algorithm faces the same instance.  The algorithm stream is seeded from
    ``experiment_seed ^ run_index``; both seeds are domain-tagged so run 0
    never replays the benchmark draws.
    """

    _BENCHMARK_TAG = 0
    _ALGORITHM_TAG = 1

    def __init__(self, experiment_seed: int, run_index: int = 0):
        self.experiment_seed = int(experiment_seed)
        self.run_index = int(run_index)
        self.benchmark_stream = self.benchmark(self.experiment_seed)
        self.algorithm_stream = self.algorithm(self.experiment_seed, self.run_index)

    @classmethod
    def benchmark(cls, experiment_seed: int) -> np.random.Generator:
        return np.random.default_rng([int(experiment_seed), cls._BENCHMARK_TAG])

    @classmethod
    def algorithm(cls, experiment_seed: int, run_index: int) -> np.random.Generator:
        return np.random.default_rng([int(experiment_seed) ^ int(run_index), cls._ALGORITHM_TAG])


def absorb_bounds(position, velocity, bounds):
    """Clamp out-of-range coordinates and zero their velocity components.

    Works row-wise on 2-D arrays too.  Returns new arrays.
    """
    lo, hi = bounds
    position = np.asarray(position, dtype=float)
    velocity = np.array(velocity, dtype=float)
    clipped = np.clip(position, lo, hi)
    velocity[clipped != position] = 0.0
    return clipped, velocity


def reflect_into_range(value, lo: float, hi: float):
    """Mirror ``value`` off the violated bound until it lies in ``[lo, hi]``.

    Repeated mirroring is periodic with period ``2 * (hi - lo)``, so it is
    computed in closed form.  In-range values are returned untouched.
    """
    v = np.array(value, dtype=float)
    if hi <= lo:
        return np.full_like(v, lo)[()]
    width = hi - lo
    u = np.mod(v - lo, 2 * width)
    folded = np.clip(lo + np.where(u > width, 2 * width - u, u), lo, hi)
    return np.where((v < lo) | (v > hi), folded, v)[()]


def unit_random_vectors(stream: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` directions drawn uniformly on the unit sphere in ``d`` dimensions."""
    g = stream.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    for i in np.flatnonzero(norms == 0):
        while norms[i] == 0:
            g[i] = stream.standard_normal(d)
            norms[i] = np.linalg.norm(g[i])
    return g / norms[:, None]


def unit_random_vector(stream: np.random.Generator, d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    return unit_random_vectors(stream, 1, d)[0]
