"""Common algorithm contract, configuration and registry.

An EDOA is a class with three hooks driven by the run loop:

* ``initialize()`` builds and evaluates the initial subpopulations,
* ``iterate()`` runs one iteration of the iterative components,
* ``react_to_change()`` is called after an iteration during which the
  environment changed.

Algorithms only ever see a :class:`~dynlab.evaluation.BlackBox`: dimension,
bounds and a counted ``evaluate``.  Register new ones with
:func:`register_algorithm`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..components import (
    DeParams,
    PsoParams,
    ShiftEstimator,
    exclusion_radius,
    is_converged,
    shift_update,
)
from ..core import ConfigError, SubPopulation

ALGORITHMS: dict = {}


def register_algorithm(cls):
    if not cls.name:
        raise ValueError("algorithm classes need a name")
    ALGORITHMS[cls.name] = cls
    return cls


def get_algorithm(name: str):
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ConfigError(
            f"unknown algorithm {name!r}; valid: {', '.join(ALGORITHMS)}"
        ) from None


_PSO_KEYS = {"c1", "c2", "chi"}
_DE_KEYS = {"F", "CR", "strategy"}


@dataclass
class EdoaConfig:
    algorithm_id: str = ""
    subpop_count: int = 1
    neutral_count: int = 0
    quantum_count: int = 0
    brownian_count: int = 0
    plain_count: int = 0
    restart_fraction: float = 0.0
    n_excess: int = 3
    sigma: float = 0.2
    initial_shift: float = 1.0
    pso: PsoParams = field(default_factory=PsoParams)
    de: DeParams = field(default_factory=DeParams)

    def __post_init__(self):
        if self.subpop_count < 1:
            raise ConfigError("subpop_count must be positive")
        if min(self.neutral_count, self.quantum_count, self.brownian_count, self.plain_count) < 0:
            raise ConfigError("member counts must be non-negative")
        if self.subpop_size < 1:
            raise ConfigError("subpopulations need at least one member")
        if not 0.0 <= self.restart_fraction <= 1.0:
            raise ConfigError("restart_fraction must lie in [0, 1]")
        if self.n_excess < 1:
            raise ConfigError("n_excess must be positive")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")

    @property
    def subpop_size(self) -> int:
        return self.neutral_count + self.quantum_count + self.brownian_count + self.plain_count

    @property
    def roles(self) -> list:
        return (["neutral"] * self.neutral_count + ["quantum"] * self.quantum_count
                + ["plain"] * self.plain_count + ["brownian"] * self.brownian_count)

    def with_overrides(self, overrides: dict) -> "EdoaConfig":
        """Copy with flat ``key -> value`` overrides; PSO/DE keys route to the nested params."""
        top, pso, de = {}, {}, {}
        names = {f.name for f in dataclasses.fields(self)} - {"pso", "de", "algorithm_id"}
        for key, value in overrides.items():
            if key in _PSO_KEYS:
                pso[key] = value
            elif key in _DE_KEYS:
                de[key] = value
            elif key in names:
                top[key] = value
            else:
                raise ConfigError(f"unknown algorithm parameter {key!r}")
        if pso:
            base = {"c1": self.pso.c1, "c2": self.pso.c2}
            base.update(pso)
            top["pso"] = PsoParams(**base)
        if de:
            top["de"] = dataclasses.replace(self.de, **de)
        return dataclasses.replace(self, **top)

    @classmethod
    def parameter_names(cls) -> set:
        return ({f.name for f in dataclasses.fields(cls)} - {"pso", "de", "algorithm_id"}
                | _PSO_KEYS | _DE_KEYS)


class Edoa:
    name: str = ""
    defaults: dict = {}

    def __init__(self, config: EdoaConfig, problem, stream: np.random.Generator):
        self.config = config
        self.problem = problem
        self.stream = stream
        self.bounds = problem.bounds
        self.subpops: list = []
        self.shift = ShiftEstimator(config.initial_shift)
        self.iteration = 0
        self._next_id = 0

    @classmethod
    def default_config(cls, **overrides) -> EdoaConfig:
        kwargs = dict(cls.defaults)
        pso = kwargs.pop("pso", {})
        de = kwargs.pop("de", {})
        config = EdoaConfig(algorithm_id=cls.name, pso=PsoParams(**pso), de=DeParams(**de), **kwargs)
        return config.with_overrides(overrides) if overrides else config

    # -- population helpers ------------------------------------------------

    def evaluate(self, x):
        return np.atleast_1d(self.problem.evaluate(x))

    def _uniform(self, n: int) -> np.ndarray:
        lo, hi = self.bounds
        return self.stream.uniform(lo, hi, (n, self.problem.dimension))

    def new_subpop(self) -> SubPopulation:
        """Uniformly initialized, evaluated subpopulation with a fresh id."""
        x = self._uniform(self.config.subpop_size)
        values = self.evaluate(x)
        sp = SubPopulation(x, values, self.config.roles, id=self._next_id)
        self._next_id += 1
        return sp

    def reinit(self, sp: SubPopulation) -> None:
        """Re-draw every member uniformly and forget all memory of ``sp``."""
        x = self._uniform(len(sp))
        values = self.evaluate(x)
        sp.positions[:] = x
        sp.values[:] = values
        sp.velocities[:] = 0.0
        sp.pbest_positions[:] = x
        sp.pbest_values[:] = values
        sp.last_change_gbest = None
        sp.converged = False
        sp.is_free = True
        sp.update_gbest()

    def positions(self) -> np.ndarray:
        if not self.subpops:
            return np.zeros((0, self.problem.dimension))
        return np.vstack([sp.positions for sp in self.subpops])

    def convergence_radius(self) -> float:
        return exclusion_radius(self.bounds, len(self.subpops), self.problem.dimension)

    # -- contract ------------------------------------------------------------

    def initialize(self) -> None:
        for _ in range(self.config.subpop_count):
            self.subpops.append(self.new_subpop())

    def iterate(self) -> None:
        raise NotImplementedError

    def react_to_change(self) -> None:
        self.update_shift_estimate()
        self.before_reevaluation()
        for sp in self.subpops:
            self.reevaluate(sp)
        self.after_reevaluation()

    # -- change reaction pieces ---------------------------------------------

    def update_shift_estimate(self) -> float:
        """Feed the relocation of every converged tracker since the previous change."""
        r_conv = self.convergence_radius()
        moves = [float(np.linalg.norm(sp.gbest_position - sp.last_change_gbest))
                 for sp in self.subpops
                 if sp.last_change_gbest is not None and is_converged(sp, r_conv)]
        for sp in self.subpops:
            sp.last_change_gbest = sp.gbest_position.copy()
        return shift_update(self.shift, moves)

    def reevaluate(self, sp: SubPopulation) -> None:
        """Refresh stored fitness in the new environment.

        Each member's personal best restarts from its current position; the
        member that owned the old swarm best keeps that position instead when
        it is still better.
        """
        owner = int(np.argmax(sp.pbest_values))
        old_best = sp.gbest_position.copy()
        values = self.evaluate(np.vstack([old_best, sp.positions]))
        sp.values[:] = values[1:]
        sp.pbest_positions[:] = sp.positions
        sp.pbest_values[:] = values[1:]
        if values[0] > sp.pbest_values[owner]:
            sp.pbest_positions[owner] = old_best
            sp.pbest_values[owner] = values[0]
        sp.update_gbest()

    def before_reevaluation(self) -> None:
        pass

    def after_reevaluation(self) -> None:
        pass
