"""The four built-in EDOAs.

Each class carries its customary default structure and parameters.
"""

from __future__ import annotations

import numpy as np

from ..components import (
    anti_convergence,
    brownian_step,
    de_step,
    exclusion,
    exclusion_radius,
    is_converged,
    pso_step,
    quantum_step,
    worst,
)
from ..core import ConfigError
from .base import Edoa, register_algorithm


@register_algorithm
class RPSO(Edoa):
    """Single constriction swarm; a fraction of particles is re-randomized on change."""

    name = "RPSO"
    defaults = {"subpop_count": 1, "neutral_count": 50, "restart_fraction": 0.5}

    def __init__(self, config, problem, stream):
        if config.subpop_count != 1:
            raise ConfigError("RPSO uses exactly one swarm")
        super().__init__(config, problem, stream)
        self.restarted = np.zeros(0, dtype=int)

    def iterate(self):
        pso_step(self.subpops[0], self.config.pso, self.stream, self.evaluate, self.bounds)
        self.iteration += 1

    def before_reevaluation(self):
        sp = self.subpops[0]
        n = int(round(self.config.restart_fraction * len(sp)))
        if n == 0:
            return
        rows = self.stream.choice(len(sp), n, replace=False)
        sp.positions[rows] = self._uniform(n)
        sp.velocities[rows] = 0.0
        self.restarted = rows


class _QuantumSwarms(Edoa):
    defaults = {"neutral_count": 5, "quantum_count": 5}

    def __init__(self, config, problem, stream):
        if config.neutral_count < 1:
            raise ConfigError(f"{self.name} swarms need neutral particles")
        super().__init__(config, problem, stream)
        self.r_cloud = self.shift.estimate

    def optimize(self):
        for sp in self.subpops:
            pso_step(sp, self.config.pso, self.stream, self.evaluate, self.bounds)
            quantum_step(sp, self.r_cloud, self.stream, self.evaluate, self.bounds)

    def after_reevaluation(self):
        self.r_cloud = self.shift.estimate


@register_algorithm
class MQSO(_QuantumSwarms):
    """Fixed number of quantum multi-swarms with exclusion and anti-convergence."""

    name = "mQSO"
    defaults = {**_QuantumSwarms.defaults, "subpop_count": 10}

    def iterate(self):
        self.optimize()
        r_excl = exclusion_radius(self.bounds, len(self.subpops), self.problem.dimension)
        self.excluded = exclusion(self.subpops, r_excl, self.reinit)
        self.anti_converged = anti_convergence(self.subpops, r_excl, self.reinit)
        self.iteration += 1


@register_algorithm
class AmQSO(_QuantumSwarms):
    """Quantum multi-swarm that spawns a swarm when none is free and trims excess free swarms."""

    name = "AmQSO"
    defaults = {**_QuantumSwarms.defaults, "subpop_count": 1, "n_excess": 3}

    def initialize(self):
        self.subpops.append(self.new_subpop())

    def iterate(self):
        self.optimize()
        r = exclusion_radius(self.bounds, len(self.subpops), self.problem.dimension)
        self.excluded = exclusion(self.subpops, r, self.reinit)
        free = []
        for sp in self.subpops:
            sp.converged = is_converged(sp, r)
            sp.is_free = not sp.converged
            if sp.is_free:
                free.append(sp)
        if not free:
            self.subpops.append(self.new_subpop())
        elif len(free) > self.config.n_excess:
            self.subpops.remove(worst(free))
        self.iteration += 1


@register_algorithm
class DynDE(Edoa):
    """Fixed DE populations with Brownian individuals and exclusion."""

    name = "DynDE"
    defaults = {"subpop_count": 10, "plain_count": 4, "brownian_count": 2, "sigma": 0.2,
                "de": {"F": 0.5, "CR": 0.9, "strategy": "best/2/bin"}}

    def __init__(self, config, problem, stream):
        if config.subpop_size < 6:
            raise ConfigError("DynDE populations need at least 6 members")
        if config.plain_count < 1:
            raise ConfigError("DynDE populations need DE members")
        super().__init__(config, problem, stream)

    def iterate(self):
        for sp in self.subpops:
            de_step(sp, self.config.de, self.stream, self.evaluate, self.bounds)
            brownian_step(sp, self.config.sigma, self.stream, self.evaluate, self.bounds)
        r_excl = exclusion_radius(self.bounds, len(self.subpops), self.problem.dimension)
        self.excluded = exclusion(self.subpops, r_excl, self.reinit)
        self.iteration += 1

    def before_reevaluation(self):
        sigma = self.shift.estimate
        lo, hi = self.bounds
        for sp in self.subpops:
            rows = np.flatnonzero(sp.role_mask("brownian"))
            x = sp.gbest_position + sigma * self.stream.standard_normal((rows.size, sp.dimension))
            sp.positions[rows] = np.clip(x, lo, hi)
