"""Building blocks shared by the EDOAs.

Step functions take an ``evaluate`` callable mapping an ``(n, d)`` batch to
``n`` fitness values (normally ``BlackBox.evaluate``) and the ``(lo, hi)``
bounds.  They mutate the subpopulation in place; ``BudgetExhausted`` from
``evaluate`` propagates untouched.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .core import ConfigError, SubPopulation, absorb_bounds, unit_random_vectors

DE_STRATEGIES = ("rand/2/bin", "best/2/bin")
# rand/2: five donors + target; best/2: four donors + best + target
MIN_DE_SIZE = 6


def constriction_coefficient(c1: float, c2: float) -> float:
    phi = c1 + c2
    if phi <= 4:
        raise ConfigError("constriction requires c1 + c2 > 4")
    return 2.0 / abs(2.0 - phi - math.sqrt(phi * phi - 4.0 * phi))


@dataclass
class PsoParams:
    c1: float = 2.05
    c2: float = 2.05
    chi: Optional[float] = None

    def __post_init__(self):
        if self.chi is None:
            self.chi = constriction_coefficient(self.c1, self.c2)


@dataclass
class DeParams:
    F: float = 0.5
    CR: float = 0.9
    strategy: str = "rand/2/bin"

    def __post_init__(self):
        if not 0.0 <= self.CR <= 1.0:
            raise ConfigError(f"CR must lie in [0, 1], got {self.CR}")
        if self.F <= 0:
            raise ConfigError(f"F must be positive, got {self.F}")
        if self.strategy not in DE_STRATEGIES:
            raise ConfigError(f"unknown DE strategy {self.strategy!r}; valid: {DE_STRATEGIES}")


@dataclass
class ShiftEstimator:
    """Running mean of observed optimum relocations."""

    initial: float = 1.0
    observations: list = field(default_factory=list)

    @property
    def estimate(self) -> float:
        if not self.observations:
            return self.initial
        return float(np.mean(self.observations))


def shift_update(estimator: ShiftEstimator, relocations: Iterable[float]) -> float:
    for r in relocations:
        if r < 0:
            raise ValueError("relocation distances are non-negative")
        estimator.observations.append(float(r))
    return estimator.estimate


def pso_step(subpop: SubPopulation, params: PsoParams, stream: np.random.Generator,
             evaluate: Callable, bounds) -> None:
    idx = np.flatnonzero(subpop.role_mask("neutral"))
    if idx.size == 0:
        raise ValueError("pso_step needs at least one neutral member")
    x = subpop.positions[idx]
    v = subpop.velocities[idx]
    r1 = stream.random(x.shape)
    r2 = stream.random(x.shape)
    v = params.chi * (v + params.c1 * r1 * (subpop.pbest_positions[idx] - x)
                      + params.c2 * r2 * (subpop.gbest_position - x))
    x, v = absorb_bounds(x + v, v, bounds)
    subpop.velocities[idx] = v
    subpop.positions[idx] = x
    subpop.absorb_values(idx, x, np.atleast_1d(evaluate(x)))


def sample_ball(stream: np.random.Generator, center, radius: float, n: int) -> np.ndarray:
    """``n`` points uniform in the ball of ``radius`` around ``center``."""
    center = np.asarray(center, dtype=float)
    d = center.size
    dirs = unit_random_vectors(stream, n, d)
    radii = radius * stream.random(n) ** (1.0 / d)
    return center + dirs * radii[:, None]


def quantum_step(subpop: SubPopulation, r_cloud: float, stream: np.random.Generator,
                 evaluate: Callable, bounds) -> None:
    idx = np.flatnonzero(subpop.role_mask("quantum"))
    if idx.size == 0:
        return
    x = sample_ball(stream, subpop.gbest_position, r_cloud, idx.size)
    x, _ = absorb_bounds(x, np.zeros_like(x), bounds)
    subpop.absorb_values(idx, x, np.atleast_1d(evaluate(x)))


def brownian_step(subpop: SubPopulation, sigma: float, stream: np.random.Generator,
                  evaluate: Callable, bounds) -> None:
    idx = np.flatnonzero(subpop.role_mask("brownian"))
    if idx.size == 0:
        return
    x = subpop.gbest_position + sigma * stream.standard_normal((idx.size, subpop.dimension))
    x, _ = absorb_bounds(x, np.zeros_like(x), bounds)
    subpop.absorb_values(idx, x, np.atleast_1d(evaluate(x)))


def de_mutant(donors: np.ndarray, F: float, strategy: str, best=None) -> np.ndarray:
    """Mutant vector from donor rows (five for rand/2, four plus ``best`` for best/2)."""
    donors = np.asarray(donors, dtype=float)
    if strategy == "rand/2/bin":
        return donors[0] + F * (donors[1] - donors[2]) + F * (donors[3] - donors[4])
    if strategy == "best/2/bin":
        return np.asarray(best) + F * (donors[0] - donors[1]) + F * (donors[2] - donors[3])
    raise ConfigError(f"unknown DE strategy {strategy!r}")


def binomial_crossover(target, mutant, CR: float, stream: np.random.Generator) -> np.ndarray:
    target = np.asarray(target, dtype=float)
    mask = stream.random(target.shape) < CR
    mask[stream.integers(target.size)] = True
    return np.where(mask, mutant, target)


def de_step(subpop: SubPopulation, params: DeParams, stream: np.random.Generator,
            evaluate: Callable, bounds) -> None:
    """One synchronous DE generation over the ``plain`` members.

    Donors are drawn without replacement from every member except the target.
    """
    n = len(subpop)
    if n < MIN_DE_SIZE:
        raise ConfigError(f"{params.strategy} needs a subpopulation of at least 6, got {n}")
    idx = np.flatnonzero(subpop.role_mask("plain"))
    if idx.size == 0:
        return
    n_donors = 5 if params.strategy == "rand/2/bin" else 4
    donors_pool = subpop.pbest_positions
    trials = np.empty((idx.size, subpop.dimension))
    for row, i in enumerate(idx):
        candidates = np.delete(np.arange(n), i)
        picks = stream.choice(candidates, n_donors, replace=False)
        mutant = de_mutant(donors_pool[picks], params.F, params.strategy, subpop.gbest_position)
        trials[row] = binomial_crossover(subpop.positions[i], mutant, params.CR, stream)
    trials, _ = absorb_bounds(trials, np.zeros_like(trials), bounds)
    values = np.atleast_1d(evaluate(trials))
    keep = values >= subpop.values[idx]
    rows = idx[keep]
    subpop.positions[rows] = trials[keep]
    subpop.values[rows] = values[keep]
    subpop.pbest_positions[rows] = trials[keep]
    subpop.pbest_values[rows] = values[keep]
    subpop.update_gbest()


def exclusion_radius(bounds, subpop_count: int, d: int) -> float:
    lo, hi = bounds
    if subpop_count < 1:
        raise ValueError("subpop_count must be >= 1")
    return 0.5 * (hi - lo) / subpop_count ** (1.0 / d)


def exclusion_losers(subpops: list, r_excl: float) -> list:
    """Ids marked for reinitialization: the worse of every pair closer than ``r_excl``."""
    marked = set()
    for a, b in itertools.combinations(subpops, 2):
        if np.linalg.norm(a.gbest_position - b.gbest_position) < r_excl:
            if (a.gbest_value, -a.id) < (b.gbest_value, -b.id):
                marked.add(a.id)
            else:
                marked.add(b.id)
    return sorted(marked)


def exclusion(subpops: list, r_excl: float, reinit: Callable) -> list:
    losers = exclusion_losers(subpops, r_excl)
    by_id = {sp.id: sp for sp in subpops}
    for sid in losers:
        reinit(by_id[sid])
    return losers


def swarm_diameter(subpop: SubPopulation) -> float:
    mask = subpop.role_mask("neutral")
    pts = subpop.positions[mask] if mask.any() else subpop.positions
    if len(pts) < 2:
        return 0.0
    diffs = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(axis=2)).max())


def is_converged(subpop: SubPopulation, r_conv: float) -> bool:
    """Diameter of the neutral members (all members if none are neutral) below ``r_conv``."""
    return swarm_diameter(subpop) < r_conv


def worst(subpops: list) -> SubPopulation:
    return min(subpops, key=lambda sp: (sp.gbest_value, -sp.id))


def anti_convergence(subpops: list, r_conv: float, reinit: Callable) -> Optional[int]:
    """Reinitialize the worst subpopulation when all have converged; return its id."""
    for sp in subpops:
        sp.converged = is_converged(sp, r_conv)
    if subpops and all(sp.converged for sp in subpops):
        loser = worst(subpops)
        reinit(loser)
        return loser.id
    return None
