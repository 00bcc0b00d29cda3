"""MPB and GMPB environment generators and their baseline functions.

Both generators build the whole sequence of environments up front from the
benchmark stream, so an instance is a pure function of ``(spec, seed)``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import (
    EnvironmentState,
    ProblemSpec,
    reflect_into_range,
    unit_random_vectors,
)


@dataclass(frozen=True, eq=False)
class EnvironmentSequence:
    spec: ProblemSpec
    states: tuple

    def __len__(self):
        return len(self.states)

    def __getitem__(self, env_index: int) -> EnvironmentState:
        """1-based access, matching ``EnvironmentState.env_index``."""
        if not 1 <= env_index <= len(self.states):
            raise IndexError(env_index)
        return self.states[env_index - 1]


def gmpb_transform(y, tau, eta):
    """Irregularity transform applied coordinate-wise to rotated offsets.

    ``eta``'s last axis holds four frequencies: the first pair acts on
    positive ``y``, the second on negative ``y``.  ``tau`` and the leading
    axes of ``eta`` broadcast against ``y``.
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    tau = np.asarray(tau, dtype=float)
    ay = np.abs(y)
    nz = ay > 0
    logy = np.log(np.where(nz, ay, 1.0))
    pos = y > 0
    e_a = np.where(pos, eta[..., 0], eta[..., 2])
    e_b = np.where(pos, eta[..., 1], eta[..., 3])
    out = np.sign(y) * np.exp(logy + tau * (np.sin(e_a * logy) + np.sin(e_b * logy)))
    return np.where(nz, out, 0.0)[()]


def mpb_fitness(x, state: EnvironmentState):
    """Max over conical peaks ``h - w * ||x - c||``.  Accepts one point or a batch."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    dist = np.linalg.norm(X[:, None, :] - state.centers[None, :, :], axis=2)
    vals = np.max(state.heights[None, :] - state.widths[None, :] * dist, axis=1)
    return float(vals[0]) if single else vals


def gmpb_fitness(x, state: EnvironmentState):
    """Max over rotated, irregular, ill-conditioned peaks.  Accepts one point or a batch."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    offsets = X[:, None, :] - state.centers[None, :, :]              # (n, m, d)
    rotated = np.einsum("kij,nkj->nki", state.rotations, offsets)
    t = gmpb_transform(rotated, state.taus[None, :, None], state.etas[None, :, None, :])
    dist = np.sqrt(np.sum((state.widths[None, :, :] * t) ** 2, axis=2))
    vals = np.max(state.heights[None, :] - dist, axis=1)
    return float(vals[0]) if single else vals


BASELINES = {"MPB": mpb_fitness, "GMPB": gmpb_fitness}


def baseline(state: EnvironmentState):
    return BASELINES[state.benchmark_id]


def rotation_from_angle(angle: float, d: int, stream: np.random.Generator) -> np.ndarray:
    """Compose Givens rotations by ``angle`` over disjoint pairs of a random permutation."""
    R = np.eye(d)
    if d == 1:
        return R
    perm = stream.permutation(d)
    c, s = np.cos(angle), np.sin(angle)
    for p, q in zip(perm[0:d - 1:2], perm[1:d:2]):
        G = np.eye(d)
        G[p, p] = c
        G[q, q] = c
        G[p, q] = -s
        G[q, p] = s
        R = R @ G
    return R


def optimum_of(state: EnvironmentState) -> tuple[float, np.ndarray]:
    k = int(np.argmax(state.heights))
    return float(state.heights[k]), state.centers[k].copy()


def _finish(state_kwargs: dict) -> EnvironmentState:
    heights = state_kwargs["heights"]
    k = int(np.argmax(heights))
    state_kwargs["optimum_value"] = float(heights[k])
    state_kwargs["optimum_position"] = state_kwargs["centers"][k].copy()
    return EnvironmentState(**state_kwargs)


def initial_state(spec: ProblemSpec, stream: np.random.Generator) -> EnvironmentState:
    m, d = spec.peak_count, spec.dimension
    lo, hi = spec.bounds
    gmpb = spec.benchmark_id == "GMPB"
    kw = dict(
        env_index=1,
        benchmark_id=spec.benchmark_id,
        centers=stream.uniform(lo, hi, (m, d)),
        heights=stream.uniform(spec.min_height, spec.max_height, m),
        widths=stream.uniform(spec.min_width, spec.max_width, (m, d) if gmpb else m),
    )
    if gmpb:
        kw["taus"] = stream.uniform(spec.min_tau, spec.max_tau, m)
        kw["etas"] = stream.uniform(spec.min_eta, spec.max_eta, (m, 4))
        kw["angles"] = stream.uniform(spec.min_angle, spec.max_angle, m)
        kw["rotations"] = np.stack([rotation_from_angle(a, d, stream) for a in kw["angles"]])
    return _finish(kw)


def apply_dynamics(state: EnvironmentState, spec: ProblemSpec,
                   stream: np.random.Generator) -> EnvironmentState:
    m, d = spec.peak_count, spec.dimension
    lo, hi = spec.bounds

    def walk(values, severity, vmin, vmax):
        step = severity * stream.standard_normal(values.shape)
        return np.asarray(reflect_into_range(values + step, vmin, vmax), dtype=float)

    shift = spec.shift_severity * unit_random_vectors(stream, m, d)
    kw = dict(
        env_index=state.env_index + 1,
        benchmark_id=state.benchmark_id,
        centers=np.asarray(reflect_into_range(state.centers + shift, lo, hi), dtype=float),
        heights=walk(state.heights, spec.height_severity, spec.min_height, spec.max_height),
        widths=walk(state.widths, spec.width_severity, spec.min_width, spec.max_width),
    )
    if state.benchmark_id == "GMPB":
        kw["taus"] = walk(state.taus, spec.tau_severity, spec.min_tau, spec.max_tau)
        kw["etas"] = walk(state.etas, spec.eta_severity, spec.min_eta, spec.max_eta)
        kw["angles"] = walk(state.angles, spec.angle_severity, spec.min_angle, spec.max_angle)
        kw["rotations"] = np.stack([rotation_from_angle(a, d, stream) for a in kw["angles"]])
    return _finish(kw)


def generate_sequence(spec: ProblemSpec, stream: np.random.Generator) -> EnvironmentSequence:
    states = [initial_state(spec, stream)]
    for _ in range(spec.environment_count - 1):
        states.append(apply_dynamics(states[-1], spec, stream))
    return EnvironmentSequence(spec, tuple(states))


def sequence_to_dict(sequence: EnvironmentSequence) -> dict:
    envs = []
    for st in sequence.states:
        env = {"env": st.env_index, "optimum_value": st.optimum_value,
               "optimum_position": st.optimum_position.tolist()}
        for name in ("centers", "heights", "widths", "taus", "etas", "angles", "rotations"):
            value = getattr(st, name)
            if value is not None:
                env[name] = value.tolist()
        envs.append(env)
    return {"spec": asdict(sequence.spec), "environments": envs}


def sequence_digest(sequence: EnvironmentSequence) -> str:
    """SHA-256 of the canonical JSON serialization."""
    blob = json.dumps(sequence_to_dict(sequence), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def export_sequence(sequence: EnvironmentSequence, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(sequence_to_dict(sequence), sort_keys=True, indent=1))
    return path
