"""The interacting-particle consensus optimization dynamics.

Particles drift toward the current consensus point and diffuse with
anisotropic multiplicative noise (each coordinate scaled by its distance
to consensus).  The tracked iterate of a run is the consensus-point
trajectory; its initial entry is an independent draw from the
initialization law, matching the scheme's definition rather than the
ensemble consensus at step zero.

One consensus point is computed per step: the value recorded as iterate
k also serves as the drift target of step k+1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .config import ConfigError, RunRecord, SchemeConfig
from .consensus import consensus_of
from .objectives import Objective

Array = np.ndarray


@dataclass(frozen=True)
class Ensemble:
    """Particle positions at one time step."""

    positions: Array  # (N, d)
    step: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2:
            raise ConfigError("positions must be an (N, d) array")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("ensemble positions contain non-finite entries")
        if self.step < 0:
            raise ConfigError("step must be nonnegative")
        object.__setattr__(self, "positions", pos)


def noise_matrix(step: int, particle: int, config: SchemeConfig, salt: int = 0) -> Array:
    """Brownian increment B_k^i ~ N(0, dt * Id) for one particle.

    Addressed by (seed, step, particle): repeated queries return the same
    vector regardless of evaluation order or thread count.  ``salt``
    selects an auxiliary substream for statistical tests.
    """
    dim = config.init_mean.size
    block = rng.normal_block(
        config.seed, rng.STREAM_CBO_NOISE, step, (config.n_particles, dim), salt=salt
    )
    return np.sqrt(config.dt) * block[particle]


def _noise_block(config: SchemeConfig, step: int, dim: int) -> Array:
    return np.sqrt(config.dt) * rng.normal_block(
        config.seed, rng.STREAM_CBO_NOISE, step, (config.n_particles, dim)
    )


def initial_ensemble(obj: Objective, config: SchemeConfig) -> Ensemble:
    """N i.i.d. particles from N(init_mean, init_std^2 Id)."""
    dim = obj.dim
    block = rng.normal_block(
        config.seed, rng.STREAM_INIT_ENSEMBLE, 0, (config.n_particles, dim)
    )
    return Ensemble(config.init_mean + config.init_std * block, step=0)


def initial_iterate(obj: Objective, config: SchemeConfig) -> Array:
    """The tracked iterate's own draw from the initialization law.

    Lives on a dedicated substream shared by all schemes with the same
    seed, so coupled runs start from the same point.
    """
    block = rng.normal_block(config.seed, rng.STREAM_X0, 0, (obj.dim,))
    return config.init_mean + config.init_std * block


def cbo_step(ens: Ensemble, obj: Objective, config: SchemeConfig):
    """One particle update; returns the new ensemble and the consensus
    point of the *current* (pre-step) ensemble it drifted toward."""
    if ens.step >= config.n_steps:
        raise ConfigError("ensemble has already completed all configured steps")
    values = obj(ens.positions)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("objective returned non-finite values")
    c = consensus_of(ens.positions, values, config.alpha)
    k = ens.step + 1
    dev = ens.positions - c
    noise = _noise_block(config, k, obj.dim)
    new_pos = ens.positions - config.dt * config.lam * dev + config.sigma * dev * noise
    if not np.all(np.isfinite(new_pos)):
        raise FloatingPointError("particle positions diverged to non-finite values")
    return Ensemble(new_pos, step=k), c


def cbo_run(
    obj: Objective, config: SchemeConfig, record_ensembles: bool = False
) -> RunRecord:
    """Full consensus-point trajectory of the particle dynamics.

    iterates[0] is the dedicated initialization draw; iterates[k] for
    k >= 1 is the consensus of the post-step ensemble at step k.  Each
    consensus point is computed once and doubles as the drift target of
    the following step.
    """
    ens = initial_ensemble(obj, config)
    k_max = config.n_steps
    iterates = np.empty((k_max + 1, obj.dim))
    iterates[0] = initial_iterate(obj, config)
    snapshots = [ens.positions.copy()] if record_ensembles else None

    positions = ens.positions
    values = obj(positions)
    c = consensus_of(positions, values, config.alpha)
    max_fourth_moment = float(np.mean(np.sum(positions * positions, axis=1) ** 2))
    for k in range(1, k_max + 1):
        dev = positions - c
        noise = _noise_block(config, k, obj.dim)
        positions = positions - config.dt * config.lam * dev + config.sigma * dev * noise
        if not np.all(np.isfinite(positions)):
            raise FloatingPointError("particle positions diverged to non-finite values")
        values = obj(positions)
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("objective returned non-finite values")
        c = consensus_of(positions, values, config.alpha)
        iterates[k] = c
        m4 = float(np.mean(np.sum(positions * positions, axis=1) ** 2))
        max_fourth_moment = max(max_fourth_moment, m4)
        if record_ensembles:
            snapshots.append(positions.copy())

    return RunRecord(
        scheme="cbo",
        iterates=iterates,
        objective_values=obj(iterates),
        config=config,
        ensemble_snapshots=np.stack(snapshots) if record_ensembles else None,
        meta={"max_fourth_moment": max_fourth_moment},
    )
