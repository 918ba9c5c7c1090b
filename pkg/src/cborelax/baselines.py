"""Gradient descent and annealed Langevin baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .config import ConfigError, RunRecord
from .objectives import Objective

Array = np.ndarray


class DivergenceError(RuntimeError):
    """Iterates left the representable range."""


@dataclass(frozen=True)
class AnnealSchedule:
    """Inverse temperature beta(t), either scale*log(t+1) or constant."""

    kind: str = "log"
    scale: float = 0.02

    def __post_init__(self):
        if self.kind not in ("log", "constant"):
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if not self.scale > 0:
            raise ConfigError("schedule scale must be positive")

    def beta(self, t: float) -> float:
        if self.kind == "constant":
            return self.scale
        return self.scale * math.log(t + 1.0)


def gd_run(obj: Objective, x0, step: float, n_steps: int) -> RunRecord:
    """Explicit Euler discretization of the gradient flow."""
    if not obj.has_grad:
        raise ConfigError(f"objective {obj.name!r} has no gradient")
    if not step > 0 or n_steps < 1:
        raise ConfigError("step must be positive and n_steps at least 1")
    x = np.asarray(x0, dtype=float).copy()
    iterates = np.empty((n_steps + 1, obj.dim))
    iterates[0] = x
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            x = x - step * obj.grad(x)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(f"gradient descent diverged at step {k}")
            iterates[k] = x
    return RunRecord(
        scheme="gd",
        iterates=iterates,
        objective_values=obj(iterates),
        config=None,
        meta={"step": step},
    )


def langevin_run(
    obj: Objective,
    x0,
    dt: float,
    n_steps: int,
    schedule: AnnealSchedule,
    seed: int,
    truncate_on_divergence: bool = False,
) -> RunRecord:
    """Euler-Maruyama discretization of the annealed Langevin dynamics.

    Step k uses beta evaluated at (k)*dt with the log schedule shifted by
    one step, i.e. at t = k*dt the noise coefficient is
    sqrt(2*dt/beta(k*dt)); the unshifted schedule would be singular at
    the very first step since log(0+1) = 0.

    The early, hot phase of the log schedule can throw the chain into the
    farfield, where the explicit Euler drift on a steeply growing
    objective is unstable.  By default that raises; with
    ``truncate_on_divergence`` the record covers the trajectory up to the
    last finite iterate instead (``meta["diverged_at"]`` carries the step).
    """
    if not obj.has_grad:
        raise ConfigError(f"objective {obj.name!r} has no gradient")
    if not dt > 0 or n_steps < 1:
        raise ConfigError("dt must be positive and n_steps at least 1")
    x = np.asarray(x0, dtype=float).copy()
    iterates = np.empty((n_steps + 1, obj.dim))
    iterates[0] = x
    # one block of noise for the whole run keeps the inner loop cheap
    # while staying on the counter-addressed stream
    xi = rng.normal_block(seed, rng.STREAM_LANGEVIN, 0, (n_steps, obj.dim))
    diverged_at = None
    last = n_steps
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            beta = schedule.beta(k * dt)
            coeff = math.sqrt(2.0 * dt / beta) if beta > 0 and not math.isinf(beta) else 0.0
            x = x - dt * obj.grad(x) + coeff * xi[k - 1]
            if not np.all(np.isfinite(x)):
                if not truncate_on_divergence:
                    raise DivergenceError(f"Langevin iterate diverged at step {k}")
                diverged_at = k
                last = k - 1
                break
            iterates[k] = x
    iterates = iterates[: last + 1]
    with np.errstate(over="ignore", invalid="ignore"):
        values = obj(iterates)
    return RunRecord(
        scheme="langevin",
        iterates=iterates,
        objective_values=values,
        config=None,
        meta={"dt": dt, "schedule": (schedule.kind, schedule.scale), "seed": seed,
              "diverged_at": diverged_at},
    )
