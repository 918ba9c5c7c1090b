"""Consensus hopping, its implicit proximal variant, and the minimizing
movement scheme, together with the quantitative Laplace-principle check.

The hopping scheme samples a Gaussian cloud around the current iterate
and jumps to its consensus point.  Writing out that consensus point for
the exact Gaussian shows it equals the consensus point of the modulated
objective  (1/2 tau) ||anchor - x||^2 + E(x)  under a Gaussian of twice
the variance, provided sigma_tilde^2 = tau / (2 alpha); the proximal
schemes below minimize that modulated objective directly.

The inner proximal solver is plain gradient descent with fixed step
1/(L + 1/tau): the modulated objective is (1/tau + Lambda)-strongly
convex and (L + 1/tau)-smooth, which gives a linear rate, so nothing
fancier is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .config import ConfigError, RunRecord, SchemeConfig
from .consensus import consensus_of
from .cbo import initial_iterate
from .objectives import Objective

Array = np.ndarray

PROX_TOL = 1e-10
PROX_MAX_ITER = 100_000


class ProxError(RuntimeError):
    """Proximal subproblem failed (ill-posed or non-convergent)."""


@dataclass(frozen=True)
class ProxProblem:
    """One proximal subproblem: minimize (1/2 tau)||anchor - x||^2 + E(x).

    Well-posedness requires 1 + tau * Lambda > 0 (strong convexity of the
    modulated objective), where Lambda is the declared semi-convexity
    constant of the objective.
    """

    anchor: Array
    tau: float
    obj: Objective

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=float)
        object.__setattr__(self, "anchor", anchor)
        if anchor.shape != (self.obj.dim,):
            raise ProxError("anchor dimension does not match the objective")
        if not self.tau > 0:
            raise ProxError("tau must be positive")
        lam = self.obj.constants.lambda_semiconvex
        if 1.0 + self.tau * lam <= 0:
            raise ProxError(
                f"modulated objective not strongly convex: 1 + tau*Lambda = "
                f"{1.0 + self.tau * lam:g} <= 0"
            )

    def value(self, x: Array) -> Array:
        d = x - self.anchor
        return np.sum(d * d, axis=-1) / (2.0 * self.tau) + self.obj(x)

    def residual_vector(self, x: Array) -> Array:
        """First-order residual (x - anchor)/tau + grad E(x)."""
        return (x - self.anchor) / self.tau + self.obj.grad(x)


def prox(problem: ProxProblem, tol: float = PROX_TOL, max_iter: int = PROX_MAX_ITER):
    """Solve the proximal subproblem; returns (point, residual norm).

    Warm-started at the anchor.  Uses fixed step 1/(L + 1/tau) when a
    smoothness constant is registered, backtracking line search otherwise.
    """
    obj = problem.obj
    if not obj.has_grad:
        raise ProxError(f"objective {obj.name!r} has no gradient for prox")
    tau = problem.tau
    lip = obj.constants.lipschitz_smooth
    x = problem.anchor.astype(float).copy()
    best_x, best_res = x, math.inf

    if lip is not None:
        step = 1.0 / (lip + 1.0 / tau)
        for _ in range(max_iter):
            g = problem.residual_vector(x)
            res = float(np.linalg.norm(g))
            if res < best_res:
                best_x, best_res = x, res
            if res <= tol:
                return x, res
            x = x - step * g
    else:
        # no registered smoothness constant: Barzilai-Borwein steps with
        # an Armijo-backtracked first step; the modulated objective is
        # strongly convex, where BB converges without a line search
        fx = float(problem.value(x))
        g = problem.residual_vector(x)
        t = tau
        for _ in range(60):
            cand = x - t * g
            if float(problem.value(cand)) <= fx - 0.5 * t * float(g @ g):
                break
            t *= 0.5
        x_prev, g_prev = x, g
        x = x - t * g
        for _ in range(max_iter):
            g = problem.residual_vector(x)
            res = float(np.linalg.norm(g))
            if res < best_res:
                best_x, best_res = x, res
            if res <= tol:
                return x, res
            dx = x - x_prev
            dg = g - g_prev
            denom = float(dg @ dg)
            t = float(dx @ dg) / denom if denom > 0 else t
            if not np.isfinite(t) or t <= 0:
                t = tau
            x_prev, g_prev = x, g
            x = x - t * g

    raise ProxError(
        f"prox did not reach tol={tol:g} in {max_iter} iterations "
        f"(best residual {best_res:g})"
    )


def prox_point(anchor: Array, tau: float, obj: Objective, tol: float = PROX_TOL) -> Array:
    return prox(ProxProblem(anchor=anchor, tau=tau, obj=obj), tol=tol)[0]


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------


def _require_tau(config: SchemeConfig) -> float:
    if config.tau is None:
        raise ConfigError("this scheme requires tau to be set")
    return config.tau


def mms_run(obj: Objective, config: SchemeConfig, tol: float = PROX_TOL) -> RunRecord:
    """Minimizing movement scheme: iterated prox on its own iterate.

    The implicit Euler discretization of the gradient flow; the objective
    value is non-increasing along the trajectory up to solver tolerance.
    """
    tau = _require_tau(config)
    x = initial_iterate(obj, config)
    iterates = np.empty((config.n_steps + 1, obj.dim))
    iterates[0] = x
    residuals = np.empty(config.n_steps)
    for k in range(1, config.n_steps + 1):
        x, res = prox(ProxProblem(anchor=x, tau=tau, obj=obj), tol=tol)
        iterates[k] = x
        residuals[k - 1] = res
    return RunRecord(
        scheme="mms",
        iterates=iterates,
        objective_values=obj(iterates),
        config=config,
        meta={"prox_residuals": residuals, "prox_tol": tol},
    )


def ch_step(prev: Array, obj: Objective, config: SchemeConfig, step: int) -> Array:
    """One hopping step: sample N(prev, sigma_tilde^2 Id), jump to the
    consensus point of the sampled ensemble."""
    if config.sigma_tilde is None:
        raise ConfigError("consensus hopping requires sigma_tilde")
    prev = np.asarray(prev, dtype=float)
    if config.sigma_tilde == 0.0:
        # all samples coincide with the iterate; the consensus is exact
        return prev.copy()
    xi = rng.normal_block(
        config.seed, rng.STREAM_CH_SAMPLES, step, (config.n_particles, obj.dim)
    )
    samples = prev + config.sigma_tilde * xi
    values = obj(samples)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("objective returned non-finite values")
    return consensus_of(samples, values, config.alpha)


def ch_run(obj: Objective, config: SchemeConfig) -> RunRecord:
    """Consensus hopping trajectory from the shared initialization draw."""
    x = initial_iterate(obj, config)
    iterates = np.empty((config.n_steps + 1, obj.dim))
    iterates[0] = x
    for k in range(1, config.n_steps + 1):
        x = ch_step(x, obj, config, k)
        iterates[k] = x
    return RunRecord(
        scheme="ch",
        iterates=iterates,
        objective_values=obj(iterates),
        config=config,
    )


def implicit_ch_run(
    obj: Objective,
    config: SchemeConfig,
    coupled_ch: RunRecord,
    tol: float = PROX_TOL,
) -> RunRecord:
    """Implicit variant: prox steps anchored at the *hopping* iterates.

    The anchor of step k is the hopping iterate k-1, not this scheme's
    own previous iterate, so the run requires the coupled hopping record
    produced with the identical configuration.
    """
    tau = _require_tau(config)
    if coupled_ch.scheme != "ch":
        raise ConfigError("coupled record must come from ch_run")
    if coupled_ch.config != config:
        raise ConfigError("implicit run requires the identical config as the ch run")
    iterates = np.empty_like(coupled_ch.iterates)
    iterates[0] = coupled_ch.iterates[0]
    residuals = np.empty(config.n_steps)
    for k in range(1, config.n_steps + 1):
        anchor = coupled_ch.iterates[k - 1]
        iterates[k], residuals[k - 1] = prox(
            ProxProblem(anchor=anchor, tau=tau, obj=obj), tol=tol
        )
    return RunRecord(
        scheme="implicit_ch",
        iterates=iterates,
        objective_values=obj(iterates),
        config=config,
        meta={"prox_residuals": residuals, "prox_tol": tol},
    )


# ---------------------------------------------------------------------------
# Quantitative Laplace principle
# ---------------------------------------------------------------------------


def alpha_floor(tau: float, dim: int) -> float:
    """The weight threshold (d log 2 + log(1+d) + 2 log Gamma(d/2+1)) / tau."""
    return (
        dim * math.log(2.0) + math.log(1.0 + dim) + 2.0 * math.lgamma(dim / 2.0 + 1.0)
    ) / tau


@dataclass(frozen=True)
class LaplaceBoundInputs:
    """Ball radius r, margin q, and the Monte Carlo resolution."""

    r: float
    q: float
    sample_count: int

    def __post_init__(self):
        if not (self.r > 0 and self.q > 0):
            raise ConfigError("r and q must be positive")
        if self.sample_count < 100:
            raise ConfigError("sample_count too small to estimate the bound")


@dataclass(frozen=True)
class LaplaceBoundResult:
    lhs: float
    rhs: float
    satisfied: bool
    ball_mass: float
    mc_slack: float


class BallMassError(RuntimeError):
    """No Monte Carlo sample hit the ball (r too small for the budget)."""


def laplace_bound_check(
    problem: ProxProblem,
    inputs: LaplaceBoundInputs,
    alpha: float,
    seed: int,
) -> LaplaceBoundResult:
    """Check the quantitative Laplace bound for one prox subproblem.

    The consensus point of the modulated objective under the Gaussian
    N(anchor, 2 sigma_tilde^2 Id) with sigma_tilde^2 = tau/(2 alpha) must
    lie within  (q + M_r)^(1/2)/eta + exp(-alpha q)/mass * mean-distance
    of the prox minimizer, where M_r is the modulated objective's range
    over the r-ball around the minimizer and eta^2 = 1/(2 tau) + Lambda/2.
    All measure-dependent quantities are Monte Carlo estimates from one
    sample set; ``mc_slack = 3/sqrt(sample_count)`` widens the right-hand
    side to cover the estimation error.
    """
    obj = problem.obj
    tau = problem.tau
    lam = obj.constants.lambda_semiconvex
    eta2 = 1.0 / (2.0 * tau) + lam / 2.0
    if eta2 <= 0:
        raise ProxError("inverse-continuity constant eta is not real; tau too large")
    eta = math.sqrt(eta2)

    xstar, _ = prox(problem, tol=1e-10)
    fstar = float(problem.value(xstar))

    # nu = N(anchor, 2 sigma_tilde^2 Id), sigma_tilde^2 = tau / (2 alpha)
    std = math.sqrt(tau / alpha)  # sqrt(2 sigma_tilde^2)
    gen = rng.generator(seed, rng.STREAM_SCRATCH, 0)
    samples = problem.anchor + std * gen.standard_normal((inputs.sample_count, obj.dim))
    values = problem.value(samples)

    lhs = float(np.linalg.norm(consensus_of(samples, values, alpha) - xstar))

    dist = np.linalg.norm(samples - xstar, axis=-1)
    mass = float(np.mean(dist <= inputs.r))
    if mass == 0.0:
        raise BallMassError(
            f"no sample of {inputs.sample_count} landed in B_r(x*); r={inputs.r:g} "
            "is too small for this sample budget"
        )
    mean_dist = float(np.mean(dist))

    # sup of the modulated objective over the ball: sampled maximization
    # plus (for d <= 2) the ball boundary grid; an under-estimate covered
    # by the Monte Carlo slack.
    ball_gen = rng.generator(seed, rng.STREAM_SCRATCH, 1)
    u = ball_gen.standard_normal((10_000, obj.dim))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    radii = inputs.r * ball_gen.random(10_000) ** (1.0 / obj.dim)
    ball_pts = xstar + radii[:, None] * u
    sup_val = float(np.max(problem.value(ball_pts)))
    if obj.dim <= 2:
        theta = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
        if obj.dim == 2:
            ring = xstar + inputs.r * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        else:
            ring = xstar + inputs.r * np.array([[1.0], [-1.0]])
        sup_val = max(sup_val, float(np.max(problem.value(ring))))
    m_r = max(sup_val - fstar, 0.0)

    rhs = math.sqrt(inputs.q + m_r) / eta + math.exp(-alpha * inputs.q) / mass * mean_dist
    slack = 3.0 / math.sqrt(inputs.sample_count)
    return LaplaceBoundResult(
        lhs=lhs,
        rhs=rhs,
        satisfied=bool(lhs <= rhs * (1.0 + slack)),
        ball_mass=mass,
        mc_slack=slack,
    )
