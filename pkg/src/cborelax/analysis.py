"""Residual decomposition and empirical parameter-scaling experiments.

The central identity: with the consensus trajectory x_k, the hopping
trajectory y_k, and the implicit-prox trajectory z_k run from a shared
initialization, define

    g1_k = y_{k-1} - x_{k-1}
    g2_k = tau * (grad E(z_k) - grad E(x_{k-1}))
    g3_k = x_k - z_k

Then x_k = x_{k-1} - tau * grad E(x_{k-1}) + g1_k - g2_k + g3_k holds up
to tau times the prox solver residual, because z_k satisfies the prox
optimality condition z_k = y_{k-1} - tau * grad E(z_k) at the anchor
y_{k-1}.  The decomposition exhibits the consensus trajectory as a
stochastically perturbed gradient step, and the sweep harness measures
how the perturbation scales in each parameter.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .cbo import cbo_run
from .config import ConfigError, RunRecord, SchemeConfig
from .hopping import alpha_floor, ch_run, implicit_ch_run
from .objectives import Objective

Array = np.ndarray

RECONSTRUCTION_TOL = 1e-10


class RegimeError(RuntimeError):
    """A sweep's non-swept error floor drowns the swept term."""


@dataclass(frozen=True)
class ResidualRecord:
    """Per-step residual vectors g1, g2, g3, their sum g, and norms."""

    g1: Array  # (K, d)
    g2: Array
    g3: Array
    g: Array
    reconstruction_residual: Array  # (K,)

    @property
    def norms(self) -> dict:
        return {
            "g1": np.linalg.norm(self.g1, axis=-1),
            "g2": np.linalg.norm(self.g2, axis=-1),
            "g3": np.linalg.norm(self.g3, axis=-1),
            "g": np.linalg.norm(self.g, axis=-1),
        }

    def to_csv(self) -> str:
        """Column layout: k, g1, g2, g3, g, reconstruction_residual (norms)."""
        n = self.norms
        buf = io.StringIO()
        buf.write("k,g1,g2,g3,g,reconstruction_residual\n")
        for k in range(self.g.shape[0]):
            buf.write(
                f"{k + 1},{n['g1'][k]:.17g},{n['g2'][k]:.17g},{n['g3'][k]:.17g},"
                f"{n['g'][k]:.17g},{self.reconstruction_residual[k]:.17g}\n"
            )
        return buf.getvalue()


def coupled_triple_run(obj: Objective, config: SchemeConfig):
    """Run the consensus, hopping, and implicit-prox schemes jointly.

    All three share the seed root and the initialization draw; each
    consumes its own tagged noise stream, so reruns are individually
    bit-reproducible while the discrepancies between them reflect the
    parameter gaps rather than fresh randomness.
    """
    if config.tau is None or config.sigma_tilde is None:
        raise ConfigError("coupled runs require tau and sigma_tilde")
    target = config.tau / (2.0 * config.alpha)
    if abs(config.sigma_tilde**2 - target) > 1e-12 * max(target, 1e-300):
        raise ConfigError(
            "coupled runs require sigma_tilde^2 = tau/(2 alpha); use "
            "SchemeConfig.with_coupled_sigma_tilde()"
        )
    for msg in config.objective_errors(obj):
        raise ConfigError(msg)
    cbo = cbo_run(obj, config)
    ch = ch_run(obj, config)
    ich = implicit_ch_run(obj, config, ch)
    return cbo, ch, ich


def decompose_residual(triple, obj: Objective, tau: float) -> ResidualRecord:
    """Split the consensus trajectory's deviation from a gradient step
    into its three components and assert the reconstruction identity."""
    cbo, ch, ich = triple
    if not obj.has_grad:
        raise ConfigError("residual decomposition needs the objective gradient")
    x = cbo.iterates
    grad_prev = obj.grad(x[:-1])
    g1 = ch.iterates[:-1] - x[:-1]
    g2 = tau * (obj.grad(ich.iterates[1:]) - grad_prev)
    g3 = x[1:] - ich.iterates[1:]
    g = g1 - g2 + g3
    recon = np.linalg.norm(x[1:] - (x[:-1] - tau * grad_prev + g), axis=-1)
    worst = float(np.max(recon))
    if worst > RECONSTRUCTION_TOL:
        raise AssertionError(
            f"reconstruction identity violated: max residual {worst:g} > "
            f"{RECONSTRUCTION_TOL:g} (programming error, not data)"
        )
    return ResidualRecord(g1=g1, g2=g2, g3=g3, g=g, reconstruction_residual=recon)


# ---------------------------------------------------------------------------
# Scaling sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("n_particles", "lambda_gap", "sigma_sqrt_dt", "tau")


@dataclass(frozen=True)
class ScalingReport:
    swept_parameter: str
    values: list
    errors: list           # median over seeds of the per-run discrepancy
    fitted_slope: float
    slope_ci: tuple        # bootstrap 90% interval
    per_seed_errors: Array  # (len(values), seeds)

    def to_dict(self) -> dict:
        return {
            "swept_parameter": self.swept_parameter,
            "values": list(map(float, self.values)),
            "errors": list(map(float, self.errors)),
            "fitted_slope": float(self.fitted_slope),
            "slope_ci": [float(self.slope_ci[0]), float(self.slope_ci[1])],
        }


def fit_loglog_slope(values, errors) -> float:
    return float(np.polyfit(np.log(values), np.log(errors), 1)[0])


def _bootstrap_ci(values, per_seed, n_boot: int = 1000, seed: int = 0):
    gen = np.random.default_rng(seed)
    n_seeds = per_seed.shape[1]
    slopes = np.empty(n_boot)
    logv = np.log(values)
    for b in range(n_boot):
        idx = gen.integers(0, n_seeds, size=n_seeds)
        med = np.median(per_seed[:, idx], axis=1)
        slopes[b] = np.polyfit(logv, np.log(med), 1)[0]
    return float(np.quantile(slopes, 0.05)), float(np.quantile(slopes, 0.95))


def _max_discrepancy(a: RunRecord, b: RunRecord) -> float:
    return float(np.max(np.linalg.norm(a.iterates - b.iterates, axis=-1)))


def _pair_error_cbo_ch(obj, config) -> float:
    """Consensus trajectory vs hopping trajectory, shared seed root."""
    cbo = cbo_run(obj, config)
    ch = ch_run(obj, config)
    return _max_discrepancy(cbo, ch)


def _pair_error_cbo_reference(obj, config, reference: SchemeConfig) -> float:
    """Consensus trajectory vs the hopping-limit consensus trajectory
    under common random numbers (the stability coupling from which the
    drift-gap and noise terms of the discrepancy bound originate)."""
    return _max_discrepancy(cbo_run(obj, config), cbo_run(obj, reference))


def _pair_error_ch_ich(obj, config) -> float:
    ch = ch_run(obj, config)
    ich = implicit_ch_run(obj, config, ch)
    return _max_discrepancy(ch, ich)


def _tau_config(base: SchemeConfig, tau: float, dim: int) -> SchemeConfig:
    alpha = alpha_floor(tau, dim)
    cfg = base.replace(tau=tau, alpha=alpha, coupled=False, sigma_tilde=None)
    return cfg.with_coupled_sigma_tilde()


def _sweep_config(axis: str, base: SchemeConfig, value, dim: int) -> SchemeConfig:
    if axis == "n_particles":
        return base.replace(n_particles=int(value), lam=1.0 / base.dt)
    if axis == "lambda_gap":
        lam = 1.0 / base.dt - float(value)
        if lam <= 0:
            raise ConfigError(f"lambda gap {value:g} pushes lambda below zero")
        return base.replace(lam=lam)
    if axis == "sigma_sqrt_dt":
        # swept values are sigma*sqrt(dt); configure sigma accordingly
        return base.replace(sigma=float(value) / math.sqrt(base.dt), lam=1.0 / base.dt)
    if axis == "tau":
        return _tau_config(base, float(value), dim)
    raise ConfigError(f"unknown sweep axis {axis!r}; valid: {SWEEP_AXES}")


def _reference_config(axis: str, config: SchemeConfig) -> SchemeConfig:
    """The hopping-limit twin for the common-random-number pairings."""
    if axis == "lambda_gap":
        return config.replace(lam=1.0 / config.dt)
    if axis == "sigma_sqrt_dt":
        return config.replace(sigma=0.0)
    raise ConfigError(axis)


def _floor_config(axis: str, base: SchemeConfig, grid, dim: int) -> SchemeConfig:
    """The swept term at its minimal feasible value, to measure the
    residual error floor contributed by everything else."""
    if axis == "n_particles":
        # the discrepancy here is Monte Carlo jitter through and through,
        # so the floor probe just pushes N far beyond the grid
        return _sweep_config(axis, base, 16 * int(max(grid)), dim)
    if axis == "lambda_gap":
        return base.replace(lam=1.0 / base.dt)
    if axis == "sigma_sqrt_dt":
        return _sweep_config(axis, base, 0.0, dim)
    if axis == "tau":
        return _tau_config(base, float(min(grid)) / 4.0, dim)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def scaling_sweep(
    axis: str,
    obj: Objective,
    base: SchemeConfig,
    grid,
    seeds: int,
    check_floor: bool = True,
) -> ScalingReport:
    """Measure how the scheme discrepancy scales along one parameter axis.

    Pairings per axis, mirroring where each term of the discrepancy
    bound originates:

    - ``n_particles``: consensus vs hopping trajectory with a shared seed
      root; both fluctuate around the same deterministic limit, so the
      measured discrepancy is the Monte Carlo term.
    - ``lambda_gap`` / ``sigma_sqrt_dt``: consensus trajectory vs its
      hopping-limit twin (``lam = 1/dt`` resp. ``sigma = 0``) under common
      random numbers, the coupling of the parameter-stability estimate.
    - ``tau``: hopping vs implicit-prox trajectory with the coupled
      sampling width and the weight parameter at its dimension floor.

    Reports the median over seeds per grid value, the fitted log-log
    slope, and a bootstrap 90% confidence interval.
    """
    grid = [float(v) for v in grid]
    if len(grid) < 4:
        raise ConfigError("grid must span at least 4 values")
    if sorted(grid) != grid and sorted(grid, reverse=True) != grid:
        raise ConfigError("grid values must be monotone")
    if max(grid) / min(grid) < 8.0:
        raise ConfigError("grid must span at least one decade (factor >= 8)")

    if axis == "tau":
        pair = _pair_error_ch_ich
    elif axis == "n_particles":
        pair = _pair_error_cbo_ch
    elif axis in ("lambda_gap", "sigma_sqrt_dt"):
        def pair(o, cfg):
            return _pair_error_cbo_reference(o, cfg, _reference_config(axis, cfg))
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; valid: {SWEEP_AXES}")

    per_seed = np.empty((len(grid), seeds))
    for i, v in enumerate(grid):
        cfg = _sweep_config(axis, base, v, obj.dim)
        for s in range(seeds):
            per_seed[i, s] = pair(obj, cfg.replace(seed=base.seed + s))
    medians = np.median(per_seed, axis=1)

    if check_floor:
        floor_cfg = _floor_config(axis, base, grid, obj.dim)
        floor_runs = [
            pair(obj, floor_cfg.replace(seed=base.seed + s)) for s in range(min(seeds, 8))
        ]
        floor = float(np.median(floor_runs))
        if floor > 0.5 * float(np.min(medians)):
            raise RegimeError(
                f"error floor {floor:g} exceeds half the smallest measured error "
                f"{float(np.min(medians)):g}; the swept term does not dominate"
            )

    slope = fit_loglog_slope(grid, medians)
    ci = _bootstrap_ci(np.asarray(grid), per_seed, seed=base.seed)
    return ScalingReport(
        swept_parameter=axis,
        values=grid,
        errors=[float(m) for m in medians],
        fitted_slope=slope,
        slope_ci=ci,
        per_seed_errors=per_seed,
    )
