"""Scheme configuration and run records."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .objectives import Objective

Array = np.ndarray

# Relative tolerance for the sigma_tilde^2 = tau / (2 alpha) coupling.
COUPLING_RTOL = 1e-12


class ConfigError(ValueError):
    """Invalid scheme configuration."""


@dataclass(frozen=True)
class SchemeConfig:
    """Full parameter record shared by all schemes.

    ``dt, lam, sigma`` drive the particle dynamics, ``alpha`` the Gibbs
    weighting, ``tau`` the proximal step of the implicit schemes and
    ``sigma_tilde`` the hopping sampling width.  When ``coupled`` is set,
    sigma_tilde must satisfy sigma_tilde^2 = tau / (2 alpha), the relation
    under which one hopping step is exactly a consensus point of the
    proximally modulated objective.
    """

    dt: float
    lam: float
    sigma: float
    alpha: float
    n_particles: int
    n_steps: int
    init_mean: Array
    init_std: float
    seed: int
    tau: Optional[float] = None
    sigma_tilde: Optional[float] = None
    coupled: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "init_mean", np.atleast_1d(np.asarray(self.init_mean, dtype=float))
        )
        for msg in self.basic_errors():
            raise ConfigError(msg)

    def basic_errors(self) -> list[str]:
        """Objective-independent invariant violations, human-readable."""
        errs = []
        if not self.dt > 0:
            errs.append("dt must be positive")
        if not self.lam > 0:
            errs.append("lambda must be positive")
        if self.sigma < 0:
            errs.append("sigma must be nonnegative")
        if not self.alpha > 0:
            errs.append("alpha must be positive")
        if self.n_particles < 1:
            errs.append("n_particles must be at least 1")
        if self.n_steps < 1:
            errs.append("n_steps must be at least 1")
        if not self.init_std > 0:
            errs.append("init_std must be positive")
        if errs:
            return errs
        if self.dt * self.lam > 1.0 + 1e-12:
            errs.append(
                f"drift overshoot: dt*lambda = {self.dt * self.lam:g} exceeds 1 "
                "(equality is the hopping limit)"
            )
        if self.tau is not None and not self.tau > 0:
            errs.append("tau must be positive when set")
        if self.sigma_tilde is not None and not self.sigma_tilde >= 0:
            errs.append("sigma_tilde must be nonnegative when set")
        if self.coupled:
            if self.tau is None or self.sigma_tilde is None:
                errs.append("coupling requires both tau and sigma_tilde")
            else:
                target = self.tau / (2.0 * self.alpha)
                if abs(self.sigma_tilde**2 - target) > COUPLING_RTOL * max(target, 1e-300):
                    errs.append(
                        "coupling requires sigma_tilde^2 = tau/(2 alpha); got "
                        f"{self.sigma_tilde**2:g} vs {target:g}"
                    )
        return errs

    def objective_errors(self, obj: Objective) -> list[str]:
        """Invariants that involve the objective's constants."""
        errs = []
        lam_cv = obj.constants.lambda_semiconvex
        if self.tau is not None and lam_cv < 0 and not self.tau < 1.0 / (-2.0 * lam_cv):
            errs.append(
                f"tau = {self.tau:g} must be below 1/(-2*lambda_semiconvex) = "
                f"{1.0 / (-2.0 * lam_cv):g} for this objective"
            )
        if self.init_mean.shape != (obj.dim,):
            errs.append(
                f"init_mean has dimension {self.init_mean.size}, objective needs {obj.dim}"
            )
        return errs

    def alpha_guidance_warning(self, dim: int) -> Optional[str]:
        """Advisory threshold alpha >= dim*log(dim)/tau (warning only)."""
        if self.tau is None or dim < 2:
            return None
        threshold = dim * np.log(dim) / self.tau
        if self.alpha < threshold:
            return (
                f"alpha = {self.alpha:g} is below the guidance d*log(d)/tau = "
                f"{threshold:g}; the gradient-step interpretation may be loose"
            )
        return None

    def with_coupled_sigma_tilde(self) -> "SchemeConfig":
        """Derive sigma_tilde from tau and alpha and mark the coupling."""
        if self.tau is None:
            raise ConfigError("cannot couple sigma_tilde without tau")
        st = float(np.sqrt(self.tau / (2.0 * self.alpha)))
        return replace(self, sigma_tilde=st, coupled=True)

    def replace(self, **changes) -> "SchemeConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class RunRecord:
    """Trajectory of one scheme's tracked iterate plus diagnostics."""

    scheme: str
    iterates: Array                 # (K+1, d)
    objective_values: Array         # (K+1,)
    config: Optional[SchemeConfig]
    ensemble_snapshots: Optional[Array] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.iterates.shape[0] - 1

    @property
    def final(self) -> Array:
        return self.iterates[-1]
