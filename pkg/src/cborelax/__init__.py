"""Consensus-based optimization and its relaxation chain.

Library layout:

- :mod:`cborelax.objectives` -- benchmark corpus with declared regularity
  constants and assumption spot checks
- :mod:`cborelax.consensus` -- numerically stable consensus points
- :mod:`cborelax.cbo` -- the interacting-particle dynamics and its
  consensus-point trajectory
- :mod:`cborelax.hopping` -- consensus hopping, proximal / minimizing
  movement schemes, Laplace-principle bound check
- :mod:`cborelax.baselines` -- gradient descent and annealed Langevin
- :mod:`cborelax.analysis` -- residual decomposition and scaling sweeps
- :mod:`cborelax.cli` -- experiment presets and file emission
"""

from .config import ConfigError, RunRecord, SchemeConfig
from .objectives import (
    Objective,
    RegularityConstants,
    TestBox,
    canyon_objective,
    get_objective,
    quadratic_objective,
    rastrigin_objective,
    validate_assumptions,
)
from .consensus import (
    WeightedEnsemble,
    consensus_bound_check,
    consensus_point,
    gibbs_free_energy,
)
from .cbo import Ensemble, cbo_run, cbo_step, noise_matrix
from .hopping import (
    LaplaceBoundInputs,
    ProxProblem,
    alpha_floor,
    ch_run,
    ch_step,
    implicit_ch_run,
    laplace_bound_check,
    mms_run,
    prox,
)
from .baselines import AnnealSchedule, gd_run, langevin_run
from .analysis import (
    ResidualRecord,
    ScalingReport,
    coupled_triple_run,
    decompose_residual,
    scaling_sweep,
)

__all__ = [
    "AnnealSchedule",
    "ConfigError",
    "Ensemble",
    "LaplaceBoundInputs",
    "Objective",
    "ProxProblem",
    "RegularityConstants",
    "ResidualRecord",
    "RunRecord",
    "ScalingReport",
    "SchemeConfig",
    "TestBox",
    "WeightedEnsemble",
    "alpha_floor",
    "canyon_objective",
    "cbo_run",
    "cbo_step",
    "ch_run",
    "ch_step",
    "consensus_bound_check",
    "consensus_point",
    "coupled_triple_run",
    "decompose_residual",
    "gd_run",
    "get_objective",
    "gibbs_free_energy",
    "implicit_ch_run",
    "langevin_run",
    "laplace_bound_check",
    "mms_run",
    "noise_matrix",
    "prox",
    "quadratic_objective",
    "rastrigin_objective",
    "scaling_sweep",
    "validate_assumptions",
]
