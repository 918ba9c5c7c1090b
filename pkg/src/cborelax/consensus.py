"""Numerically stable consensus points for discrete measures.

The consensus point of a weighted ensemble is the Gibbs-weighted mean of
its positions, with weights exp(-alpha * value).  Direct exponentiation
underflows already at moderate alpha (alpha = 100 with value ranges of
order 100 produces exp(-10000)), so every computation here shifts by the
ensemble minimum first; the weights are then exact up to a common factor
and the weighted mean is unchanged.

Reductions run in ascending particle index via numpy's deterministic
summation, so results are bit-reproducible regardless of caller threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import Objective

Array = np.ndarray


class ConsensusError(ValueError):
    """Invalid ensemble data for consensus computation."""


@dataclass(frozen=True)
class WeightedEnsemble:
    """Particle positions with their objective values and a weight alpha.

    ``alpha == 0`` is permitted only for the dedicated plain-mean path of
    :func:`consensus_point`; all weighted operations require alpha > 0.
    """

    points: Array
    values: Array
    alpha: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ConsensusError("points must be a nonempty (N, d) array")
        if vals.shape != (pts.shape[0],):
            raise ConsensusError("values must be a length-N vector")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(vals)):
            raise ConsensusError("ensemble contains non-finite entries")
        if self.alpha < 0:
            raise ConsensusError("alpha must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)


def gibbs_weights(values: Array, alpha: float) -> Array:
    """Normalized weights exp(-alpha(values - min)) / sum, in index order."""
    shifted = values - np.min(values)
    w = np.exp(-alpha * shifted)
    total = np.sum(w)
    # the shift makes the largest weight exactly 1, so the sum is >= 1
    assert total >= 1.0, "weight underflow despite log-sum-exp shift"
    return w / total


def consensus_point(ens: WeightedEnsemble) -> Array:
    """Gibbs-weighted mean of the ensemble positions.

    Lies in the convex hull of the points.  With alpha == 0 this takes
    the dedicated plain-mean path rather than the weighted one.
    """
    if ens.alpha == 0.0:
        return np.mean(ens.points, axis=0)
    w = gibbs_weights(ens.values, ens.alpha)
    return w @ ens.points


def consensus_of(points: Array, values: Array, alpha: float) -> Array:
    """Consensus point without the dataclass wrapper (engine hot path)."""
    if alpha == 0.0:
        return np.mean(points, axis=0)
    shifted = values - np.min(values)
    w = np.exp(-alpha * shifted)
    return (w @ points) / np.sum(w)


def gibbs_free_energy(ens: WeightedEnsemble) -> float:
    """-(1/alpha) log( (1/N) sum_i exp(-alpha E_i) ), shift-stabilized.

    Sandwiched between min(values) - log(N)/alpha and mean(values).
    """
    if ens.alpha <= 0:
        raise ConsensusError("gibbs_free_energy requires alpha > 0")
    m = float(np.min(ens.values))
    n = ens.values.size
    shifted = ens.values - m
    lse = np.log(np.sum(np.exp(-ens.alpha * shifted)))
    return m - (lse - np.log(n)) / ens.alpha


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    satisfied: bool


def consensus_bound_check(ens: WeightedEnsemble, obj: Objective) -> BoundCheck:
    """Check ||consensus||^2 <= b1 + b2 * mean ||X_i||^2.

    The constants follow the two declared-regularity branches: for
    bounded objectives b1 = 0 and b2 = exp(alpha (sup E - inf E)); in the
    farfield branch b2 = 2 (c2/c3)(1 + 1/(alpha c3 c4^2)) and
    b1 = c4^2 + b2.  Requires the constants of the respective branch.
    """
    if ens.alpha <= 0:
        raise ConsensusError("bound check requires alpha > 0")
    cst = obj.constants
    if cst.bounded:
        spread = cst.upper_bound - obj.min_value
        with np.errstate(over="ignore"):
            b2 = float(np.exp(ens.alpha * spread))
        b1 = 0.0
    else:
        if cst.c3 is None or cst.c4 is None:
            raise ConsensusError("objective lacks farfield constants c3, c4")
        b2 = 2.0 * (cst.c2 / cst.c3) * (1.0 + 1.0 / (ens.alpha * cst.c3 * cst.c4**2))
        b1 = cst.c4**2 + b2
    c = consensus_point(ens)
    lhs = float(c @ c)
    rhs = b1 + b2 * float(np.mean(np.sum(ens.points * ens.points, axis=-1)))
    return BoundCheck(lhs=lhs, rhs=rhs, satisfied=bool(lhs <= rhs))
