"""Counter-addressed random number streams.

All randomness in this package is drawn from Philox counter-based
generators keyed by ``(seed, stream)`` with the step index placed in the
counter block.  The same ``(seed, stream, step)`` triple therefore always
yields the same block of variates, independent of evaluation order,
thread count, or how many draws other streams have consumed.  This is
what makes common-random-number coupling between schemes possible: runs
that share a seed consume identical Gaussian increments even when their
other parameters differ.
"""

from __future__ import annotations

import numpy as np

# Stream tags.  Distinct tags give statistically independent streams for
# the same seed; coupled schemes deliberately share a tag where the
# coupling requires identical variates (e.g. the initial iterate draw).
STREAM_CBO_NOISE = 1       # Brownian increments of the particle dynamics
STREAM_CH_SAMPLES = 2      # Gaussian sampling of the hopping scheme
STREAM_INIT_ENSEMBLE = 3   # i.i.d. initial particle positions
STREAM_X0 = 4              # the tracked iterate's own initial draw
STREAM_LANGEVIN = 5        # Euler-Maruyama noise
STREAM_SCRATCH = 6         # Monte Carlo estimators (bound checks etc.)

_MASK64 = (1 << 64) - 1


def generator(seed: int, stream: int, step: int = 0, salt: int = 0) -> np.random.Generator:
    """A fresh Generator addressed by (seed, stream, step, salt).

    The step and salt sit in the upper counter words; the low word is the
    in-block position, so a single block may draw up to 2**64 variates
    without colliding with any other address.
    """
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    counter = np.array([0, salt & _MASK64, step & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def normal_block(seed: int, stream: int, step: int, shape, salt: int = 0) -> np.ndarray:
    """Standard-normal block for one (seed, stream, step) address."""
    return generator(seed, stream, step, salt).standard_normal(shape)
