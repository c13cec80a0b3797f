"""Counter-based random streams.

Every random draw in the package comes from a :class:`numpy.random.Philox`
generator keyed by the master seed.  Sub-streams are addressed by counter
words, never by sequential spawning, so trial ``i`` sees the same numbers
whether trials run serially, in parallel, or out of order.

Counter layout (four 64-bit words, word 0 least significant)::

    [0, 0, index, tag]

Philox increments the counter from word 0 upward, so each ``(index, tag)``
pair owns a disjoint block of 2**128 outputs.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK128 = (1 << 128) - 1

#: Stream tags.  Trials of every Monte Carlo scenario share ``TRIAL`` so that
#: scenarios evaluated with one seed use common random numbers.
TRIAL = 1
LAPLACE = 2
SAMPLER = 3


def stream(seed, index=0, tag=TRIAL):
    """Return the generator for sub-stream ``(index, tag)`` of ``seed``."""
    if seed < 0 or index < 0 or tag < 0:
        raise ValueError("seed, index and tag must be nonnegative")
    bitgen = np.random.Philox(
        key=int(seed) & _MASK128,
        counter=[0, 0, int(index) & _MASK64, int(tag) & _MASK64],
    )
    return np.random.Generator(bitgen)
