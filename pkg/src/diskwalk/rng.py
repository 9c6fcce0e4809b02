"""Counter-based random streams.

Every stream is a Philox-4x64 generator keyed by
``SeedSequence(entropy=seed, spawn_key=(trajectory, purpose))``, so the
draws of trajectory ``t`` are a pure function of ``(seed, t)`` and do not
depend on how trajectories are scheduled.  Purposes:

====== =====================================================
0      step law draws (x_n, gamma_n)
1      coin flips c_n of the two-pencil walk
2      arc redraws u_n (and a random initial varsigma_0)
====== =====================================================

Uniform variates are ``((raw >> 12) + 0.5) * 2**-52`` from the raw 64-bit
output: 52-bit resolution, strictly inside (0, 1).  Drawing ``k`` values
then ``m`` values yields the same numbers as drawing ``k + m`` at once.
"""

from __future__ import annotations

import numpy as np

STEPS, COINS, ARCS = 0, 1, 2
_SCALE = 2.0 ** -52


class Stream:
    __slots__ = ("_bitgen",)

    def __init__(self, seed: int, trajectory: int, purpose: int):
        ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trajectory), int(purpose)))
        self._bitgen = np.random.Philox(ss)

    def uniform(self, size=None):
        """Uniform variates on the open interval (0, 1)."""
        if size is None:
            raw = int(self._bitgen.random_raw())
            return ((raw >> 12) + 0.5) * _SCALE
        raw = self._bitgen.random_raw(size)
        return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * _SCALE


class TrajectoryStreams:
    """The three independent streams owned by one trajectory."""

    __slots__ = ("steps", "coins", "arcs", "seed", "trajectory")

    def __init__(self, seed: int, trajectory: int = 0):
        self.seed = int(seed)
        self.trajectory = int(trajectory)
        self.steps = Stream(seed, trajectory, STEPS)
        self.coins = Stream(seed, trajectory, COINS)
        self.arcs = Stream(seed, trajectory, ARCS)
