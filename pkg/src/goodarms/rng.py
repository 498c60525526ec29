"""Deterministic, splittable randomness for algorithm runs.

Every algorithm run owns exactly one :class:`RngStream`, seeded from a 64-bit
value. The underlying generator is numpy's PCG64, so two streams built from
the same seed produce bit-identical draw sequences. All consumers follow
fixed draw conventions so that runs are reproducible:

* one uniform double per Bernoulli reward pull,
* one binomial variate per batched pull block,
* one uniform double per tie-break priority (each sequential round draws one
  priority per arm, whether or not ties occur).
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """A seeded PCG64 stream; single-owner within one algorithm run.

    Args:
        seed: 64-bit seed. Equal seeds give bit-identical streams.
    """

    __slots__ = ("seed", "generator", "_seq")

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._seq = np.random.SeedSequence(self.seed)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    def random(self) -> float:
        """One uniform double in [0, 1)."""
        return float(self.generator.random())

    def integers(self, low: int, high: int) -> int:
        """One integer uniform on [low, high)."""
        return int(self.generator.integers(low, high))

    def binomial(self, count: int, p: float) -> int:
        """One Binomial(count, p) variate (batched Bernoulli pulls)."""
        return int(self.generator.binomial(count, p))

    def spawn(self, n: int) -> list["RngStream"]:
        """n independent child streams (SeedSequence spawning)."""
        children = []
        for seq in self._seq.spawn(n):
            child = object.__new__(RngStream)
            child.seed = int(seq.entropy) if isinstance(seq.entropy, int) else self.seed
            child._seq = seq
            child.generator = np.random.Generator(np.random.PCG64(seq))
            children.append(child)
        return children

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed})"
