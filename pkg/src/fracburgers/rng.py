"""SplitMix64: the single documented PRNG behind all stochastic initial data.

State advances by the golden-ratio increment 0x9E3779B97F4A7C15 and each
output is the standard SplitMix64 finalizer of the new state.  Pure Python
integer arithmetic, so streams are identical on every platform.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, size: int) -> np.ndarray:
        """Doubles in [0, 1) from the top 53 bits of successive outputs."""
        return np.array([(self.next_u64() >> 11) * 2.0 ** -53 for _ in range(size)])
