"""SplitMix64, a tiny deterministic 64-bit generator.

Used for every seeded random construction in the package so that a given
seed produces the same graph on any platform and in any implementation that
follows the same recipe:

    state <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z     <- state
    z     <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z     <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    out   <- z ^ (z >> 31)

Uniform doubles in [0, 1) are ``(out >> 11) * 2**-53``.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """The SplitMix64 output finaliser applied to an arbitrary 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically combine a base seed with integer keys."""
    z = seed & _MASK
    for k in keys:
        z = mix64(z ^ mix64((k & _MASK) + _GOLDEN))
    return z


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randbelow(self, k: int) -> int:
        """Unbiased integer in [0, k) by rejection on the top bits."""
        if k <= 0:
            raise ValueError("k must be positive")
        bits = max(1, (k - 1).bit_length())
        while True:
            r = self.next_u64() >> (64 - bits)
            if r < k:
                return r
