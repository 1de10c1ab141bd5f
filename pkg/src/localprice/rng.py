"""Project-wide pseudo-random generator: xoshiro256** seeded through splitmix64.

The generator is small enough to be reproduced in any language, which keeps
trajectories comparable across implementations. Two code paths exist:

* :class:`Xoshiro256` -- a readable pure-Python generator used by the
  reference single-step model and by tests;
* the ``nb_*`` functions -- numba versions operating on the same 4-word
  ``uint64`` state array, used by the fast sweep kernel.

Both paths consume the state identically, so a state advanced by either one
can be continued by the other.

Draw primitives (each consumes one or more 64-bit outputs ``x``):

``index(n)``
    rejection sampling: ``t = (2**64 - n) % n``; redraw while ``x < t``;
    return ``x % n``.  Exactly uniform.
``uniform()``
    ``(x >> 11) * 2**-53``, a double in ``[0, 1)``.
``bit()``
    ``x >> 63``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64_finalize(z: int) -> int:
    """The splitmix64 output function (a bijective 64-bit mixer)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, replica: int) -> int:
    """Derive the seed of replica ``replica`` from a master seed.

    ``mix(seed, r) = splitmix64_finalize(seed + (r + 1) * 0x9E3779B97F4A7C15 mod 2**64)``
    """
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if replica < 0:
        raise ValueError(f"replica index must be nonnegative, got {replica}")
    return splitmix64_finalize(seed + (replica + 1) * GOLDEN_GAMMA)


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into a xoshiro256 state with four splitmix64 outputs."""
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    words = []
    x = seed
    for _ in range(4):
        x = (x + GOLDEN_GAMMA) & MASK64
        words.append(splitmix64_finalize(x))
    return np.array(words, dtype=np.uint64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** generator.

    The state is kept as four Python ints; :attr:`state` exposes it as a
    ``uint64[4]`` array for the compiled kernel and accepts one back.
    """

    def __init__(self, seed: int | None = None, state=None):
        if state is not None:
            self.state = state
        elif seed is not None:
            self.state = seed_state(seed)
        else:
            raise ValueError("either seed or state is required")

    @property
    def state(self) -> np.ndarray:
        return np.array(self._s, dtype=np.uint64)

    @state.setter
    def state(self, words) -> None:
        words = [int(w) for w in np.asarray(words, dtype=np.uint64).ravel()]
        if len(words) != 4 or not any(words):
            raise ValueError("state must be four uint64 words, not all zero")
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s = [s0, s1, s2, _rotl(s3, 45)]
        return result

    def index(self, n: int) -> int:
        if n <= 0:
            raise ValueError(f"index bound must be positive, got {n}")
        threshold = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def bit(self) -> int:
        return self.next_u64() >> 63

    def copy(self) -> Xoshiro256:
        return Xoshiro256(state=self.state)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Xoshiro256):
            return NotImplemented
        return self._s == other._s


# numba twins; every literal is an explicit uint64 so arithmetic never promotes to float.

@njit(inline="always")
def _nb_rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(inline="always")
def nb_next(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _nb_rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _nb_rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(inline="always")
def nb_index(s, n):
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        x = nb_next(s)
        if x >= threshold:
            return np.int64(x % un)


@njit(inline="always")
def nb_uniform(s):
    return np.float64(nb_next(s) >> np.uint64(11)) * _INV_2_53


@njit(inline="always")
def nb_bit(s):
    return np.int64(nb_next(s) >> np.uint64(63))
