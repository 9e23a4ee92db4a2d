"""Portable, seedable random streams.

``Xoshiro256StarStar`` runs ``lanes`` independent xoshiro256** generators side
by side on numpy uint64 arrays. All ``4 * lanes`` state words come from one
splitmix64 sequence started at the seed. Output is read step-major: a step
advances every lane once and yields ``lanes`` words in lane order, and the
stream is the concatenation of those steps. Unused words stay buffered, so
the stream does not depend on how callers chunk their requests.

Doubles take the top 53 bits of each word. Normals use the Box-Muller
transform on consecutive uniform pairs (u1, u2): the cosine branch comes
first, then the sine branch.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
PRNG_NAME = "xoshiro256**/splitmix64"
DEFAULT_LANES = 1024


def splitmix64(seed: int, count: int) -> list[int]:
    out = []
    state = seed & MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class Xoshiro256StarStar:
    def __init__(self, seed: int, lanes: int = DEFAULT_LANES) -> None:
        if lanes < 1:
            raise ValueError("lanes must be positive")
        self.seed = int(seed)
        self.lanes = lanes
        words = np.array(splitmix64(self.seed, 4 * lanes), dtype=np.uint64).reshape(lanes, 4)
        self._s = [words[:, i].copy() for i in range(4)]
        self._buffer = np.empty(0, dtype=np.uint64)

    @property
    def name(self) -> str:
        return f"{PRNG_NAME}/lanes={self.lanes}"

    def _step(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s
        result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = _rotl(s3, 45)
        return result

    def next_u64(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError("n must be non-negative")
        have = self._buffer.size
        if have < n:
            steps = -(-(n - have) // self.lanes)
            fresh = [self._step() for _ in range(steps)]
            self._buffer = np.concatenate([self._buffer, *fresh])
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def random(self, n: int) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def normal(self, n: int) -> np.ndarray:
        pairs = -(-n // 2)
        u = self.random(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.reshape(-1)[:n]
