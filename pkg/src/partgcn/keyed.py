"""Counter-based uniforms keyed by (seed, stream, epoch, ...) and an element id.

Workers must draw the same random bit for the same node (or edge) without
talking to each other, so draws are a pure function of their key rather than
of a stateful generator's position.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)

# stream ids
BOUNDARY = 1
DROPOUT = 2
BOUNDARY_EDGE = 3
DROP_EDGE = 5


def _mix(x):
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


class KeyedUniform:
    """Uniform [0, 1) draws addressed by integer ids under a fixed key.

    >>> u = KeyedUniform(7, BOUNDARY, 3)
    >>> bool((u.draw([5, 9]) == KeyedUniform(7, BOUNDARY, 3).draw([5, 9])).all())
    True
    """

    def __init__(self, seed: int, *key: int):
        h = _mix(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
        for k in key:
            h = _mix(h ^ np.uint64(int(k) & 0xFFFFFFFFFFFFFFFF))
        self._state = h
        self.key = (int(seed), *map(int, key))

    def child(self, *key: int) -> "KeyedUniform":
        return KeyedUniform(*self.key, *key)

    def draw(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64).astype(np.uint64)
        bits = _mix(self._state ^ _mix(ids))
        return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def rows(self, ids, ncols: int) -> np.ndarray:
        """Matrix of draws, one row per id; entry (r, c) is keyed by ids[r]*ncols + c."""
        ids = np.asarray(ids, dtype=np.int64)
        flat = ids[:, None] * ncols + np.arange(ncols, dtype=np.int64)[None, :]
        return self.draw(flat.reshape(-1)).reshape(len(ids), ncols)

    def pairs(self, a, b) -> np.ndarray:
        """Draws for unordered id pairs; (a, b) and (b, a) get the same value."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo = np.minimum(a, b).astype(np.uint64)
        hi = np.maximum(a, b).astype(np.uint64)
        bits = _mix(self._state ^ _mix(_mix(lo) ^ hi))
        return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53
