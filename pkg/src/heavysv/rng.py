"""Counter-keyed random streams.

Every random quantity in the package is addressed by a path of integers
``(root_seed, *trial_path, purpose, row)``.  Each path owns an independent
Philox stream, so the value drawn at matrix coordinate ``(i, j)`` depends only
on that path and on ``j``, never on which worker produced it or on how many
rows the matrix has.
"""
from __future__ import annotations

import numpy as np

# purposes; distinct integers keep the streams disjoint
DIRECT = 1
LABEL = 2
SMALL = 3
LARGE = 4
GAUSS = 5
SIGN = 6
AUX = 7

_MASK64 = (1 << 64) - 1


def _as_words(path):
    words = []
    for p in path:
        p = int(p)
        if p < 0:
            raise ValueError(f"stream path components must be non-negative, got {p}")
        # split big ints into 32-bit words so the seed sequence sees everything
        chunk = []
        while True:
            chunk.append(p & 0xFFFFFFFF)
            p >>= 32
            if not p:
                break
        words.extend(chunk)
        words.append(len(chunk))
    return words


def make_generator(*path) -> np.random.Generator:
    """Philox generator keyed by an integer path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_as_words(path))))


def derive_seed(*path) -> int:
    """64-bit integer summarizing a path (used as the record ``seed`` field)."""
    ss = np.random.SeedSequence(_as_words(path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class Streams:
    """Factory of coordinate streams below a fixed path prefix."""

    def __init__(self, root_seed: int, *path: int):
        self.key = (int(root_seed) & _MASK64, *(int(p) for p in path))

    def child(self, *path: int) -> "Streams":
        return Streams(*self.key, *path)

    def generator(self, purpose: int, row: int = 0) -> np.random.Generator:
        return make_generator(*self.key, purpose, row)

    def uniforms(self, purpose: int, shape, per_entry: int = 1) -> np.ndarray:
        """Uniforms in (0, 1] laid out row by row.

        Returns shape ``(rows, cols)`` or ``(rows, cols, per_entry)``.
        """
        rows, cols = shape
        out = np.empty((rows, cols, per_entry))
        for i in range(rows):
            g = self.generator(purpose, i)
            # 1 - U lies in (0, 1], safe for u ** (-1 / alpha)
            out[i] = 1.0 - g.random((cols, per_entry))
        return out[..., 0] if per_entry == 1 else out

    def normals(self, purpose: int, shape) -> np.ndarray:
        rows, cols = shape
        out = np.empty((rows, cols))
        for i in range(rows):
            out[i] = self.generator(purpose, i).standard_normal(cols)
        return out

    def __repr__(self):
        return f"Streams{self.key}"
