"""Seed-derived hash family.

One 64-bit master seed fixes every hash function in an experiment. Row
seeds are expanded splitmix-style from the master seed, tagged with the
row index and the hash kind, so index, sign, unit and bit hashes of the
same row never share a seed. Quality is enforced statistically by the
test suite rather than by depending on a named hash library.

Scalar methods and their ``*_many`` numpy counterparts are defined to be
bit-identical; several sketches rely on that when mixing streamed batches
with incrementally inserted items.
"""

from __future__ import annotations

import enum

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xFF51AFD7ED558CCD
_MIX_B = 0xC4CEB9FE1A85EC53

_U33 = np.uint64(33)
_UMIX_A = np.uint64(_MIX_A)
_UMIX_B = np.uint64(_MIX_B)


def mix64(x: int) -> int:
    """Finalizing 64-bit mixer (murmur-style avalanche)."""
    x &= MASK64
    x ^= x >> 33
    x = (x * _MIX_A) & MASK64
    x ^= x >> 33
    x = (x * _MIX_B) & MASK64
    x ^= x >> 33
    return x


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array. Returns a new array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> _U33
    x *= _UMIX_A
    x ^= x >> _U33
    x *= _UMIX_B
    x ^= x >> _U33
    return x


class HashKind(enum.IntEnum):
    """Seed-separation tag; one sub-seed per (kind, row)."""

    INDEX = 0
    SIGN = 1
    UNIT = 2
    BIT = 3


class HashFamily:
    """Deterministic family of row-indexed hash functions.

    Args:
        master_seed: 64-bit experiment seed (taken modulo 2**64).
        rows: number of rows the family serves; each row gets its own
            seed per hash kind.
    """

    __slots__ = ("master_seed", "rows", "_seeds")

    def __init__(self, master_seed: int, rows: int) -> None:
        if rows < 1:
            raise ValueError(f"rows must be >= 1, got {rows}")
        self.master_seed = master_seed & MASK64
        self.rows = rows
        # Tag values 1 + 4*row + kind are pairwise distinct; multiplying by
        # an odd constant keeps them distinct mod 2**64, and mix64 is a
        # bijection, so the derived seeds are pairwise distinct too.
        self._seeds = np.empty((rows, len(HashKind)), dtype=np.uint64)
        for row in range(rows):
            for kind in HashKind:
                tag = (self.master_seed + (1 + 4 * row + kind) * _GOLDEN) & MASK64
                self._seeds[row, kind] = mix64(tag)

    def row_seed(self, kind: HashKind, row: int) -> int:
        self._check_row(row)
        return int(self._seeds[row, kind])

    def _check_row(self, row: int) -> None:
        if not 0 <= row < self.rows:
            raise ValueError(f"row {row} out of range for {self.rows} rows")

    # -- scalar ---------------------------------------------------------

    def _mixed(self, item: int, kind: HashKind, row: int) -> int:
        self._check_row(row)
        return mix64(mix64(item) ^ int(self._seeds[row, kind]))

    def index_hash(self, item: int, row: int, width: int) -> int:
        """Bucket index in ``[0, width)`` for ``item`` under row ``row``."""
        if width < 1:
            raise ValueError(f"width must be >= 1, got {width}")
        return self._mixed(item, HashKind.INDEX, row) % width

    def sign_hash(self, item: int, row: int) -> int:
        """Balanced sign in ``{+1, -1}``."""
        return 1 if self._mixed(item, HashKind.SIGN, row) >> 63 else -1

    def unit_hash(self, item: int, row: int) -> float:
        """Uniform real strictly inside (0, 1).

        Built as ``(r + 0.5) * 2**-52`` from 52 hash bits ``r``, so the
        result is an exact dyadic float, never 0.0 or 1.0, and its log2
        is finite.
        """
        r = self._mixed(item, HashKind.UNIT, row) >> 12
        return (r + 0.5) * 2.0**-52

    def unit_rank(self, item: int, row: int) -> int:
        """``floor(-log2(unit_hash(item, row)))``, computed exactly.

        Integer arithmetic sidesteps float log boundary rounding; the
        result is in ``[0, 53]``.
        """
        r = self._mixed(item, HashKind.UNIT, row) >> 12
        return 53 if r == 0 else 52 - r.bit_length()

    def bit_hash(self, item: int, bits: int) -> int:
        """Top ``bits`` bits of the item's hash, as an unsigned integer."""
        if not 1 <= bits <= 64:
            raise ValueError(f"bits must be in [1, 64], got {bits}")
        return self._mixed(item, HashKind.BIT, 0) >> (64 - bits)

    # -- vectorized -----------------------------------------------------

    def _mixed_many(self, items: np.ndarray, kind: HashKind, row: int) -> np.ndarray:
        self._check_row(row)
        mixed = mix64_array(np.asarray(items, dtype=np.uint64))
        mixed ^= self._seeds[row, kind]
        return mix64_array(mixed)

    def index_hash_many(self, items: np.ndarray, row: int, width: int) -> np.ndarray:
        """Vector form of :meth:`index_hash`; returns int64 bucket indices."""
        if width < 1:
            raise ValueError(f"width must be >= 1, got {width}")
        h = self._mixed_many(items, HashKind.INDEX, row)
        return (h % np.uint64(width)).astype(np.int64)

    def sign_hash_many(self, items: np.ndarray, row: int) -> np.ndarray:
        """Vector form of :meth:`sign_hash`; returns int64 values in {+1, -1}."""
        h = self._mixed_many(items, HashKind.SIGN, row)
        return np.where(h >> np.uint64(63), np.int64(1), np.int64(-1))

    def unit_hash_many(self, items: np.ndarray, row: int) -> np.ndarray:
        """Vector form of :meth:`unit_hash`; returns float64 in (0, 1)."""
        r = self._mixed_many(items, HashKind.UNIT, row) >> np.uint64(12)
        # 52-bit integers convert to float64 exactly.
        return (r.astype(np.float64) + 0.5) * 2.0**-52

    def unit_rank_many(self, items: np.ndarray, row: int) -> np.ndarray:
        """Vector form of :meth:`unit_rank`; returns int64 in [0, 53]."""
        r = self._mixed_many(items, HashKind.UNIT, row) >> np.uint64(12)
        # frexp(r + 0.5) = (m, e) with m in [0.5, 1); floor(log2(r + 0.5))
        # is e - 1 except exactly at powers of two, where m == 0.5.
        m, e = np.frexp(r.astype(np.float64) + 0.5)
        return (np.int64(52) - e + (m == 0.5)).astype(np.int64)

    def bit_hash_many(self, items: np.ndarray, bits: int) -> np.ndarray:
        """Vector form of :meth:`bit_hash`; returns uint64."""
        if not 1 <= bits <= 64:
            raise ValueError(f"bits must be in [1, 64], got {bits}")
        h = self._mixed_many(items, HashKind.BIT, 0)
        return h >> np.uint64(64 - bits)
