"""Counter-grid similarity sketches.

Three fixed-geometry variants over the same rows-by-width grid layout:

* :class:`CmSimilaritySketch`: unsigned counters; the estimate is the
  minimum over rows of (sum of per-slot minima) / (sum of per-slot
  maxima). Never under-estimates the true multiset Jaccard.
* :class:`CountSimilaritySketch`: sign-hashed counters; the estimate is
  the uniform average over all slots of min/max of magnitudes, counting
  only slots where the two counters agree in sign.
* :class:`WeightedSimilaritySketch`: two fields per slot (an unsigned
  count and a signed count); per row, slot similarities from the signed
  field are averaged with weights proportional to the per-slot maximum
  of the unsigned field.

All variants are linear in the stream: merging two sketches equals
sketching the concatenated streams, counter for counter.

Counters are logically 32-bit (overflow-checked, not saturating); the
backing arrays are int64 so bound checks can run after the arithmetic
without wraparound.
"""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np

from sketchsim.core import (
    Algo,
    CounterOverflowError,
    IncompatibleSketchError,
    ItemId,
    JaccardEstimate,
    SketchParams,
    UndefinedSimilarityError,
    clamped_estimate,
)
from sketchsim.hashing import HashFamily
from sketchsim.oracle import ExactMultiset

_CM_MAX = (1 << 32) - 1
# Symmetric signed bounds; the negative end of two's complement is unused
# so that magnitude bounds are sign-independent.
_C_MAX = (1 << 31) - 1


class _GridSketch:
    """Geometry, hashing, and compatibility shared by the grid variants."""

    ALGO: Algo
    SLOT_BYTES: int

    def __init__(self, params: SketchParams, track_slots: bool = False) -> None:
        self.params = params
        self.hash = HashFamily(params.master_seed, params.rows)
        self.total_inserted = 0
        # Per-slot pre-image multisets; debug-only, for bound checks on
        # small instances. The production insert path never touches it.
        self._slot_items: Dict[Tuple[int, int], Dict[ItemId, int]] | None = (
            {} if track_slots else None
        )

    @classmethod
    def from_budget(
        cls, memory_bytes: int, rows: int, master_seed: int, track_slots: bool = False
    ):
        params = SketchParams.derive(memory_bytes, rows, cls.SLOT_BYTES, master_seed)
        return cls(params, track_slots=track_slots)

    def is_empty(self) -> bool:
        return self.total_inserted == 0

    def _check_compatible(self, other: "_GridSketch") -> None:
        if type(self) is not type(other):
            raise IncompatibleSketchError(
                f"cannot compare {type(self).__name__} with {type(other).__name__}"
            )
        if self.params != other.params:
            raise IncompatibleSketchError(
                f"sketch geometry differs: {self.params} vs {other.params}"
            )

    def _track(self, items: np.ndarray) -> None:
        if self._slot_items is None:
            return
        for item in items:
            item = int(item)
            for row in range(self.params.rows):
                slot = self.hash.index_hash(item, row, self.params.width)
                bucket = self._slot_items.setdefault((row, slot), {})
                bucket[item] = bucket.get(item, 0) + 1

    def slot_preimage(self, row: int, slot: int) -> ExactMultiset:
        """Exact sub-multiset routed to (row, slot). Requires track_slots."""
        if self._slot_items is None:
            raise ValueError("sketch was built without track_slots=True")
        return ExactMultiset(self._slot_items.get((row, slot), {}))

    def _merge_tracking(self, other: "_GridSketch") -> None:
        if self._slot_items is None or other._slot_items is None:
            self._slot_items = None
            return
        for key, bucket in other._slot_items.items():
            mine = self._slot_items.setdefault(key, {})
            for item, count in bucket.items():
                mine[item] = mine.get(item, 0) + count

    @staticmethod
    def _as_item_array(items) -> np.ndarray:
        return np.ascontiguousarray(items, dtype=np.uint64)


class CmSimilaritySketch(_GridSketch):
    """Unsigned counter grid with the min-over-rows min/max-sum estimator."""

    ALGO = Algo.CM
    SLOT_BYTES = 4

    def __init__(self, params: SketchParams, track_slots: bool = False) -> None:
        super().__init__(params, track_slots)
        self.counters = np.zeros((params.rows, params.width), dtype=np.int64)

    def insert(self, item: ItemId) -> None:
        self.insert_many(np.array([item], dtype=np.uint64))

    def insert_many(self, items) -> None:
        """Insert a batch; raises without applying anything on overflow."""
        items = self._as_item_array(items)
        if items.size == 0:
            return
        deltas = []
        for row in range(self.params.rows):
            idx = self.hash.index_hash_many(items, row, self.params.width)
            deltas.append(np.bincount(idx, minlength=self.params.width))
        for row, delta in enumerate(deltas):
            if int((self.counters[row] + delta).max()) > _CM_MAX:
                raise CounterOverflowError(
                    f"row {row} would exceed the 32-bit counter range"
                )
        for row, delta in enumerate(deltas):
            self.counters[row] += delta
        self.total_inserted += items.size
        self._track(items)

    def merge(self, other: "CmSimilaritySketch") -> "CmSimilaritySketch":
        """Counter-wise sum; equivalent to sketching the concatenated streams."""
        self._check_compatible(other)
        merged = type(self)(self.params)
        summed = self.counters + other.counters
        if int(summed.max(initial=0)) > _CM_MAX:
            raise CounterOverflowError("merge would exceed the 32-bit counter range")
        merged.counters = summed
        merged.total_inserted = self.total_inserted + other.total_inserted
        if self._slot_items is not None and other._slot_items is not None:
            merged._slot_items = {k: dict(v) for k, v in self._slot_items.items()}
            merged._merge_tracking(other)
        return merged

    def row_ratios(self, other: "CmSimilaritySketch") -> np.ndarray:
        """Per-row (sum of minima)/(sum of maxima); the estimate is their min."""
        self._check_compatible(other)
        if self.is_empty() and other.is_empty():
            raise UndefinedSimilarityError("both sketches are empty")
        mins = np.minimum(self.counters, other.counters).sum(axis=1)
        maxs = np.maximum(self.counters, other.counters).sum(axis=1)
        # Every row counts every insertion, so maxs > 0 once either
        # sketch is nonempty.
        return mins / maxs

    def estimate_jaccard(self, other: "CmSimilaritySketch") -> JaccardEstimate:
        raw = float(self.row_ratios(other).min())
        return clamped_estimate(raw, Algo.CM)


class CountSimilaritySketch(_GridSketch):
    """Sign-hashed counter grid with the uniform slot-average estimator."""

    ALGO = Algo.COUNT
    SLOT_BYTES = 4

    def __init__(self, params: SketchParams, track_slots: bool = False) -> None:
        super().__init__(params, track_slots)
        self.counters = np.zeros((params.rows, params.width), dtype=np.int64)

    def insert(self, item: ItemId) -> None:
        self.insert_many(np.array([item], dtype=np.uint64))

    def insert_many(self, items) -> None:
        items = self._as_item_array(items)
        if items.size == 0:
            return
        deltas = []
        for row in range(self.params.rows):
            idx = self.hash.index_hash_many(items, row, self.params.width)
            signs = self.hash.sign_hash_many(items, row)
            pos = np.bincount(idx[signs > 0], minlength=self.params.width)
            neg = np.bincount(idx[signs < 0], minlength=self.params.width)
            deltas.append(pos - neg)
        for row, delta in enumerate(deltas):
            if int(np.abs(self.counters[row] + delta).max()) > _C_MAX:
                raise CounterOverflowError(
                    f"row {row} would exceed the signed 32-bit counter range"
                )
        for row, delta in enumerate(deltas):
            self.counters[row] += delta
        self.total_inserted += items.size
        self._track(items)

    def merge(self, other: "CountSimilaritySketch") -> "CountSimilaritySketch":
        self._check_compatible(other)
        merged = type(self)(self.params)
        summed = self.counters + other.counters
        if int(np.abs(summed).max(initial=0)) > _C_MAX:
            raise CounterOverflowError("merge would exceed the signed 32-bit range")
        merged.counters = summed
        merged.total_inserted = self.total_inserted + other.total_inserted
        return merged

    def estimate_jaccard(self, other: "CountSimilaritySketch") -> JaccardEstimate:
        """Average over all k*l slots of sign-gated min/max magnitude ratio.

        Empty slots contribute 0, so the estimate dilutes toward 0 as the
        grid grows past the stream's support. That is inherent to the
        uniform average, not a bug.
        """
        self._check_compatible(other)
        a, b = self.counters, other.counters
        # Magnitudes are <= 2^31 - 1, so the product fits int64.
        mask = (a * b) > 0
        mag_a, mag_b = np.abs(a), np.abs(b)
        ratios = np.zeros(a.shape, dtype=np.float64)
        np.divide(
            np.minimum(mag_a, mag_b),
            np.maximum(mag_a, mag_b),
            out=ratios,
            where=mask,
        )
        raw = float(ratios.sum() / (self.params.rows * self.params.width))
        return clamped_estimate(raw, Algo.COUNT)


class WeightedSimilaritySketch(_GridSketch):
    """Two-field slots: unsigned counts weight the signed-field similarities.

    Per slot, the unsigned ``cm`` field counts arrivals and the signed
    ``c`` field accumulates sign hashes. Row estimate: sum over slots of
    [max(cm_a, cm_b) / row total of max(cm_a, cm_b)] times the sign-gated
    min/max ratio of |c| values; the final estimate averages the rows.
    """

    ALGO = Algo.WEIGHTED
    SLOT_BYTES = 8

    def __init__(self, params: SketchParams, track_slots: bool = False) -> None:
        super().__init__(params, track_slots)
        self.cm_counters = np.zeros((params.rows, params.width), dtype=np.int64)
        self.c_counters = np.zeros((params.rows, params.width), dtype=np.int64)

    def insert(self, item: ItemId) -> None:
        self.insert_many(np.array([item], dtype=np.uint64))

    def insert_many(self, items) -> None:
        items = self._as_item_array(items)
        if items.size == 0:
            return
        cm_deltas, c_deltas = [], []
        for row in range(self.params.rows):
            idx = self.hash.index_hash_many(items, row, self.params.width)
            signs = self.hash.sign_hash_many(items, row)
            cm_deltas.append(np.bincount(idx, minlength=self.params.width))
            pos = np.bincount(idx[signs > 0], minlength=self.params.width)
            neg = np.bincount(idx[signs < 0], minlength=self.params.width)
            c_deltas.append(pos - neg)
        for row in range(self.params.rows):
            if int((self.cm_counters[row] + cm_deltas[row]).max()) > _CM_MAX:
                raise CounterOverflowError(f"row {row} cm field would overflow")
            if int(np.abs(self.c_counters[row] + c_deltas[row]).max()) > _C_MAX:
                raise CounterOverflowError(f"row {row} c field would overflow")
        for row in range(self.params.rows):
            self.cm_counters[row] += cm_deltas[row]
            self.c_counters[row] += c_deltas[row]
        self.total_inserted += items.size
        self._track(items)

    def merge(self, other: "WeightedSimilaritySketch") -> "WeightedSimilaritySketch":
        self._check_compatible(other)
        merged = type(self)(self.params)
        cm = self.cm_counters + other.cm_counters
        c = self.c_counters + other.c_counters
        if int(cm.max(initial=0)) > _CM_MAX or int(np.abs(c).max(initial=0)) > _C_MAX:
            raise CounterOverflowError("merge would exceed the 32-bit field ranges")
        merged.cm_counters = cm
        merged.c_counters = c
        merged.total_inserted = self.total_inserted + other.total_inserted
        return merged

    def estimate_jaccard(self, other: "WeightedSimilaritySketch") -> JaccardEstimate:
        self._check_compatible(other)
        if self.is_empty() and other.is_empty():
            raise UndefinedSimilarityError("both sketches are empty")
        acc = 0.0
        for row in range(self.params.rows):
            max_cm = np.maximum(self.cm_counters[row], other.cm_counters[row])
            denom = int(max_cm.sum())
            if denom == 0:
                # Unreachable once either sketch is nonempty; kept defensive.
                continue
            ca, cb = self.c_counters[row], other.c_counters[row]
            mask = (ca * cb) > 0
            mag_a, mag_b = np.abs(ca), np.abs(cb)
            sub = np.zeros(self.params.width, dtype=np.float64)
            np.divide(
                np.minimum(mag_a, mag_b),
                np.maximum(mag_a, mag_b),
                out=sub,
                where=mask,
            )
            acc += float((max_cm * sub).sum()) / denom
        raw = acc / self.params.rows
        return clamped_estimate(raw, Algo.WEIGHTED)
