import numpy as np

from sketchsim.oracle import ExactMultiset


def find_seed(pred, limit=20000, start=0):
    """First master seed in [start, start+limit) satisfying pred."""
    for seed in range(start, start + limit):
        if pred(seed):
            return seed
    raise AssertionError(f"no seed satisfying predicate in {limit} attempts")


def multiset_of(stream) -> ExactMultiset:
    ms = ExactMultiset()
    values, counts = np.unique(np.asarray(stream, dtype=np.uint64), return_counts=True)
    for v, c in zip(values, counts):
        ms.insert(int(v), int(c))
    return ms


def random_stream_pair(rng, n_a, n_b, universe=64, id_offset=10_000):
    """Two overlapping integer streams drawn from a small shared universe."""
    a = rng.integers(0, universe, size=n_a).astype(np.uint64) + id_offset
    b = rng.integers(0, universe, size=n_b).astype(np.uint64) + id_offset
    return a, b
