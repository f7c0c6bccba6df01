"""Shared test utilities: brute-force codebooks and random frozen sets."""

from functools import lru_cache

import numpy as np

from polarkit.codes import CodeSpec, bitrev_permutation


@lru_cache(maxsize=8192)
def segment_codebook(d_bytes: bytes, j: int) -> np.ndarray:
    """All lane-ordered output words of a subtree with frozen flags d.

    Enumerates every assignment of the non-frozen inputs, applies the
    butterfly in place, and reorders the columns into lane order.  Meant
    for segments with at most ~12 free bits.
    """
    d = np.frombuffer(d_bytes, dtype=np.uint8)
    N = d.size
    free = np.flatnonzero(d == 1)
    M = 1 << free.size
    words = np.zeros((M, N), dtype=np.uint8)
    idx = np.arange(M, dtype=np.uint64)
    for b, pos in enumerate(free):
        words[:, pos] = (idx >> np.uint64(b)) & np.uint64(1)
    h = 1
    while h < N:
        for s in range(0, N, 2 * h):
            words[:, s : s + h] ^= words[:, s + h : s + 2 * h]
        h *= 2
    return words[:, bitrev_permutation(j)]


def random_spec(rng: np.random.Generator, n: int) -> CodeSpec:
    """Uniform-weight random frozen set; never all-frozen."""
    N = 1 << n
    K = int(rng.integers(1, N + 1))
    d = np.zeros(N, dtype=np.uint8)
    d[rng.choice(N, size=K, replace=False)] = 1
    return CodeSpec(n, K, d)
