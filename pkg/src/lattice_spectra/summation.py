"""Deterministic pairwise (tree) summation.

Long products are accumulated as sums of logarithms whose terms span many
orders of magnitude; a fixed reduction tree keeps results bit-stable and
cuts the roundoff growth from O(n) to O(log n).
"""

import numpy as np

_BLOCK = 32


def pairwise_sum(values):
    """Sum a 1d array with a fixed balanced reduction tree.

    Blocks of up to 32 terms are summed left to right; larger inputs are
    split in half recursively.  The tree depends only on the length, so the
    result is independent of any partitioning done by callers.
    """
    a = np.asarray(values).ravel()
    if a.size == 0:
        return 0.0
    return _reduce(a, 0, a.size)


def _reduce(a, lo, hi):
    n = hi - lo
    if n <= _BLOCK:
        s = a[lo]
        for i in range(lo + 1, hi):
            s = s + a[i]
        return s
    mid = lo + n // 2
    return _reduce(a, lo, mid) + _reduce(a, mid, hi)
