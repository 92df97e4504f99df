"""Deterministic compensated summation.

The input is cut into fixed ``CHUNK``-sized blocks; each block is summed
with Neumaier's compensated algorithm (blocks run in parallel), then the
block sums and their compensations are combined in block order.  Chunk
boundaries never depend on the number of threads, so the result is
bit-identical for any thread count.
"""

import numpy as np
from numba import njit, prange

CHUNK = 1 << 16


@njit(cache=True)
def _neumaier(values):
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s, c


@njit(cache=True, parallel=True)
def _chunked(values, chunk):
    n = values.shape[0]
    nchunks = (n + chunk - 1) // chunk
    sums = np.zeros(nchunks)
    comps = np.zeros(nchunks)
    for i in prange(nchunks):
        lo = i * chunk
        hi = min(n, lo + chunk)
        s, c = _neumaier(values[lo:hi])
        sums[i] = s
        comps[i] = c
    s, c = _neumaier(sums)
    cs, cc = _neumaier(comps)
    return s + (c + (cs + cc))


def compensated_sum(values, chunk=CHUNK):
    """Sum a 1-d float array with Neumaier compensation, reproducibly."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 1:
        values = values.ravel()
    if values.size == 0:
        return 0.0
    return float(_chunked(values, int(chunk)))
