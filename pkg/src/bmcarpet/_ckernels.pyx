# cython: cdivision=True
"""Compiled inner loops. Semantics must match ``_pykernels`` exactly."""
import numpy as np

from libc.math cimport log, INFINITY


def band_walk_log_total(long up, long down, long width, long steps):
    """Natural log of the number of (start, path) pairs of a +up/-down walk kept in [0, width].

    Starts range over every lattice site of the band; ``-inf`` when no path survives.
    """
    if width < 0:
        return -INFINITY
    cdef double[::1] cur = np.ones(width + 1)
    cdef double[::1] nxt = np.empty(width + 1)
    cdef double[::1] tmp
    cdef double logscale = 0.0
    cdef double top, total
    cdef long s, t
    for t in range(steps):
        # nxt[s] = cur[s + up] + cur[s - down], split to drop the bounds tests
        for s in range(width + 1):
            nxt[s] = 0.0
        for s in range(0, width + 1 - up):
            nxt[s] += cur[s + up]
        for s in range(down, width + 1):
            nxt[s] += cur[s - down]
        tmp = cur
        cur = nxt
        nxt = tmp
        # each step at most doubles the mass, so rescaling every 256 steps cannot overflow
        if t % 256 == 255 or t == steps - 1:
            top = 0.0
            for s in range(width + 1):
                if cur[s] > top:
                    top = cur[s]
            if top == 0.0:
                return -INFINITY
            for s in range(width + 1):
                cur[s] /= top
            logscale += log(top)
    total = 0.0
    for s in range(width + 1):
        total += cur[s]
    return log(total) + logscale


def forward_run_lengths(const long long[::1] values):
    """out[k] = length of the maximal block of equal entries starting at k."""
    cdef Py_ssize_t n = values.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] res = out
    cdef Py_ssize_t k
    if n == 0:
        return out
    res[n - 1] = 1
    for k in range(n - 2, -1, -1):
        if values[k] == values[k + 1]:
            res[k] = res[k + 1] + 1
        else:
            res[k] = 1
    return out
