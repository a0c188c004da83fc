"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import math

import numpy as np


def band_walk_log_total(up, down, width, steps):
    if width < 0:
        return -math.inf
    cur = np.ones(width + 1)
    logscale = 0.0
    for _ in range(steps):
        nxt = np.zeros(width + 1)
        if up <= width:
            nxt[: width + 1 - up] += cur[up:]
        if down <= width:
            nxt[down:] += cur[: width + 1 - down]
        top = nxt.max()
        if top == 0.0:
            return -math.inf
        cur = nxt / top
        logscale += math.log(top)
    return math.log(cur.sum()) + logscale


def forward_run_lengths(values):
    values = np.asarray(values)
    n = values.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    breaks = np.flatnonzero(values[1:] != values[:-1]) + 1
    ends = np.append(breaks, n)
    idx = np.arange(n)
    nxt = ends[np.searchsorted(ends, idx, side="right")]
    return (nxt - idx).astype(np.int64)
