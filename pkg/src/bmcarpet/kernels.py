"""Hot loops, dispatched to the Cython build when present.

Set ``BMCARPET_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from bmcarpet import _pykernels

if os.environ.get("BMCARPET_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from bmcarpet import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl


def band_walk_log_total(up, down, width, steps, backend=None):
    """log sum_{s=0..width} #{length-`steps` walks from s with steps +up/-down staying in [0, width]}."""
    impl = BACKENDS[backend] if backend else _impl
    return float(impl.band_walk_log_total(int(up), int(down), int(width), int(steps)))


def forward_run_lengths(values, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.forward_run_lengths(np.ascontiguousarray(values, dtype=np.int64))
