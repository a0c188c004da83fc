"""Dense-grid search followed by golden-section refinement."""
import numpy as np
from scipy import optimize


def maximize_scalar(f, lo, hi, n_grid=2001, xtol=1e-10):
    """Maximise ``f`` on [lo, hi]; ``f`` must accept numpy arrays.

    Returns ``(argmax, max)``. The golden-section step only runs when the grid
    maximum is interior, so a boundary maximum is returned as is.
    """
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if hi == lo:
        return lo, float(np.asarray(f(np.array([lo])))[0])
    xs = np.linspace(lo, hi, n_grid)
    ys = np.asarray(f(xs), dtype=float)
    k = int(np.argmax(ys))
    best_x, best_y = float(xs[k]), float(ys[k])
    if 0 < k < n_grid - 1:

        def neg(x):
            return -float(np.asarray(f(np.array([x])))[0])

        a, b, c = xs[k - 1], xs[k], xs[k + 1]
        if ys[k - 1] < ys[k] and ys[k + 1] < ys[k]:
            res = optimize.minimize_scalar(neg, bracket=(a, b, c), method="golden", tol=xtol)
            if lo <= res.x <= hi and -res.fun >= best_y:
                best_x, best_y = float(res.x), float(-res.fun)
    return best_x, best_y
