"""Closed-form Hausdorff and packing spectra for two-row measures.

Every function takes a :class:`~bmcarpet.carpet.TwoRowMeasure`, which carries
m, n (hence sigma and log m) along with n0, n1 and q0. Entropies use natural logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from bmcarpet._optimize import maximize_scalar
from bmcarpet.carpet import DomainError, TwoRowMeasure, ValidationError

REGIMES = (
    "outside",
    "generic",
    "A_plus_one",
    "A_minus_one_interior",
    "A_minus_one_endpoint",
    "degenerate_equal_rows",
)
FORCE_CHOICES = ("auto", "generic", "a-minus-one", "a-plus-one")

_ALPHA_TOL = 1e-12


def binary_entropy(P):
    """-P log P - (1-P) log(1-P) with 0 log 0 = 0; accepts scalars or arrays."""
    P = np.asarray(P, dtype=float)
    out = np.zeros_like(P)
    inside = (P > 0) & (P < 1)
    p = P[inside]
    out[inside] = -p * np.log(p) - (1 - p) * np.log1p(-p)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EntropyBundle:
    H: Callable
    Hq: Callable
    CH: Callable
    CHq: Callable


def entropies(measure: TwoRowMeasure) -> EntropyBundle:
    log_n0, log_n1 = math.log(measure.n0), math.log(measure.n1)
    log_q0, log_q1 = math.log(measure.q0), math.log(measure.q1)

    def Hq(b):
        b = np.asarray(b, dtype=float)
        return -b * log_q0 - (1 - b) * log_q1

    def CH(b):
        b = np.asarray(b, dtype=float)
        return binary_entropy(b) + b * log_n0 + (1 - b) * log_n1

    def CHq(b):
        b = np.asarray(b, dtype=float)
        return Hq(b) + b * log_n0 + (1 - b) * log_n1

    return EntropyBundle(H=binary_entropy, Hq=Hq, CH=CH, CHq=CHq)


def alpha_of_beta(measure: TwoRowMeasure, beta):
    """Symbolic local dimension of points whose row-0 frequency converges to beta."""
    e = entropies(measure)
    s = measure.sigma
    val = (s * e.CHq(beta) + (1 - s) * e.Hq(beta)) / measure.log_m
    return val if np.ndim(val) else float(val)


def dim_of_beta(measure: TwoRowMeasure, beta):
    """Dimension of the set of points with row-0 frequency beta."""
    e = entropies(measure)
    s = measure.sigma
    val = (s * e.CH(beta) + (1 - s) * e.H(beta)) / measure.log_m
    return val if np.ndim(val) else float(val)


def alpha_bounds(measure: TwoRowMeasure) -> tuple[float, float]:
    a0, a1 = alpha_of_beta(measure, 0.0), alpha_of_beta(measure, 1.0)
    return (a0, a1) if a0 <= a1 else (a1, a0)


def max_dimension_frequency(measure: TwoRowMeasure) -> float:
    """beta* = n0^sigma / (n0^sigma + n1^sigma), the maximiser of dim_of_beta."""
    s = measure.sigma
    a, b = measure.n0**s, measure.n1**s
    return a / (a + b)


@dataclass(frozen=True)
class RatioA:
    """log(q0/q1) / (sigma log(n0/n1)) with its degenerate cases tagged.

    kind is "finite", "infinite" (n0 = n1, q0 != q1), "zero" (q0 = q1, n0 != n1)
    or "trivial" (both equal; value is nan).
    """

    value: float
    kind: str

    def near(self, target: float, tol: float) -> bool:
        return self.kind == "finite" and abs(self.value - target) < tol


def _q_equal(measure: TwoRowMeasure) -> bool:
    return abs(measure.q0 - measure.q1) <= 1e-15


def ratio_A(measure: TwoRowMeasure) -> RatioA:
    eq_n = measure.n0 == measure.n1
    eq_q = _q_equal(measure)
    if eq_n and eq_q:
        return RatioA(math.nan, "trivial")
    if eq_n:
        return RatioA(math.inf, "infinite")
    if eq_q:
        return RatioA(0.0, "zero")
    value = math.log(measure.q0 / measure.q1) / (measure.sigma * math.log(measure.n0 / measure.n1))
    return RatioA(value, "finite")


def exceptional_q0(n0: int, n1: int, sigma: float) -> float:
    """The q0 with ratio A = -1: q0/q1 = (n0/n1)^(-sigma)."""
    if n0 == n1:
        raise DomainError("n0 == n1: no measure has A = -1")
    a, b = n0**sigma, n1**sigma
    return b / (a + b)


@dataclass(frozen=True)
class DriftMapParams:
    """Affine map x -> x / ratio_A + offset_B linking row frequencies across sigma-scales."""

    ratio_A: float
    offset_B: float
    alpha: float

    def __call__(self, x):
        return np.asarray(x, dtype=float) / self.ratio_A + self.offset_B

    @property
    def fixed_point(self) -> float:
        inv = 1.0 / self.ratio_A
        if inv == 1.0:
            raise DomainError("ratio A = 1: every point is fixed")
        return self.offset_B / (1.0 - inv)


@dataclass(frozen=True)
class DriftProfile:
    """Oscillation around P: block K gets row-0 target P + delta (K even) or P - delta (K odd).

    ``K0`` is the drift tolerance; ``None`` stands for no constraint.
    """

    P: float
    delta: float
    gamma: float = 0.0
    K0: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.P <= 1.0:
            raise ValidationError("P", f"P must lie in [0, 1], got {self.P}")
        _check_delta(self.P, self.delta)
        if not 0.0 <= self.gamma <= 2.0:
            raise ValidationError("gamma", f"gamma must lie in [0, 2], got {self.gamma}")
        if self.K0 is not None and self.K0 < 1:
            raise ValidationError("K0", f"K0 must be a positive integer, got {self.K0}")

    def target(self, K: int) -> float:
        return self.P + self.delta if K % 2 == 0 else self.P - self.delta


def drift_map(measure: TwoRowMeasure, alpha: float) -> DriftMapParams:
    ra = ratio_A(measure)
    if ra.kind != "finite":
        raise DomainError(f"drift map needs n0 != n1 and q0 != q1 (ratio A is {ra.kind})")
    a_lo, a_hi = alpha_bounds(measure)
    if not (a_lo - _ALPHA_TOL <= alpha <= a_hi + _ALPHA_TOL):
        raise DomainError(f"alpha={alpha} outside [{a_lo}, {a_hi}]")
    s = measure.sigma
    B = -(alpha * measure.log_m + s * math.log(measure.p1) + (1 - s) * math.log(measure.q1)) / math.log(
        measure.q0 / measure.q1
    )
    return DriftMapParams(ra.value, B, alpha)


def _collapsed(measure: TwoRowMeasure, regime_tol: float) -> bool:
    """alpha(beta) is constant: A = 1, or both rows identical."""
    ra = ratio_A(measure)
    return ra.kind == "trivial" or ra.near(1.0, regime_tol)


def fixed_point_P(measure: TwoRowMeasure, alpha: float, regime_tol: float = 1e-9) -> float:
    """Row-0 frequency P with alpha_of_beta(P) = alpha (affine inversion)."""
    if _collapsed(measure, regime_tol):
        raise DomainError("alpha(beta) is constant here (A = 1 or identical rows); P is not determined")
    a0 = alpha_of_beta(measure, 0.0)
    a1 = alpha_of_beta(measure, 1.0)
    lo, hi = min(a0, a1), max(a0, a1)
    tol = _ALPHA_TOL * max(1.0, abs(alpha))
    if not (lo - tol <= alpha <= hi + tol):
        raise DomainError(f"alpha={alpha} outside [{lo}, {hi}]")
    P = (alpha - a0) / (a1 - a0)
    return min(1.0, max(0.0, P))


def hausdorff_spectrum(measure: TwoRowMeasure, alpha: float, regime_tol: float = 1e-9) -> float | None:
    """dim_H of the level set; None when alpha is outside the spectrum."""
    if _collapsed(measure, regime_tol):
        a_lo, a_hi = alpha_bounds(measure)
        if abs(alpha - a_lo) <= max(regime_tol, _ALPHA_TOL) * max(1.0, abs(alpha)):
            return dim_of_beta(measure, max_dimension_frequency(measure))
        return None
    try:
        P = fixed_point_P(measure, alpha, regime_tol)
    except DomainError:
        return None
    return dim_of_beta(measure, P)


# ---------------------------------------------------------------------------
# block-constrained growth rate


def _check_delta(P: float, delta: float) -> None:
    if delta < 0 or delta > min(P, 1 - P) + 1e-12:
        raise ValidationError("delta", f"need 0 <= delta <= min(P, 1-P) = {min(P, 1 - P)}, got {delta}")


def block_log_count(measure: TwoRowMeasure, P: float, delta: float, r: float) -> float:
    """log Z_r for the oscillating block model, by explicit block sums.

    Block K covers [sigma^-K, sigma^-K-1) and has row-0 frequency P + (-1)^K delta.
    Rows fill (0, sigma^-r], columns fill (0, sigma^(1-r)]. The part below 1 is the
    geometric tail of blocks K < 0, summed in closed form, which keeps the model
    exactly invariant under r -> r + 2.
    """
    if r < 1:
        raise ValidationError("r", f"need r >= 1, got {r}")
    s = measure.sigma
    fl = math.floor(r)
    h_even, h_odd = binary_entropy(P + delta), binary_entropy(P - delta)
    rows = (s * h_even + h_odd) / (1 + s)
    zeros = P + delta * (s - 1) / (1 + s)
    for K in range(fl):
        length = s ** (-K - 1) - s ** (-K)
        rows += length * (h_even if K % 2 == 0 else h_odd)
        if K <= fl - 2:
            zeros += length * (P + (-1) ** K * delta)
    rows += (s**-r - s**-fl) * (h_even if fl % 2 == 0 else h_odd)
    zeros += (s ** (1 - r) - s ** (1 - fl)) * (P + (-1) ** (fl - 1) * delta)
    col_len = s ** (1 - r)
    return rows + zeros * math.log(measure.n0) + (col_len - zeros) * math.log(measure.n1)


def _y_tilde_closed(measure: TwoRowMeasure, P: float, gamma, delta):
    s = measure.sigma
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    fl = np.floor(gamma)
    g = gamma - fl
    eps = np.where(fl % 2 == 0, 1.0, -1.0)
    hP = binary_entropy(P)
    d_plus = binary_entropy(P + eps * delta) - hP
    d_minus = binary_entropy(P - eps * delta) - hP
    sg = s**g
    base = hP + s * (P * math.log(measure.n0) + (1 - P) * math.log(measure.n1))
    return (
        base
        + (1 - sg) * d_plus
        + sg / (1 + s) * (d_minus + s * d_plus)
        + s * eps * (2 * sg / (1 + s) - 1) * delta * math.log(measure.n0 / measure.n1)
    )


def y_tilde_unnormalized_form(measure: TwoRowMeasure, P: float, gamma: float, delta: float) -> float:
    """Variant with raw block weights sigma^-2floor(gamma/2) and sigma^(1 - 2floor((gamma-1)/2)).

    Those weights grow without bound in gamma and drop the sigma factor on the
    column term, so this is not 2-periodic. Kept only to report how far it
    strays from the block-sum limit.
    """
    s = measure.sigma
    fl = math.floor(gamma)
    g = gamma - fl
    eps = 1.0 if fl % 2 == 0 else -1.0
    hP = binary_entropy(P)

    def d(sign):
        return binary_entropy(P + sign * delta) - hP

    return (
        hP
        + s * (P * math.log(measure.n0) + (1 - P) * math.log(measure.n1))
        + (1 - s**g) * d(eps)
        + (s ** (-2 * math.floor(gamma / 2)) * d(-1) + s ** (-2 * math.floor((gamma - 1) / 2) + 1) * d(1)) / (1 + s)
        + eps * (2 * s**g / (1 + s) - 1) * delta * math.log(measure.n0 / measure.n1)
    )


def y_tilde(
    measure: TwoRowMeasure,
    alpha: float,
    gamma: float,
    delta: float,
    mode: str = "numeric",
    k_terms: int = 40,
) -> float:
    """Growth rate of block-constrained square counts along r = gamma + 2k.

    ``numeric`` evaluates sigma^r log Z_r from explicit block sums at k = k_terms;
    ``closed`` uses the summed geometric series.
    """
    if not 0.0 <= gamma <= 2.0:
        raise ValidationError("gamma", f"gamma must lie in [0, 2], got {gamma}")
    P = fixed_point_P(measure, alpha)
    _check_delta(P, delta)
    if mode == "closed":
        return float(_y_tilde_closed(measure, P, gamma, delta))
    if mode != "numeric":
        raise ValidationError("mode", f"expected 'numeric' or 'closed', got {mode!r}")
    if k_terms < 10:
        raise ValidationError("k_terms", f"need k_terms >= 10, got {k_terms}")
    r = gamma + 2 * k_terms
    return measure.sigma**r * block_log_count(measure, P, delta, r)


def _y_sup(measure: TwoRowMeasure, P: float, delta: float, n_grid: int = 2001) -> tuple[float, float]:
    """(argmax gamma, sup over gamma in [0, 2]) of the closed form."""
    return maximize_scalar(lambda g: _y_tilde_closed(measure, P, g, delta), 0.0, 2.0, n_grid=n_grid)


def y_max_over_gamma(measure: TwoRowMeasure, alpha: float, delta: float, return_argmax: bool = False):
    P = fixed_point_P(measure, alpha)
    _check_delta(P, delta)
    gamma, val = _y_sup(measure, P, delta)
    return (val, gamma) if return_argmax else val


@dataclass(frozen=True)
class YMaximum:
    value: float  # max over delta of Y(delta), natural-log units
    delta: float
    gamma: float


def y_max_over_delta(measure: TwoRowMeasure, P: float, n_delta: int = 401) -> YMaximum:
    """max over 0 <= delta <= min(P, 1-P) of Y(delta): 2-d grid, then golden refinement in delta."""
    d_hi = min(P, 1 - P)
    if d_hi <= 0:
        val = float(_y_tilde_closed(measure, P, 0.0, 0.0))
        return YMaximum(val, 0.0, 0.0)
    deltas = np.linspace(0.0, d_hi, n_delta)
    gammas = np.linspace(0.0, 2.0, 2001)
    grid = _y_tilde_closed(measure, P, gammas[None, :], deltas[:, None])
    y_of_delta = grid.max(axis=1)
    k = int(np.argmax(y_of_delta))
    lo, hi = deltas[max(k - 1, 0)], deltas[min(k + 1, n_delta - 1)]

    def Y(ds):
        return np.array([_y_sup(measure, P, float(d))[1] for d in np.atleast_1d(ds)])

    d_best, y_best = maximize_scalar(Y, lo, hi, n_grid=5)
    if y_of_delta[k] > y_best:
        d_best, y_best = float(deltas[k]), float(y_of_delta[k])
    g_best, y_best2 = _y_sup(measure, P, d_best)
    return YMaximum(max(y_best, y_best2), d_best, g_best)


def single_level_bound(measure: TwoRowMeasure, alpha: float, regime_tol: float = 1e-9) -> float:
    """Upper bound from a single pair of scales (N, N/sigma) with split row frequencies.

    Row frequency P + rho on the first sigma-fraction of positions forces
    P + rho_b on the rest, where sigma log(p0/p1) rho + (1-sigma) log(q0/q1) rho_b = 0
    keeps the exponent at alpha. The bound is
    sup (sigma CH(P + rho) + (1 - sigma) H(P + rho_b)) / log m.
    """
    s = measure.sigma
    e = entropies(measure)
    if _collapsed(measure, regime_tol):
        return dim_of_beta(measure, max_dimension_frequency(measure))
    P = fixed_point_P(measure, alpha, regime_tol)
    a_coef = s * math.log(measure.p0 / measure.p1)
    b_coef = (1 - s) * math.log(measure.q0 / measure.q1)
    if b_coef == 0.0:
        return float((s * e.CH(P) + (1 - s) * math.log(2)) / measure.log_m)
    kappa = -a_coef / b_coef  # rho_b = kappa * rho
    # feasible rho: P + rho and P + kappa rho in [0, 1]
    lo, hi = -P, 1 - P
    if kappa > 0:
        lo, hi = max(lo, -P / kappa), min(hi, (1 - P) / kappa)
    elif kappa < 0:
        lo, hi = max(lo, (1 - P) / kappa), min(hi, -P / kappa)

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        return s * e.CH(np.clip(P + rho, 0, 1)) + (1 - s) * e.H(np.clip(P + kappa * rho, 0, 1))

    _, best = maximize_scalar(f, lo, hi, n_grid=20001)
    return float(best) / measure.log_m


@dataclass(frozen=True)
class SpectrumPoint:
    alpha: float
    dim_H: float | None
    dim_P: float | None
    P: float | None
    regime: str
    delta: float | None = None  # maximising oscillation amplitude (A = -1 interior)
    gamma: float | None = None


def _is_endpoint(P: float) -> bool:
    return P <= 1e-12 or P >= 1 - 1e-12


def packing_spectrum(
    measure: TwoRowMeasure,
    alpha: float,
    regime_tol: float = 1e-9,
    force_regime: str = "auto",
) -> SpectrumPoint:
    if regime_tol <= 0:
        raise ValidationError("regime_tol", f"must be positive, got {regime_tol}")
    if force_regime not in FORCE_CHOICES:
        raise ValidationError("force_regime", f"expected one of {FORCE_CHOICES}, got {force_regime!r}")
    ra = ratio_A(measure)
    a_lo, a_hi = alpha_bounds(measure)
    tol = max(_ALPHA_TOL, regime_tol if a_hi - a_lo < regime_tol else 0.0) * max(1.0, abs(alpha))
    if not (a_lo - tol <= alpha <= a_hi + tol):
        return SpectrumPoint(alpha, None, None, None, "outside")

    regime = force_regime
    if regime == "auto":
        if ra.kind == "trivial":
            regime = "degenerate"
        elif ra.near(1.0, regime_tol):
            regime = "a-plus-one"
        elif ra.near(-1.0, regime_tol):
            regime = "a-minus-one"
        else:
            regime = "generic"

    if regime in ("degenerate", "a-plus-one"):
        beta_star = max_dimension_frequency(measure)
        dim = dim_of_beta(measure, beta_star)
        name = "degenerate_equal_rows" if regime == "degenerate" else "A_plus_one"
        return SpectrumPoint(alpha, dim, dim, beta_star, name)

    P = fixed_point_P(measure, alpha, regime_tol)
    dim_h = dim_of_beta(measure, P)
    if regime == "generic":
        return SpectrumPoint(alpha, dim_h, dim_h, P, "generic")
    if _is_endpoint(P):
        e = entropies(measure)
        dim = float(measure.sigma * e.CH(round(P)) / measure.log_m)
        return SpectrumPoint(alpha, dim, dim, P, "A_minus_one_endpoint")
    best = y_max_over_delta(measure, P)
    dim_p = max(best.value / measure.log_m, dim_h)
    return SpectrumPoint(alpha, dim_h, dim_p, P, "A_minus_one_interior", best.delta, best.gamma)


@dataclass(frozen=True)
class SpectrumCurve:
    measure: TwoRowMeasure
    points: tuple[SpectrumPoint, ...]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(p, name) is None else getattr(p, name) for p in self.points])


def alpha_grid(measure: TwoRowMeasure, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValidationError("alpha_steps", f"need at least one step, got {steps}")
    a_lo, a_hi = alpha_bounds(measure)
    if steps == 1:
        return np.array([0.5 * (a_lo + a_hi)])
    grid = np.linspace(a_lo, a_hi, steps)
    grid[0], grid[-1] = a_lo, a_hi
    return grid


def spectrum_curve(
    measure: TwoRowMeasure,
    alphas: Sequence[float],
    regime_tol: float = 1e-9,
    force_regime: str = "auto",
    executor=None,
) -> SpectrumCurve:
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValidationError("alpha_grid", "empty alpha grid")
    a_lo, a_hi = alpha_bounds(measure)
    tol = _ALPHA_TOL * max(1.0, abs(a_lo), abs(a_hi))
    for a in alphas:
        if not (a_lo - tol <= a <= a_hi + tol) and a_hi - a_lo > tol:
            raise ValidationError("alpha_grid", f"alpha={a} outside [{a_lo}, {a_hi}]")

    def one(a):
        return packing_spectrum(measure, a, regime_tol, force_regime)

    points = list(executor.map(one, alphas)) if executor is not None else [one(a) for a in alphas]
    return SpectrumCurve(measure, tuple(points))
