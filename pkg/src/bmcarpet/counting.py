"""Exact and log-domain counts of approximate squares and constrained binary words."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from bmcarpet import kernels
from bmcarpet.carpet import DomainError, TwoRowMeasure, ValidationError, ceil_index, ceil_level
from bmcarpet.spectra import binary_entropy, block_log_count, fixed_point_P

EXACT_DEPTH_LIMIT = 10_000
_DIRECT_CENSUS_LIMIT = 4_000


def log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@dataclass(frozen=True)
class CountWindow:
    N: int
    alpha: float
    epsilon: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("N", f"depth must be a positive integer, got {self.N}")
        if not self.epsilon > 0:
            raise ValidationError("epsilon", f"epsilon must be positive, got {self.epsilon}")

    @property
    def bounds(self) -> tuple[float, float]:
        return self.alpha - self.epsilon, self.alpha + self.epsilon


def _census_parts(measure: TwoRowMeasure, N: int):
    Na = ceil_level(measure.sigma, N)
    Nb = N - Na
    a = np.arange(Na + 1)
    b = np.arange(Nb + 1)
    log_n0, log_n1 = math.log(measure.n0), math.log(measure.n1)
    weight_a = log_binom(Na, a) + a * log_n0 + (Na - a) * log_n1
    weight_b = log_binom(Nb, b)
    lp0, lp1 = math.log(measure.p0), math.log(measure.p1)
    lq0, lq1 = math.log(measure.q0), math.log(measure.q1)
    scale = N * measure.log_m
    expo_a = -(a * lp0 + (Na - a) * lp1) / scale
    expo_b = -(b * lq0 + (Nb - b) * lq1) / scale
    return weight_a, weight_b, expo_a, expo_b


def coarse_square_count(measure: TwoRowMeasure, window: CountWindow) -> float:
    """Natural log of the number of level-N approximate squares with exponent in the window.

    A square is summarised by a = row-0 count among the first ceil(sigma N)
    symbols (full digits) and b = row-0 count among the rest (rows only).
    Returns -inf for an empty window.
    """
    if window.N > 10**6:
        raise ValidationError("N", f"depth {window.N} exceeds 10^6")
    wa, wb, ea, eb = _census_parts(measure, window.N)
    lo, hi = window.bounds
    if window.N <= _DIRECT_CENSUS_LIMIT:
        e = ea[:, None] + eb[None, :]
        keep = (e >= lo) & (e <= hi)
        if not keep.any():
            return -math.inf
        w = wa[:, None] + wb[None, :]
        return float(logsumexp(w[keep]))
    return _census_by_intervals(wa, wb, ea, eb, lo, hi)


class _IntervalLogSum:
    """log of sum(exp(v[lo..hi])) for a unimodal vector, without catastrophic cancellation."""

    def __init__(self, v: np.ndarray):
        self.v = v
        self.mode = int(np.argmax(v))
        self.prefix = np.logaddexp.accumulate(v)
        self.suffix = np.logaddexp.accumulate(v[::-1])[::-1]
        self.total = self.prefix[-1]

    @staticmethod
    def _minus(x, y):
        return x if y == -math.inf else x + math.log1p(-math.exp(y - x))

    def __call__(self, lo: int, hi: int) -> float:
        if lo > hi:
            return -math.inf
        if hi <= self.mode:
            below = self.prefix[lo - 1] if lo > 0 else -math.inf
            return self._minus(self.prefix[hi], below)
        if lo >= self.mode:
            above = self.suffix[hi + 1] if hi + 1 < len(self.v) else -math.inf
            return self._minus(self.suffix[lo], above)
        outside = np.logaddexp(
            self.prefix[lo - 1] if lo > 0 else -math.inf,
            self.suffix[hi + 1] if hi + 1 < len(self.v) else -math.inf,
        )
        return self._minus(self.total, outside)


def _census_by_intervals(wa, wb, ea, eb, lo, hi) -> float:
    # eb is monotone in b, so each a admits a contiguous b-range.
    sums = _IntervalLogSum(wb)
    increasing = eb[-1] >= eb[0]
    terms = []
    for k in range(len(wa)):
        if increasing:
            b_lo = int(np.searchsorted(eb, lo - ea[k], side="left"))
            b_hi = int(np.searchsorted(eb, hi - ea[k], side="right")) - 1
        else:
            rev = eb[::-1]
            r_lo = int(np.searchsorted(rev, lo - ea[k], side="left"))
            r_hi = int(np.searchsorted(rev, hi - ea[k], side="right")) - 1
            b_lo, b_hi = len(eb) - 1 - r_hi, len(eb) - 1 - r_lo
        # searchsorted works on lo - ea; re-check the edges on the exact sum
        while b_lo <= b_hi and not lo <= ea[k] + eb[b_lo] <= hi:
            b_lo += 1
        while b_hi >= b_lo and not lo <= ea[k] + eb[b_hi] <= hi:
            b_hi -= 1
        if b_lo <= b_hi:
            terms.append(wa[k] + sums(b_lo, b_hi))
    return float(logsumexp(terms)) if terms else -math.inf


def census_exponent(log_count: float, N: int, measure: TwoRowMeasure) -> float:
    return log_count / (N * measure.log_m)


# ---------------------------------------------------------------------------
# block-constrained counts


@dataclass(frozen=True)
class Block:
    K: int
    start: int  # first position (1-based)
    length: int
    target: float
    zeros: int | None  # realised row-0 count (exact variant only)


@dataclass(frozen=True)
class BlockCensus:
    r: float
    variant: str
    blocks: tuple[Block, ...]
    log_count: float

    @property
    def depth(self) -> int:
        return sum(b.length for b in self.blocks)

    def normalized(self, sigma: float) -> float:
        return sigma**self.r * self.log_count


def _round_toward(x: float, toward: float) -> int:
    lo = math.floor(x)
    frac = x - lo
    if abs(frac - 0.5) < 1e-12:
        return lo if toward < x else lo + 1
    return lo if frac < 0.5 else lo + 1


def block_boundaries(sigma: float, r: float) -> tuple[list[int], int]:
    """Integer starts ceil(sigma^-K) for K = 0..floor(r), and the depth ceil(sigma^-r)."""
    fl = math.floor(r)
    starts = [ceil_index(sigma ** (-K)) for K in range(fl + 1)]
    return starts, ceil_index(sigma ** (-r))


def _exact_log_binom(n: int, k: int) -> float:
    return math.log(math.comb(n, k))


def _log_comb_table(n: int, exact: bool) -> np.ndarray:
    if exact:
        return np.array([_exact_log_binom(n, k) for k in range(n + 1)])
    return log_binom(n, np.arange(n + 1))


def log_Z_r(
    measure: TwoRowMeasure,
    alpha: float,
    delta: float,
    r: float,
    variant: str = "entropy",
) -> BlockCensus:
    """Count approximate squares of depth sigma^-r whose row sequence follows the oscillating targets.

    ``entropy`` is the real-valued block model; ``exact`` tiles positions
    1..ceil(sigma^-r) into integer blocks, fixes round(target * length) row-0
    symbols in each and counts the squares exactly.
    """
    if r < 1:
        raise ValidationError("r", f"need r >= 1, got {r}")
    P = fixed_point_P(measure, alpha)
    if delta < 0 or delta > min(P, 1 - P) + 1e-12:
        raise ValidationError("delta", f"need 0 <= delta <= {min(P, 1 - P)}, got {delta}")
    s = measure.sigma
    starts, depth = block_boundaries(s, r)

    def target(K):
        return min(1.0, max(0.0, P + (-1) ** K * delta))

    if variant == "entropy":
        blocks = []
        for K, st in enumerate(starts):
            end = starts[K + 1] if K + 1 < len(starts) else depth + 1
            if end > st:
                blocks.append(Block(K, st, end - st, target(K), None))
        return BlockCensus(r, variant, tuple(blocks), block_log_count(measure, P, delta, r))
    if variant != "exact":
        raise ValidationError("variant", f"expected 'entropy' or 'exact', got {variant!r}")

    exact = depth < EXACT_DEPTH_LIMIT
    log_n0, log_n1 = math.log(measure.n0), math.log(measure.n1)
    cols = ceil_level(s, depth)
    blocks = []
    total = 0.0
    for K, st in enumerate(starts):
        end = starts[K + 1] if K + 1 < len(starts) else depth + 1
        length = end - st
        if length <= 0:
            continue
        t = target(K)
        z = _round_toward(t * length, P * length)
        z = min(length, max(0, z))
        blocks.append(Block(K, st, length, t, z))
        full_cols = max(0, min(end, cols + 1) - st)  # positions of this block inside the column range
        if full_cols == length:
            total += (_exact_log_binom(length, z) if exact else float(log_binom(length, z)))
            total += z * log_n0 + (length - z) * log_n1
        elif full_cols == 0:
            total += _exact_log_binom(length, z) if exact else float(log_binom(length, z))
        else:
            total += _straddle_log_count(full_cols, length - full_cols, z, log_n0, log_n1, exact)
    return BlockCensus(r, variant, tuple(blocks), total)


def _straddle_log_count(u: int, v: int, z: int, log_n0: float, log_n1: float, exact: bool) -> float:
    """log sum_t C(u, t) C(v, z - t) n0^t n1^(u - t): z zeros split across a column boundary."""
    t = np.arange(max(0, z - v), min(u, z) + 1)
    cu = _log_comb_table(u, exact)[t]
    cv = _log_comb_table(v, exact)[z - t]
    return float(logsumexp(cu + cv + t * log_n0 + (u - t) * log_n1))


# ---------------------------------------------------------------------------
# words with bounded drift


def _as_fraction(P) -> Fraction:
    if isinstance(P, Fraction):
        frac = P
    elif isinstance(P, (int, str)):
        frac = Fraction(P)
    elif isinstance(P, float):
        frac = Fraction(P)
        if frac.denominator > 2**16:
            raise DomainError(f"P={P!r} is not a short rational; pass a Fraction or a decimal string")
    else:
        raise DomainError(f"P must be rational, got {type(P).__name__}")
    return frac


def _walk_params(M: int, P, K0: int, max_denominator: int) -> tuple[int, int, int]:
    if int(M) != M or M < 0:
        raise ValidationError("M", f"M must be a nonnegative integer, got {M}")
    if int(K0) != K0 or K0 < 1:
        raise ValidationError("K0", f"K0 must be a positive integer, got {K0}")
    frac = _as_fraction(P)
    if not 0 < frac < 1:
        raise DomainError(f"P must lie strictly between 0 and 1, got {frac}")
    if frac.denominator > max_denominator:
        raise DomainError(f"denominator {frac.denominator} exceeds {max_denominator}")
    c, d = frac.numerator, frac.denominator
    # T = d * S moves +(d - c) on a 0 and -c on a 1; range(T) < K0 d  <=>  range <= K0 d - 1
    return d - c, c, K0 * d - 1


def _exact_band_total(up: int, down: int, width: int, steps: int) -> int:
    if width < 0:
        return 0
    v = np.ones(width + 1, dtype=object)
    for _ in range(steps):
        nxt = np.zeros(width + 1, dtype=object)
        if up <= width:
            nxt[up:] += v[: width + 1 - up]
        if down <= width:
            nxt[: width + 1 - down] += v[down:]
        v = nxt
    return int(v.sum())


def bounded_range_word_count(M: int, P, K0: int, max_denominator: int = 10**5) -> int:
    """Binary words of length M whose walk S_k = #zeros(k) - P k has sup_{a<b} |S_b - S_a| < K0.

    Walks with range at most w fit into w - R + 1 placements of a width-w window
    and w - R placements of a width-(w-1) window, so the count is the difference
    of two banded transfer-matrix totals.
    """
    up, down, w = _walk_params(M, P, K0, max_denominator)
    return _exact_band_total(up, down, w, M) - _exact_band_total(up, down, w - 1, M)


def bounded_range_log_count(M: int, P, K0: int, max_denominator: int = 10**5, backend=None) -> float:
    """Natural log of :func:`bounded_range_word_count`, in floating point."""
    up, down, w = _walk_params(M, P, K0, max_denominator)
    big = kernels.band_walk_log_total(up, down, w, M, backend=backend)
    small = kernels.band_walk_log_total(up, down, w - 1, M, backend=backend)
    if small == -math.inf:
        return big
    return big + math.log1p(-math.exp(small - big))


def stirling_lower_envelope(M: int, P, K0: int, c: float = 5.0) -> float:
    """H(P) - c (log K0 / K0 + K0 / M), the per-symbol lower bound checked against the count."""
    p = float(_as_fraction(P))
    return binary_entropy(p) - c * (math.log(K0) / K0 + K0 / M)
