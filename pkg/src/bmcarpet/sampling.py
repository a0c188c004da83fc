"""Seeded samplers for Bernoulli and oscillating measures, and finite-depth dimension estimates.

Random numbers come from numpy's Philox counter-based generator keyed by
``SeedSequence(seed, spawn_key=(stream,))``: each (seed, stream) pair is an
independent reproducible substream regardless of thread scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bmcarpet.carpet import BernoulliWeights, TwoRowMeasure, ValidationError, ceil_index, ceil_level
from bmcarpet.symbolic import DigitString, log_measures_at_depths

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= SEED_MASK:
            raise ValidationError("seed", f"seed must be a 64-bit unsigned value, got {self.seed}")
        if self.stream < 0:
            raise ValidationError("stream", f"stream id must be nonnegative, got {self.stream}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))


def _pick(u: np.ndarray, cumulative: np.ndarray) -> np.ndarray:
    """Index k with cumulative[k-1] <= u < cumulative[k]; the last bin absorbs rounding."""
    idx = np.searchsorted(cumulative, u, side="right")
    return np.minimum(idx, len(cumulative) - 1)


def _uniform_cumulative(count: int) -> np.ndarray:
    return np.arange(1, count + 1) / count


def _draw(stream: SeededStream, N: int) -> tuple[np.ndarray, np.ndarray]:
    rng = stream.generator()
    u = rng.random(N)
    v = rng.random(N)
    return u, v


def _columns(rows: np.ndarray, v: np.ndarray, row_columns: dict[int, tuple[np.ndarray, np.ndarray]]):
    cols = np.empty_like(rows)
    for i, (labels, cum) in row_columns.items():
        sel = rows == i
        cols[sel] = labels[_pick(v[sel], cum)]
    return cols


def sample_bernoulli_digits(weights: BernoulliWeights, N: int, stream: SeededStream) -> DigitString:
    """i.i.d. digits: the row from one uniform draw against the row marginals, the column from a second."""
    if N < 1:
        raise ValidationError("N", f"need N >= 1, got {N}")
    carpet = weights.carpet
    rows_sorted = np.array(carpet.rows)
    cum_q = np.cumsum([weights.q[i] for i in carpet.rows])
    row_columns = {}
    for i in carpet.rows:
        labels = np.array(sorted(j for (r, j) in carpet.digits if r == i))
        cond = np.array([weights.p[(i, int(j))] for j in labels]) / weights.q[i]
        row_columns[i] = (labels, np.cumsum(cond))
    u, v = _draw(stream, N)
    rows = rows_sorted[_pick(u, cum_q)]
    return DigitString(carpet, rows, _columns(rows, v, row_columns))


@dataclass(frozen=True)
class NuDeltaSpec:
    """Row-0 probability P + delta on blocks [sigma^-K, sigma^-K-1) with K even, P - delta with K odd."""

    P: float
    delta: float
    sigma: float

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValidationError("sigma", f"sigma must lie in (0, 1), got {self.sigma}")
        if self.delta < 0:
            raise ValidationError("delta", f"delta must be nonnegative, got {self.delta}")
        if self.P - self.delta < -1e-12 or self.P + self.delta > 1 + 1e-12:
            raise ValidationError("delta", f"P +- delta leaves [0, 1] (P={self.P}, delta={self.delta})")

    def boundaries(self, N: int) -> np.ndarray:
        """Block starts ceil(sigma^-K), K = 0, 1, ..., up to the first one beyond N."""
        out = [1]
        K = 1
        while out[-1] <= N:
            b = ceil_index(self.sigma ** (-K))
            if b > out[-1]:
                out.append(b)
            else:
                raise ValidationError("sigma", "block boundaries are not strictly increasing")
            K += 1
        return np.array(out, dtype=np.int64)

    def block_index(self, positions: np.ndarray) -> np.ndarray:
        """K for each 1-based position."""
        positions = np.asarray(positions, dtype=np.int64)
        top = int(positions.max()) if positions.size else 1
        return np.searchsorted(self.boundaries(top), positions, side="right") - 1

    def row0_probability(self, positions: np.ndarray) -> np.ndarray:
        K = self.block_index(positions)
        return np.clip(np.where(K % 2 == 0, self.P + self.delta, self.P - self.delta), 0.0, 1.0)

    def blocks(self, N: int) -> list[tuple[int, int, int]]:
        """(K, first position, last position) for the blocks meeting 1..N, the last one truncated."""
        b = self.boundaries(N)
        return [(K, int(b[K]), int(min(b[K + 1] - 1, N))) for K in range(len(b) - 1)]


def king_weights(measure: TwoRowMeasure, P: float) -> BernoulliWeights:
    """Weights P/n0 on row 0 and (1 - P)/n1 on row 1."""
    return measure.with_q0(P).weights()


def sample_nu_delta_digits(spec: NuDeltaSpec, measure: TwoRowMeasure, N: int, stream: SeededStream) -> DigitString:
    """Independent digits; row 0 with the block probability, column uniform within the row.

    Draws follow the same path as :func:`sample_bernoulli_digits`, so delta = 0
    reproduces the King-weight sample for the same stream exactly.
    """
    if N < 1:
        raise ValidationError("N", f"need N >= 1, got {N}")
    if abs(spec.sigma - measure.sigma) > 1e-12:
        raise ValidationError("sigma", "NuDeltaSpec sigma does not match the carpet")
    carpet = measure.carpet()
    u, v = _draw(stream, N)
    prob0 = spec.row0_probability(np.arange(1, N + 1))
    rows = np.where(u < prob0, 0, 1).astype(np.int64)
    row_columns = {
        0: (np.arange(measure.n0), _uniform_cumulative(measure.n0)),
        1: (np.arange(measure.n1), _uniform_cumulative(measure.n1)),
    }
    return DigitString(carpet, rows, _columns(rows, v, row_columns))


def dim_estimates_along_depths(weights: BernoulliWeights, digits: DigitString, depths) -> list[tuple[int, float]]:
    """-log mu(C_N(x)) / (N log m) under ``weights`` at each depth."""
    depths = [int(N) for N in depths]
    logs = log_measures_at_depths(weights, digits, depths)
    log_m = math.log(weights.carpet.m)
    return [(N, float(-lm / (N * log_m))) for N, lm in zip(depths, logs)]


def nu_delta_log_measure(spec: NuDeltaSpec, measure: TwoRowMeasure, digits: DigitString, depths) -> np.ndarray:
    """log nu_delta(C_N(x)) at each depth: block row probabilities, and 1/n_i on full-digit positions."""
    depths = np.asarray(depths, dtype=np.int64)
    top = int(depths.max())
    if top > len(digits):
        raise ValidationError("depths", f"depth {top} exceeds the {len(digits)} available digits")
    rows = digits.rows[:top]
    prob0 = spec.row0_probability(np.arange(1, top + 1))
    with np.errstate(divide="ignore"):
        log_row = np.where(rows == 0, np.log(prob0), np.log1p(-prob0))
    log_col = np.where(rows == 0, -math.log(measure.n0), -math.log(measure.n1))
    c_row = np.concatenate(([0.0], np.cumsum(log_row)))
    c_col = np.concatenate(([0.0], np.cumsum(log_col)))
    cols = np.array([ceil_level(measure.sigma, int(N)) for N in depths], dtype=np.int64)
    return c_row[depths] + c_col[cols]


def subsequence_depths(sigma: float, gamma0: float, K_max: int, min_depth: int = 1) -> list[int]:
    """l_K = round(sigma^-(2K + gamma0)) for K = 0..K_max, kept when at least ``min_depth``."""
    out = []
    for K in range(K_max + 1):
        ell = int(round(sigma ** (-(2 * K + gamma0))))
        if ell >= max(1, min_depth):
            out.append(ell)
    return out


def subsequence_limsup_estimate(
    spec: NuDeltaSpec,
    measure: TwoRowMeasure,
    digits: DigitString,
    gamma0: float,
    K_max: int,
    min_depth: int = 10_000,
) -> float:
    """max over the depths l_K of -log nu_delta(C_l(x)) / (l log m).

    Depths below ``min_depth`` are skipped: the first few l_K are tiny and their
    estimates are dominated by single-digit fluctuations.
    """
    deepest = int(round(measure.sigma ** (-(2 * K_max + gamma0))))
    if deepest > len(digits):
        raise ValidationError("digits", f"need {deepest} digits for K_max={K_max}, have {len(digits)}")
    depths = subsequence_depths(measure.sigma, gamma0, K_max, min_depth)
    if not depths:
        raise ValidationError("K_max", f"no subsequence depth reaches min_depth={min_depth}")
    logs = nu_delta_log_measure(spec, measure, digits, depths)
    d = np.asarray(depths, dtype=float)
    return float(np.max(-logs / (d * measure.log_m)))


# ---------------------------------------------------------------------------
# balls versus approximate squares


def _shift_digits(digits: np.ndarray, base: int, step: int) -> np.ndarray | None:
    """digits (most significant first) plus ``step`` in the last place; None on overflow."""
    out = digits.copy()
    carry = step
    k = len(out) - 1
    while carry and k >= 0:
        total = int(out[k]) + carry
        out[k] = total % base
        carry = total // base
        k -= 1
    return None if carry else out


def _cell_log_measure(logp, logq, rows: np.ndarray, cols: np.ndarray, c: int) -> float:
    val = logp[rows[:c], cols].sum() + logq[rows[c:]].sum()
    return float(val)


@dataclass(frozen=True)
class BallSquareEstimate:
    N: int
    square: float  # -log mu(C_N) / (N log m)
    ball_low: float  # lower bound for the ball exponent (neighbour cells summed)
    ball_high: float  # upper bound (C_{N+1} sits inside the ball)


def ball_square_exponents(weights: BernoulliWeights, digits: DigitString, depths) -> list[BallSquareEstimate]:
    """Bracket -log mu(B(x, m^-N)) / (N log m) and compare with the approximate-square exponent.

    The ball lies in the union of level-N grid cells (width n^-ceil(sigma N),
    height m^-N) within one cell vertically and ceil(m^-N n^ceil(sigma N))
    cells horizontally; its measure is at least mu(C_{N+1}(x)).
    """
    carpet = weights.carpet
    m, n, sigma = carpet.m, carpet.n, carpet.sigma
    logp, logq = weights.log_tables()
    log_m = math.log(m)
    out = []
    for N in depths:
        N = int(N)
        if N + 1 > len(digits):
            raise ValidationError("depths", f"depth {N + 1} exceeds the {len(digits)} available digits")
        c = ceil_level(sigma, N)
        rows = digits.rows[:N]
        cols = digits.cols[:c]
        base = _cell_log_measure(logp, logq, rows, cols, c)
        reach = math.ceil(math.exp(c * math.log(n) - N * log_m) - 1e-12)
        terms = []
        for dy in (-1, 0, 1):
            r2 = _shift_digits(rows, m, dy)
            if r2 is None:
                continue
            for dx in range(-reach, reach + 1):
                c2 = _shift_digits(cols, n, dx)
                if c2 is None:
                    continue
                val = _cell_log_measure(logp, logq, r2, c2, c)
                if val > -math.inf:
                    terms.append(val)
        log_ball_upper = float(np.logaddexp.reduce(terms))
        c1 = ceil_level(sigma, N + 1)
        inner = _cell_log_measure(logp, logq, digits.rows[: N + 1], digits.cols[:c1], c1)
        out.append(
            BallSquareEstimate(
                N,
                -base / (N * log_m),
                -log_ball_upper / (N * log_m),
                -inner / (N * log_m),
            )
        )
    return out


def golden_draws(seed: int, stream: int, count: int = 16) -> np.ndarray:
    """First uniform draws of a stream; pinned in the tests to catch generator drift."""
    return SeededStream(seed, stream).generator().random(count)
