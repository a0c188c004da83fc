"""Finite symbolic expansions and the statistics read off them.

Positions are 1-indexed in every public function, matching the usual
notation (i_k, j_k) for the k-th digit; internally they live in numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from bmcarpet import kernels
from bmcarpet.carpet import (
    BernoulliWeights,
    CarpetSpec,
    ValidationError,
    ceil_index,
    ceil_level,
)

NONGENERICITY_CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi", "vii")


@dataclass(frozen=True, eq=False)
class DigitString:
    """A finite expansion (i_1, j_1), (i_2, j_2), ... on ``carpet``."""

    carpet: CarpetSpec
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        if rows.ndim != 1 or rows.shape != cols.shape:
            raise ValidationError("digits", "rows and cols must be 1-d arrays of equal length")
        if rows.size < 1:
            raise ValidationError("digits", "a digit string needs at least one digit")
        allowed = np.zeros((self.carpet.m, self.carpet.n), dtype=bool)
        for i, j in self.carpet.digits:
            allowed[i, j] = True
        if rows.min() < 0 or rows.max() >= self.carpet.m or cols.min() < 0 or cols.max() >= self.carpet.n:
            raise ValidationError("digits", "digit outside the carpet grid")
        bad = ~allowed[rows, cols]
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise ValidationError("digits", f"position {k + 1} holds {(int(rows[k]), int(cols[k]))}, not in D")
        rows.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def from_pairs(cls, carpet: CarpetSpec, pairs: Iterable[Sequence[int]]) -> "DigitString":
        arr = np.array([tuple(p) for p in pairs], dtype=np.int64).reshape(-1, 2)
        return cls(carpet, arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return int(self.rows.size)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def prefix(self, length: int) -> "DigitString":
        return DigitString(self.carpet, self.rows[:length], self.cols[:length])


@dataclass(frozen=True)
class FrequencyStats:
    window: tuple[float, float]
    first: int  # first 1-indexed position counted
    last: int  # last 1-indexed position counted
    counts: Mapping[tuple[int, int], int]
    row_counts: Mapping[int, int]

    @property
    def total(self) -> int:
        return self.last - self.first + 1

    def frequency(self, digit: tuple[int, int]) -> float:
        return self.counts.get(digit, 0) / self.total

    def row_frequency(self, row: int) -> float:
        return self.row_counts.get(row, 0) / self.total


@dataclass(frozen=True)
class RunStats:
    I: float
    J: float
    level: int
    truncated_I: bool = False
    truncated_J: bool = False


def _check_depth(digits: DigitString, N: int) -> None:
    if N < 1:
        raise ValidationError("N", f"depth must be >= 1, got {N}")
    if N > len(digits):
        raise ValidationError("N", f"depth {N} exceeds the {len(digits)} available digits")


def _prefix_logs(weights: BernoulliWeights, digits: DigitString) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative sums (with a leading 0) of log p_{i_k j_k} and log q_{i_k}."""
    if weights.carpet != digits.carpet:
        raise ValidationError("weights", "weights and digits live on different carpets")
    logp, logq = weights.log_tables()
    cp = np.concatenate(([0.0], np.cumsum(logp[digits.rows, digits.cols])))
    cq = np.concatenate(([0.0], np.cumsum(logq[digits.rows])))
    return cp, cq


def log_measure_of_square(weights: BernoulliWeights, digits: DigitString, N: int) -> float:
    """Natural log of mu(C_N(x)): full digit weights up to ceil(sigma*N), row weights to N."""
    _check_depth(digits, N)
    logp, logq = weights.log_tables()
    c = ceil_level(weights.carpet.sigma, N)
    rows, cols = digits.rows, digits.cols
    return float(math.fsum(logp[rows[:c], cols[:c]]) + math.fsum(logq[rows[c:N]]))


def log_measures_at_depths(weights: BernoulliWeights, digits: DigitString, depths) -> np.ndarray:
    """Vectorised ``log_measure_of_square`` over many depths (prefix sums)."""
    depths = np.asarray(depths, dtype=np.int64)
    if depths.size and (depths.min() < 1 or depths.max() > len(digits)):
        raise ValidationError("depths", f"depths must lie in [1, {len(digits)}]")
    cp, cq = _prefix_logs(weights, digits)
    sigma = weights.carpet.sigma
    c = np.array([ceil_level(sigma, int(N)) for N in depths], dtype=np.int64)
    return cp[c] + cq[depths] - cq[c]


def symbolic_dim_at_depth(weights: BernoulliWeights, digits: DigitString, N: int) -> float:
    return log_measure_of_square(weights, digits, N) / (-N * math.log(weights.carpet.m))


def frequency_table(digits: DigitString, a: float, b: float) -> FrequencyStats:
    """Digit counts over positions ceil(a)+1 .. ceil(b)."""
    if not (0 <= a < b <= len(digits)):
        raise ValidationError("window", f"need 0 <= a < b <= {len(digits)}, got [{a}, {b})")
    if b - a < 1 - 1e-12:
        raise ValidationError("window", f"window [{a}, {b}) is shorter than one symbol")
    first, last = ceil_index(a) + 1, ceil_index(b)
    if last < first:
        raise ValidationError("window", f"window [{a}, {b}) contains no position")
    rows = digits.rows[first - 1 : last]
    cols = digits.cols[first - 1 : last]
    n = digits.carpet.n
    codes, freq = np.unique(rows * n + cols, return_counts=True)
    counts = {(int(c // n), int(c % n)): int(f) for c, f in zip(codes, freq)}
    row_counts: dict[int, int] = {}
    for (i, _), f in counts.items():
        row_counts[i] = row_counts.get(i, 0) + f
    return FrequencyStats((a, b), first, last, counts, row_counts)


def row_frequency(digits: DigitString, k: int) -> float:
    """Fraction of positions 1..k lying in row 0."""
    if k < 1:
        raise ValidationError("k", "k must be >= 1")
    if k > len(digits):
        raise ValidationError("k", f"k={k} exceeds the {len(digits)} available digits")
    return float(np.count_nonzero(digits.rows[:k] == 0)) / k


def _extreme_runs(values: np.ndarray, extremes: tuple[int, int]) -> np.ndarray:
    runs = kernels.forward_run_lengths(values)
    return np.where(np.isin(values, extremes), runs, 0)


def run_statistics(digits: DigitString, N: int) -> RunStats:
    """Normalised runs of extreme rows after position N and extreme columns after ceil(sigma N)."""
    if not 1 <= N < len(digits):
        raise ValidationError("N", f"need 1 <= N < {len(digits)}, got {N}")
    carpet = digits.carpet
    c = ceil_level(carpet.sigma, N)
    L = len(digits)
    i_run = int(_extreme_runs(digits.rows[N:], (0, carpet.m - 1))[0])
    j_run = int(_extreme_runs(digits.cols[c:], (0, carpet.n - 1))[0]) if c < L else 0
    return RunStats(
        I=i_run / N,
        J=j_run / c,
        level=N,
        truncated_I=i_run > 0 and N + i_run == L,
        truncated_J=j_run > 0 and c + j_run == L,
    )


def run_statistics_many(digits: DigitString, depths) -> tuple[np.ndarray, np.ndarray]:
    """(I_N, J_N) arrays for every N in ``depths``; all N must be < len(digits)."""
    depths = np.asarray(depths, dtype=np.int64)
    L = len(digits)
    if depths.size and (depths.min() < 1 or depths.max() >= L):
        raise ValidationError("depths", f"depths must lie in [1, {L - 1}]")
    carpet = digits.carpet
    i_runs = _extreme_runs(digits.rows, (0, carpet.m - 1))
    j_runs = _extreme_runs(digits.cols, (0, carpet.n - 1))
    c = np.array([ceil_level(carpet.sigma, int(N)) for N in depths], dtype=np.int64)
    I = i_runs[depths] / depths
    J = np.where(c < L, j_runs[np.minimum(c, L - 1)], 0) / c
    return I, J


def _window_all_equal(values: np.ndarray, first: int, last: int) -> bool:
    if last < first:
        return True
    seg = values[first - 1 : last]
    return bool(np.all(seg == seg[0]))


def nongenericity_required_length(sigma: float, M: int, a: float) -> int:
    return ceil_index(M * (1 + a) / sigma**2)


def nongenericity_flags(digits: DigitString, M: int, a: float, row_target: str = "row") -> set[str]:
    """Which of the seven non-genericity conditions hold at scale M and slack a.

    Conditions i and ii compare digit frequencies on [0, M] and [M, M/sigma]
    with 1/L0. Condition iii compares row frequencies on [M/sigma, M/sigma^2]
    with 1/L1 (``row_target="row"``) or with 1/(n_i L1) (``row_target="digit"``).
    Conditions iv-vii flag constant column/row runs just past M, M/sigma and
    M/sigma^2; a run window holding fewer than two symbols counts as constant.
    """
    if row_target not in ("row", "digit"):
        raise ValidationError("row_target", f"expected 'row' or 'digit', got {row_target!r}")
    if M < 1 or a <= 0:
        raise ValidationError("M", f"need M >= 1 and a > 0, got M={M}, a={a}")
    carpet = digits.carpet
    sigma = carpet.sigma
    need = nongenericity_required_length(sigma, M, a)
    if len(digits) < need:
        raise ValidationError("digits", f"need at least {need} digits for M={M}, a={a}; got {len(digits)}")
    counts = carpet.row_counts
    L0 = len(carpet.digits)
    L1 = len(carpet.rows)
    M1 = M / sigma
    M2 = M / sigma**2
    flags = set()

    def digits_off(stats: FrequencyStats) -> bool:
        return any(abs(stats.frequency(d) - 1 / L0) > a for d in carpet.digits)

    if digits_off(frequency_table(digits, 0, M)):
        flags.add("i")
    if M1 - M >= 1 and digits_off(frequency_table(digits, M, M1)):
        flags.add("ii")
    if M2 - M1 >= 1:
        stats = frequency_table(digits, M1, M2)
        for i in carpet.rows:
            target = 1 / L1 if row_target == "row" else 1 / (counts[i] * L1)
            if abs(stats.row_frequency(i) - target) > a:
                flags.add("iii")
                break
    if _window_all_equal(digits.cols, M + 1, ceil_index(M * (1 + a))):
        flags.add("iv")
    start1, stop1 = ceil_index(M1) + 1, ceil_index(M1 * (1 + a))
    if _window_all_equal(digits.rows, start1, stop1):
        flags.add("v")
    if _window_all_equal(digits.cols, start1, stop1):
        flags.add("vi")
    if _window_all_equal(digits.rows, ceil_index(M2) + 1, ceil_index(M2 * (1 + a))):
        flags.add("vii")
    return flags


def digits_to_point(digits: DigitString, max_terms: int | None = None) -> tuple[float, float]:
    """Plane point coded by the expansion: x = sum j_k n^-k, y = sum i_k m^-k.

    Columns (n per unit) run horizontally and rows (m per unit) vertically, so the
    level-N approximate square has width n^-ceil(sigma N) and height m^-N.
    """
    m, n = digits.carpet.m, digits.carpet.n
    if max_terms is None:
        max_terms = int(60 / math.log2(m)) + 2
    k = min(len(digits), max_terms)
    x = y = 0.0
    for j, i in zip(digits.cols[:k][::-1].tolist(), digits.rows[:k][::-1].tolist()):
        x = (x + j) / n
        y = (y + i) / m
    return x, y


def measure_ratio_bound(weights: BernoulliWeights) -> float:
    """K* = min_i q_i * min_(i,j) p_ij / q_i, a lower bound for mu(C_{N+1}) / mu(C_N)."""
    return min(weights.q.values()) * min(v / weights.q[i] for (i, _), v in weights.p.items())
