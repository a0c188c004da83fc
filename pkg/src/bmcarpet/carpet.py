"""Carpet geometry, Bernoulli weights and the full-packing-spectrum conditions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from bmcarpet._optimize import maximize_scalar


class ValidationError(ValueError):
    """Bad input; ``field`` names the offending argument."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(ValueError):
    """Input is well formed but outside the domain of a formula (e.g. log of zero)."""


def ceil_level(sigma: float, N: float) -> int:
    """Integer ceiling of sigma*N, robust to float noise when sigma*N is an integer."""
    x = sigma * N
    r = round(x)
    if abs(x - r) < 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def ceil_index(x: float) -> int:
    r = round(x)
    if abs(x - r) < 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


@dataclass(frozen=True)
class CarpetSpec:
    """Bedford-McMullen carpet: m rows (index i), n columns (index j), digit set D."""

    m: int
    n: int
    digits: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise ValidationError("m", f"must be an integer >= 2, got {self.m!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n <= self.m:
            raise ValidationError("n", f"must be an integer > m={self.m}, got {self.n!r}")
        digits = tuple((int(i), int(j)) for i, j in self.digits)
        if len(digits) < 2:
            raise ValidationError("digits", f"need at least 2 digits, got {len(digits)}")
        seen = set()
        for d in digits:
            if d in seen:
                raise ValidationError("digits", f"duplicate digit {d}")
            seen.add(d)
            i, j = d
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise ValidationError("digits", f"digit {d} outside the {self.m}x{self.n} grid")
        object.__setattr__(self, "digits", digits)

    @property
    def sigma(self) -> float:
        return math.log(self.m) / math.log(self.n)

    @property
    def row_counts(self) -> dict[int, int]:
        counts = {i: 0 for i in range(self.m)}
        for i, _ in self.digits:
            counts[i] += 1
        return counts

    @property
    def rows(self) -> tuple[int, ...]:
        """Rows with at least one digit, ascending."""
        return tuple(i for i, c in self.row_counts.items() if c)

    def index(self) -> dict[tuple[int, int], int]:
        return {d: k for k, d in enumerate(self.digits)}


@dataclass(frozen=True)
class AttractorProfile:
    carpet: CarpetSpec
    sigma: float
    L0: int
    L1: int
    row_counts: Mapping[int, int]
    dim_box_packing: float
    dim_hausdorff: float


def row_entropy_objective(Q, n_a: int, n_b: int, sigma: float) -> np.ndarray:
    """sigma*CH(Q) + (1-sigma)*H(Q) for a pair of rows with n_a, n_b digits (natural log)."""
    Q = np.asarray(Q, dtype=float)
    h = np.zeros_like(Q)
    inside = (Q > 0) & (Q < 1)
    q = Q[inside]
    h[inside] = -q * np.log(q) - (1 - q) * np.log1p(-q)
    return h + sigma * (Q * math.log(n_a) + (1 - Q) * math.log(n_b))


def _dim_hausdorff(carpet: CarpetSpec) -> float:
    sigma = carpet.sigma
    counts = [c for c in carpet.row_counts.values() if c]
    log_m = math.log(carpet.m)
    if len(counts) == 1:
        return sigma * math.log(counts[0]) / log_m
    if len(counts) == 2:
        n_a, n_b = counts
        _, best = maximize_scalar(
            lambda Q: row_entropy_objective(Q, n_a, n_b, sigma), 0.0, 1.0, n_grid=10_001
        )
        return float(best) / log_m
    # concave objective on the simplex; maximiser is Q_i proportional to n_i**sigma
    w = np.array(counts, dtype=float) ** sigma
    Q = w / w.sum()
    val = -np.sum(Q * np.log(Q)) + sigma * np.sum(Q * np.log(counts))
    return float(val) / log_m


def validate_carpet(m: int, n: int, digits: Sequence[Sequence[int]]) -> AttractorProfile:
    carpet = CarpetSpec(m, n, tuple(tuple(d) for d in digits))
    return attractor_profile(carpet)


def attractor_profile(carpet: CarpetSpec) -> AttractorProfile:
    sigma = carpet.sigma
    row_counts = carpet.row_counts
    L0 = len(carpet.digits)
    L1 = sum(1 for c in row_counts.values() if c)
    s = (sigma * math.log(L0) + (1 - sigma) * math.log(L1)) / math.log(carpet.m)
    return AttractorProfile(
        carpet=carpet,
        sigma=sigma,
        L0=L0,
        L1=L1,
        row_counts=row_counts,
        dim_box_packing=s,
        dim_hausdorff=_dim_hausdorff(carpet),
    )


@dataclass(frozen=True)
class BernoulliWeights:
    """Digit probabilities p[(i, j)] on a carpet; q[i] is the row marginal."""

    carpet: CarpetSpec
    p: Mapping[tuple[int, int], float]
    q: Mapping[int, float] = field(init=False)

    def __post_init__(self):
        p = {(int(i), int(j)): float(v) for (i, j), v in dict(self.p).items()}
        if set(p) != set(self.carpet.digits):
            missing = set(self.carpet.digits) - set(p)
            extra = set(p) - set(self.carpet.digits)
            raise ValidationError("p", f"keys must equal the digit set (missing {sorted(missing)}, extra {sorted(extra)})")
        for d, v in p.items():
            if not math.isfinite(v) or v < 0:
                raise ValidationError("p", f"probability of {d} is {v}")
            if v == 0:
                raise DomainError(f"p{d} = 0: log of zero in the local dimension")
        total = math.fsum(p.values())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError("p", f"probabilities sum to {total!r}, not 1")
        q = {i: 0.0 for i in self.carpet.rows}
        for (i, _), v in p.items():
            q[i] += v
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def uniform(cls, carpet: CarpetSpec) -> "BernoulliWeights":
        L0 = len(carpet.digits)
        return cls(carpet, {d: 1.0 / L0 for d in carpet.digits})

    def log_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(log p as an m x n array, log q as an m-vector); -inf off the digit set."""
        logp = np.full((self.carpet.m, self.carpet.n), -np.inf)
        logq = np.full(self.carpet.m, -np.inf)
        for (i, j), v in self.p.items():
            logp[i, j] = math.log(v)
        for i, v in self.q.items():
            logq[i] = math.log(v)
        return logp, logq

    def digit_exponent(self, digit: tuple[int, int]) -> float:
        """Symbolic local dimension of the point whose expansion is ``digit`` repeated."""
        i, _ = digit
        sigma = self.carpet.sigma
        pv, qv = self.p[digit], self.q[i]
        if pv <= 0 or qv <= 0:
            raise DomainError(f"p{digit} = 0: log of zero")
        return (-sigma * math.log(pv) + (sigma - 1) * math.log(qv)) / math.log(self.carpet.m)


@dataclass(frozen=True)
class TwoRowMeasure:
    """Row-equidistributed measure on a carpet whose digits fill rows 0 and 1.

    Row 0 holds n0 digits (columns 0..n0-1), row 1 holds n1; row 0 gets total
    mass q0, split evenly.
    """

    m: int
    n: int
    n0: int
    n1: int
    q0: float

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise ValidationError("m", f"must be an integer >= 2, got {self.m!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n <= self.m:
            raise ValidationError("n", f"must be an integer > m={self.m}, got {self.n!r}")
        for name in ("n0", "n1"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 1 <= v <= self.n:
                raise ValidationError(name, f"must be an integer in [1, n={self.n}], got {v!r}")
        if not (0.0 < self.q0 < 1.0):
            raise ValidationError("q0", f"must lie strictly between 0 and 1, got {self.q0!r}")
        object.__setattr__(self, "q0", float(self.q0))

    @property
    def q1(self) -> float:
        return 1.0 - self.q0

    @property
    def p0(self) -> float:
        return self.q0 / self.n0

    @property
    def p1(self) -> float:
        return self.q1 / self.n1

    @property
    def sigma(self) -> float:
        return math.log(self.m) / math.log(self.n)

    @property
    def log_m(self) -> float:
        return math.log(self.m)

    def with_q0(self, q0: float) -> "TwoRowMeasure":
        return TwoRowMeasure(self.m, self.n, self.n0, self.n1, q0)

    def carpet(self) -> CarpetSpec:
        digits = [(0, j) for j in range(self.n0)] + [(1, j) for j in range(self.n1)]
        return CarpetSpec(self.m, self.n, tuple(digits))

    def weights(self) -> BernoulliWeights:
        carpet = self.carpet()
        p = {d: (self.p0 if d[0] == 0 else self.p1) for d in carpet.digits}
        # absorb rounding so the sum is 1 to the last ulp
        total = math.fsum(p.values())
        p[carpet.digits[-1]] += 1.0 - total
        return BernoulliWeights(carpet, p)

    @classmethod
    def from_weights(cls, weights: BernoulliWeights, tol: float = 1e-12) -> "TwoRowMeasure":
        """Recover the two-row form; raises ValidationError if ``weights`` is not of that shape."""
        carpet = weights.carpet
        rows = carpet.rows
        counts = carpet.row_counts
        if rows != (0, 1):
            raise ValidationError("digits", "two-row measures need digits in rows 0 and 1 only")
        for i in rows:
            cols = sorted(j for r, j in carpet.digits if r == i)
            if cols != list(range(counts[i])):
                raise ValidationError("digits", f"row {i} must use columns 0..{counts[i] - 1}")
            vals = [weights.p[(i, j)] for j in cols]
            if max(vals) - min(vals) > tol:
                raise ValidationError("p", f"row {i} is not equidistributed")
        return cls(carpet.m, carpet.n, counts[0], counts[1], weights.q[0])


def alpha_range(profile: AttractorProfile, weights: BernoulliWeights) -> tuple[float, float]:
    if weights.carpet != profile.carpet:
        raise ValidationError("weights", "weights belong to a different carpet")
    values = [weights.digit_exponent(d) for d in profile.carpet.digits]
    return min(values), max(values)


@dataclass(frozen=True)
class FullSpectrumReport:
    necessary_holds: bool
    sufficient_holds: bool
    common_value_A: float | None
    common_value_B: float | None
    alpha0: float | None
    classification: str
    row_gap: float
    digit_gap: float


def full_spectrum_conditions(
    profile: AttractorProfile, weights: BernoulliWeights, tol: float = 1e-9
) -> FullSpectrumReport:
    """Test the row condition and the digit condition for full packing spectrum.

    Row condition: mean of log q_i over occupied rows equals the n_i/L0-weighted mean.
    Digit condition: mean of log p_ij over D equals the 1/(n_i L1)-weighted sum.
    """
    if tol <= 0:
        raise ValidationError("tol", f"must be positive, got {tol!r}")
    carpet = profile.carpet
    counts = profile.row_counts
    L0, L1 = profile.L0, profile.L1
    rows = carpet.rows
    log_q = {i: math.log(weights.q[i]) for i in rows}
    row_flat = math.fsum(log_q[i] / L1 for i in rows)
    row_weighted = math.fsum(counts[i] * log_q[i] / L0 for i in rows)
    digit_flat = math.fsum(math.log(weights.p[d]) / L0 for d in carpet.digits)
    digit_weighted = math.fsum(math.log(weights.p[d]) / (counts[d[0]] * L1) for d in carpet.digits)
    row_gap = abs(row_flat - row_weighted)
    digit_gap = abs(digit_flat - digit_weighted)
    necessary = row_gap < tol
    sufficient = necessary and digit_gap < tol
    if not necessary:
        return FullSpectrumReport(False, False, None, None, None, "spectrum_strictly_below", row_gap, digit_gap)
    if not sufficient:
        return FullSpectrumReport(True, False, row_flat, None, None, "indeterminate", row_gap, digit_gap)
    sigma = profile.sigma
    alpha0 = -(sigma * digit_flat + (1 - sigma) * row_flat) / math.log(carpet.m)
    return FullSpectrumReport(True, True, row_flat, digit_flat, alpha0, "full_at_alpha0", row_gap, digit_gap)
