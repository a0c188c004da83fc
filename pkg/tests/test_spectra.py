import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from bmcarpet.carpet import BernoulliWeights, DomainError, TwoRowMeasure, ValidationError, alpha_range, attractor_profile
from bmcarpet.spectra import (
    alpha_bounds,
    alpha_grid,
    alpha_of_beta,
    binary_entropy,
    block_log_count,
    dim_of_beta,
    drift_map,
    entropies,
    exceptional_q0,
    fixed_point_P,
    hausdorff_spectrum,
    max_dimension_frequency,
    packing_spectrum,
    ratio_A,
    single_level_bound,
    spectrum_curve,
    y_max_over_delta,
    y_max_over_gamma,
    y_tilde,
    y_tilde_unnormalized_form,
)

SIGMA = math.log(2) / math.log(3)

# frozen at first implementation (exceptional measure, alpha = 1)
FROZEN_P = 0.22288212894054518
FROZEN_DIM_H = 0.9060183426675401
FROZEN_DIM_P = 0.9102542595666154


def bernoulli_dimension(weights: BernoulliWeights) -> float:
    """Dimension of a Bernoulli measure from its digit table: (sigma h(p) + (1 - sigma) h(q)) / log m."""
    p = np.array([v for v in weights.p.values() if v > 0])
    q = np.array([v for v in weights.q.values() if v > 0])
    s = weights.carpet.sigma
    return float((s * -(p * np.log(p)).sum() + (1 - s) * -(q * np.log(q)).sum()) / math.log(weights.carpet.m))


def king_measure(measure: TwoRowMeasure, P: float) -> BernoulliWeights:
    carpet = measure.carpet()
    return BernoulliWeights(
        carpet, {(i, j): (P if i == 0 else 1 - P) / carpet.row_counts[i] for i, j in carpet.digits}
    )


measures = st.builds(
    lambda m, extra, n0, n1, q0: TwoRowMeasure(m, m + extra, min(n0, m + extra), min(n1, m + extra), q0),
    st.integers(2, 4),
    st.integers(1, 4),
    st.integers(1, 5),
    st.integers(1, 5),
    st.floats(0.02, 0.98),
)
unit = st.floats(0.0, 1.0)


# -- entropy quantities -------------------------------------------------------


def test_entropy_basics():
    assert binary_entropy(0.5) == pytest.approx(math.log(2))
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    e = entropies(TwoRowMeasure(2, 3, 2, 1, 0.5))
    assert np.allclose(e.Hq(np.linspace(0, 1, 11)), math.log(2))
    e = entropies(TwoRowMeasure(2, 5, 3, 3, 0.3))
    b = np.linspace(0, 1, 11)
    assert np.allclose(e.CH(b), binary_entropy(b) + math.log(3))


@given(unit)
def test_entropy_symmetric(p):
    assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-15)


# -- alpha(beta), dim(beta) ---------------------------------------------------


def test_exceptional_alpha_values(exceptional):
    assert alpha_of_beta(exceptional, 1.0) == pytest.approx(1.9806, abs=5e-5)
    assert alpha_of_beta(exceptional, 0.0) == pytest.approx(0.7190, abs=5e-4)
    assert alpha_of_beta(exceptional, exceptional.q0) == pytest.approx(1.2140, abs=5e-4)


@given(measures)
def test_alpha_endpoints_match_digit_exponents(meas):
    prof = attractor_profile(meas.carpet())
    lo, hi = alpha_range(prof, meas.weights())
    assert alpha_bounds(meas) == pytest.approx((lo, hi), abs=1e-12)


@given(measures, unit)
def test_slope_law(meas, beta):
    h = 1e-6
    b = min(max(beta, h), 1 - h)
    fd = (alpha_of_beta(meas, b + h) - alpha_of_beta(meas, b - h)) / (2 * h)
    law = (meas.sigma * math.log(meas.n0 / meas.n1) - math.log(meas.q0 / meas.q1)) / meas.log_m
    assert fd == pytest.approx(law, abs=1e-7)


@given(measures, st.floats(0.01, 0.99))
def test_dim_of_beta_is_king_measure_dimension(meas, beta):
    assert dim_of_beta(meas, beta) == pytest.approx(bernoulli_dimension(king_measure(meas, beta)), abs=1e-12)


@given(measures)
def test_dim_of_q0_is_measure_dimension(meas):
    assert dim_of_beta(meas, meas.q0) == pytest.approx(bernoulli_dimension(meas.weights()), abs=1e-12)


def test_dimension_maximiser_gives_carpet_dimension():
    meas = TwoRowMeasure(2, 3, 2, 1, 0.5)
    beta = max_dimension_frequency(meas)
    assert dim_of_beta(meas, beta) == pytest.approx(attractor_profile(meas.carpet()).dim_hausdorff, abs=1e-12)
    assert dim_of_beta(meas, beta) == pytest.approx(1.3496838201955776, abs=1e-12)
    grid = np.linspace(0, 1, 100001)
    assert dim_of_beta(meas, grid).max() <= dim_of_beta(meas, beta) + 1e-15


def test_zero_frequency_dimension():
    meas = TwoRowMeasure(3, 7, 2, 4, 0.4)
    assert dim_of_beta(meas, 0.0) == pytest.approx(math.log(4) / math.log(7), abs=1e-14)
    assert dim_of_beta(TwoRowMeasure(2, 3, 2, 1, 0.4), 0.0) == 0.0


# -- ratio A and the exceptional measure --------------------------------------


def test_ratio_kinds():
    assert ratio_A(TwoRowMeasure(2, 3, 2, 1, 0.5)).kind == "zero"
    assert ratio_A(TwoRowMeasure(2, 3, 2, 2, 0.3)).kind == "infinite"
    assert ratio_A(TwoRowMeasure(2, 3, 2, 2, 0.5)).kind == "trivial"


def bisect_q0(target):
    def f(q0):
        return math.log(q0 / (1 - q0)) / (SIGMA * math.log(2)) - target

    return brentq(f, 1e-9, 1 - 1e-9, xtol=1e-15, rtol=1e-15)


def test_exceptional_q0_matches_bisection():
    q = exceptional_q0(2, 1, SIGMA)
    assert q == pytest.approx(bisect_q0(-1.0), abs=1e-12)
    assert q == pytest.approx(0.39240, abs=5e-5)
    assert exceptional_q0(1, 2, SIGMA) == pytest.approx(1 - q, abs=1e-15)
    assert ratio_A(TwoRowMeasure(2, 3, 2, 1, q)).value == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(DomainError):
        exceptional_q0(2, 2, SIGMA)


def test_plus_one_q0_matches_bisection():
    meas = TwoRowMeasure(2, 3, 2, 1, 0.5)
    q = max_dimension_frequency(meas)
    assert q == pytest.approx(bisect_q0(1.0), abs=1e-12)
    assert q == pytest.approx(0.60761, abs=5e-5)


# -- drift map ----------------------------------------------------------------


def generic_measures():
    return measures.filter(lambda m: ratio_A(m).kind == "finite" and abs(abs(ratio_A(m).value) - 1) > 1e-3)


@given(generic_measures(), unit)
def test_round_trip(meas, t):
    lo, hi = alpha_bounds(meas)
    alpha = lo + t * (hi - lo)
    P = fixed_point_P(meas, alpha)
    assert alpha_of_beta(meas, P) == pytest.approx(alpha, abs=1e-10)
    F = drift_map(meas, alpha)
    assert F(P) == pytest.approx(P, abs=1e-9 * max(1.0, abs(F.offset_B)))


@given(generic_measures(), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_drift_consistency_oracle(meas, t, Pk):
    lo, hi = alpha_bounds(meas)
    alpha = lo + t * (hi - lo)
    e = entropies(meas)
    s = meas.sigma

    def eq(x):
        return s * e.CHq(Pk) + (1 - s) * e.Hq(x) - alpha * meas.log_m

    # P'_k may leave [0, 1]; Hq is affine so widen the bracket
    Pk_prime = brentq(eq, -1e6, 1e6, xtol=1e-14, rtol=1e-15)
    nxt = s * Pk + (1 - s) * Pk_prime
    F = drift_map(meas, alpha)
    assert float(F(Pk)) == pytest.approx(nxt, rel=1e-10, abs=1e-10)


def test_involution_at_minus_one(exceptional):
    F = drift_map(exceptional, 1.2)
    x = np.linspace(0, 1, 101)
    assert np.allclose(F(F(x)), x, atol=1e-12)


def test_fixed_point_examples(exceptional):
    assert fixed_point_P(exceptional, alpha_of_beta(exceptional, exceptional.q0)) == pytest.approx(exceptional.q0)
    lo, hi = alpha_bounds(exceptional)
    assert fixed_point_P(exceptional, lo) == 0.0
    assert fixed_point_P(exceptional, hi) == 1.0
    assert fixed_point_P(exceptional, 1.0) == pytest.approx(0.2227, abs=5e-4)
    with pytest.raises(DomainError):
        fixed_point_P(exceptional, hi + 0.01)
    plus = TwoRowMeasure(2, 3, 2, 1, max_dimension_frequency(exceptional))
    with pytest.raises(DomainError):
        fixed_point_P(plus, alpha_bounds(plus)[0])


def test_hausdorff_spectrum_examples(exceptional):
    assert hausdorff_spectrum(exceptional, 1.0) == pytest.approx(FROZEN_DIM_H, abs=1e-12)
    assert hausdorff_spectrum(exceptional, 5.0) is None
    beta = max_dimension_frequency(exceptional)
    top = hausdorff_spectrum(exceptional, alpha_of_beta(exceptional, beta))
    assert top == pytest.approx(attractor_profile(exceptional.carpet()).dim_hausdorff, abs=1e-12)


def test_hausdorff_spectrum_against_constrained_grid(exceptional):
    # maximise the frequency entropy over beta on a fine grid restricted to |alpha(beta) - 1| small
    grid = np.linspace(0, 1, 1_000_001)
    a = alpha_of_beta(exceptional, grid)
    ok = np.abs(a - 1.0) < 2e-6
    e = entropies(exceptional)
    vals = (e.H(grid[ok]) + SIGMA * (grid[ok] * math.log(2))) / math.log(2)
    assert vals.max() == pytest.approx(hausdorff_spectrum(exceptional, 1.0), abs=1e-5)


# -- Y tilde ------------------------------------------------------------------


@pytest.mark.parametrize("delta", [0.02, 0.05, 0.1, 0.2])
def test_y_tilde_modes_agree(exceptional, delta):
    for gamma in np.linspace(0, 2, 21):
        num = y_tilde(exceptional, 1.0, gamma, delta, mode="numeric")
        closed = y_tilde(exceptional, 1.0, gamma, delta, mode="closed")
        assert num == pytest.approx(closed, abs=1e-8)
        assert num == pytest.approx(y_tilde(exceptional, 1.0, gamma, delta, k_terms=20), abs=1e-10)


@given(st.floats(0.0, 2.0), st.floats(0.0, 1.0), generic_measures())
def test_y_tilde_modes_agree_generic(gamma, frac, meas):
    lo, hi = alpha_bounds(meas)
    alpha = lo + 0.5 * (hi - lo)
    P = fixed_point_P(meas, alpha)
    delta = frac * min(P, 1 - P)
    num = y_tilde(meas, alpha, gamma, delta)
    closed = y_tilde(meas, alpha, gamma, delta, mode="closed")
    assert num == pytest.approx(closed, abs=1e-8)


def test_block_count_period_two(exceptional):
    P = FROZEN_P
    s = SIGMA
    for r in (3.3, 7.0, 10.9):
        a = s**r * block_log_count(exceptional, P, 0.1, r)
        b = s ** (r + 2) * block_log_count(exceptional, P, 0.1, r + 2)
        assert a == pytest.approx(b, abs=1e-12)


def test_y_tilde_structure(exceptional):
    for d in (0.05, 0.15):
        y0 = y_tilde(exceptional, 1.0, 0.0, d)
        assert y0 == pytest.approx(y_tilde(exceptional, 1.0, 2.0, d), abs=1e-10)
        below = y_tilde(exceptional, 1.0, 1 - 1e-9, d, mode="closed")
        above = y_tilde(exceptional, 1.0, 1.0, d, mode="closed")
        assert below == pytest.approx(above, abs=1e-7)


def test_y_tilde_argument_errors(exceptional):
    with pytest.raises(ValidationError):
        y_tilde(exceptional, 1.0, 2.5, 0.1)
    with pytest.raises(ValidationError):
        y_tilde(exceptional, 1.0, 1.0, 0.5)
    with pytest.raises(ValidationError):
        y_tilde(exceptional, 1.0, 1.0, 0.1, k_terms=5)
    with pytest.raises(ValidationError):
        y_tilde(exceptional, 1.0, 1.0, 0.1, mode="series")


def test_printed_variant_is_not_periodic(exceptional):
    a = y_tilde_unnormalized_form(exceptional, FROZEN_P, 0.5, 0.1)
    b = y_tilde_unnormalized_form(exceptional, FROZEN_P, 2.5, 0.1)
    assert abs(a - b) > 1e-3


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5, 1.9])
def test_y_zero_is_hausdorff(exceptional, alpha):
    assert y_max_over_gamma(exceptional, alpha, 0.0) / math.log(2) == pytest.approx(
        hausdorff_spectrum(exceptional, alpha), abs=1e-10
    )


def test_y_maximum_beats_zero(exceptional):
    best = y_max_over_delta(exceptional, FROZEN_P)
    assert best.value - y_max_over_gamma(exceptional, 1.0, 0.0) > 1e-3
    assert best.delta == pytest.approx(0.0320098576, abs=1e-6)
    assert best.gamma == pytest.approx(1.0, abs=1e-6)


def test_y_maximum_against_dense_grid(exceptional):
    best = y_max_over_delta(exceptional, FROZEN_P)
    deltas = np.linspace(0.0, 0.1, 2001)
    vals = [max(y_tilde(exceptional, 1.0, g, d, mode="closed") for g in np.linspace(0, 2, 201)) for d in deltas[::20]]
    assert max(vals) <= best.value + 1e-12
    assert max(vals) == pytest.approx(best.value, abs=1e-5)


# -- packing spectrum ---------------------------------------------------------


def test_frozen_exceptional_point(exceptional):
    pt = packing_spectrum(exceptional, 1.0)
    assert pt.regime == "A_minus_one_interior"
    assert pt.P == pytest.approx(FROZEN_P, abs=1e-12)
    assert pt.dim_H == pytest.approx(FROZEN_DIM_H, abs=1e-12)
    assert pt.dim_P == pytest.approx(FROZEN_DIM_P, abs=1e-9)
    assert pt.dim_P - pt.dim_H == pytest.approx(0.0042359168990753, abs=1e-9)
    assert pt.dim_P <= single_level_bound(exceptional, 1.0) + 1e-12


def test_endpoints(exceptional):
    lo, hi = alpha_bounds(exceptional)
    a = packing_spectrum(exceptional, lo)
    b = packing_spectrum(exceptional, hi)
    assert a.regime == b.regime == "A_minus_one_endpoint"
    assert a.dim_P == a.dim_H == 0.0
    assert b.dim_P == pytest.approx(math.log(2) / math.log(3), abs=1e-14)
    assert packing_spectrum(exceptional, hi + 0.1).regime == "outside"


def test_a_zero_is_generic(half):
    for alpha in np.linspace(*alpha_bounds(half), 9):
        pt = packing_spectrum(half, alpha)
        assert pt.regime == "generic" and pt.dim_P == pt.dim_H


def test_a_plus_one_is_single_point():
    meas = TwoRowMeasure(2, 3, 2, 1, max_dimension_frequency(TwoRowMeasure(2, 3, 2, 1, 0.5)))
    lo, hi = alpha_bounds(meas)
    assert hi - lo < 1e-12
    pt = packing_spectrum(meas, lo)
    assert pt.regime == "A_plus_one"
    assert pt.dim_P == pt.dim_H == pytest.approx(1.3496838201955776, abs=1e-12)


def test_force_regime(exceptional):
    forced = packing_spectrum(exceptional, 1.0, force_regime="generic")
    assert forced.regime == "generic" and forced.dim_P == forced.dim_H
    near = exceptional.with_q0(exceptional.q0 + 1e-4)
    assert packing_spectrum(near, 1.0).regime == "generic"
    assert packing_spectrum(near, 1.0, force_regime="a-minus-one").regime == "A_minus_one_interior"
    assert packing_spectrum(near, 1.0, regime_tol=1e-2).regime == "A_minus_one_interior"
    with pytest.raises(ValidationError):
        packing_spectrum(exceptional, 1.0, force_regime="other")
    with pytest.raises(ValidationError):
        packing_spectrum(exceptional, 1.0, regime_tol=0.0)


def test_discontinuity_in_q0(exceptional):
    at = packing_spectrum(exceptional, 1.0)
    for shift in (-1e-3, 1e-3):
        side = packing_spectrum(exceptional.with_q0(exceptional.q0 + shift), 1.0)
        assert side.regime == "generic"
        assert side.dim_P == side.dim_H
        assert at.dim_P > side.dim_P + 1e-3


@given(generic_measures(), unit)
def test_ordering_chain_generic(meas, t):
    lo, hi = alpha_bounds(meas)
    alpha = lo + t * (hi - lo)
    pt = packing_spectrum(meas, alpha)
    box = attractor_profile(meas.carpet()).dim_box_packing
    bound = single_level_bound(meas, alpha)
    assert pt.dim_H <= pt.dim_P <= bound + 1e-9 <= box + 2e-9
    assert bound >= hausdorff_spectrum(meas, alpha) - 1e-12


@pytest.fixture(scope="module")
def exceptional_curve():
    meas = TwoRowMeasure(2, 3, 2, 1, exceptional_q0(2, 1, SIGMA))
    return spectrum_curve(meas, alpha_grid(meas, 101))


def test_curve_endpoints_and_shape(exceptional_curve):
    pts = exceptional_curve.points
    assert len(pts) == 101
    assert pts[0].regime == pts[-1].regime == "A_minus_one_endpoint"
    assert all(p.regime == "A_minus_one_interior" for p in pts[1:-1])
    dh = exceptional_curve.column("dim_H")
    assert np.all(np.diff(dh, 2) <= 1e-12)


def test_curve_ordering_chain(exceptional_curve):
    meas = exceptional_curve.measure
    box = attractor_profile(meas.carpet()).dim_box_packing
    for p in exceptional_curve.points[::5]:
        bound = single_level_bound(meas, p.alpha)
        assert p.dim_H <= p.dim_P + 1e-15
        assert p.dim_P <= bound + 1e-9
        assert bound <= box + 1e-9


def test_interior_gap_positive(exceptional_curve):
    gaps = [p.dim_P - p.dim_H for p in exceptional_curve.points[1:-1]]
    assert min(gaps) > 0


def test_single_point_curve_matches_direct(exceptional):
    curve = spectrum_curve(exceptional, [1.0])
    assert curve.points[0] == packing_spectrum(exceptional, 1.0)
    with pytest.raises(ValidationError):
        spectrum_curve(exceptional, [])
    with pytest.raises(ValidationError):
        spectrum_curve(exceptional, [3.0])


def test_single_level_bound_values(exceptional):
    assert single_level_bound(exceptional, 1.0) == pytest.approx(0.917283796, abs=1e-8)
    assert single_level_bound(exceptional, 1.0) >= hausdorff_spectrum(exceptional, 1.0)
