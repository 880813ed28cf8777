import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ota_ada import bounds
from ota_ada.bounds import (
    G_INFIMUM,
    TOLERANCES,
    AccuracySpec,
    BracketError,
    MechanismPoint,
    OutOfRangeError,
    SystemConfig,
)
from ota_ada.special_functions import DomainError

ACC = AccuracySpec(0.1, 0.05)

# 40-digit mpmath evaluations of the W_{-1} closed form, frozen
G_REF = {
    1.0: 3.146193220620582585,
    5.0: 8.090717405155484596,
    20.0: 24.18576420404080548,
    100.0: 105.6602285548499570,
}
G_INV_250 = 243.4785390821377536
K2_AT_001 = 3354.216081510930712  # 0.0125 * exp(12.5)
K2_AT_00169 = 0.99458553474206552

LAMS = np.linspace(0.0, 1.0, 1_000_002)[1:-1]  # 10^6 interior points


def grid_min(c):
    vals = (c - np.log1p(-LAMS)) / LAMS
    i = int(np.argmin(vals))
    return float(vals[i]), float(LAMS[i])


# --- f_lambda / lambda_star / g

def test_f_lambda_examples():
    assert bounds.f_lambda(0.5, 1.0) == pytest.approx(2 * (1 + math.log(2)), rel=1e-15)
    assert bounds.f_lambda(0.5, 0.0) == pytest.approx(2 * math.log(2), rel=1e-15)
    # divergence at lambda -> 1 is logarithmic: f(1 - 1e-6, 1) ~ 1 + 6 ln 10
    assert bounds.f_lambda(0.999999, 1.0) == pytest.approx((1 + 6 * math.log(10)) / 0.999999, rel=1e-9)
    tail = [bounds.f_lambda(1 - 10.0 ** -e, 1.0) for e in range(1, 16)]
    assert all(b > a for a, b in zip(tail, tail[1:])) and tail[-1] > 35


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.1, 1.5])
def test_f_lambda_domain(lam):
    with pytest.raises(DomainError):
        bounds.f_lambda(lam, 1.0)


def test_lambda_star_stationarity_at_one():
    lam = bounds.lambda_star(1.0)
    assert 0 < lam < 1
    assert lam / (1 - lam) + math.log1p(-lam) == pytest.approx(1.0, abs=1e-9)


def test_lambda_star_matches_grid_argmin():
    _, arg = grid_min(5.0)
    assert bounds.lambda_star(5.0) == pytest.approx(arg, abs=2e-6)


def test_lambda_star_small_c():
    assert 0 < bounds.lambda_star(1e-6) < 0.01


@pytest.mark.parametrize("c", [0.0, -1.0, math.inf, math.nan])
def test_g_and_lambda_star_domain(c):
    with pytest.raises(DomainError):
        bounds.g(c)
    with pytest.raises(DomainError):
        bounds.lambda_star(c)


@pytest.mark.parametrize("c, ref", sorted(G_REF.items()))
def test_g_frozen_reference(c, ref):
    assert bounds.g(c) == pytest.approx(ref, rel=1e-13)


def test_g_one_matches_grid():
    assert bounds.g(1.0) == pytest.approx(grid_min(1.0)[0], rel=1e-6)


def test_g_matches_scipy_lambertw_formula():
    special = pytest.importorskip("scipy.special")
    for c in [0.5, 1.0, 3.0, 20.0, 300.0]:
        w = special.lambertw(-math.exp(-(c + 1)), -1).real
        assert bounds.g(c) == pytest.approx(w * (c + math.log(-w)) / (1 + w), rel=1e-10)


def test_g_equals_f_at_lambda_star():
    for c in [1e-6, 0.01, 1.0, 37.0, 1e4]:
        assert bounds.g(c) == pytest.approx(bounds.f_lambda(bounds.lambda_star(c), c), rel=1e-9)


def test_g_near_linear_at_20():
    second = abs(bounds.g(21) - 2 * bounds.g(20) + bounds.g(19))
    assert second <= 1e-2 * bounds.g(20)


def test_g_large_c_finite():
    for c in [100.0, 1e6, 1e300]:
        assert math.isfinite(bounds.g(c))
    assert bounds.g(1e300) / 1e300 == pytest.approx(1.0, rel=1e-9)


def test_g_brute_force_50_random():
    rng = np.random.default_rng(7)
    for c in rng.uniform(0.01, 50.0, 50):
        ref, _ = grid_min(c)
        assert abs(bounds.g(c) - ref) / bounds.g(c) <= TOLERANCES.oracle_rel


def test_stationarity_50_random():
    rng = np.random.default_rng(8)
    for c in rng.uniform(0.01, 50.0, 50):
        lam = bounds.lambda_star(c)
        assert abs(lam / (1 - lam) + math.log1p(-lam) - c) <= TOLERANCES.stationarity_abs


def test_g_strictly_increasing():
    cs = np.geomspace(1e-12, 1e8, 5000)
    gs = [bounds.g(c) for c in cs]
    assert all(b > a for a, b in zip(gs, gs[1:]))


def test_g_infimum_is_one():
    # g(c) = 1 + sqrt(2c) + O(c) as c -> 0, never below 1
    for c in [1e-4, 1e-8, 1e-12, 1e-20]:
        assert bounds.g(c) > G_INFIMUM
        assert bounds.g(c) - 1 == pytest.approx(math.sqrt(2 * c), rel=2 * math.sqrt(c) + 1e-6)
    assert bounds.g(1e-300) == G_INFIMUM  # rounds to the infimum in double precision


# --- g_inverse

@pytest.mark.parametrize("c", [5.0, 100.0, 0.001, 1e5])
def test_g_inverse_roundtrip(c):
    assert bounds.g_inverse(bounds.g(c)) == pytest.approx(c, rel=1e-8)


def test_g_inverse_frozen():
    assert bounds.g_inverse(250.0) == pytest.approx(G_INV_250, rel=1e-9)


def test_g_inverse_half_of_g1_is_in_range():
    # g(1)/2 = 1.57 is above inf g = 1, so it is attainable
    y = bounds.g(1.0) * 0.5
    assert bounds.g(bounds.g_inverse(y)) == pytest.approx(y, rel=1e-9)


@pytest.mark.parametrize("y", [0.5, 1.0, 1.0 + 1e-7, -3.0, math.inf])
def test_g_inverse_out_of_range(y):
    with pytest.raises(OutOfRangeError):
        bounds.g_inverse(y)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.001, max_value=1e9))
def test_g_inverse_property(y):
    assert bounds.g(bounds.g_inverse(y)) == pytest.approx(y, rel=TOLERANCES.root_rel)


# --- alpha_of

def test_alpha_of_against_transcription():
    n, sigma, k, beta = 10**6, 0.01, 1000, 0.05
    c = k / (n * sigma ** 2)
    first = math.sqrt(2 / (n * beta) * grid_min(c)[0])
    second = math.sqrt(8 * sigma ** 2 * math.log(4 * k / beta))
    got = bounds.alpha_of(MechanismPoint(n, sigma, k), beta)
    assert got == pytest.approx(max(first, second), rel=1e-6)


def test_alpha_of_second_term_inverts_k2():
    k = 0.05 / 4 * math.exp(0.1 ** 2 / (8 * 0.01 ** 2))
    assert bounds.alpha_of(MechanismPoint(10**9, 0.01, k), 0.05) == pytest.approx(0.1, rel=1e-12)


@given(st.integers(1, 10**8), st.floats(1e-4, 1.0), st.floats(1e-3, 1e6))
def test_alpha_of_monotone_in_k(n, sigma, k):
    a1 = bounds.alpha_of(MechanismPoint(n, sigma, k), 0.05)
    a2 = bounds.alpha_of(MechanismPoint(n, sigma, 2 * k), 0.05)
    assert a2 >= a1


def test_alpha_of_bad_beta():
    with pytest.raises(DomainError):
        bounds.alpha_of(MechanismPoint(10, 0.1, 1), 1.0)


# --- k1, k2, k_budget

def test_k1_scaling():
    assert bounds.k1(0.02, 10**6, ACC) == pytest.approx(4 * bounds.k1(0.01, 10**6, ACC), rel=1e-14)


def test_k1_reference_value():
    assert bounds.k1(0.01, 10**6, ACC) == pytest.approx(1e6 * 1e-4 * G_INV_250, rel=1e-9)


def test_k1_small_n_out_of_range():
    assert bounds.min_dataset_size(ACC) == pytest.approx(4000.0)
    with pytest.raises(OutOfRangeError):
        bounds.k1(0.01, 10, ACC)
    with pytest.raises(OutOfRangeError):
        bounds.k1(0.01, 4000, ACC)
    assert bounds.k1(0.01, 4001, ACC) > 0


def test_k2_values():
    assert bounds.k2(0.0169, ACC) == pytest.approx(1.0, rel=0.05)
    assert bounds.k2(0.0169, ACC) == pytest.approx(K2_AT_00169, rel=1e-12)
    assert bounds.k2(0.01, ACC) == pytest.approx(K2_AT_001, rel=1e-12)
    assert bounds.k2(1e6, ACC) == pytest.approx(0.0125, rel=1e-9)


def test_k2_saturates():
    assert bounds.k2(1e-5, ACC) == math.inf
    b = bounds.k_budget(1e-5, 10**6, ACC)
    assert b.k2_saturated and math.isfinite(b.log_k2) and b.k == b.k1


def test_k2_threshold_is_exact():
    s = bounds.k2_threshold_sigma(ACC)
    assert s == pytest.approx(0.0169, abs=5e-4)
    assert bounds.k2(s, ACC) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("n", [10**4, 10**5, 10**6, 10**7, 10**8])
def test_budget_below_one_past_0018(n):
    assert bounds.k_budget(0.018, n, ACC).k < 1


def test_budget_at_threshold_is_k2_limited():
    b = bounds.k_budget(0.0169, 10**6, ACC)
    assert b.limited_by == "k2" and b.regime == "under-leakage"
    assert b.k == pytest.approx(1.0, rel=0.05)
    assert b.k1 > 1e4


def test_budget_small_n_flags_reason():
    b = bounds.k_budget(0.01, 10, ACC)
    assert b.k == 0.0 and not b.k1_in_range and "too small" in b.reason


def test_budget_min_consistency_1000():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        sigma = float(10 ** rng.uniform(-3.5, 0))
        n = int(10 ** rng.uniform(3.7, 9))
        b = bounds.k_budget(sigma, n, ACC)
        if not b.k1_in_range:
            continue
        assert b.k == min(bounds.k1(sigma, n, ACC), bounds.k2(sigma, ACC))
        assert b.k_floor == math.floor(b.k)


def test_budget_never_overpromises():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 200:
        n = int(10 ** rng.uniform(4, 8))
        sigma = float(10 ** rng.uniform(-3, -0.5))
        acc = AccuracySpec(0.1, float(rng.uniform(0.01, 0.2)))
        b = bounds.k_budget(sigma, n, acc)
        if b.k <= 0 or b.k2_saturated:
            continue
        checked += 1
        assert bounds.alpha_of(MechanismPoint(n, sigma, b.k), acc.beta) <= acc.alpha * (1 + 1e-6)


# --- khat1 fit

def test_khat1_fit_residual():
    fit = bounds.khat1_fit((10.0, 1e4), 1000)
    assert fit.fit_range_c == (10.0, 1e4)
    assert fit.max_rel_residual <= 0.02


def test_khat1_predicts_k1():
    fit = bounds.khat1_fit((10.0, 1e4), 1000)
    for sigma in np.linspace(0.001, 0.02, 40):
        exact = bounds.k1(sigma, 10**5, ACC)
        assert abs(fit.khat1(sigma, 10**5, ACC) - exact) / exact <= 0.05


def test_khat1_fit_stable_under_refinement():
    a = bounds.khat1_fit((10.0, 1e4), 1000)
    b = bounds.khat1_fit((10.0, 1e4), 2000)
    assert b.w == pytest.approx(a.w, rel=0.01)
    assert b.b == pytest.approx(a.b, rel=0.01)


@pytest.mark.parametrize("rng_, samples", [((5.0, 100.0), 100), ((10.0, 10.0), 100), ((10.0, 100.0), 1)])
def test_khat1_degenerate(rng_, samples):
    with pytest.raises(ValueError):
        bounds.khat1_fit(rng_, samples)


# --- s_opt and amplitudes

def test_s_opt_is_crossing():
    s = bounds.s_opt(10**6, ACC)
    assert 0.008 <= s <= 0.01
    assert bounds.k1(s, 10**6, ACC) == pytest.approx(bounds.k2(s, ACC), rel=1e-9)


@pytest.mark.parametrize("n", [10**5, 10**6, 10**7])
def test_s_opt_locally_optimal(n):
    s = bounds.s_opt(n, ACC)
    best = bounds.k_budget(s, n, ACC).k
    for f in (0.8, 0.95, 1.05, 1.2):
        assert bounds.k_budget(s * f, n, ACC).k <= best


def test_s_opt_slow_variation():
    a, b = bounds.s_opt(10**6, ACC), bounds.s_opt(10**7, ACC)
    assert abs(b - a) / a <= 0.2


def test_s_opt_propagates_range_error():
    with pytest.raises(OutOfRangeError):
        bounds.s_opt(100, ACC)


def test_bracket_error_carries_interval():
    err = BracketError("x", 1.0, 2.0)
    assert (err.lo, err.hi) == (1.0, 2.0) and "[1.0, 2.0]" in str(err)


def test_to_equivalent_examples():
    eq = bounds.to_equivalent(SystemConfig(n0=10**4, L=10, sigma_ch=0.5, A_t=1.0))
    assert eq.n_eq == 10**5 and eq.sigma_eq_normalized == pytest.approx(0.05)
    one = bounds.to_equivalent(SystemConfig(n0=77, L=1, sigma_ch=0.3, A_t=2.0))
    assert one.n_eq == 77 and one.sigma_eq_normalized == 0.3 / 2.0


@given(st.integers(1, 10**6), st.integers(1, 1000), st.floats(1e-3, 10.0))
def test_equivalent_product_independent_of_L(n0, L, sigma):
    eq = bounds.to_equivalent(SystemConfig(n0=n0, L=L, sigma_ch=sigma))
    assert eq.n_eq * eq.sigma_eq == pytest.approx(n0 * sigma, rel=1e-12)


def test_optimal_amplitude_definitional():
    a = bounds.optimal_amplitude(SystemConfig(n0=10**6, L=1, sigma_ch=0.01), ACC)
    assert a == 0.01 / bounds.s_opt(10**6, ACC)


def test_optimal_amplitude_halves_when_L_doubles():
    for L in (30, 60, 120, 240):
        cfg = SystemConfig(n0=10**4, L=L, sigma_ch=0.5)
        cfg2 = SystemConfig(n0=10**4, L=2 * L, sigma_ch=0.5)
        r = bounds.optimal_amplitude(cfg2, ACC) / bounds.optimal_amplitude(cfg, ACC)
        assert 0.4 <= r <= 0.6


def test_optimal_amplitude_locally_optimal():
    base = SystemConfig(n0=10**4, L=50, sigma_ch=0.5)
    a = bounds.optimal_amplitude(base, ACC)

    def k_at(amp):
        eq = bounds.to_equivalent(SystemConfig(n0=base.n0, L=base.L, sigma_ch=0.5, A_t=amp))
        return bounds.k_budget(eq.sigma_eq_normalized, eq.n_eq, ACC).k

    assert k_at(a) >= k_at(a * 0.8) and k_at(a) >= k_at(a * 1.2)


def test_optimal_amplitude_needs_noise():
    with pytest.raises(DomainError):
        bounds.optimal_amplitude(SystemConfig(n0=10**6, sigma_ch=0.0), ACC)


@pytest.mark.parametrize("ratio, db", [(125.0, 38.9), (100.0, 37.0), (1 / 0.017, 32.4), (58.8, 32.4)])
def test_snr_db(ratio, db):
    cfg = SystemConfig(n0=1, sigma_ch=1.0, A_t=ratio)
    assert bounds.snr_db(cfg) == pytest.approx(db, abs=0.05)
    assert bounds.amplitude_ratio(cfg) == ratio


# --- type validation

@pytest.mark.parametrize("alpha, beta", [(0.0, 0.05), (1.5, 0.05), (0.1, 0.0), (0.1, 1.0)])
def test_accuracy_spec_validation(alpha, beta):
    with pytest.raises(DomainError):
        AccuracySpec(alpha, beta)


@pytest.mark.parametrize("kwargs", [dict(n0=0), dict(n0=1, L=0), dict(n0=1, sigma_ch=-1.0),
                                    dict(n0=1, A_t=0.0), dict(n0=1, sigma_ch=math.inf)])
def test_system_config_validation(kwargs):
    with pytest.raises(DomainError):
        SystemConfig(**kwargs)


@pytest.mark.parametrize("args", [(0, 0.1, 1), (1, 0.0, 1), (1, 0.1, 0)])
def test_mechanism_point_validation(args):
    with pytest.raises(DomainError):
        MechanismPoint(*args)
