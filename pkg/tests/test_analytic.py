import math
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from services.analytic import (
    AnalyticParams,
    appendix_prob_delta,
    appendix_prob_within_threshold,
    best_k,
    best_k_scan,
    evaluate,
    hypergeom,
    p_given_x,
    p_inner,
    prob_evade_rcv,
    prob_noise_pass,
    prob_success,
    sweep,
)
from services.errors import ParameterError


def test_hypergeom_small_values():
    assert hypergeom(1, 1, 1, 0, exact=True) == Fraction(1, 2)
    assert hypergeom(2, 2, 1, 1, exact=True) == Fraction(2, 3)
    assert hypergeom(2, 2, 1, 1) == pytest.approx(4 / 6)
    assert hypergeom(3, 3, 4, 0) == 0.0


@pytest.mark.parametrize('k', [0, 1, 75, 149, 150])
def test_hypergeom_normalization(k):
    total = math.fsum(hypergeom(50, 100, x, k - x) for x in range(0, min(k, 50) + 1) if k - x >= 0)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_p_inner_without_injections_is_zero():
    assert p_inner(5, 5, 2, 0, 0, 0) == 0.0


def test_p_inner_general_and_full_forms_agree():
    alpha, beta = 3, 5
    for k in range(alpha + beta + 1):
        for x in range(max(0, k - beta), min(k, alpha) + 1):
            for g in range(x + 1):
                general = p_inner(alpha, beta, alpha, k, x, g, exact=True, form='general')
                full = p_inner(alpha, beta, alpha, k, x, g, exact=True, form='full')
                assert general == full
                assert p_inner(alpha, beta, alpha, k, x, g, form='general') == pytest.approx(float(full), abs=1e-12)


def test_p_inner_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        p_inner(3, 3, 1, 2, 3, 0)
    with pytest.raises(ParameterError):
        p_inner(3, 3, 1, 2, 1, 2)
    with pytest.raises(ParameterError):
        p_inner(3, 3, 1, 2, 1, 0, form='full')


def test_p_given_x_single_term_at_zero():
    assert p_given_x(4, 4, 2, 3, 0, exact=True) == p_inner(4, 4, 2, 3, 0, 0, exact=True)


def test_evade_is_zero_without_injections():
    assert prob_evade_rcv(50, 100, 2, 0) == 0.0
    assert prob_evade_rcv(5, 5, 1, 0, exact=True) == 0


def test_evade_small_case_by_hand():
    # um único pulso nunca faz Bin_beta superar Bin_alpha com r = 1
    assert prob_evade_rcv(2, 2, 1, 1, exact=True) == 0
    # k = 2: um em cada bin, anulado (1/2), sorteio do anulado (1/2) e do slot com pulso (1/2)
    both_bins = hypergeom(2, 2, 1, 1, exact=True)
    assert prob_evade_rcv(2, 2, 1, 2, exact=True) == both_bins * Fraction(1, 8)


@pytest.mark.parametrize('alpha,beta,r', [(5, 7, 1), (6, 10, 3), (10, 20, 4), (12, 12, 12)])
def test_exact_and_float_paths_agree(alpha, beta, r):
    for k in range(alpha + beta + 1):
        exact = prob_evade_rcv(alpha, beta, r, k, exact=True)
        approx = prob_evade_rcv(alpha, beta, r, k)
        assert approx == pytest.approx(float(exact), rel=1e-10, abs=1e-15)
        for zeta in (1.5, 3.0):
            assert prob_success(alpha, beta, r, zeta, k) == pytest.approx(
                float(prob_success(alpha, beta, r, zeta, k, exact=True)), rel=1e-10, abs=1e-15)


def test_success_with_infinite_room_equals_evade():
    for k in (0, 10, 40, 80):
        assert prob_success(30, 50, 2, math.inf, k, exact=True) == prob_evade_rcv(30, 50, 2, k, exact=True)


def test_success_never_exceeds_evade():
    ks = range(0, 151, 10)
    for zeta in (1.1, 2.0, 5.0):
        for k in ks:
            assert prob_success(50, 100, 2, zeta, k) <= prob_evade_rcv(50, 100, 2, k) + 1e-15


def test_success_rejects_nonpositive_room():
    with pytest.raises(ParameterError):
        prob_success(5, 5, 1, 0.0, 2)


def test_evade_curve_landmark_r2():
    curve = sweep('pevade', AnalyticParams(alpha=50, beta=100, r=2))
    k, p = best_k(curve)
    assert p == pytest.approx(0.27, abs=0.02)
    assert abs(k - 135) <= 10


def test_evade_curve_landmark_r8():
    curve = sweep('pevade', AnalyticParams(alpha=50, beta=100, r=8))
    k, p = best_k(curve)
    assert p == pytest.approx(0.0585, abs=0.006)
    assert abs(k - 130) <= 10


def test_noise_pass_landmark():
    p = prob_noise_pass(80, 100, 80, 40)
    assert p == pytest.approx(0.5377, abs=5e-4)
    # valor publicado truncado em duas casas
    assert math.floor(p * 100) / 100 == 0.53


def test_noise_pass_strict_ties():
    strict = prob_noise_pass(80, 100, 80, 40, ties_pass=False)
    assert strict == pytest.approx(0.4623, abs=5e-4)
    assert strict < prob_noise_pass(80, 100, 80, 40)
    exact = prob_noise_pass(6, 6, 3, 6, exact=True, ties_pass=False)
    assert prob_noise_pass(6, 6, 3, 6, ties_pass=False) == pytest.approx(float(exact), rel=1e-10)


def test_noise_pass_tends_to_half():
    alpha = 800
    p = prob_noise_pass(alpha, alpha, alpha, alpha)
    assert p == pytest.approx(0.5, abs=0.05)
    assert p >= 0.5


def test_noise_pass_exact_matches_float():
    for kappa in range(0, 13):
        exact = prob_noise_pass(6, 6, 3, kappa, exact=True)
        assert prob_noise_pass(6, 6, 3, kappa) == pytest.approx(float(exact), rel=1e-10, abs=1e-15)


@pytest.mark.slow
def test_success_bound_at_room_20():
    curve = sweep('psa', AnalyticParams(alpha=50, beta=500, r=50, zeta=20))
    assert curve['p'].max() < 0.16e-3


@pytest.mark.slow
def test_success_plateau_at_room_10():
    curve = sweep('psa', AnalyticParams(alpha=50, beta=500, r=50, zeta=10))
    k, p = best_k(curve)
    assert p == pytest.approx(0.73e-4, rel=0.15)
    assert abs(k - 495) <= 10


def test_appendix_single_pulse_annihilation():
    n, alpha = 10, 4
    assert appendix_prob_delta(n, alpha, 1, -1, exact=True) == Fraction(alpha, 2 * n)
    assert appendix_prob_delta(n, alpha, 0, 0, exact=True) == 1


def test_appendix_odd_parity_is_zero():
    assert appendix_prob_delta(10, 4, 3, 0) == 0.0
    assert appendix_prob_delta(10, 4, 3, 5) == 0.0


def test_appendix_normalization():
    for n in range(1, 21):
        for alpha in {0, n // 2, n}:
            for k in range(n + 1):
                total = math.fsum(appendix_prob_delta(n, alpha, k, d) for d in range(-k, k + 1))
                assert total == pytest.approx(1.0, abs=1e-10), (n, alpha, k)


def test_appendix_threshold_monotone_and_complete():
    n, alpha, k = 20, 6, 8
    values = [appendix_prob_within_threshold(n, alpha, k, g) for g in (1.0, 1.2, 1.5, 2.0, 2.5)]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))
    assert appendix_prob_within_threshold(n, alpha, k, 1 + k / alpha) == pytest.approx(1.0, abs=1e-12)
    assert appendix_prob_within_threshold(n, alpha, k, 1 + k / alpha, exact=True) == 1


def test_appendix_rejects_small_gamma_factor():
    with pytest.raises(ParameterError):
        appendix_prob_within_threshold(10, 4, 2, 0.5)


def test_probabilities_stay_in_unit_interval():
    rng = np.random.default_rng(2024)
    for _ in range(30):
        alpha, beta = (int(v) for v in rng.integers(1, 40, 2))
        r = int(rng.integers(1, min(alpha, beta) + 1))
        k = int(rng.integers(0, alpha + beta + 1))
        zeta = float(rng.uniform(1.0, 10.0))
        for p in (prob_evade_rcv(alpha, beta, r, k), prob_success(alpha, beta, r, zeta, k),
                  prob_noise_pass(alpha, beta, r, k)):
            assert 0.0 <= p <= 1.0


def test_analytic_params_validation():
    with pytest.raises(ParameterError):
        AnalyticParams(alpha=3, beta=3, r=4)
    with pytest.raises(ParameterError):
        AnalyticParams(alpha=3, beta=3, k=7)
    with pytest.raises(ParameterError):
        AnalyticParams(alpha=3, beta=3, zeta=0.0)


def test_evaluate_dispatch():
    params = AnalyticParams(alpha=6, beta=6, r=2, k=4, zeta=2.0, kappa=6)
    assert evaluate('pevade', params) == prob_evade_rcv(6, 6, 2, 4)
    assert evaluate('psa', params) == prob_success(6, 6, 2, 2.0, 4)
    assert evaluate('pnoise', params) == prob_noise_pass(6, 6, 2, 6)
    assert evaluate('appendix', params) == appendix_prob_within_threshold(12, 6, 4, 2.0)
    with pytest.raises(ParameterError):
        evaluate('other', params)


def test_sweep_frame_layout():
    df = sweep('pevade', AnalyticParams(alpha=4, beta=4, r=1))
    assert list(df.columns) == ['alpha', 'beta', 'r', 'zeta', 'k', 'p']
    assert df['k'].tolist() == list(range(9))
    assert df.loc[0, 'p'] == 0.0


def test_sweep_pnoise_uses_kappa():
    df = sweep('pnoise', AnalyticParams(alpha=80, beta=100, r=80, kappa=40))
    assert len(df) == 1
    assert df.loc[0, 'k'] == 40


def test_sweep_in_parallel_matches_serial():
    params = AnalyticParams(alpha=10, beta=10, r=2)
    pd.testing.assert_frame_equal(sweep('pevade', params, workers=2), sweep('pevade', params))


def test_best_k_prefers_smallest_on_tie():
    curve = pd.DataFrame({'k': [3, 1, 2], 'p': [0.5, 0.5, 0.1]})
    assert best_k(curve) == (1, 0.5)


def test_best_k_scan_over_r():
    scan = best_k_scan('pevade', AnalyticParams(alpha=10, beta=20), 'r', [1, 2, 4])
    assert scan['r'].tolist() == [1, 2, 4]
    # símbolos maiores reduzem a chance do adversário
    assert scan['p'].is_monotonic_decreasing
