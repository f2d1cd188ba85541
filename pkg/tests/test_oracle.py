from fractions import Fraction

import pytest

from services.analytic import prob_evade_rcv, prob_noise_pass, prob_success
from services.errors import ParameterError
from services.oracle import oracle_prob_evade, oracle_prob_noise_pass


def _grid(max_size):
    for alpha in range(1, max_size + 1):
        for beta in range(1, max_size + 1):
            for r in range(1, min(alpha, beta) + 1):
                for k in range(alpha + beta + 1):
                    yield alpha, beta, r, k


def test_oracle_small_case_by_hand():
    assert oracle_prob_evade(2, 2, 1, 2) == Fraction(4, 6) * Fraction(1, 8)
    assert oracle_prob_evade(2, 2, 1, 0) == 0


def test_evade_matches_oracle():
    for alpha, beta, r, k in _grid(4):
        assert prob_evade_rcv(alpha, beta, r, k, exact=True) == oracle_prob_evade(alpha, beta, r, k), \
            (alpha, beta, r, k)


@pytest.mark.parametrize('zeta', [1.25, 1.5, 2.0, 3.0])
def test_success_matches_gated_oracle(zeta):
    for alpha, beta, r, k in _grid(3):
        assert prob_success(alpha, beta, r, zeta, k, exact=True) == oracle_prob_evade(alpha, beta, r, k, zeta), \
            (alpha, beta, r, k, zeta)


def test_noise_pass_matches_oracle():
    for alpha, beta, r, kappa in _grid(4):
        assert prob_noise_pass(alpha, beta, r, kappa, exact=True) == oracle_prob_noise_pass(alpha, beta, r, kappa), \
            (alpha, beta, r, kappa)


def test_float_path_close_to_oracle():
    for alpha, beta, r, k in _grid(3):
        assert float(prob_evade_rcv(alpha, beta, r, k)) == pytest.approx(
            float(oracle_prob_evade(alpha, beta, r, k)), rel=1e-10, abs=1e-15)


def test_oracle_limits():
    with pytest.raises(ParameterError):
        oracle_prob_evade(7, 2, 1, 1)
    with pytest.raises(ParameterError):
        oracle_prob_evade(3, 2, 3, 1)
    with pytest.raises(ParameterError):
        oracle_prob_noise_pass(2, 2, 1, 5)


@pytest.mark.slow
def test_evade_matches_oracle_up_to_six():
    for alpha, beta, r, k in _grid(6):
        assert prob_evade_rcv(alpha, beta, r, k, exact=True) == oracle_prob_evade(alpha, beta, r, k), \
            (alpha, beta, r, k)
