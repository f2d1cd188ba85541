from collections import Counter

import pytest

from services.codec import CodeParams, VerificationCode, bins, generate_code, spacing_rule_ok
from services.errors import ParameterError


FIGURE_ROW = '0,-1,0,0,0,-1,1,0,0,0,0,0,1,0,-1,0,0,0'


def test_generate_code_has_alpha_pulses():
    code = generate_code(CodeParams.of(5, 13), seed=123)
    assert code.params.n == 18
    assert sum(1 for s in code.slots if s != 0) == 5
    assert all(s in (-1, 0, 1) for s in code.slots)


def test_nonzero_slots_are_bin_alpha():
    code = generate_code(CodeParams.of(7, 9), seed=5)
    assert {i for i, s in enumerate(code.slots) if s != 0} == set(code.bin_alpha)
    assert set(code.bin_alpha).isdisjoint(code.bin_beta)
    assert set(code.bin_alpha) | set(code.bin_beta) == set(range(16))


def test_single_slot_code():
    code = generate_code(CodeParams.of(1, 0), seed=99)
    assert code.slots in ((1,), (-1,))
    assert code.bin_alpha == (0,)
    assert code.bin_beta == ()


def test_generate_code_is_deterministic():
    params = CodeParams.of(10, 30, r=3)
    assert generate_code(params, 42) == generate_code(params, 42)
    assert generate_code(params, 42).slots != generate_code(params, 43).slots


def test_positions_uniform_and_signs_unbiased():
    params = CodeParams.of(2, 2)
    seeds = 6000
    counts = Counter()
    positive = 0
    for seed in range(seeds):
        code = generate_code(params, seed)
        counts[code.bin_alpha] += 1
        positive += sum(1 for s in code.slots if s == 1)

    assert len(counts) == 6
    for subset, count in counts.items():
        assert count / seeds == pytest.approx(1 / 6, abs=0.03), subset
    assert positive / (2 * seeds) == pytest.approx(0.5, abs=0.03)


def test_bins_of_empty_code():
    code = generate_code(CodeParams.of(0, 3), seed=1)
    assert bins(code) == ((), (0, 1, 2))


def test_figure_code_round_trip_text():
    code = VerificationCode.from_text(FIGURE_ROW)
    assert code.to_text() == FIGURE_ROW
    # posições 1-based {2, 6, 7, 13, 15}
    assert [i + 1 for i in code.bin_alpha] == [2, 6, 7, 13, 15]
    assert code.params.alpha == 5 and code.params.beta == 13


@pytest.mark.parametrize('kwargs', [
    dict(n=10, alpha=5, beta=4),
    dict(n=10, alpha=5, beta=5, r=6),
    dict(n=10, alpha=5, beta=5, r=0),
    dict(n=10, alpha=5, beta=5, ts_ns=2.0, tp_ns=2.0),
    dict(n=4, alpha=-1, beta=5),
])
def test_invalid_params(kwargs):
    with pytest.raises(ParameterError):
        CodeParams(**kwargs)


def test_from_slots_rejects_other_values():
    with pytest.raises(ParameterError):
        VerificationCode.from_slots([0, 2, -1])


def test_spacing_rule():
    # 100 m de alcance: 2d/c ~ 667 ns
    assert spacing_rule_ok(1000.0, 100.0, 0.2998)
    assert not spacing_rule_ok(500.0, 100.0, 0.2998)
