import pytest

from services.receiver import Plausibility
from services.worked_example import EXAMPLE_INJECTIONS, EXAMPLE_SENT, ExampleSettings, run_example


def test_example_values():
    result = run_example()
    assert result['lambda_b2_uw'] == pytest.approx(2.4, abs=0.05)
    assert result['gamma_upper_uw'] == pytest.approx(12.0, abs=0.2)
    assert result['lambda_w2_uw'] == pytest.approx(1.0, abs=0.15)
    assert result['lambda_adv2_uw'] == pytest.approx(1.0, abs=0.05)
    assert result['r_db'] == pytest.approx(3.45, abs=0.01)
    assert result['zeta'] == pytest.approx(2.21, abs=0.01)


def test_example_slot_rows():
    result = run_example()
    assert result['sent'] == list(EXAMPLE_SENT)
    assert result['received'] == [1, 0, 0, 0, -1, -1, 2, -1, 1, 0, 0, -1, 2, 0, -1, 0, -1, -1]
    assert result['energies_uw'] == [1, 0, 0, 0, 1, 1, 4, 1, 1, 0, 0, 1, 4, 0, 1, 0, 1, 1]
    assert result['aggregate_uw'] == pytest.approx(17.0)
    assert len(EXAMPLE_INJECTIONS) == 10
    assert sum(1 for v in EXAMPLE_SENT if v) == 5


def test_example_verdict_and_report():
    result = run_example()
    assert result['verdict'] == 'EnergyExceeded'
    lines = result['report'].splitlines()
    assert lines[-1] == 'AttackDetected: aggregate 17 > Γ 12'
    assert 'Injetado: 1,1,_,_,-1,_,1,-1,1,_,_,-1,1,_,_,_,-1,-1' in lines


def test_example_without_enlargement():
    result = run_example(ExampleSettings(d2_m=0.0))
    assert result['r_db'] == pytest.approx(10.0)
    assert any(line.startswith('d2 = 0: zeta') for line in result['report'].splitlines())
    assert Plausibility(result['verdict']) is Plausibility.PLAUSIBLE
    assert result['report'].splitlines()[-1].startswith('Plausible: aggregate 17 <= Γ')


def test_example_room_vanishes_at_landmark():
    result = run_example(ExampleSettings(d1_m=15.11, d2_m=32.68))
    assert abs(result['r_db']) < 0.05
    assert 'room ≈ 0 dB: o adversário não tem margem' in result['report']
