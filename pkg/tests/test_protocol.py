import pytest

from services.adversary import AttackPlan, plan_attack
from services.channel import LinkModel, tof_ns
from services.codec import CodeParams
from services.errors import ParameterError, ProtocolStateError
from services.protocol import (
    Phase,
    ProtocolState,
    alternation_schedule,
    commitment_phase,
    distance_interval,
    run_session,
    verification_phase,
)
from services.receiver import AttackReason, DetectionOutcome, Verdict


def _replay(params, delay_ns=200.0):
    return AttackPlan(k=0, replay_delay_ns=delay_ns, replay_gain_db=3.0, slot_spacing_ns=params.ts_ns)


def test_commitment_without_attack_is_true_tof():
    assert commitment_phase(LinkModel(d1_m=10.0)) == pytest.approx(33.36, abs=0.01)


def test_commitment_moves_half_the_delay():
    link = LinkModel(d1_m=10.0)
    assert commitment_phase(link, 200.0) - commitment_phase(link) == pytest.approx(100.0)


def test_commitment_rejects_negative_delay():
    with pytest.raises(ParameterError):
        commitment_phase(LinkModel(d1_m=10.0), -1.0)


def test_commitment_records_transition():
    state = ProtocolState.for_range(100.0, session_id='s1')
    commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    assert state.phase == Phase.COMMITTED
    assert state.t_commit_tof == pytest.approx(tof_ns(10.0))
    assert state.trace == [f"s1 Committed t_c={tof_ns(10.0):.3f}ns"]


def test_commitment_beyond_range_alarms():
    state = ProtocolState.for_range(100.0)
    commitment_phase(LinkModel(d1_m=90.0), 200.0, state)
    assert state.phase == Phase.ALARMED
    assert state.reason == AttackReason.RANGE_EXCEEDED


def test_phases_must_follow_order():
    state = ProtocolState.for_range()
    outcome = DetectionOutcome(Verdict.CODE_ACCEPTED, toa_ns=66.7)
    with pytest.raises(ProtocolStateError):
        verification_phase(state, outcome)
    commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    with pytest.raises(ProtocolStateError):
        commitment_phase(LinkModel(d1_m=10.0), 0.0, state)


def test_verification_with_round_trip_toa():
    state = ProtocolState.for_range()
    t_commit = commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    assert verification_phase(state, DetectionOutcome(Verdict.CODE_ACCEPTED, toa_ns=2 * t_commit)) == Phase.VERIFIED
    assert state.t_verify_tof == pytest.approx(t_commit)


def test_verification_mismatch_and_attack_verdicts():
    state = ProtocolState.for_range()
    t_commit = commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    assert verification_phase(state, DetectionOutcome(Verdict.CODE_ACCEPTED, toa_ns=2 * t_commit + 1.0)) \
        == Phase.ALARMED
    assert state.reason == AttackReason.TOF_MISMATCH

    state = ProtocolState.for_range()
    commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    attack = DetectionOutcome(Verdict.ATTACK_DETECTED, reason=AttackReason.ENERGY_EXCEEDED)
    assert verification_phase(state, attack) == Phase.ALARMED
    assert state.reason == AttackReason.ENERGY_EXCEEDED

    state = ProtocolState.for_range()
    commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    assert verification_phase(state, DetectionOutcome(Verdict.NO_CODE_FOUND)) == Phase.ALARMED
    assert state.reason == AttackReason.TOF_MISMATCH


def test_alarmed_is_terminal():
    state = ProtocolState.for_range()
    commitment_phase(LinkModel(d1_m=10.0), 0.0, state)
    verification_phase(state, DetectionOutcome(Verdict.NO_CODE_FOUND))
    with pytest.raises(ProtocolStateError):
        verification_phase(state, DetectionOutcome(Verdict.CODE_ACCEPTED, toa_ns=66.7))


def test_honest_session_is_verified(large_params, noisy_link):
    result = run_session(large_params, noisy_link, seed=3, session_id='honest')
    assert result.phase == Phase.VERIFIED
    assert result.reason is None
    assert abs(result.t_verify_tof - result.t_commit_tof) <= 0.33
    assert set(result.detections) == {'challenge', 'response'}
    assert not result.enlarged_undetected
    assert result.trace[-1].startswith('honest Verified')


def test_replayed_response_raises_tof_mismatch(large_params, noisy_link):
    result = run_session(large_params, noisy_link, _replay(large_params), seed=3)
    assert result.phase == Phase.ALARMED
    assert result.reason == AttackReason.TOF_MISMATCH
    assert result.t_commit_tof == pytest.approx(tof_ns(50.0) + 100.0)
    assert result.t_verify_tof == pytest.approx(tof_ns(50.0), abs=0.33)
    assert not result.enlarged_undetected


def test_single_frame_round_trip_session(large_params, noisy_link):
    result = run_session(large_params, noisy_link, seed=5, bidirectional=False)
    assert result.phase == Phase.VERIFIED
    assert set(result.detections) == {'round_trip'}


def test_session_beyond_range_stops_at_commitment(small_params):
    link = LinkModel(d1_m=90.0, e_db=-10.0)
    result = run_session(small_params, link, _replay(small_params))
    assert result.phase == Phase.ALARMED
    assert result.reason == AttackReason.RANGE_EXCEEDED
    assert result.detections == {}


def test_session_is_seeded(small_params, noisy_link):
    plan = plan_attack(small_params, 8, seed=2)
    a = run_session(small_params, noisy_link, plan, seed=9)
    b = run_session(small_params, noisy_link, plan, seed=9)
    assert (a.phase, a.reason, a.t_verify_tof) == (b.phase, b.reason, b.t_verify_tof)
    assert a.trace == b.trace


def test_invalid_attacked_leg(small_params, noisy_link):
    with pytest.raises(ParameterError):
        run_session(small_params, noisy_link, attacked_legs=('uplink',))


def test_distance_interval():
    interval = distance_interval(10.0, 12.0)
    assert interval.contains(11.0)
    assert not interval.contains(12.5)
    assert distance_interval(10.0, 9.95, tolerance_m=0.1).upper_m == 10.0
    with pytest.raises(ParameterError):
        distance_interval(12.0, 10.0)


def test_alternation_schedule():
    assert alternation_schedule(3) == ['reduction', 'enlargement', 'reduction']
    assert alternation_schedule(2, ('enlargement',)) == ['enlargement', 'enlargement']
    assert alternation_schedule(0) == []
    with pytest.raises(ParameterError):
        alternation_schedule(2, ('sideways',))


@pytest.mark.slow
def test_honest_and_replay_sessions_at_scale(noisy_link):
    params = CodeParams.of(500, 500)
    sessions = 10_000
    verified = mismatched = 0
    for seed in range(sessions):
        honest = run_session(params, noisy_link, seed=seed)
        verified += honest.phase == Phase.VERIFIED
        replayed = run_session(params, noisy_link, _replay(params), seed=seed)
        mismatched += replayed.reason == AttackReason.TOF_MISMATCH
    assert verified == sessions
    assert mismatched >= 0.999 * sessions
