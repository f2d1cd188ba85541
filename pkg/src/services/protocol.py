"""
Máquina de estados do ranging com compromisso e verificação de distância.

Tempos são ToF equivalentes de uma via (RTT/2). Um atraso delta numa perna
aumenta o RTT em delta, então t^c e t^v andam delta/2.

Fases: Idle -> Committed -> Verified | Alarmed (Alarmed é terminal).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import cycle, islice
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from constants.config import MAX_RANGE_M, PROTOCOL_PRECISION_NS
from constants.radio import SPEED_OF_LIGHT_M_PER_NS
from services.adversary import AttackPlan
from services.channel import LinkModel, build_frame, tof_ns
from services.codec import CodeParams, generate_code
from services.errors import ParameterError, ProtocolStateError
from services.receiver import (
    AttackReason,
    DetectionOutcome,
    ReceiverConfig,
    Verdict,
    backtrack_detect,
    compute_thresholds,
)

logger = logging.getLogger(__name__)

LEGS = ('challenge', 'response')


class Phase(str, Enum):
    IDLE = 'Idle'
    COMMITTED = 'Committed'
    VERIFIED = 'Verified'
    ALARMED = 'Alarmed'


@dataclass
class ProtocolState:
    """Estado de uma sessão; `trace` guarda as transições em texto."""
    t_max_tof: float
    session_id: str = 'session'
    t_commit_tof: Optional[float] = None
    t_verify_tof: Optional[float] = None
    phase: Phase = Phase.IDLE
    reason: Optional[AttackReason] = None
    trace: List[str] = field(default_factory=list)

    @classmethod
    def for_range(cls, max_range_m: float = MAX_RANGE_M, session_id: str = 'session') -> 'ProtocolState':
        return cls(t_max_tof=tof_ns(max_range_m), session_id=session_id)

    def record(self, message: str) -> None:
        self.trace.append(f"{self.session_id} {self.phase.value} {message}")

    def alarm(self, reason: AttackReason, message: str = '') -> None:
        self.phase = Phase.ALARMED
        self.reason = reason
        self.record(f"reason={reason.value}{' ' + message if message else ''}")
        logger.warning(f"sessão {self.session_id}: alarme {reason.value}")


def commitment_phase(link: LinkModel, adversary_delay_ns: float = 0.0,
                     state: Optional[ProtocolState] = None) -> float:
    """
    t^c = ToF real + atraso/2 (o compromisso é seguro contra redução, não
    contra ampliação). Com `state`, registra Committed ou Alarmed{RangeExceeded}.
    """
    if adversary_delay_ns < 0:
        raise ParameterError(f"atraso do adversário deve ser >= 0 (recebido {adversary_delay_ns})")
    t_commit = tof_ns(link.d1_m) + adversary_delay_ns / 2.0
    if state is None:
        return t_commit
    if state.phase != Phase.IDLE:
        raise ProtocolStateError(f"compromisso exige fase Idle (atual: {state.phase.value})")

    state.t_commit_tof = t_commit
    if t_commit > state.t_max_tof:
        state.alarm(AttackReason.RANGE_EXCEEDED, f"t_c={t_commit:.3f}ns t_max={state.t_max_tof:.3f}ns")
    else:
        state.phase = Phase.COMMITTED
        state.record(f"t_c={t_commit:.3f}ns")
    return t_commit


def verification_phase(state: ProtocolState,
                       detection: Union[DetectionOutcome, Sequence[DetectionOutcome]],
                       precision_ns: float = PROTOCOL_PRECISION_NS) -> Phase:
    """
    Compara t^v com t^c.

    Uma detecção isolada traz o ToA em RTT; uma sequência (uma por perna) traz
    ToAs de uma via. Em ambos os casos t^v = soma dos ToAs / 2.
    """
    if state.phase != Phase.COMMITTED:
        raise ProtocolStateError(f"verificação exige fase Committed (atual: {state.phase.value})")
    outcomes = [detection] if isinstance(detection, DetectionOutcome) else list(detection)
    if not outcomes:
        raise ParameterError("nenhuma detecção para verificar")

    for outcome in outcomes:
        if outcome.verdict == Verdict.ATTACK_DETECTED:
            state.alarm(outcome.reason or AttackReason.ENERGY_EXCEEDED)
            return state.phase
    if any(o.verdict == Verdict.NO_CODE_FOUND for o in outcomes):
        state.alarm(AttackReason.TOF_MISMATCH, "código não encontrado")
        return state.phase

    state.t_verify_tof = sum(o.toa_ns for o in outcomes) / 2.0
    if abs(state.t_verify_tof - state.t_commit_tof) > precision_ns:
        state.alarm(AttackReason.TOF_MISMATCH, f"t_c={state.t_commit_tof:.3f}ns t_v={state.t_verify_tof:.3f}ns")
    else:
        state.phase = Phase.VERIFIED
        state.record(f"t_v={state.t_verify_tof:.3f}ns")
    return state.phase


@dataclass(frozen=True)
class SessionResult:
    session_id: str
    phase: Phase
    reason: Optional[AttackReason]
    t_commit_tof: Optional[float]
    t_verify_tof: Optional[float]
    detections: Dict[str, DetectionOutcome]
    trace: Tuple[str, ...]
    enlarged: bool = False

    @property
    def enlarged_undetected(self) -> bool:
        """Sucesso do adversário: verificação aceitou um t^c ampliado."""
        return self.phase == Phase.VERIFIED and self.enlarged


def _seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def run_session(code_params: CodeParams, link: LinkModel, plan: Optional[AttackPlan] = None,
                receiver_cfg: Optional[ReceiverConfig] = None, seed: int = 0,
                attacked_legs: Sequence[str] = ('response',), bidirectional: bool = True,
                precision_ns: float = PROTOCOL_PRECISION_NS, max_range_m: float = MAX_RANGE_M,
                session_id: str = 'session') -> SessionResult:
    """
    Sessão completa: compromisso, quadros das pernas, detecção e verificação.

    bidirectional=False usa um único quadro na timeline de RTT.
    """
    cfg = receiver_cfg or ReceiverConfig(r=code_params.r)
    if any(leg not in LEGS for leg in attacked_legs):
        raise ParameterError(f"pernas inválidas: {attacked_legs} (opções: {LEGS})")
    legs = LEGS if bidirectional else ('round_trip',)
    attacked = {leg for leg in legs if leg in attacked_legs or not bidirectional}

    delay = 0.0
    if plan is not None and plan.replay_delay_ns is not None:
        delay = plan.replay_delay_ns * len(attacked)

    state = ProtocolState.for_range(max_range_m, session_id)
    t_commit = commitment_phase(link, delay, state)
    detections: Dict[str, DetectionOutcome] = {}
    if state.phase == Phase.ALARMED:
        return _result(state, detections)

    committed_m = t_commit * SPEED_OF_LIGHT_M_PER_NS
    thresholds = compute_thresholds(link, code_params, committed_m, cfg)
    one_way = tof_ns(link.d1_m)
    seeds = _seeds(seed, 3 * len(legs))
    for i, leg in enumerate(legs):
        code_seed, noise_seed, rx_seed = seeds[3 * i:3 * i + 3]
        code = generate_code(code_params, code_seed)
        arrival = one_way if bidirectional else 2.0 * one_way
        frame = build_frame(code, link, plan if leg in attacked else None, arrival_ns=arrival,
                            step_ns=cfg.backtrack_step_ns, lead_ns=cfg.backtrack_window_ns,
                            noise_seed=noise_seed)
        detections[leg] = backtrack_detect(frame, code, link, replace(cfg, rng_seed=rx_seed), thresholds)
        state.record(f"{leg} verdict={detections[leg].verdict.value}")

    verification_phase(state, [detections[leg] for leg in legs], precision_ns)
    logger.debug(f"sessão {session_id}: {state.phase.value}")
    return _result(state, detections, enlarged=delay > 0)


def _result(state: ProtocolState, detections: Dict[str, DetectionOutcome], enlarged: bool = False) -> SessionResult:
    return SessionResult(session_id=state.session_id, phase=state.phase, reason=state.reason,
                         t_commit_tof=state.t_commit_tof, t_verify_tof=state.t_verify_tof,
                         detections=detections, trace=tuple(state.trace), enlarged=enlarged)


@dataclass(frozen=True)
class DistanceInterval:
    lower_m: float
    upper_m: float

    def contains(self, d_m: float) -> bool:
        return self.lower_m <= d_m <= self.upper_m


def distance_interval(d_enlargement_verified_m: float, d_reduction_verified_m: float,
                      tolerance_m: float = 0.0) -> DistanceInterval:
    """
    d1 <= d <= d2: a verificação contra ampliação dá o limite inferior, a
    contra redução (distance bounding) dá o superior.
    """
    if d_enlargement_verified_m > d_reduction_verified_m + tolerance_m:
        raise ParameterError(
            f"intervalo inconsistente: {d_enlargement_verified_m} m > {d_reduction_verified_m} m")
    return DistanceInterval(d_enlargement_verified_m, max(d_enlargement_verified_m, d_reduction_verified_m))


def alternation_schedule(rounds: int, pattern: Sequence[str] = ('reduction', 'enlargement')) -> List[str]:
    """Sequência de verificações para `rounds` rodadas, repetindo `pattern`."""
    if rounds < 0 or not pattern:
        raise ParameterError("rounds deve ser >= 0 e pattern não vazio")
    if any(p not in ('reduction', 'enlargement') for p in pattern):
        raise ParameterError(f"padrão inválido: {pattern}")
    return list(islice(cycle(pattern), rounds))
