"""Planos de ataque: k pulsos com fase aleatória + replay atrasado do quadro autêntico.

Políticas de potência das injeções:
  - 'matched': potência igual à do emissor no receptor, (lambda')^2 = (lambda_w)^2
  - 'link': potência calculada pelo enlace do adversário (p_adv_sent, d3, E)
  - 'variable': escala por pulso sorteada de uma gama com média 1

O ataque adaptativo (observa cada resultado e para antes de estourar Gamma)
fica em plan_adaptive_attack e não é usado por padrão.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from constants.radio import DEFAULT_REPLAY_DELAY_NS, DEFAULT_REPLAY_GAIN_DB
from services.channel import ReceivedFrame
from services.codec import CodeParams, VerificationCode, code_rng
from services.errors import ParameterError, StructuralError

logger = logging.getLogger(__name__)

POWER_POLICIES = ('matched', 'link', 'variable')

_POSITION_STREAM = 0
_PHASE_STREAM = 1
_POWER_STREAM = 2


@dataclass(frozen=True)
class Injection:
    slot: int
    phase: int
    power: float = 1.0  # escala sobre a potência de referência


@dataclass(frozen=True)
class AttackPlan:
    """
    Plano do adversário.

    Attributes:
        k: número de pulsos injetados
        injections: (slot, fase, potência) de cada pulso, slots distintos
        replay_delay_ns: atraso delta do replay (None = sem replay)
        replay_gain_db: amplificação da cópia reenviada
        seed: seed usado no sorteio
        reference: 'matched' ou 'link' (potência de referência das injeções)
        slot_spacing_ns: T_s do código atacado
    """
    k: int
    injections: Tuple[Injection, ...] = ()
    replay_delay_ns: Optional[float] = None
    replay_gain_db: float = 0.0
    seed: Optional[int] = None
    reference: str = 'matched'
    slot_spacing_ns: Optional[float] = None

    def __post_init__(self):
        if self.k != len(self.injections):
            raise ParameterError(f"k={self.k} mas o plano tem {len(self.injections)} injeções")
        slots = [inj.slot for inj in self.injections]
        if len(set(slots)) != len(slots):
            raise ParameterError("slots das injeções devem ser distintos")
        if any(inj.phase not in (-1, 1) for inj in self.injections):
            raise ParameterError("fases devem ser -1 ou +1")
        if any(inj.power < 0 for inj in self.injections):
            raise ParameterError("potências das injeções devem ser >= 0")
        if self.reference not in ('matched', 'link'):
            raise ParameterError(f"referência de potência desconhecida: {self.reference}")
        if self.replay_delay_ns is not None:
            _check_delay(self.replay_delay_ns, self.slot_spacing_ns)

    @property
    def replay_gain(self) -> float:
        """Ganho de amplitude da cópia."""
        return 10 ** (self.replay_gain_db / 20)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'slot': [i.slot for i in self.injections],
            'phase': [i.phase for i in self.injections],
            'power': [i.power for i in self.injections],
        })


def _check_delay(delay_ns: float, ts_ns: Optional[float]) -> None:
    if delay_ns <= 0:
        raise ParameterError(f"atraso do replay deve ser > 0 (recebido {delay_ns})")
    if ts_ns is not None and delay_ns >= ts_ns:
        # seria detectado pela diferença de RTT
        raise ParameterError(f"atraso do replay ({delay_ns} ns) deve ser menor que T_s ({ts_ns} ns)")


def annihilation_outcome(sent_phase: int, injected_phase: int) -> str:
    """'annihilated', 'amplified' ou 'added' (slot vazio) para potências iguais."""
    if sent_phase == 0:
        return 'added'
    return 'amplified' if sent_phase == injected_phase else 'annihilated'


# variação de energia do slot, em unidades de (lambda_w)^2
_ENERGY_DELTA = {'added': 1, 'amplified': 3, 'annihilated': -1}


def draw_injections(n: int, k: int, count: int, position_rng: np.random.Generator,
                    phase_rng: np.random.Generator, power_rng: Optional[np.random.Generator] = None,
                    power_spread: float = 0.5) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Sorteia `count` ataques de k pulsos de uma vez.

    Returns:
        (slots, fases, potências), cada um (count, k); slots distintos e
        ordenados por linha, uniformes sobre C(n, k)
    """
    slots = np.sort(np.argsort(position_rng.random((count, n)), axis=1)[:, :k], axis=1)
    phases = phase_rng.integers(0, 2, size=(count, k)) * 2 - 1
    if power_rng is None:
        powers = np.ones((count, k))
    else:
        shape = 1.0 / (power_spread ** 2)
        powers = power_rng.gamma(shape, 1.0 / shape, size=(count, k))
    return slots, phases, powers


def plan_attack(code_params: CodeParams, k: int, delay_ns: Optional[float] = DEFAULT_REPLAY_DELAY_NS,
                gain_db: float = DEFAULT_REPLAY_GAIN_DB, power_policy: str = 'matched', seed: int = 0,
                power_spread: float = 0.5) -> AttackPlan:
    """Sorteia k posições distintas (uniformes sobre C(n, k)) com fases independentes."""
    if not 0 <= k <= code_params.n:
        raise ParameterError(f"k deve estar em [0, n={code_params.n}] (recebido {k})")
    if power_policy not in POWER_POLICIES:
        raise ParameterError(f"política de potência desconhecida: {power_policy}")

    power_rng = code_rng(seed, _POWER_STREAM) if power_policy == 'variable' else None
    slots, phases, powers = draw_injections(code_params.n, k, 1, code_rng(seed, _POSITION_STREAM),
                                            code_rng(seed, _PHASE_STREAM), power_rng, power_spread)

    injections = tuple(Injection(int(s), int(p), float(w)) for s, p, w in zip(slots[0], phases[0], powers[0]))
    return AttackPlan(k=k, injections=injections, replay_delay_ns=delay_ns, replay_gain_db=gain_db,
                      seed=seed, reference='link' if power_policy == 'link' else 'matched',
                      slot_spacing_ns=code_params.ts_ns)


def plan_adaptive_attack(code: VerificationCode, k_max: int, zeta: float, seed: int = 0,
                         delay_ns: Optional[float] = DEFAULT_REPLAY_DELAY_NS,
                         gain_db: float = DEFAULT_REPLAY_GAIN_DB) -> AttackPlan:
    """Ataque adaptativo: injeta em sequência, observa anulação/amplificação e
    para quando o próximo pulso poderia ultrapassar o orçamento alpha*(zeta-1).

    O adversário não conhece os bins; no pior caso um pulso soma +3 (amplificação).
    """
    budget = code.params.alpha * (zeta - 1)
    order = code_rng(seed, _POSITION_STREAM).permutation(code.params.n)
    phase_rng = code_rng(seed, _PHASE_STREAM)
    injections = []
    added = 0
    for slot in order:
        if len(injections) >= k_max or added + 3 > budget:
            break
        phase = int(phase_rng.integers(0, 2) * 2 - 1)
        added += _ENERGY_DELTA[annihilation_outcome(code.slots[int(slot)], phase)]
        injections.append(Injection(int(slot), phase, 1.0))
    injections.sort(key=lambda inj: inj.slot)
    logger.debug(f"ataque adaptativo: {len(injections)} pulsos, energia extra {added}")
    return AttackPlan(k=len(injections), injections=tuple(injections), replay_delay_ns=delay_ns,
                      replay_gain_db=gain_db, seed=seed, slot_spacing_ns=code.params.ts_ns)


def replay_frame(frame: ReceivedFrame, plan: AttackPlan) -> ReceivedFrame:
    """Soma ao quadro uma cópia amplificada atrasada de replay_delay_ns."""
    if plan.replay_delay_ns is None:
        return frame
    _check_delay(plan.replay_delay_ns, frame.slot_spacing_ns)
    shift = int(round(plan.replay_delay_ns / frame.step_ns))
    if frame.authentic_column + shift >= frame.width:
        raise StructuralError(f"timeline de {frame.width} amostras não comporta a cópia atrasada de {shift} amostras")
    samples = frame.samples.copy()
    samples[:, shift:] += plan.replay_gain * frame.samples[:, :frame.width - shift]
    return ReceivedFrame(samples=samples, step_ns=frame.step_ns, start_ns=frame.start_ns,
                         slot_spacing_ns=frame.slot_spacing_ns, authentic_column=frame.authentic_column)


def replay_column(frame: ReceivedFrame, plan: AttackPlan) -> Optional[int]:
    """Coluna da cópia reenviada na timeline (None sem replay)."""
    if plan.replay_delay_ns is None:
        return None
    return frame.authentic_column + int(round(plan.replay_delay_ns / frame.step_ns))


