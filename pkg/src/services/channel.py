"""Modelo de canal: perda de percurso, sala do adversário, AWGN e superposição.

Abstração discreta por slot: o receptor ED integra a energia por janela, então
cada slot T_s vira uma amplitude real (raiz da potência, com o sinal da fase).

Unidades: potências são "unidades de potência" adimensionais. Potência enviada
e recebida ficam em escalas relacionadas por 10^{f/10}, sem conversão W/uW.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np
import pandas as pd

from constants.radio import (
    PATH_LOSS_CORRECTION_DB,
    PATH_LOSS_EXPONENT_DB,
    PATH_LOSS_PL0_DB,
    SPEED_OF_LIGHT_M_PER_NS,
)
from services.codec import VerificationCode
from services.errors import DomainError, ParameterError, StructuralError

if TYPE_CHECKING:
    from services.adversary import AttackPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tap:
    """Componente multipercurso pós-cursor (atraso <= T_s, ganho de amplitude)."""
    delay_ns: float
    gain: float


@dataclass(frozen=True)
class LinkModel:
    """
    Enlace entre emissor, receptor e adversário.

    Attributes:
        d1_m: distância real emissor-receptor
        d2_m: distância que o adversário pretende acrescentar
        d3_m: distância adversário-receptor
        e_db: degradação extra além da perda de percurso (<= 0)
        p_sent: potência por pulso do emissor
        p_adv_sent: potência por pulso do adversário
        sigma_n2: variância do ruído no receptor
        taps: componentes multipercurso opcionais
    """
    d1_m: float
    d2_m: float = 0.0
    d3_m: float = 1.0
    e_db: float = 0.0
    p_sent: float = 1.0
    p_adv_sent: float = 1.0
    sigma_n2: float = 0.0
    taps: Tuple[Tap, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.d1_m <= 0 or self.d3_m <= 0 or self.d2_m < 0:
            raise ParameterError(f"distâncias inválidas: d1={self.d1_m}, d2={self.d2_m}, d3={self.d3_m}")
        if self.e_db > 0:
            raise ParameterError(f"e_db deve ser <= 0 (recebido {self.e_db})")
        if self.p_sent < 0 or self.p_adv_sent < 0 or self.sigma_n2 < 0:
            raise ParameterError("potências e variância do ruído devem ser >= 0")

    @property
    def rx_power_worst(self) -> float:
        """(lambda_w)^2: potência recebida com perda de percurso + E."""
        return expected_rx_power(self.p_sent, self.d1_m, self.e_db)

    @property
    def rx_power_adversary(self) -> float:
        """(lambda')^2: potência do adversário no receptor."""
        return expected_rx_power(self.p_adv_sent, self.d3_m, self.e_db)

    @property
    def committed_distance_m(self) -> float:
        return self.d1_m + self.d2_m

    @property
    def zeta(self) -> float:
        return adversary_room(self.d1_m, self.d2_m, self.e_db)[1]


def path_loss_db(d_m: float) -> float:
    """f(d) = -46.3 - 20 log10(d) - log10(6.5/5), em dB."""
    if d_m <= 0:
        raise DomainError(f"distância deve ser positiva (recebido {d_m})")
    return PATH_LOSS_PL0_DB - PATH_LOSS_EXPONENT_DB * math.log10(d_m) - PATH_LOSS_CORRECTION_DB


def expected_rx_power(p_sent: float, d_m: float, extra_db: float = 0.0) -> float:
    return p_sent * 10 ** ((path_loss_db(d_m) + extra_db) / 10)


def adversary_room(d1_m: float, d2_m: float, e_db: float) -> Tuple[float, float]:
    """Sala por pulso do adversário: R = f(d1+d2) - (f(d1)+E) em dB e zeta = 10^{R/10}."""
    if d2_m < 0:
        raise DomainError(f"d2 deve ser >= 0 (recebido {d2_m})")
    r_db = path_loss_db(d1_m + d2_m) - (path_loss_db(d1_m) + e_db)
    return r_db, 10 ** (r_db / 10)


def tof_ns(d_m: float) -> float:
    return d_m / SPEED_OF_LIGHT_M_PER_NS


def enlargement_m(delay_ns: float) -> float:
    """Distância acrescentada por um atraso delta em ranging de duas vias: delta*c/2."""
    return delay_ns * SPEED_OF_LIGHT_M_PER_NS / 2.0


@dataclass(frozen=True)
class SlotSignal:
    amplitudes: np.ndarray
    noise_seed: int = 0

    @property
    def energies(self) -> np.ndarray:
        return np.square(self.amplitudes)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'slot_index': np.arange(len(self.amplitudes)),
            'amplitude': self.amplitudes,
            'energy': self.energies,
        })


def injection_reference_power(link: LinkModel, plan: 'AttackPlan', rx_power: Optional[float] = None) -> float:
    """Potência de referência das injeções no receptor ('matched' = lambda_w^2, 'link' = lambda'^2)."""
    if plan.reference == 'link':
        return link.rx_power_adversary
    return rx_power if rx_power is not None else link.rx_power_worst


def injection_matrix(n: int, slots: np.ndarray, phases: np.ndarray, powers: np.ndarray,
                     reference_power: float) -> np.ndarray:
    """Amplitudes (n, count) somadas por `count` ataques; linhas de slots/fases/potências são ataques."""
    slots = np.atleast_2d(slots)
    out = np.zeros((n, slots.shape[0]))
    if slots.size == 0:
        return out
    if slots.min() < 0 or slots.max() >= n:
        raise StructuralError(f"injeção fora do código de {n} slots")
    columns = np.broadcast_to(np.arange(slots.shape[0])[:, None], slots.shape)
    np.add.at(out, (slots, columns), np.atleast_2d(phases) * np.sqrt(reference_power * np.atleast_2d(powers)))
    return out


def _injection_amplitudes(n: int, link: LinkModel, plan: Optional['AttackPlan'],
                          rx_power: Optional[float]) -> np.ndarray:
    if plan is None or not plan.injections:
        return np.zeros(n)
    ref = injection_reference_power(link, plan, rx_power)
    slots = np.array([inj.slot for inj in plan.injections])
    phases = np.array([inj.phase for inj in plan.injections], dtype=float)
    powers = np.array([inj.power for inj in plan.injections])
    return injection_matrix(n, slots, phases, powers, ref)[:, 0]


def synthesize_rx(code: VerificationCode, link: LinkModel, attack: Optional['AttackPlan'] = None,
                  noise_seed: int = 0, rx_power: Optional[float] = None) -> SlotSignal:
    """Superpõe emissor, adversário e ruído por slot.

    rx_power substitui (lambda_w)^2 (ex.: potência unitária do exemplo numérico).
    Fase recíproca com a mesma potência anula o pulso; fase igual dobra a amplitude.
    """
    n = code.params.n
    a = math.sqrt(rx_power if rx_power is not None else link.rx_power_worst)
    # taps com atraso <= T_s caem na mesma janela de integração
    tap_gain = 1.0 + sum(t.gain for t in link.taps if t.delay_ns <= code.params.ts_ns)
    amplitudes = code.as_array() * a * tap_gain
    amplitudes = amplitudes + _injection_amplitudes(n, link, attack, rx_power)
    if link.sigma_n2 > 0:
        rng = np.random.default_rng(noise_seed)
        amplitudes = amplitudes + rng.normal(0.0, math.sqrt(link.sigma_n2), n)
    return SlotSignal(amplitudes=amplitudes, noise_seed=noise_seed)


@dataclass
class ReceivedFrame:
    """
    Timeline gravada pelo receptor, fatiada por slot.

    samples[i, j] é a amplitude no instante start_ns + i*slot_spacing_ns + j*step_ns.
    A coluna j é o candidato de código com ToA start_ns + j*step_ns.
    """
    samples: np.ndarray
    step_ns: float
    start_ns: float
    slot_spacing_ns: float
    authentic_column: int = 0

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise StructuralError("samples deve ser uma matriz (n slots x W amostras)")
        if self.samples.shape[1] * self.step_ns > self.slot_spacing_ns + 1e-9:
            raise StructuralError(
                f"janela de {self.samples.shape[1]} amostras x {self.step_ns} ns excede T_s={self.slot_spacing_ns} ns")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    def energies(self) -> np.ndarray:
        return np.square(self.samples)

    def toa_ns(self, column: int) -> float:
        return self.start_ns + column * self.step_ns

    def to_dataframe(self) -> pd.DataFrame:
        n, w = self.samples.shape
        slot, col = np.meshgrid(np.arange(n), np.arange(w), indexing='ij')
        times = self.start_ns + slot * self.slot_spacing_ns + col * self.step_ns
        return pd.DataFrame({
            'slot_index': slot.ravel(),
            'time_ns': times.ravel(),
            'amplitude': self.samples.ravel(),
            'energy': np.square(self.samples).ravel(),
        })


def build_frame(code: VerificationCode, link: LinkModel, attack: Optional['AttackPlan'], arrival_ns: float,
                step_ns: float, lead_ns: float, noise_seed: int = 0, rx_power: Optional[float] = None,
                tail_samples: int = 2) -> ReceivedFrame:
    """Renderiza a timeline: código autêntico, cópia reenviada, injeções e AWGN, nessa ordem."""
    from services.adversary import replay_frame

    n = code.params.n
    lead = int(math.ceil(lead_ns / step_ns - 1e-9))
    extra = 0
    if attack is not None and attack.replay_delay_ns is not None:
        extra = int(round(attack.replay_delay_ns / step_ns))
    for tap in link.taps:
        extra = max(extra, int(round(tap.delay_ns / step_ns)))
    width = lead + extra + tail_samples + 1

    a = math.sqrt(rx_power if rx_power is not None else link.rx_power_worst)
    authentic = code.as_array() * a
    samples = np.zeros((n, width))
    samples[:, lead] = authentic
    for tap in link.taps:
        samples[:, lead + int(round(tap.delay_ns / step_ns))] += authentic * tap.gain

    frame = ReceivedFrame(samples=samples, step_ns=step_ns, start_ns=arrival_ns - lead * step_ns,
                          slot_spacing_ns=code.params.ts_ns, authentic_column=lead)
    if attack is not None:
        if attack.replay_delay_ns is not None:
            frame = replay_frame(frame, attack)
        frame.samples[:, lead] += _injection_amplitudes(n, link, attack, rx_power)
    if link.sigma_n2 > 0:
        rng = np.random.default_rng(noise_seed)
        frame.samples += rng.normal(0.0, math.sqrt(link.sigma_n2), frame.samples.shape)
    logger.debug(f"frame {n}x{width} construído (chegada {arrival_ns:.3f} ns)")
    return frame
