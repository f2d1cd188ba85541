"""
Pipeline de detecção do receptor ED.

Etapas por candidato (coluna da timeline):
    1. Energia por slot (detector quadrático, fase descartada)
    2. Attack Plausibility: agregado comparado com gamma (ruído) e Gamma (perda de percurso)
    3. Robust Code Verification: upsilon testes de amostra aleatória Bin_alpha x Bin_beta
    4. Backtracking a partir do pico mais alto, em passos de T_p até T_0

Empates no teste de hipótese contam a favor do código (aprovação); o agregado
igual a Gamma não é ataque (comparação estrita).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from constants.config import (
    BACKTRACK_STEP_NS,
    BACKTRACK_WINDOW_NS,
    P_NOISE_THRESHOLD,
    RANGING_PRECISION_NS,
    UPSILON,
)
from services.channel import LinkModel, ReceivedFrame, SlotSignal, expected_rx_power
from services.codec import CodeParams, VerificationCode
from services.errors import ParameterError, StructuralError

logger = logging.getLogger(__name__)

# tolerância relativa para empates e para a fronteira agregado == Gamma
_REL_TOL = 1e-9


class Plausibility(str, Enum):
    NOISE = 'Noise'
    PLAUSIBLE = 'Plausible'
    ENERGY_EXCEEDED = 'EnergyExceeded'


class Verdict(str, Enum):
    NO_CODE_FOUND = 'NoCodeFound'
    CODE_ACCEPTED = 'CodeAccepted'
    ATTACK_DETECTED = 'AttackDetected'


class AttackReason(str, Enum):
    ENERGY_EXCEEDED = 'EnergyExceeded'
    TOF_MISMATCH = 'ToFMismatch'
    RANGE_EXCEEDED = 'RangeExceeded'


@dataclass(frozen=True)
class ReceiverConfig:
    """
    Configuração do receptor.

    Attributes:
        upsilon: repetições do teste de amostra aleatória
        p_noise_threshold: corte de aceitação da razão de aprovação
        backtrack_step_ns: passo do backtracking (T_p)
        backtrack_window_ns: janela máxima de backtracking (T_0)
        r: tamanho do símbolo
        rng_seed: seed do gerador das amostras do teste
        precision_ns: candidatos mais próximos que isso são fundidos
        gamma_lower_override: fixa gamma (ignora a variância do ruído)
        ties_pass: empate entre agregados conta como aprovação
    """
    upsilon: int = UPSILON
    p_noise_threshold: float = P_NOISE_THRESHOLD
    backtrack_step_ns: float = BACKTRACK_STEP_NS
    backtrack_window_ns: float = BACKTRACK_WINDOW_NS
    r: int = 1
    rng_seed: int = 0
    precision_ns: float = RANGING_PRECISION_NS
    gamma_lower_override: Optional[float] = None
    ties_pass: bool = True

    def __post_init__(self):
        if self.upsilon < 1:
            raise ParameterError(f"upsilon deve ser >= 1 (recebido {self.upsilon})")
        if not 0 < self.p_noise_threshold < 1:
            raise ParameterError(f"p_noise_threshold deve estar em (0, 1) (recebido {self.p_noise_threshold})")
        if self.backtrack_step_ns <= 0:
            raise ParameterError(f"backtrack_step_ns deve ser > 0 (recebido {self.backtrack_step_ns})")
        if self.backtrack_window_ns < 0:
            raise ParameterError(f"backtrack_window_ns deve ser >= 0 (recebido {self.backtrack_window_ns})")
        if self.r < 1:
            raise ParameterError(f"r deve ser >= 1 (recebido {self.r})")
        if self.gamma_lower_override is not None and self.gamma_lower_override < 0:
            raise ParameterError("gamma_lower_override deve ser >= 0")


@dataclass(frozen=True)
class Thresholds:
    gamma_lower: float
    gamma_upper: float

    def __post_init__(self):
        if not 0 <= self.gamma_lower < self.gamma_upper:
            raise ParameterError(
                f"limiares inválidos: gamma={self.gamma_lower}, Gamma={self.gamma_upper} (esperado 0 <= gamma < Gamma)")


@dataclass(frozen=True)
class CandidateDiagnostic:
    column: int
    toa_ns: float
    aggregate_energy: float
    plausibility: Plausibility
    pass_ratio: Optional[float] = None
    accepted: bool = False


@dataclass(frozen=True)
class DetectionOutcome:
    verdict: Verdict
    toa_ns: Optional[float] = None
    reason: Optional[AttackReason] = None
    diagnostics: Tuple[CandidateDiagnostic, ...] = field(default_factory=tuple)

    @property
    def chosen(self) -> Optional[CandidateDiagnostic]:
        """Candidato que define o veredito (aceito, ou o primeiro acima de Gamma)."""
        if self.verdict == Verdict.CODE_ACCEPTED:
            return next((c for c in self.diagnostics if c.accepted and c.toa_ns == self.toa_ns), None)
        if self.reason == AttackReason.ENERGY_EXCEEDED:
            return next((c for c in self.diagnostics if c.plausibility == Plausibility.ENERGY_EXCEEDED), None)
        return None

    def to_dataframe(self) -> pd.DataFrame:
        chosen = self.chosen
        return pd.DataFrame([{
            'verdict': self.verdict.value,
            'toa_ns': self.toa_ns,
            'aggregate_energy': chosen.aggregate_energy if chosen else None,
            'pass_ratio': chosen.pass_ratio if chosen else None,
            'reason': self.reason.value if self.reason else None,
        }])

    def diagnostics_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'column': c.column,
            'toa_ns': c.toa_ns,
            'aggregate_energy': c.aggregate_energy,
            'plausibility': c.plausibility.value,
            'pass_ratio': c.pass_ratio,
            'accepted': c.accepted,
        } for c in self.diagnostics])


def compute_thresholds(link: LinkModel, params: CodeParams, d_committed_m: float,
                       cfg: Optional[ReceiverConfig] = None) -> Thresholds:
    """
    Gamma = alpha (lambda_b + sigma)^2 + beta sigma^2, gamma = (alpha + beta) sigma^2.

    lambda_b^2 considera só a perda de percurso na distância comprometida (E = 0).
    """
    if link.p_sent <= 0:
        raise ParameterError("p_sent deve ser > 0 para calcular Gamma (sem potência enviada não há código)")
    lambda_b2 = expected_rx_power(link.p_sent, d_committed_m, 0.0)
    sigma = math.sqrt(link.sigma_n2)
    gamma_upper = params.alpha * (math.sqrt(lambda_b2) + sigma) ** 2 + params.beta * link.sigma_n2
    gamma_lower = (params.alpha + params.beta) * link.sigma_n2
    if cfg is not None and cfg.gamma_lower_override is not None:
        gamma_lower = cfg.gamma_lower_override
    return Thresholds(gamma_lower=gamma_lower, gamma_upper=gamma_upper)


def slot_energies(signal: Union[SlotSignal, np.ndarray]) -> np.ndarray:
    amplitudes = signal.amplitudes if isinstance(signal, SlotSignal) else np.asarray(signal, dtype=float)
    return np.square(amplitudes)


# códigos inteiros dos rótulos; arrays de objeto convertem o Enum em str
_NOISE, _PLAUSIBLE, _EXCEEDED = 0, 1, 2
_LABELS = (Plausibility.NOISE, Plausibility.PLAUSIBLE, Plausibility.ENERGY_EXCEEDED)


def _classify(aggregates: np.ndarray, thresholds: Thresholds) -> np.ndarray:
    aggregates = np.asarray(aggregates, dtype=float)
    # agregado nulo não carrega sinal, mesmo com gamma = 0
    noise = (aggregates < thresholds.gamma_lower) | (aggregates <= 0)
    exceeded = aggregates > thresholds.gamma_upper * (1 + _REL_TOL)
    return np.select([noise, exceeded], [_NOISE, _EXCEEDED], default=_PLAUSIBLE)


def _labels(codes: np.ndarray) -> List[Plausibility]:
    return [_LABELS[int(c)] for c in codes]


def attack_plausibility(energies, thresholds: Thresholds) -> Plausibility:
    aggregate = float(np.sum(energies))
    return _labels(_classify(np.array([aggregate]), thresholds))[0]


def _sample_subsets(rng: np.random.Generator, pool: np.ndarray, r: int, shape: Tuple[int, ...]) -> np.ndarray:
    """Índices de subconjuntos uniformes de tamanho r do pool (sem reposição)."""
    if r == 1:
        return pool[rng.integers(len(pool), size=shape)][..., None]
    keys = rng.random(shape + (len(pool),))
    return pool[np.argsort(keys, axis=-1)[..., :r]]


def robust_code_verification(energies, code: VerificationCode, cfg: ReceiverConfig,
                             rng: Optional[np.random.Generator] = None, shared_draws: bool = False):
    """
    Executa upsilon testes: o agregado de r amostras de Bin_alpha deve superar
    o agregado de r amostras de Bin_beta.

    energies pode ser um vetor (n,) ou uma matriz (n, C) de candidatos. Por
    padrão cada coluna tem sorteios independentes; com shared_draws todos os
    candidatos reusam os mesmos subconjuntos (aceites correlacionados).

    Returns:
        (pass_ratio, is_code), escalares para vetor e arrays para matriz
    """
    params = code.params
    if cfg.r > params.alpha or cfg.r > params.beta:
        raise ParameterError(f"r={cfg.r} excede o tamanho dos bins (alpha={params.alpha}, beta={params.beta})")
    matrix = np.asarray(energies, dtype=float)
    single = matrix.ndim == 1
    if single:
        matrix = matrix[:, None]
    if matrix.shape[0] != params.n:
        raise StructuralError(f"energias com {matrix.shape[0]} slots, código com {params.n}")

    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    columns = matrix.shape[1]
    shape = (cfg.upsilon, 1 if shared_draws else columns)
    alpha_idx = _sample_subsets(rng, np.asarray(code.bin_alpha), cfg.r, shape)
    beta_idx = _sample_subsets(rng, np.asarray(code.bin_beta), cfg.r, shape)

    by_column = matrix.T
    col = np.arange(columns)[None, :, None]
    b_alpha = by_column[col, alpha_idx].sum(axis=-1)
    b_beta = by_column[col, beta_idx].sum(axis=-1)
    passes = b_alpha > b_beta
    if cfg.ties_pass:
        passes |= np.isclose(b_alpha, b_beta, rtol=_REL_TOL, atol=0.0)

    pass_ratio = passes.mean(axis=0)
    is_code = pass_ratio > cfg.p_noise_threshold
    if single:
        return float(pass_ratio[0]), bool(is_code[0])
    return pass_ratio, is_code


def evaluate_candidates(candidates: np.ndarray, code: VerificationCode, thresholds: Thresholds,
                        cfg: ReceiverConfig, rng: Optional[np.random.Generator] = None):
    """
    Plausibilidade + verificação robusta para uma matriz (n, C) de energias.

    Returns:
        (agregados, códigos de rótulo, pass_ratio com NaN fora dos plausíveis, máscara de aceitos)
    """
    aggregates = candidates.sum(axis=0)
    codes = _classify(aggregates, thresholds)
    ratios = np.full(candidates.shape[1], np.nan)
    accepted = np.zeros(candidates.shape[1], dtype=bool)
    plausible = codes == _PLAUSIBLE
    if plausible.any():
        pass_ratio, is_code = robust_code_verification(candidates[:, plausible], code, cfg, rng=rng)
        ratios[plausible] = pass_ratio
        accepted[plausible] = is_code
    return aggregates, codes, ratios, accepted


def _merge_candidates(accepted: List[CandidateDiagnostic], precision_ns: float) -> List[CandidateDiagnostic]:
    """Funde candidatos com ToA a menos de precision_ns, mantendo o mais cedo."""
    merged: List[CandidateDiagnostic] = []
    for cand in sorted(accepted, key=lambda c: c.toa_ns):
        if merged and cand.toa_ns - merged[-1].toa_ns < precision_ns:
            continue
        merged.append(cand)
    return merged


def backtrack_detect(frame: ReceivedFrame, code: VerificationCode, link: LinkModel, cfg: ReceiverConfig,
                     thresholds: Optional[Thresholds] = None,
                     d_committed_m: Optional[float] = None) -> DetectionOutcome:
    """
    Backtracking a partir do código alinhado ao pico mais alto.

    Volta em passos de T_p até T_0; qualquer candidato acima de Gamma gera
    AttackDetected{EnergyExceeded}. Caso contrário, retorna o candidato aceito
    mais cedo (o último marcado no backtracking).
    """
    if frame.samples.shape[0] != code.params.n:
        raise StructuralError(f"timeline com {frame.samples.shape[0]} slots, código com {code.params.n}")
    if thresholds is None:
        distance = d_committed_m if d_committed_m is not None else link.committed_distance_m
        thresholds = compute_thresholds(link, code.params, distance, cfg)

    energies = frame.energies()
    peak = int(np.argmax(energies[list(code.bin_alpha), :].sum(axis=0)))
    stride = max(1, int(round(cfg.backtrack_step_ns / frame.step_ns)))
    window = int(round(cfg.backtrack_window_ns / frame.step_ns))
    if peak < window:
        raise StructuralError(f"timeline não cobre T_0={cfg.backtrack_window_ns} ns antes do pico (coluna {peak})")

    columns = np.arange(peak, peak - window - 1, -stride)
    aggregates, codes, ratios, accepted_mask = evaluate_candidates(energies[:, columns], code, thresholds, cfg)

    diagnostics = tuple(
        CandidateDiagnostic(column=int(c), toa_ns=frame.toa_ns(int(c)), aggregate_energy=float(a),
                            plausibility=lab, pass_ratio=None if np.isnan(p) else float(p), accepted=bool(ok))
        for c, a, lab, p, ok in zip(columns, aggregates, _labels(codes), ratios, accepted_mask)
    )

    if (codes == _EXCEEDED).any():
        logger.warning(f"energia agregada acima de Gamma={thresholds.gamma_upper:.4g}")
        return DetectionOutcome(Verdict.ATTACK_DETECTED, reason=AttackReason.ENERGY_EXCEEDED,
                                diagnostics=diagnostics)

    found = _merge_candidates([d for d in diagnostics if d.accepted], cfg.precision_ns)
    if not found:
        logger.debug("nenhum código encontrado no backtracking")
        return DetectionOutcome(Verdict.NO_CODE_FOUND, diagnostics=diagnostics)
    logger.debug(f"{len(found)} candidato(s) aceito(s); ToA escolhido {found[0].toa_ns:.3f} ns")
    return DetectionOutcome(Verdict.CODE_ACCEPTED, toa_ns=found[0].toa_ns, diagnostics=diagnostics)
