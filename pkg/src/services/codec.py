"""Geração e descrição dos códigos de verificação UWB-ED.

Um código tem n slots: alpha com pulso de energia (fase aleatória +1/-1) e
beta vazios, distribuídos por uma permutação secreta uniforme.

Convenção de índices: 0-based internamente. Relatórios que numeram de 1 a n
(ex.: posições {2, 6, 7, 13, 15}) correspondem a {1, 5, 6, 12, 14} aqui.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from constants.radio import DEFAULT_TP_NS, DEFAULT_TS_NS
from services.errors import ParameterError

logger = logging.getLogger(__name__)

# Sub-streams independentes do gerador (permutação e fases)
_POSITION_STREAM = 0
_PHASE_STREAM = 1


@dataclass(frozen=True)
class CodeParams:
    """
    Parâmetros do código de verificação.

    Attributes:
        n: número de slots
        alpha: slots com pulso de energia
        beta: slots vazios
        r: tamanho do símbolo (pulsos agregados por amostra do teste)
        ts_ns: espaçamento entre slots (T_s)
        tp_ns: largura do pulso (T_p)
    """
    n: int
    alpha: int
    beta: int
    r: int = 1
    ts_ns: float = DEFAULT_TS_NS
    tp_ns: float = DEFAULT_TP_NS

    def __post_init__(self):
        self.validate()

    @classmethod
    def of(cls, alpha: int, beta: int, r: int = 1, **kwargs) -> 'CodeParams':
        return cls(n=alpha + beta, alpha=alpha, beta=beta, r=r, **kwargs)

    def validate(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError(f"alpha e beta devem ser >= 0 (alpha={self.alpha}, beta={self.beta})")
        if self.n != self.alpha + self.beta:
            raise ParameterError(f"n ({self.n}) deve ser alpha + beta ({self.alpha + self.beta})")
        # alpha = 0 só é aceito sem símbolo (código degenerado)
        if self.alpha > 0 and not 1 <= self.r <= self.alpha:
            raise ParameterError(f"r deve estar em [1, alpha]: r={self.r}, alpha={self.alpha}")
        if self.ts_ns <= self.tp_ns:
            raise ParameterError(f"ts_ns ({self.ts_ns}) deve ser maior que tp_ns ({self.tp_ns})")


@dataclass(frozen=True)
class VerificationCode:
    params: CodeParams
    slots: Tuple[int, ...]
    bin_alpha: Tuple[int, ...]
    bin_beta: Tuple[int, ...]
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.slots) != self.params.n:
            raise ParameterError(f"código com {len(self.slots)} slots, esperado {self.params.n}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.slots, dtype=float)

    def to_text(self) -> str:
        """Forma de uma linha, ex.: `0,-1,0,0,0,-1,1,...`"""
        return ','.join(str(s) for s in self.slots)

    @classmethod
    def from_slots(cls, slots, r: int = 1, ts_ns: float = DEFAULT_TS_NS,
                   tp_ns: float = DEFAULT_TP_NS) -> 'VerificationCode':
        """Constrói um código a partir de uma sequência explícita de {-1, 0, +1}."""
        values = tuple(int(s) for s in slots)
        if any(v not in (-1, 0, 1) for v in values):
            raise ParameterError(f"slots devem estar em {{-1, 0, 1}}: {values}")
        bin_alpha = tuple(i for i, v in enumerate(values) if v != 0)
        bin_beta = tuple(i for i, v in enumerate(values) if v == 0)
        params = CodeParams(n=len(values), alpha=len(bin_alpha), beta=len(bin_beta),
                            r=min(r, len(bin_alpha)) if bin_alpha else r, ts_ns=ts_ns, tp_ns=tp_ns)
        return cls(params=params, slots=values, bin_alpha=bin_alpha, bin_beta=bin_beta)

    @classmethod
    def from_text(cls, text: str, **kwargs) -> 'VerificationCode':
        return cls.from_slots([int(v) for v in text.strip().split(',') if v.strip()], **kwargs)


def code_rng(seed: int, stream: int) -> np.random.Generator:
    """Gerador Philox (baseado em contador) de um sub-stream do seed."""
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(seq))


def generate_code(params: CodeParams, seed: int) -> VerificationCode:
    """Gera o código de verificação de forma determinística a partir do seed.

    As posições dos alpha pulsos são uniformes sobre os C(n, alpha) subconjuntos;
    as fases são independentes e uniformes em {-1, +1}.
    """
    params.validate()
    positions = code_rng(seed, _POSITION_STREAM).choice(params.n, size=params.alpha, replace=False)
    phases = code_rng(seed, _PHASE_STREAM).integers(0, 2, size=params.alpha) * 2 - 1

    slots = np.zeros(params.n, dtype=int)
    slots[positions] = phases
    bin_alpha = tuple(int(i) for i in np.sort(positions))
    alpha_set = set(bin_alpha)
    bin_beta = tuple(i for i in range(params.n) if i not in alpha_set)
    return VerificationCode(params=params, slots=tuple(int(s) for s in slots),
                            bin_alpha=bin_alpha, bin_beta=bin_beta, seed=int(seed))


def bins(code: VerificationCode) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Retorna (Bin_alpha, Bin_beta) do código."""
    return code.bin_alpha, code.bin_beta


def spacing_rule_ok(ts_ns: float, max_range_m: float, speed_m_per_ns: float) -> bool:
    """T_s > 2d/c para o alcance máximo (replay atrasado não sobrepõe o pulso seguinte)."""
    return ts_ns > 2.0 * max_range_m / speed_m_per_ns
