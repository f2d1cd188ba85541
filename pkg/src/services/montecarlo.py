"""
Harness de Monte-Carlo: estima P(Bin_beta > Bin_alpha), P_sa e a taxa de
falsos positivos, com intervalos de Wilson, e compara com services.analytic.

Métricas:
  - 'evade': um teste de amostra aleatória por trial, potência unitária, sem
    ruído; blocos vetorizados semeados por (base_seed, k, bloco)
  - 'success': sessão completa (código, ataque, canal, backtracking, verificação);
    cada trial semeado por (base_seed, k, trial)
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from constants.config import DEFAULT_TRIALS, TRIAL_BLOCK_SIZE, WORKERS
from constants.radio import DEFAULT_REPLAY_DELAY_NS, DEFAULT_REPLAY_GAIN_DB
from services.adversary import POWER_POLICIES, draw_injections, plan_attack
from services.analytic import prob_evade_rcv, prob_success
from services.channel import LinkModel, adversary_room, enlargement_m, injection_matrix
from services.codec import CodeParams, generate_code
from services.errors import ParameterError
from services.protocol import run_session
from services.receiver import (
    ReceiverConfig,
    compute_thresholds,
    evaluate_candidates,
    robust_code_verification,
    slot_energies,
)

if TYPE_CHECKING:
    from services.session_manager import SessionRegistry

logger = logging.getLogger(__name__)

METRICS = ('evade', 'success')
ESTIMATE_COLUMNS = ['k', 'trials', 'successes', 'p_hat', 'ci_low', 'ci_high', 'analytic_p']

# jogo de potência unitária: (lambda_w)^2 = (lambda')^2 = 1
UNIT_POWER = 1.0


@dataclass(frozen=True)
class TrialConfig:
    """
    Configuração de uma grade de trials.

    Attributes:
        code_params: parâmetros do código
        link: enlace (d1, E, ruído, potências)
        ks: grade de pulsos injetados
        trials: trials por ponto da grade
        base_seed: seed base
        metric: 'evade' ou 'success'
        receiver: configuração do receptor (métrica 'success')
        delay_ns, gain_db, power_policy: modelo do ataque (métrica 'success')
        block_size: trials por tarefa
        workers: processos paralelos
        trace_sessions: quantos trials por k guardam o trace da sessão
    """
    code_params: CodeParams
    link: LinkModel
    ks: Tuple[int, ...] = (0,)
    trials: int = DEFAULT_TRIALS
    base_seed: int = 0
    metric: str = 'evade'
    receiver: Optional[ReceiverConfig] = None
    delay_ns: Optional[float] = DEFAULT_REPLAY_DELAY_NS
    gain_db: float = DEFAULT_REPLAY_GAIN_DB
    power_policy: str = 'matched'
    block_size: int = TRIAL_BLOCK_SIZE
    workers: int = WORKERS
    trace_sessions: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials deve ser >= 1 (recebido {self.trials})")
        if self.metric not in METRICS:
            raise ParameterError(f"métrica desconhecida: {self.metric} (opções: {', '.join(METRICS)})")
        if self.power_policy not in POWER_POLICIES:
            raise ParameterError(f"política de potência desconhecida: {self.power_policy}")
        if self.block_size < 1 or self.workers < 1:
            raise ParameterError("block_size e workers devem ser >= 1")
        if any(not 0 <= k <= self.code_params.n for k in self.ks):
            raise ParameterError(f"ks devem estar em [0, n={self.code_params.n}]: {self.ks}")

    @property
    def receiver_config(self) -> ReceiverConfig:
        return self.receiver or ReceiverConfig(r=self.code_params.r)

    @property
    def zeta(self) -> float:
        """Sala do adversário para a ampliação delta*c/2 de uma perna."""
        if self.delay_ns is None:
            return self.link.zeta
        return adversary_room(self.link.d1_m, enlargement_m(self.delay_ns), self.link.e_db)[1]


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Intervalo de Wilson para uma proporção binomial."""
    if trials < 1:
        raise ParameterError("trials deve ser >= 1")
    z = norm.ppf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


@dataclass(frozen=True)
class EstimateRow:
    k: int
    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    analytic_p: Optional[float] = None
    flagged: bool = False

    @classmethod
    def from_counts(cls, k: int, successes: int, trials: int, analytic_p: Optional[float] = None,
                    compare: bool = True) -> 'EstimateRow':
        low, high = wilson_interval(successes, trials)
        p_hat = successes / trials
        flagged = False
        if compare and analytic_p is not None:
            se = math.sqrt(analytic_p * (1 - analytic_p) / trials)
            outside = not low <= analytic_p <= high
            flagged = outside and abs(p_hat - analytic_p) > 4 * se
        return cls(k=k, successes=successes, trials=trials, p_hat=p_hat, ci_low=low, ci_high=high,
                   analytic_p=analytic_p, flagged=flagged)

    @property
    def within_ci(self) -> bool:
        return self.analytic_p is not None and self.ci_low <= self.analytic_p <= self.ci_high


def _evade_block(cfg: TrialConfig, k: int, block: int, count: int) -> int:
    """
    Trials vetorizados do jogo de potência unitária, sem ruído; retorna quantos evadiram.

    Um código por bloco (as posições das injeções são uniformes, então o código
    não muda a probabilidade); cada trial é uma coluna com seu próprio ataque e
    um único teste de amostra.
    """
    params = cfg.code_params
    rng = np.random.default_rng(np.random.SeedSequence([cfg.base_seed, k, block]))
    code = generate_code(params, int(rng.integers(2 ** 63)))
    slots, phases, powers = draw_injections(params.n, k, count, rng, rng)
    amplitudes = code.as_array()[:, None] + injection_matrix(params.n, slots, phases, powers, UNIT_POWER)
    single_test = ReceiverConfig(upsilon=1, r=params.r)
    pass_ratio, _ = robust_code_verification(slot_energies(amplitudes), code, single_test, rng=rng)
    return int(np.count_nonzero(pass_ratio == 0))


def _success_trials(cfg: TrialConfig, k: int, start: int, count: int) -> Tuple[int, Dict[str, List[str]]]:
    successes = 0
    traces: Dict[str, List[str]] = {}
    for i in range(start, start + count):
        attack_seed, session_seed = (int(s) for s in np.random.SeedSequence([cfg.base_seed, k, i])
                                     .generate_state(2, dtype=np.uint64))
        # k = 0: sessão honesta, sem replay
        plan = plan_attack(cfg.code_params, k, cfg.delay_ns, cfg.gain_db, cfg.power_policy, attack_seed) if k else None
        session_id = f"k{k}-t{i}"
        result = run_session(cfg.code_params, cfg.link, plan, cfg.receiver_config, session_seed,
                             session_id=session_id)
        successes += int(result.enlarged_undetected)
        if i < cfg.trace_sessions:
            traces[session_id] = list(result.trace)
    return successes, traces


def _run_chunk(task: Tuple[TrialConfig, int, int, int, int]) -> Tuple[int, int, int, Dict[str, List[str]]]:
    cfg, k, block, start, count = task
    if cfg.metric == 'evade':
        return k, _evade_block(cfg, k, block, count), count, {}
    successes, traces = _success_trials(cfg, k, start, count)
    return k, successes, count, traces


def _analytic_for(cfg: TrialConfig, k: int) -> Optional[float]:
    p = cfg.code_params
    try:
        if cfg.metric == 'evade':
            return float(prob_evade_rcv(p.alpha, p.beta, p.r, k))
        if cfg.delay_ns is None:
            return None
        return float(prob_success(p.alpha, p.beta, p.r, cfg.zeta, k))
    except ParameterError as e:
        logger.warning(f"sem curva analítica para k={k}: {e}")
        return None


def _tasks(cfg: TrialConfig) -> List[Tuple[TrialConfig, int, int, int, int]]:
    tasks = []
    for k in cfg.ks:
        for block, start in enumerate(range(0, cfg.trials, cfg.block_size)):
            tasks.append((cfg, k, block, start, min(cfg.block_size, cfg.trials - start)))
    return tasks


def run_grid(cfg: TrialConfig, registry: Optional['SessionRegistry'] = None) -> List[EstimateRow]:
    """
    Roda `trials` cenários independentes por k e agrega por soma.

    O resultado não depende de `workers`: os seeds vêm só de (base_seed, k, índice).

    Na métrica 'success' a curva de referência é prob_success; ela coincide com
    a sessão quando o teste é determinístico (r = alpha = beta) e sem ruído.
    """
    if cfg.metric == 'success' and cfg.delay_ns is not None and 10 ** (cfg.gain_db / 10) > cfg.zeta:
        logger.warning(f"a cópia reenviada sozinha excede Gamma (ganho {cfg.gain_db} dB, zeta={cfg.zeta:.3f})")
    tasks = _tasks(cfg)
    logger.info(f"run_grid {cfg.metric}: ks={list(cfg.ks)}, {cfg.trials} trials, {len(tasks)} tarefas")
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]

    counts: Dict[int, List[int]] = {k: [0, 0] for k in cfg.ks}
    for k, successes, count, traces in results:
        counts[k][0] += successes
        counts[k][1] += count
        if registry is not None:
            for session_id, lines in traces.items():
                registry.add_trace(session_id, lines)

    rows = []
    for k in sorted(counts):
        successes, trials = counts[k]
        row = EstimateRow.from_counts(k, successes, trials, _analytic_for(cfg, k))
        if row.flagged:
            logger.warning(f"k={k}: p_hat={row.p_hat:.5f} fora da curva analítica {row.analytic_p:.5f}")
        rows.append(row)
    logger.info(f"run_grid {cfg.metric} concluído")
    return rows


def false_positive_rate(cfg: TrialConfig, frames: Optional[int] = None) -> EstimateRow:
    """
    Fração de candidatos de backtracking aceitos como código em quadros só de ruído.

    Cada quadro cobre a janela T_0 inteira; todas as colunas são avaliadas.
    """
    rx = cfg.receiver_config
    frames = frames or cfg.trials
    width = int(round(rx.backtrack_window_ns / rx.backtrack_step_ns)) + 1
    thresholds = compute_thresholds(cfg.link, cfg.code_params, cfg.link.committed_distance_m, rx)
    sigma = math.sqrt(cfg.link.sigma_n2)

    accepted = 0
    for i in range(frames):
        code_seed, noise_seed, rx_seed = (int(s) for s in np.random.SeedSequence([cfg.base_seed, 0, i])
                                          .generate_state(3, dtype=np.uint64))
        code = generate_code(cfg.code_params, code_seed)
        noise = np.random.default_rng(noise_seed).normal(0.0, sigma, (cfg.code_params.n, width))
        _, _, _, ok = evaluate_candidates(np.square(noise), code, thresholds, rx, rng=np.random.default_rng(rx_seed))
        accepted += int(np.count_nonzero(ok))

    row = EstimateRow.from_counts(0, accepted, frames * width, compare=False)
    logger.info(f"falsos positivos: {accepted}/{frames * width} candidatos")
    return row


def agreement_summary(rows: Sequence[EstimateRow]) -> Dict[str, float]:
    compared = [r for r in rows if r.analytic_p is not None]
    points = len(compared)
    within = sum(r.within_ci for r in compared)
    flagged = sum(r.flagged for r in compared)
    return {
        'points': points,
        'within_ci': within,
        'flagged': flagged,
        'within_fraction': within / points if points else 1.0,
        'flagged_fraction': flagged / points if points else 0.0,
    }


def validation_passed(rows: Sequence[EstimateRow], min_within: float = 0.95, max_flagged: float = 0.01) -> bool:
    """Curva analítica dentro do IC em >= min_within dos pontos e < max_flagged sinalizados."""
    summary = agreement_summary(rows)
    return summary['within_fraction'] >= min_within and summary['flagged_fraction'] < max_flagged


def estimates_to_dataframe(rows: Iterable[EstimateRow]) -> pd.DataFrame:
    df = pd.DataFrame([{
        'k': r.k, 'trials': r.trials, 'successes': r.successes, 'p_hat': r.p_hat,
        'ci_low': r.ci_low, 'ci_high': r.ci_high, 'analytic_p': r.analytic_p,
    } for r in rows], columns=ESTIMATE_COLUMNS)
    return df.sort_values('k', kind='mergesort').reset_index(drop=True)
