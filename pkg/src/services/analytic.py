"""
Probabilidades fechadas do esquema UWB-ED.

Dois avaliadores para cada fórmula:
  - ponto flutuante em espaço logarítmico (gammaln / scipy.stats.hypergeom),
    para alpha e beta na casa dos milhares
  - racional exato (fractions.Fraction + math.comb), com `exact=True`

Modelo de potência unitária: pulso intacto = 1, anulado = 0, amplificado = 4,
pulso do adversário em slot vazio = 1. C(n, r) = 0 fora de 0 <= r <= n.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import gammaln
from scipy.stats import hypergeom as hypergeom_dist

from services.errors import ParameterError

logger = logging.getLogger(__name__)

Probability = Union[float, Fraction]

FORMULAS = ('pevade', 'psa', 'pnoise', 'appendix')

_LN2 = math.log(2.0)
_GATE_TOL = 1e-9


def _check_nonneg(**values) -> None:
    for name, value in values.items():
        if int(value) != value or value < 0:
            raise ParameterError(f"{name} deve ser inteiro >= 0 (recebido {value})")


def _check_code(alpha: int, beta: int, r: int) -> None:
    _check_nonneg(alpha=alpha, beta=beta, r=r)
    if not 1 <= r <= alpha:
        raise ParameterError(f"r deve estar em [1, alpha]: r={r}, alpha={alpha}")
    if r > beta:
        raise ParameterError(f"r={r} excede beta={beta}")


def _comb(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def _log_comb(n: int, k: int) -> float:
    if not 0 <= k <= n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_comb_np(n, k) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (k >= 0) & (k <= n)
    safe_k = np.where(valid, k, 0.0)
    safe_n = np.where(valid, n, 0.0)
    out = gammaln(safe_n + 1) - gammaln(safe_k + 1) - gammaln(safe_n - safe_k + 1)
    return np.where(valid, out, -np.inf)


def _choose_ratio(nums: Sequence[Tuple[int, int]], dens: Sequence[Tuple[int, int]], exact: bool) -> Probability:
    """prod C(num) / prod C(den), exato ou via log."""
    if exact:
        top = math.prod(_comb(n, k) for n, k in nums)
        if top == 0:
            return Fraction(0)
        return Fraction(top, math.prod(_comb(n, k) for n, k in dens))
    log_top = sum(_log_comb(n, k) for n, k in nums)
    if log_top == -math.inf:
        return 0.0
    return math.exp(log_top - sum(_log_comb(n, k) for n, k in dens))


def _binomial_weight(x: int, g: int, exact: bool) -> Probability:
    """C(x, g) / 2^x: g dos x pulsos em Bin_alpha anulados."""
    if exact:
        return Fraction(_comb(x, g), 2 ** x)
    return math.exp(_log_comb(x, g) - x * _LN2)


def _total(terms: Iterable[Probability], exact: bool) -> Probability:
    if exact:
        return sum(terms, Fraction(0))
    # menores primeiro
    return min(1.0, max(0.0, math.fsum(sorted(terms))))


def _budget(alpha: int, zeta: float) -> float:
    if zeta <= 0:
        raise ParameterError(f"zeta deve ser > 0 (recebido {zeta})")
    return math.inf if math.isinf(zeta) else alpha * (zeta - 1)


def _gate_open(k: int, x: int, g: int, budget: float) -> bool:
    return k + 2 * x - 4 * g <= budget + _GATE_TOL * max(1.0, abs(budget))


@dataclass(frozen=True)
class AnalyticParams:
    """Parâmetros das fórmulas; zeta também serve de fator gamma no apêndice."""
    alpha: int
    beta: int
    r: int = 1
    k: int = 0
    zeta: float = math.inf
    kappa: int = 0

    def __post_init__(self):
        _check_nonneg(alpha=self.alpha, beta=self.beta, r=self.r, k=self.k, kappa=self.kappa)
        if self.alpha > 0 and self.r > self.alpha:
            raise ParameterError(f"r={self.r} excede alpha={self.alpha}")
        if self.k > self.n or self.kappa > self.n:
            raise ParameterError(f"k e kappa devem ser <= n={self.n}")
        if self.zeta <= 0:
            raise ParameterError(f"zeta deve ser > 0 (recebido {self.zeta})")

    @property
    def n(self) -> int:
        return self.alpha + self.beta


def hypergeom(I: int, J: int, i: int, j: int, exact: bool = False) -> Probability:
    """C(I, i) C(J, j) / C(I + J, i + j)."""
    _check_nonneg(I=I, J=J, i=i, j=j)
    if i + j > I + J:
        return Fraction(0) if exact else 0.0
    return _choose_ratio([(I, i), (J, j)], [(I + J, i + j)], exact)


def _tail(beta: int, injected: int, r: int, m: int, exact: bool) -> Probability:
    """P(agregado de r amostras de Bin_beta >= m) com `injected` slots energizados."""
    terms = [_choose_ratio([(injected, i), (beta - injected, r - i)], [(beta, r)], exact)
             for i in range(max(m, 0), min(injected, r) + 1)]
    return _total(terms, exact)


def p_inner(alpha: int, beta: int, r: int, k: int, x: int, g: int,
            exact: bool = False, form: str = 'auto') -> Probability:
    """
    Probabilidade de Bin_beta superar Bin_alpha dado x injeções em Bin_alpha,
    das quais g anularam pulsos.

    form='general' usa a soma dupla em (y1, y2); form='full' usa a forma de
    soma única válida só para r = alpha. 'auto' escolhe 'full' quando possível.
    """
    _check_code(alpha, beta, r)
    _check_nonneg(k=k, x=x, g=g)
    if not g <= x <= min(k, alpha) or k - x > beta:
        raise ParameterError(f"esperado g <= x <= min(k, alpha) e k - x <= beta (k={k}, x={x}, g={g})")
    if form not in ('auto', 'general', 'full'):
        raise ParameterError(f"forma desconhecida: {form}")
    if form == 'full' and r != alpha:
        raise ParameterError("a forma 'full' exige r = alpha")

    injected = k - x
    if form == 'full' or (form == 'auto' and r == alpha):
        m_full = 4 * (x - g) + (alpha - x) + 1
        return _tail(beta, injected, r, m_full, exact)

    terms = []
    for y1 in range(min(g, r) + 1):
        for y2 in range(min(x - g, r - y1) + 1):
            y0 = r - y1 - y2
            if y0 > alpha - x:
                continue
            comp = _choose_ratio([(g, y1), (x - g, y2), (alpha - x, y0)], [(alpha, r)], exact)
            if comp:
                terms.append(comp * _tail(beta, injected, r, r - y1 + 3 * y2 + 1, exact))
    return _total(terms, exact)


def p_given_x(alpha: int, beta: int, r: int, k: int, x: int, exact: bool = False) -> Probability:
    """Mistura binomial sobre o número g de anulações."""
    terms = [_binomial_weight(x, g, exact) * p_inner(alpha, beta, r, k, x, g, exact)
             for g in range(x + 1)]
    return _total(terms, exact)


@lru_cache(maxsize=32)
def _mixture_table(alpha: int, r: int):
    """Composições (x, g, y1, y2) válidas e o log do peso independente de k."""
    rows = []
    for x in range(alpha + 1):
        for g in range(x + 1):
            for y1 in range(min(g, r) + 1):
                lo = max(0, r - y1 - (alpha - x))
                for y2 in range(lo, min(x - g, r - y1) + 1):
                    rows.append((x, g, y1, y2))
    table = np.array(rows, dtype=np.int64).reshape(-1, 4)
    x, g, y1, y2 = table.T
    log_weight = (_log_comb_np(g, y1) + _log_comb_np(x - g, y2) + _log_comb_np(alpha - x, r - y1 - y2)
                  - _log_comb(alpha, r) + _log_comb_np(x, g) - x * _LN2)
    return x, g, r - y1 + 3 * y2 + 1, log_weight


def _tail_table(beta: int, r: int, injected: np.ndarray) -> np.ndarray:
    """tail[row, m] = P(agregado Bin_beta >= m), m em 0..r+1."""
    valid = (injected >= 0) & (injected <= beta)
    draws = np.arange(r + 1)
    pmf = hypergeom_dist.pmf(draws[None, :], beta, np.clip(injected, 0, beta)[:, None], r)
    pmf[~valid] = 0.0
    sf = np.cumsum(pmf[:, ::-1], axis=1)[:, ::-1]
    return np.hstack([sf, np.zeros((len(injected), 1))])


def _mixture_terms(alpha: int, beta: int, r: int, k: int):
    x, g, m, log_weight = _mixture_table(alpha, r)
    xs = np.arange(alpha + 1)
    log_hyp = _log_comb_np(alpha, xs) + _log_comb_np(beta, k - xs) - _log_comb(alpha + beta, k)
    tails = _tail_table(beta, r, k - xs)
    terms = np.exp(log_weight + log_hyp[x]) * tails[x, np.minimum(m, r + 1)]
    return x, g, terms


def _check_curve(alpha: int, beta: int, r: int, k: int) -> None:
    _check_code(alpha, beta, r)
    _check_nonneg(k=k)
    if k > alpha + beta:
        raise ParameterError(f"k={k} excede n={alpha + beta}")


def prob_evade_rcv(alpha: int, beta: int, r: int, k: int, exact: bool = False) -> Probability:
    """Probabilidade de um teste de amostra aleatória ter Bin_beta > Bin_alpha."""
    _check_curve(alpha, beta, r, k)
    if exact:
        terms = [p_given_x(alpha, beta, r, k, x, exact=True) * hypergeom(alpha, beta, x, k - x, exact=True)
                 for x in range(max(0, k - beta), min(k, alpha) + 1)]
        return _total(terms, True)
    _, _, terms = _mixture_terms(alpha, beta, r, k)
    return _total(terms, False)


def prob_success(alpha: int, beta: int, r: int, zeta: float, k: int, exact: bool = False) -> Probability:
    """
    Sucesso do adversário sob o limite Gamma: cada termo (x, g) só conta se
    k + 2x - 4g <= alpha (zeta - 1).
    """
    _check_curve(alpha, beta, r, k)
    budget = _budget(alpha, zeta)
    if exact:
        terms = []
        for x in range(max(0, k - beta), min(k, alpha) + 1):
            hyp = hypergeom(alpha, beta, x, k - x, exact=True)
            for g in range(x + 1):
                if _gate_open(k, x, g, budget):
                    terms.append(hyp * _binomial_weight(x, g, True) * p_inner(alpha, beta, r, k, x, g, exact=True))
        return _total(terms, True)
    x, g, terms = _mixture_terms(alpha, beta, r, k)
    keep = (k + 2 * x - 4 * g) <= budget + _GATE_TOL * max(1.0, abs(budget) if np.isfinite(budget) else 1.0)
    return _total(terms[keep], False)


def prob_noise_pass(alpha: int, beta: int, r: int, kappa: int, exact: bool = False,
                    ties_pass: bool = True) -> Probability:
    """
    Probabilidade de ruído puro passar no teste: kappa intervalos de alta
    energia espalhados pelos n slots.

    Com ties_pass (padrão do receptor) o agregado de Bin_beta pode igualar o de
    Bin_alpha; em (80, 100, 80, 40) isso dá 0.5377, e 0.4623 no teste estrito.
    """
    _check_code(alpha, beta, r)
    _check_nonneg(kappa=kappa)
    if kappa > alpha + beta:
        raise ParameterError(f"kappa={kappa} excede n={alpha + beta}")
    xs = range(max(0, kappa - beta), min(kappa, alpha) + 1)
    upper = 1 if ties_pass else 0

    if exact:
        terms = []
        for x in xs:
            hyp = hypergeom(alpha, beta, x, kappa - x, exact=True)
            for y in range(r + 1):
                outer = _choose_ratio([(alpha - x, r - y), (x, y)], [(alpha, r)], True)
                if outer:
                    inner = sum((_choose_ratio([(beta - (kappa - x), r - i), (kappa - x, i)], [(beta, r)], True)
                                 for i in range(y + upper)), Fraction(0))
                    terms.append(hyp * outer * inner)
        return _total(terms, True)

    x_arr = np.fromiter(xs, dtype=np.int64)
    draws = np.arange(r + 1)
    outer = hypergeom_dist.pmf(draws[None, :], alpha, x_arr[:, None], r)
    inner = np.cumsum(hypergeom_dist.pmf(draws[None, :], beta, (kappa - x_arr)[:, None], r), axis=1)
    if not ties_pass:
        inner = np.hstack([np.zeros((len(x_arr), 1)), inner[:, :-1]])
    log_hyp = _log_comb_np(alpha, x_arr) + _log_comb_np(beta, kappa - x_arr) - _log_comb(alpha + beta, kappa)
    terms = np.exp(log_hyp)[:, None] * outer * np.minimum(inner, 1.0)
    return _total(terms.ravel(), False)


def appendix_prob_delta(n: int, alpha: int, k: int, delta: int, exact: bool = False) -> Probability:
    """
    Probabilidade de o agregado total subir `delta` unidades com k injeções.

    b = (k - delta)/2 pulsos anulados; paridade ímpar ou fora de [-k, k] => 0.
    """
    _check_nonneg(n=n, alpha=alpha, k=k)
    if alpha > n or k > n:
        raise ParameterError(f"esperado alpha <= n e k <= n (n={n}, alpha={alpha}, k={k})")
    if int(delta) != delta:
        raise ParameterError(f"delta deve ser inteiro (recebido {delta})")
    if not -k <= delta <= k or (k - delta) % 2:
        return Fraction(0) if exact else 0.0
    b = (k - delta) // 2
    terms = [_binomial_weight(x1, b, exact) * _choose_ratio([(alpha, x1), (n - alpha, k - x1)], [(n, k)], exact)
             for x1 in range(b, k + 1)]
    return _total(terms, exact)


def appendix_prob_within_threshold(n: int, alpha: int, k: int, gamma_factor: float,
                                   exact: bool = False) -> Probability:
    """Soma de appendix_prob_delta para delta de -k até alpha (gamma_factor - 1)."""
    if gamma_factor < 1:
        raise ParameterError(f"gamma_factor deve ser >= 1 (recebido {gamma_factor})")
    room = alpha * (gamma_factor - 1)
    upper = k if math.isinf(room) else min(k, math.floor(room + _GATE_TOL * max(1.0, room)))
    terms = [appendix_prob_delta(n, alpha, k, d, exact) for d in range(-k, upper + 1)]
    return _total(terms, exact)


def evaluate(formula: str, params: AnalyticParams, exact: bool = False) -> Probability:
    """Avalia uma fórmula pelo nome usado na CLI e na API."""
    if formula == 'pevade':
        return prob_evade_rcv(params.alpha, params.beta, params.r, params.k, exact)
    if formula == 'psa':
        return prob_success(params.alpha, params.beta, params.r, params.zeta, params.k, exact)
    if formula == 'pnoise':
        return prob_noise_pass(params.alpha, params.beta, params.r, params.kappa, exact)
    if formula == 'appendix':
        return appendix_prob_within_threshold(params.n, params.alpha, params.k, params.zeta, exact)
    raise ParameterError(f"fórmula desconhecida: {formula} (opções: {', '.join(FORMULAS)})")


def _grid_point(task: Tuple[str, dict]) -> dict:
    formula, values = task
    params = AnalyticParams(**values)
    p = float(evaluate(formula, params))
    k = params.kappa if formula == 'pnoise' else params.k
    return {'alpha': params.alpha, 'beta': params.beta, 'r': params.r, 'zeta': params.zeta, 'k': k, 'p': p}


def sweep(formula: str, params: AnalyticParams, ks: Optional[Iterable[int]] = None,
          workers: int = 1) -> pd.DataFrame:
    """
    Curva (alpha, beta, r, zeta, k, p) sobre k (ou kappa, para pnoise).

    Sem `ks`, pnoise avalia só params.kappa e as demais varrem k = 0..n.
    """
    if formula not in FORMULAS:
        raise ParameterError(f"fórmula desconhecida: {formula} (opções: {', '.join(FORMULAS)})")
    if ks is None:
        ks = [params.kappa] if formula == 'pnoise' else range(params.n + 1)
    field = 'kappa' if formula == 'pnoise' else 'k'
    base = asdict(params)
    tasks = [(formula, {**base, field: int(k)}) for k in ks]

    logger.info(f"sweep {formula}: {len(tasks)} pontos (alpha={params.alpha}, beta={params.beta}, r={params.r})")
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_grid_point(t) for t in tasks]

    df = pd.DataFrame(rows, columns=['alpha', 'beta', 'r', 'zeta', 'k', 'p'])
    return df.sort_values(['alpha', 'beta', 'r', 'zeta', 'k'], kind='mergesort').reset_index(drop=True)


def best_k(curve: pd.DataFrame) -> Tuple[int, float]:
    """Maior p da curva; em empate, o menor k."""
    if curve.empty:
        raise ParameterError("curva vazia")
    ordered = curve.sort_values('k', kind='mergesort')
    row = ordered.loc[ordered['p'].idxmax()]
    return int(row['k']), float(row['p'])


def best_k_scan(formula: str, base: AnalyticParams, vary: str, values: Iterable,
                ks: Optional[Iterable[int]] = None, workers: int = 1) -> pd.DataFrame:
    """Máximo sobre k da fórmula variando um parâmetro (ex.: r ou beta)."""
    if vary not in ('alpha', 'beta', 'r', 'zeta'):
        raise ParameterError(f"parâmetro de varredura inválido: {vary}")
    rows: List[dict] = []
    for value in values:
        params = AnalyticParams(**{**asdict(base), vary: value})
        k, p = best_k(sweep(formula, params, ks, workers))
        rows.append({vary: value, 'k': k, 'p': p})
    return pd.DataFrame(rows)
