"""
Oráculo de força bruta para instâncias pequenas (alpha, beta <= 6).

Enumera posicionamentos das injeções, resultados de fase (anulação ou
amplificação) e todas as escolhas de amostras do receptor, em aritmética
racional exata. Serve de referência para as fórmulas de services.analytic.
"""
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Optional, Tuple

from services.errors import ParameterError

# energias no modelo de potência unitária
_UNTOUCHED = 1
_ANNIHILATED = 0
_AMPLIFIED = 4
_INJECTED_EMPTY = 1

MAX_ORACLE_SIZE = 6


def _check(alpha: int, beta: int, r: int) -> None:
    if alpha > MAX_ORACLE_SIZE or beta > MAX_ORACLE_SIZE:
        raise ParameterError(f"oráculo limitado a alpha, beta <= {MAX_ORACLE_SIZE}")
    if not 1 <= r <= min(alpha, beta):
        raise ParameterError(f"r deve estar em [1, min(alpha, beta)] (r={r})")


@lru_cache(maxsize=None)
def _subset_sums(energies: Tuple[int, ...], r: int) -> Counter:
    return Counter(sum(c) for c in combinations(energies, r))


@lru_cache(maxsize=None)
def _pair_counts(alpha_energies: Tuple[int, ...], beta_energies: Tuple[int, ...], r: int) -> Tuple[int, int]:
    """(pares com Bin_beta > Bin_alpha, pares com Bin_beta <= Bin_alpha)."""
    sums_a = _subset_sums(alpha_energies, r)
    sums_b = _subset_sums(beta_energies, r)
    above = below = 0
    for a, ca in sums_a.items():
        for b, cb in sums_b.items():
            if b > a:
                above += ca * cb
            else:
                below += ca * cb
    return above, below


def _outcomes(alpha: int, beta: int, k: int):
    """Gera (energias Bin_alpha, energias Bin_beta, peso) de cada cenário equiprovável."""
    n = alpha + beta
    placements = comb(n, k)
    for hit in combinations(range(n), k):
        hit_alpha = [s for s in hit if s < alpha]
        beta_energies = tuple(sorted(_INJECTED_EMPTY if (alpha + j) in hit else 0 for j in range(beta)))
        for phases in product((_ANNIHILATED, _AMPLIFIED), repeat=len(hit_alpha)):
            energies = [_UNTOUCHED] * alpha
            for slot, outcome in zip(hit_alpha, phases):
                energies[slot] = outcome
            yield tuple(sorted(energies)), beta_energies, Fraction(1, placements * 2 ** len(hit_alpha))


def oracle_prob_evade(alpha: int, beta: int, r: int, k: int, zeta: Optional[float] = None) -> Fraction:
    """
    P(Bin_beta > Bin_alpha) num teste, por enumeração exaustiva.

    Com zeta, cenários cujo aumento total de energia passa de alpha (zeta - 1)
    não contam (o receptor os rejeitaria por Gamma).
    """
    _check(alpha, beta, r)
    if not 0 <= k <= alpha + beta:
        raise ParameterError(f"k deve estar em [0, n] (k={k})")
    pairs = comb(alpha, r) * comb(beta, r)
    total = Fraction(0)
    for a_en, b_en, weight in _outcomes(alpha, beta, k):
        if zeta is not None and sum(a_en) + sum(b_en) - alpha > alpha * (zeta - 1) + 1e-9:
            continue
        above, _ = _pair_counts(a_en, b_en, r)
        total += weight * Fraction(above, pairs)
    return total


def oracle_prob_noise_pass(alpha: int, beta: int, r: int, kappa: int) -> Fraction:
    """P(ruído com kappa intervalos altos passar num teste; empate aprova)."""
    _check(alpha, beta, r)
    n = alpha + beta
    if not 0 <= kappa <= n:
        raise ParameterError(f"kappa deve estar em [0, n] (kappa={kappa})")
    pairs = comb(alpha, r) * comb(beta, r)
    total = Fraction(0)
    for high in combinations(range(n), kappa):
        a_en = tuple(sorted(1 if s in high else 0 for s in range(alpha)))
        b_en = tuple(sorted(1 if s in high else 0 for s in range(alpha, n)))
        _, below = _pair_counts(a_en, b_en, r)
        total += Fraction(below, pairs)
    return total / comb(n, kappa)
