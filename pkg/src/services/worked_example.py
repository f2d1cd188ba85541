"""
Exemplo numérico completo (n = 18, alpha = 5, k = 10), calculado com as
operações dos módulos: perda de percurso, limiares, sala do adversário,
superposição por slot e Attack Plausibility.

Valores de potência do relatório em uW; a linha de slots usa potência
recebida unitária (1 uW por pulso).
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from services.adversary import AttackPlan, Injection
from services.channel import LinkModel, adversary_room, path_loss_db, synthesize_rx
from services.codec import VerificationCode
from services.receiver import Plausibility, attack_plausibility, compute_thresholds, slot_energies

logger = logging.getLogger(__name__)

MICRO = 1e6

# Código enviado (0-based: pulsos em {1, 5, 6, 12, 14})
EXAMPLE_SENT = (0, -1, 0, 0, 0, -1, 1, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0)

# Injeções do adversário (slot 0-based, fase)
EXAMPLE_INJECTIONS: Tuple[Tuple[int, int], ...] = (
    (0, 1), (1, 1), (4, -1), (6, 1), (7, -1), (8, 1), (11, -1), (12, 1), (16, -1), (17, -1),
)

# Potência no receptor por pulso da linha de slots
UNIT_RX_POWER = 1e-6


@dataclass(frozen=True)
class ExampleSettings:
    d1_m: float = 4.0
    d2_m: float = 4.5
    d3_m: float = 6.0
    e_db: float = -10.0
    p_sent: float = 7.67
    p_adv_sent: float = 15.77


def _row(values) -> str:
    return ','.join(str(int(v)) for v in values)


def run_example(settings: ExampleSettings = ExampleSettings()) -> Dict:
    """Calcula todas as grandezas do exemplo e o relatório em texto."""
    link = LinkModel(d1_m=settings.d1_m, d2_m=settings.d2_m, d3_m=settings.d3_m, e_db=settings.e_db,
                     p_sent=settings.p_sent, p_adv_sent=settings.p_adv_sent)
    code = VerificationCode.from_slots(EXAMPLE_SENT)
    plan = AttackPlan(k=len(EXAMPLE_INJECTIONS),
                      injections=tuple(Injection(slot, phase) for slot, phase in EXAMPLE_INJECTIONS),
                      slot_spacing_ns=code.params.ts_ns)

    thresholds = compute_thresholds(link, code.params, link.committed_distance_m)
    lambda_b2 = thresholds.gamma_upper / code.params.alpha
    r_db, zeta = adversary_room(settings.d1_m, settings.d2_m, settings.e_db)

    signal = synthesize_rx(code, link, plan, rx_power=UNIT_RX_POWER)
    energies = slot_energies(signal)
    aggregate = float(energies.sum())
    verdict = attack_plausibility(energies, thresholds)

    injected = ['_'] * code.params.n
    for slot, phase in EXAMPLE_INJECTIONS:
        injected[slot] = str(phase)
    received = signal.amplitudes / UNIT_RX_POWER ** 0.5

    lines: List[str] = [
        "Exemplo numérico UWB-ED",
        f"d1 = {settings.d1_m:.2f} m, d2 = {settings.d2_m:.2f} m, d3 = {settings.d3_m:.2f} m, E = {settings.e_db:.1f} dB",
        f"f(d1 + d2) = {path_loss_db(link.committed_distance_m):.2f} dB",
        f"lambda_b^2 = {lambda_b2 * MICRO:.2f} uW",
        f"Gamma = alpha * lambda_b^2 = {thresholds.gamma_upper * MICRO:.2f} uW (alpha = {code.params.alpha})",
        f"lambda_w^2 = {link.rx_power_worst * MICRO:.2f} uW",
        f"lambda'^2 = {link.rx_power_adversary * MICRO:.2f} uW",
        f"R = {r_db:.2f} dB, zeta = {zeta:.2f}",
    ]
    if settings.d2_m == 0:
        lines.append(f"d2 = 0: zeta = 10^(-E/10) = {10 ** (-settings.e_db / 10):.2f}")
    if abs(r_db) < 0.05:
        lines.append("room ≈ 0 dB: o adversário não tem margem")
    lines += [
        f"Enviado:  {_row(EXAMPLE_SENT)}",
        f"Injetado: {','.join(injected)}",
        f"Recebido: {_row(received.round())}",
        f"Energias: {_row((energies * MICRO).round())}",
        f"Agregado = {aggregate * MICRO:.0f} uW",
    ]
    if verdict == Plausibility.ENERGY_EXCEEDED:
        lines.append(f"AttackDetected: aggregate {aggregate * MICRO:.0f} > Γ {thresholds.gamma_upper * MICRO:.0f}")
    else:
        lines.append(f"{verdict.value}: aggregate {aggregate * MICRO:.0f} <= Γ {thresholds.gamma_upper * MICRO:.0f}")
    logger.debug(f"exemplo numérico: {verdict.value}")

    return {
        'lambda_b2_uw': lambda_b2 * MICRO,
        'gamma_upper_uw': thresholds.gamma_upper * MICRO,
        'lambda_w2_uw': link.rx_power_worst * MICRO,
        'lambda_adv2_uw': link.rx_power_adversary * MICRO,
        'r_db': r_db,
        'zeta': zeta,
        'sent': list(EXAMPLE_SENT),
        'received': [int(v) for v in received.round()],
        'energies_uw': [float(e) for e in (energies * MICRO).round(9)],
        'aggregate_uw': aggregate * MICRO,
        'verdict': verdict.value,
        'report': '\n'.join(lines),
    }
