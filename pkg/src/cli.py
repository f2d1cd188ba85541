"""
CLI do laboratório UWB-ED.

Sub-comandos:
    analytic   curvas das fórmulas fechadas (CSV)
    simulate   grade de Monte-Carlo com sessões completas (CSV + traces)
    validate   concordância simulação x modelo analítico (exit 1 se falhar)
    example    relatório do exemplo numérico

Configuração: arquivo chave=valor (--config) com os mesmos nomes dos campos;
flags da linha de comando têm precedência. Exit codes: 0 sucesso, 1 falha de
validação, 2 erro de uso/parâmetro.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, List, Optional

import pandas as pd
from dotenv import dotenv_values

from constants.config import (
    DEFAULT_TRIALS,
    LOG_LEVEL,
    P_NOISE_THRESHOLD,
    STORE_RESULTS,
    TRIAL_BLOCK_SIZE,
    UPSILON,
    WORKERS,
)
from constants.radio import DEFAULT_EXTRA_LOSS_DB, DEFAULT_REPLAY_DELAY_NS, DEFAULT_REPLAY_GAIN_DB
from services.analytic import FORMULAS, AnalyticParams, sweep
from services.channel import LinkModel, expected_rx_power
from services.codec import CodeParams
from services.csv_export import write_csv, write_lines
from services.errors import ParameterError, UwbEdError
from services.montecarlo import (
    METRICS,
    TrialConfig,
    agreement_summary,
    estimates_to_dataframe,
    false_positive_rate,
    run_grid,
    validation_passed,
)
from services.receiver import ReceiverConfig
from services.session_manager import SessionRegistry
from services.worked_example import ExampleSettings, run_example

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2

# taxa máxima de falsos positivos aceita na validação
MAX_FALSE_POSITIVE_RATE = 1e-5


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'sim', 'on'):
        return True
    if text in ('0', 'false', 'no', 'nao', 'não', 'off', ''):
        return False
    raise ParameterError(f"valor booleano inválido: {value}")


def _to_float(value: Any) -> float:
    return math.inf if str(value).strip().lower() in ('inf', 'infinity') else float(value)


def _to_opt_float(value: Any) -> Optional[float]:
    return None if value is None or str(value).strip().lower() in ('', 'none') else float(value)


def parse_int_list(text: Optional[str]) -> Optional[List[int]]:
    """'0,10,20' ou 'início:fim:passo' (fim inclusivo)."""
    if text is None or str(text).strip() == '':
        return None
    text = str(text).strip()
    try:
        if ':' in text:
            parts = [int(p) for p in text.split(':')]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step <= 0:
                raise ParameterError(f"passo deve ser > 0: {text}")
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(',') if p.strip()]
    except ValueError:
        raise ParameterError(f"lista de inteiros inválida: {text}")


# nome -> (conversor, padrão)
FIELDS: Dict[str, tuple] = {
    'formula': (str, 'pevade'),
    'alpha': (int, 50),
    'beta': (int, 50),
    'r': (int, 1),
    'k': (int, None),
    'ks': (str, None),
    'betas': (str, None),
    'rs': (str, None),
    'zeta': (_to_float, math.inf),
    'kappa': (int, 0),
    'd1': (float, 50.0),
    'd2': (float, 0.0),
    'd3': (float, 1.0),
    'e_db': (float, DEFAULT_EXTRA_LOSS_DB),
    'p_sent': (float, 1.0),
    'p_adv_sent': (float, 1.0),
    'noise_ratio': (float, 0.01),
    'sigma_n2': (_to_opt_float, None),
    'delay_ns': (_to_opt_float, DEFAULT_REPLAY_DELAY_NS),
    'gain_db': (float, DEFAULT_REPLAY_GAIN_DB),
    'power_policy': (str, 'matched'),
    'upsilon': (int, UPSILON),
    'p_noise_threshold': (float, P_NOISE_THRESHOLD),
    'trials': (int, DEFAULT_TRIALS),
    'seed': (int, 0),
    'workers': (int, WORKERS),
    'metric': (str, None),
    'block_size': (int, TRIAL_BLOCK_SIZE),
    'trace_sessions': (int, 10),
    'fpr_frames': (int, 0),
    'out': (str, None),
    'traces': (str, None),
    'store': (_to_bool, STORE_RESULTS),
}


@dataclass(frozen=True)
class RunConfig:
    """Configuração resolvida (arquivo + flags) de uma execução da CLI."""
    values: Dict[str, Any]
    provided: FrozenSet[str] = field(default_factory=frozenset)

    def __getattr__(self, name: str) -> Any:
        values = self.__dict__.get('values', {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    @classmethod
    def load(cls, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        raw: Dict[str, Any] = {}
        if config_path:
            if not os.path.exists(config_path):
                raise ParameterError(f"arquivo de configuração não encontrado: {config_path}")
            for key, value in dotenv_values(config_path).items():
                name = key.strip().lower()
                if name not in FIELDS:
                    raise ParameterError(f"chave desconhecida no arquivo de configuração: {key}")
                raw[name] = value
        for name, value in (overrides or {}).items():
            if name in FIELDS and value is not None:
                raw[name] = value

        values = {}
        for name, (convert, default) in FIELDS.items():
            if name in raw and raw[name] is not None:
                try:
                    values[name] = convert(raw[name])
                except ValueError:
                    raise ParameterError(f"valor inválido para {name}: {raw[name]}")
            else:
                values[name] = default
        config = cls(values=values, provided=frozenset(raw))
        config.validate()
        return config

    def validate(self) -> None:
        """Constrói os objetos dos módulos para validar invariantes já na carga."""
        if self.formula not in FORMULAS:
            raise ParameterError(f"fórmula desconhecida: {self.formula} (opções: {', '.join(FORMULAS)})")
        if self.metric is not None and self.metric not in METRICS:
            raise ParameterError(f"métrica desconhecida: {self.metric} (opções: {', '.join(METRICS)})")
        self.code_params()
        self.link()
        self.receiver_config()
        self.k_values()
        parse_int_list(self.betas)
        parse_int_list(self.rs)

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.values)

    def code_params(self, beta: Optional[int] = None, r: Optional[int] = None) -> CodeParams:
        return CodeParams.of(self.alpha, self.beta if beta is None else beta, self.r if r is None else r)

    def link(self) -> LinkModel:
        if self.sigma_n2 is not None:
            sigma_n2 = self.sigma_n2
        else:
            sigma_n2 = self.noise_ratio * expected_rx_power(self.p_sent, self.d1, self.e_db)
        return LinkModel(d1_m=self.d1, d2_m=self.d2, d3_m=self.d3, e_db=self.e_db, p_sent=self.p_sent,
                         p_adv_sent=self.p_adv_sent, sigma_n2=sigma_n2)

    def receiver_config(self, r: Optional[int] = None) -> ReceiverConfig:
        return ReceiverConfig(upsilon=self.upsilon, p_noise_threshold=self.p_noise_threshold,
                              r=self.r if r is None else r, rng_seed=self.seed)

    def k_values(self) -> Optional[List[int]]:
        if self.k is not None:
            return [self.k]
        return parse_int_list(self.ks)

    def trial_config(self, metric: str, beta: Optional[int] = None, r: Optional[int] = None) -> TrialConfig:
        params = self.code_params(beta, r)
        ks = self.k_values() or list(range(0, params.n + 1, max(1, params.n // 10)))
        return TrialConfig(code_params=params, link=self.link(), ks=tuple(ks), trials=self.trials,
                           base_seed=self.seed, metric=metric, receiver=self.receiver_config(r),
                           delay_ns=self.delay_ns, gain_db=self.gain_db, power_policy=self.power_policy,
                           block_size=self.block_size, workers=self.workers,
                           trace_sessions=self.trace_sessions)


def _store(cfg: RunConfig, command: str, rows=(), traces=None, metric=None) -> None:
    if not cfg.store:
        return
    from services.result_store import get_result_store
    run_id = get_result_store().save_run(command, cfg.seed, cfg.as_dict(), rows, traces, metric)
    logger.info(f"resultados salvos na execução {run_id}")


def cmd_analytic(cfg: RunConfig) -> int:
    params = AnalyticParams(alpha=cfg.alpha, beta=cfg.beta, r=cfg.r, zeta=cfg.zeta, kappa=cfg.kappa)
    ks = cfg.k_values()
    if cfg.formula == 'pnoise' and ks is None:
        ks = [cfg.kappa]
    df = sweep(cfg.formula, params, ks, cfg.workers)
    write_csv(df, cfg.out, sort_by=['alpha', 'beta', 'r', 'zeta', 'k'])
    _store(cfg, 'analytic')
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    metric = cfg.metric or 'success'
    trial_cfg = cfg.trial_config(metric)
    registry = SessionRegistry()
    rows = run_grid(trial_cfg, registry)
    write_csv(estimates_to_dataframe(rows), cfg.out, sort_by=['k'])

    traces_path = cfg.traces or (f"{cfg.out}.traces" if cfg.out not in (None, '-') else None)
    if traces_path and registry.list_sessions():
        write_lines(registry.trace_lines(), traces_path)
    _store(cfg, 'simulate', rows, registry.traces_by_session(), metric)
    return EXIT_OK


def _simulate_with_validation(cfg: RunConfig) -> int:
    status = cmd_simulate(cfg)
    evade_rows = run_grid(cfg.trial_config('evade'))
    summary = agreement_summary(evade_rows)
    logger.info(f"concordância: {summary['within_ci']}/{summary['points']} pontos no IC, "
                f"{summary['flagged']} sinalizados")
    if not validation_passed(evade_rows):
        print(f"validação falhou: {summary['flagged']} de {summary['points']} pontos sinalizados", file=sys.stderr)
        return EXIT_VALIDATION_FAILED
    return status


def cmd_validate(cfg: RunConfig) -> int:
    betas = parse_int_list(cfg.betas) or [cfg.beta]
    rs = parse_int_list(cfg.rs) or [cfg.r]
    frames = []
    all_rows = []
    for beta in betas:
        for r in rs:
            rows = run_grid(cfg.trial_config('evade', beta=beta, r=r))
            all_rows.extend(rows)
            df = estimates_to_dataframe(rows)
            df.insert(0, 'r', r)
            df.insert(0, 'beta', beta)
            df.insert(0, 'alpha', cfg.alpha)
            frames.append(df)
    write_csv(pd.concat(frames, ignore_index=True), cfg.out, sort_by=['alpha', 'beta', 'r', 'k'])

    passed = validation_passed(all_rows)
    summary = agreement_summary(all_rows)
    logger.info(f"concordância: {summary['within_ci']}/{summary['points']} pontos no IC, "
                f"{summary['flagged']} sinalizados")

    if cfg.fpr_frames > 0:
        fpr = false_positive_rate(cfg.trial_config('evade'), frames=cfg.fpr_frames)
        logger.info(f"taxa de falsos positivos: {fpr.p_hat:.3g} ({fpr.successes}/{fpr.trials})")
        if fpr.p_hat >= MAX_FALSE_POSITIVE_RATE:
            print(f"validação falhou: taxa de falsos positivos {fpr.p_hat:.3g}", file=sys.stderr)
            passed = False

    _store(cfg, 'validate', all_rows, metric='evade')
    if not passed:
        if summary['points']:
            print(f"validação falhou: {summary['within_ci']}/{summary['points']} pontos no IC, "
                  f"{summary['flagged']} sinalizados", file=sys.stderr)
        return EXIT_VALIDATION_FAILED
    return EXIT_OK


def cmd_example(cfg: RunConfig) -> int:
    defaults = ExampleSettings()
    names = {'d1': 'd1_m', 'd2': 'd2_m', 'd3': 'd3_m', 'e_db': 'e_db', 'p_sent': 'p_sent', 'p_adv_sent': 'p_adv_sent'}
    settings = replace(defaults, **{attr: cfg.values[key] for key, attr in names.items() if key in cfg.provided})
    report = run_example(settings)['report']
    write_lines(report.splitlines(), cfg.out)
    return EXIT_OK


COMMANDS = {
    'analytic': cmd_analytic,
    'simulate': cmd_simulate,
    'validate': cmd_validate,
    'example': cmd_example,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Erros de uso viram exceção (diagnóstico de uma linha no main)."""

    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument('--config', type=str, default=None, help='arquivo chave=valor')
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--out', type=str, default=None, help="arquivo de saída ('-' = stdout)")
    p.add_argument('--store', action='store_const', const=True, default=None,
                   help='salva os resultados no banco')
    p.add_argument('--log-level', type=str, default=None)


def _add_code(p: argparse.ArgumentParser) -> None:
    p.add_argument('--alpha', type=int, default=None)
    p.add_argument('--beta', type=int, default=None)
    p.add_argument('--r', type=int, default=None)
    p.add_argument('--k', type=int, default=None, help='um único k')
    p.add_argument('--ks', type=str, default=None, help="grade de k: '0,10,20' ou '0:100:10'")
    p.add_argument('--workers', type=int, default=None)


def _add_link(p: argparse.ArgumentParser) -> None:
    p.add_argument('--d1', type=float, default=None, help='distância real (m)')
    p.add_argument('--d2', type=float, default=None, help='ampliação pretendida (m)')
    p.add_argument('--d3', type=float, default=None, help='distância adversário-receptor (m)')
    p.add_argument('--e', dest='e_db', type=float, default=None, help='degradação extra E (dB)')
    p.add_argument('--p-sent', dest='p_sent', type=float, default=None)
    p.add_argument('--p-adv-sent', dest='p_adv_sent', type=float, default=None)


def _add_simulation(p: argparse.ArgumentParser) -> None:
    _add_code(p)
    _add_link(p)
    p.add_argument('--noise-ratio', dest='noise_ratio', type=float, default=None,
                   help='sigma^2 / lambda_w^2')
    p.add_argument('--sigma-n2', dest='sigma_n2', type=float, default=None)
    p.add_argument('--delay-ns', dest='delay_ns', type=float, default=None)
    p.add_argument('--gain-db', dest='gain_db', type=float, default=None)
    p.add_argument('--power-policy', dest='power_policy', type=str, default=None)
    p.add_argument('--upsilon', type=int, default=None)
    p.add_argument('--p-noise-threshold', dest='p_noise_threshold', type=float, default=None)
    p.add_argument('--trials', type=int, default=None)
    p.add_argument('--block-size', dest='block_size', type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='uwb-ed-lab', description='Laboratório de detecção de ampliação de distância UWB-ED')
    sub = parser.add_subparsers(dest='cmd', required=True, parser_class=_Parser)

    a = sub.add_parser('analytic', help='curvas das fórmulas fechadas')
    _add_common(a)
    _add_code(a)
    a.add_argument('--formula', type=str, default=None, help=f"uma de: {', '.join(FORMULAS)}")
    a.add_argument('--zeta', type=str, default=None, help="sala do adversário (ou fator gamma em 'appendix')")
    a.add_argument('--kappa', type=int, default=None)

    s = sub.add_parser('simulate', help='grade de Monte-Carlo')
    _add_common(s)
    _add_simulation(s)
    s.add_argument('--metric', type=str, default=None, help=f"uma de: {', '.join(METRICS)}")
    s.add_argument('--traces', type=str, default=None, help='arquivo dos traces das sessões')
    s.add_argument('--trace-sessions', dest='trace_sessions', type=int, default=None)
    s.add_argument('--validate', action='store_true', help='confere a concordância com o modelo analítico')

    v = sub.add_parser('validate', help='concordância simulação x modelo')
    _add_common(v)
    _add_simulation(v)
    v.add_argument('--betas', type=str, default=None, help="lista de beta, ex.: '50,150'")
    v.add_argument('--rs', type=str, default=None, help="lista de r, ex.: '1,2,8'")
    v.add_argument('--fpr-frames', dest='fpr_frames', type=int, default=None)

    e = sub.add_parser('example', help='exemplo numérico')
    _add_common(e)
    _add_link(e)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE

    level = (args.log_level or LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr,
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    overrides = {k: v for k, v in vars(args).items() if k not in ('cmd', 'config', 'log_level', 'validate')}
    try:
        cfg = RunConfig.load(args.config, overrides)
        if args.cmd == 'simulate' and args.validate:
            return _simulate_with_validation(cfg)
        return COMMANDS[args.cmd](cfg)
    except (UwbEdError, OSError) as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
