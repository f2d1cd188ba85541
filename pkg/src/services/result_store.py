"""
Persistência das execuções, estimativas e traces no banco de resultados.
"""
import json
import logging
from typing import Dict, Iterable, List, Mapping, Optional

import pandas as pd

from models.models import EstimateRecord, SessionTrace, SimulationRun
from services.montecarlo import ESTIMATE_COLUMNS, EstimateRow
from sql.database import DatabaseManager

logger = logging.getLogger(__name__)


class ResultStore:
    """Grava e consulta resultados via DatabaseManager"""

    def __init__(self, database_url: Optional[str] = None, db: Optional[DatabaseManager] = None):
        self.db = db or DatabaseManager(database_url)
        self.db.create_tables()

    def save_run(self, command: str, base_seed: int, parameters: Mapping, rows: Iterable[EstimateRow] = (),
                 traces: Optional[Mapping[str, List[str]]] = None, metric: Optional[str] = None) -> int:
        """
        Salva uma execução completa.

        Returns:
            ID da execução
        """
        with self.db.get_session() as session:
            run = SimulationRun(command=command, metric=metric, base_seed=int(base_seed),
                                parameters=json.dumps(dict(parameters), sort_keys=True, default=str))
            for row in rows:
                run.estimates.append(EstimateRecord(
                    k=row.k, trials=row.trials, successes=row.successes, p_hat=row.p_hat,
                    ci_low=row.ci_low, ci_high=row.ci_high, analytic_p=row.analytic_p, flagged=row.flagged))
            for session_id, lines in sorted((traces or {}).items()):
                for line_no, line in enumerate(lines, start=1):
                    run.traces.append(SessionTrace(session_id=session_id, line_no=line_no, line=line))
            session.add(run)
            session.flush()
            run_id = run.id
        logger.info(f"execução {run_id} ({command}) salva")
        return run_id

    def list_runs(self) -> List[Dict]:
        with self.db.get_session() as session:
            runs = session.query(SimulationRun).order_by(SimulationRun.id).all()
            return [
                {
                    'id': run.id,
                    'command': run.command,
                    'metric': run.metric,
                    'base_seed': run.base_seed,
                    'parameters': json.loads(run.parameters),
                    'created_at': run.created_at.isoformat(),
                    'estimates': len(run.estimates),
                    'trace_lines': len(run.traces),
                }
                for run in runs
            ]

    def get_estimates(self, run_id: int) -> pd.DataFrame:
        with self.db.get_session() as session:
            records = (session.query(EstimateRecord)
                       .filter(EstimateRecord.run_id == run_id)
                       .order_by(EstimateRecord.k).all())
            return pd.DataFrame([{col: getattr(r, col) for col in ESTIMATE_COLUMNS} for r in records],
                                columns=ESTIMATE_COLUMNS)

    def get_traces(self, run_id: int) -> List[str]:
        with self.db.get_session() as session:
            records = (session.query(SessionTrace)
                       .filter(SessionTrace.run_id == run_id)
                       .order_by(SessionTrace.session_id, SessionTrace.line_no).all())
            return [r.line for r in records]


# Instância global
_result_store: Optional[ResultStore] = None

def get_result_store(database_url: Optional[str] = None) -> ResultStore:
    """Retorna a instância singleton do repositório de resultados"""
    global _result_store
    if _result_store is None:
        _result_store = ResultStore(database_url)
    return _result_store
