"""
Registro das sessões de protocolo simuladas e dos seus traces
"""
import threading
from datetime import datetime
from typing import Dict, List, Optional

from services.protocol import SessionResult


class SessionRecord:
    """Trace de uma sessão (linhas de texto) e, se houver, o resultado completo"""
    def __init__(self, session_id: str):
        self.session_id = session_id
        self.lines: List[str] = []
        self.result: Optional[SessionResult] = None
        self.last_update = datetime.utcnow()
        self.lock = threading.Lock()

    def extend(self, lines: List[str]):
        with self.lock:
            self.lines.extend(lines)
            self.last_update = datetime.utcnow()

    def get_lines(self) -> List[str]:
        """Retorna cópia das linhas do trace"""
        with self.lock:
            return list(self.lines)


class SessionRegistry:
    """Guarda sessões por ID; seguro para uso concorrente"""
    def __init__(self):
        self._sessions: Dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def _record(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._sessions.get(session_id)
            if record is None:
                record = self._sessions[session_id] = SessionRecord(session_id)
            return record

    def add_trace(self, session_id: str, lines: List[str]):
        self._record(session_id).extend(lines)

    def add_result(self, result: SessionResult):
        """Registra uma sessão completa com o seu trace"""
        record = self._record(result.session_id)
        record.extend(list(result.trace))
        record.result = result

    def get_session(self, session_id: str) -> Optional[SessionRecord]:
        with self._lock:
            return self._sessions.get(session_id)

    def list_sessions(self) -> list:
        with self._lock:
            return [
                {
                    'session_id': sid,
                    'lines': len(record.lines),
                    'phase': record.result.phase.value if record.result else None,
                    'last_update': record.last_update.isoformat(),
                }
                for sid, record in sorted(self._sessions.items())
            ]

    def traces_by_session(self) -> Dict[str, List[str]]:
        with self._lock:
            records = [self._sessions[sid] for sid in sorted(self._sessions)]
        return {record.session_id: record.get_lines() for record in records}

    def trace_lines(self) -> List[str]:
        """Todas as linhas, ordenadas por ID de sessão"""
        return [line for lines in self.traces_by_session().values() for line in lines]

    def clear(self):
        with self._lock:
            self._sessions.clear()


# Instância global
_session_registry: Optional[SessionRegistry] = None

def get_session_registry() -> SessionRegistry:
    """Retorna a instância singleton do registro de sessões"""
    global _session_registry
    if _session_registry is None:
        _session_registry = SessionRegistry()
    return _session_registry
