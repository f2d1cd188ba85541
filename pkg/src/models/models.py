"""
Models do banco de resultados das simulações.
"""
from datetime import datetime
from sqlalchemy import Column, Integer, String, DateTime, Boolean, Text, ForeignKey, Float
from sqlalchemy.orm import relationship, declarative_base


Base = declarative_base()

class SimulationRun(Base):
    """
    Execução de um comando da CLI (simulate/validate/analytic).

    Attributes:
        id: Identificador único da execução
        command: Sub-comando executado
        metric: Métrica da grade ('evade', 'success', 'fpr')
        base_seed: Seed base da execução
        parameters: Parâmetros da execução serializados em JSON
        created_at: Data e hora da execução
    """
    __tablename__ = 'simulation_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(50), nullable=False, index=True)
    metric = Column(String(20), nullable=True)
    base_seed = Column(Integer, nullable=False, default=0)
    parameters = Column(Text, nullable=False, default='{}')
    created_at = Column(DateTime, default=datetime.utcnow, nullable=False)

    # Relacionamentos
    estimates = relationship("EstimateRecord", back_populates="run", cascade="all, delete-orphan")
    traces = relationship("SessionTrace", back_populates="run", cascade="all, delete-orphan")


class EstimateRecord(Base):
    """
    Estimativa de um ponto da grade (uma linha do CSV de simulação).
    """
    __tablename__ = 'estimates'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('simulation_runs.id', ondelete='CASCADE'), nullable=False, index=True)
    k = Column(Integer, nullable=False)
    trials = Column(Integer, nullable=False)
    successes = Column(Integer, nullable=False)
    p_hat = Column(Float, nullable=False)
    ci_low = Column(Float, nullable=False)
    ci_high = Column(Float, nullable=False)
    analytic_p = Column(Float, nullable=True)
    flagged = Column(Boolean, default=False, nullable=False, server_default='0')

    run = relationship("SimulationRun", back_populates="estimates")


class SessionTrace(Base):
    """Linha do trace de uma sessão de protocolo"""
    __tablename__ = 'session_traces'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('simulation_runs.id', ondelete='CASCADE'), nullable=False, index=True)
    session_id = Column(String(100), nullable=False, index=True)
    line_no = Column(Integer, nullable=False)
    line = Column(String(500), nullable=False)

    run = relationship("SimulationRun", back_populates="traces")
