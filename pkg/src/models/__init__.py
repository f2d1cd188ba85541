"""
Models do banco de resultados.
"""
from .models import Base, SimulationRun, EstimateRecord, SessionTrace

__all__ = ['Base', 'SimulationRun', 'EstimateRecord', 'SessionTrace']
