"""
Módulo SQL - Configuração e gerenciamento do banco de resultados.
"""
from .database import init_db, DatabaseManager

__all__ = ['init_db', 'DatabaseManager']
