"""
Hierarquia de exceções do laboratório.
"""


class UwbEdError(Exception):
    """Erro base de todos os módulos."""


class ParameterError(UwbEdError, ValueError):
    """Parâmetros inválidos (código, ataque, receptor, fórmulas, configuração)."""


class DomainError(UwbEdError, ValueError):
    """Valor fora do domínio matemático (ex.: distância não positiva)."""


class StructuralError(UwbEdError):
    """Estruturas incompatíveis: tamanhos diferentes, timeline curta demais."""


class ProtocolStateError(UwbEdError):
    """Operação do protocolo chamada fora da ordem das fases."""
