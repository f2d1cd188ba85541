"""
Constantes físicas e valores padrão do modelo de rádio UWB.
"""

# Velocidade da luz em m/ns
SPEED_OF_LIGHT_M_PER_NS = 0.2998

# Modelo de perda de percurso UWB LoS outdoor: f(d) = PL0 - 20 log10(d) - log10(6.5/5)
PATH_LOSS_PL0_DB = -46.3
PATH_LOSS_EXPONENT_DB = 20.0
PATH_LOSS_CORRECTION_DB = 0.11394335230683679  # log10(6.5 / 5)

# Estrutura do código
DEFAULT_TS_NS = 1000.0  # espaçamento entre slots (1 us)
DEFAULT_TP_NS = 2.0     # largura do pulso

# Ataque de replay usado na validação
DEFAULT_REPLAY_DELAY_NS = 200.0
DEFAULT_REPLAY_GAIN_DB = 3.0

# Degradação extra típica (pior caso esperado)
DEFAULT_EXTRA_LOSS_DB = -10.0
