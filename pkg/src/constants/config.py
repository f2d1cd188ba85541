"""
Configurações do laboratório UWB-ED (detecção de ampliação de distância)
"""
import os
try:
	# Carrega variáveis do arquivo .env, se existir
	from dotenv import load_dotenv  # type: ignore
	load_dotenv()
except Exception:
	# Se python-dotenv não estiver disponível, segue com variáveis de ambiente do SO
	pass

# Log
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

# Receptor: teste de hipóteses repetido (upsilon) e corte P_noise
UPSILON = int(os.getenv('UPSILON', '100'))
P_NOISE_THRESHOLD = float(os.getenv('P_NOISE_THRESHOLD', '0.8'))

# Backtracking: passo = largura do pulso (T_p), janela = T_0
BACKTRACK_STEP_NS = float(os.getenv('BACKTRACK_STEP_NS', '2'))
BACKTRACK_WINDOW_NS = float(os.getenv('BACKTRACK_WINDOW_NS', '660'))

# Precisão de ranging (~±10 cm)
RANGING_PRECISION_NS = float(os.getenv('RANGING_PRECISION_NS', '0.67'))
PROTOCOL_PRECISION_NS = float(os.getenv('PROTOCOL_PRECISION_NS', '0.33'))
MAX_RANGE_M = float(os.getenv('MAX_RANGE_M', '100'))

# Monte-Carlo
DEFAULT_TRIALS = int(os.getenv('DEFAULT_TRIALS', '100000'))
TRIAL_BLOCK_SIZE = int(os.getenv('TRIAL_BLOCK_SIZE', '1000'))
WORKERS = int(os.getenv('WORKERS', '1'))

# Persistência opcional dos resultados
STORE_RESULTS = os.getenv('STORE_RESULTS', 'false').lower() == 'true'
