import pytest

from services.channel import LinkModel, expected_rx_power, tof_ns
from services.codec import CodeParams, generate_code
from services.receiver import ReceiverConfig
from services.result_store import ResultStore


@pytest.fixture
def small_params():
    return CodeParams.of(20, 20)


@pytest.fixture
def large_params():
    """Código longo o bastante para que ruído puro quase nunca passe no teste de amostra."""
    return CodeParams.of(200, 200)


@pytest.fixture
def clean_link():
    """Enlace sem ruído a 10 m com E = -10 dB."""
    return LinkModel(d1_m=10.0, e_db=-10.0, p_sent=1.0)


@pytest.fixture
def noisy_link():
    """Cenário de validação do protocolo: 50 m, E = -10 dB, sigma^2 = lambda_w^2 / 100."""
    lambda_w2 = expected_rx_power(1.0, 50.0, -10.0)
    return LinkModel(d1_m=50.0, e_db=-10.0, p_sent=1.0, sigma_n2=lambda_w2 / 100)


@pytest.fixture
def receiver_cfg():
    return ReceiverConfig()


@pytest.fixture
def code(small_params):
    return generate_code(small_params, seed=7)


@pytest.fixture
def arrival(clean_link):
    return tof_ns(clean_link.d1_m)


@pytest.fixture
def store():
    s = ResultStore('sqlite://')
    yield s
    s.db.dispose()
