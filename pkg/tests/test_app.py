import pytest

from app import create_app
from services.montecarlo import EstimateRow


@pytest.fixture
def app():
    app = create_app('sqlite://')
    app.config['TESTING'] = True
    yield app
    app.config['RESULT_STORE'].db.dispose()


@pytest.fixture
def client(app):
    return app.test_client()


def test_formulas(client):
    body = client.get('/api/formulas').get_json()
    assert body['success']
    assert body['formulas'] == ['pevade', 'psa', 'pnoise', 'appendix']


def test_analytic_curve(client):
    response = client.get('/api/analytic/pevade?alpha=4&beta=4&r=1')
    body = response.get_json()
    assert response.status_code == 200
    assert [p['k'] for p in body['points']] == list(range(9))
    assert body['points'][0]['p'] == 0.0
    assert body['best_p'] == max(p['p'] for p in body['points'])


def test_analytic_curve_range(client):
    body = client.get('/api/analytic/psa?alpha=10&beta=10&zeta=2&k_min=2&k_max=5').get_json()
    assert [p['k'] for p in body['points']] == [2, 3, 4, 5]


@pytest.mark.parametrize('url', [
    '/api/analytic/other',
    '/api/analytic/pevade?alpha=x',
    '/api/analytic/pevade?alpha=3&r=4',
    '/api/analytic/pevade?k_min=0&k_max=5000&alpha=3000&beta=3000',
])
def test_analytic_bad_requests(client, url):
    response = client.get(url)
    assert response.status_code == 400
    assert response.get_json()['success'] is False


def test_example(client):
    body = client.get('/api/example').get_json()
    assert body['success']
    assert body['verdict'] == 'EnergyExceeded'
    assert body['received'] == [1, 0, 0, 0, -1, -1, 2, -1, 1, 0, 0, -1, 2, 0, -1, 0, -1, -1]
    assert body['aggregate_uw'] == pytest.approx(17.0)
    assert body['gamma_upper_uw'] == pytest.approx(12.0, abs=0.2)


def test_example_with_parameters(client):
    body = client.get('/api/example?d2=0').get_json()
    assert body['zeta'] == pytest.approx(10.0)


def test_runs_listing_and_detail(app, client):
    assert client.get('/api/runs').get_json()['runs'] == []

    rows = [EstimateRow.from_counts(0, 0, 10, analytic_p=0.0), EstimateRow.from_counts(4, 3, 10)]
    run_id = app.config['RESULT_STORE'].save_run('simulate', 7, {'alpha': 4}, rows,
                                                 {'k0-t0': ['k0-t0 Committed t_c=33.356ns']}, 'success')

    runs = client.get('/api/runs').get_json()['runs']
    assert [r['id'] for r in runs] == [run_id]
    assert runs[0]['parameters'] == {'alpha': 4}

    detail = client.get(f'/api/runs/{run_id}').get_json()
    assert [e['k'] for e in detail['estimates']] == [0, 4]
    assert detail['estimates'][1]['analytic_p'] is None
    assert detail['traces'] == ['k0-t0 Committed t_c=33.356ns']


def test_missing_run(client):
    response = client.get('/api/runs/99')
    assert response.status_code == 404
    assert response.get_json()['success'] is False
