import math

from services.montecarlo import ESTIMATE_COLUMNS, EstimateRow
from services.result_store import ResultStore
from sql.database import DatabaseManager


def _rows():
    return [EstimateRow.from_counts(6, 30, 100, analytic_p=0.31), EstimateRow.from_counts(2, 0, 100, analytic_p=0.0)]


def test_save_and_read_back(store):
    run_id = store.save_run('validate', 11, {'alpha': 4, 'zeta': math.inf}, _rows(), metric='evade')

    runs = store.list_runs()
    assert len(runs) == 1
    assert runs[0]['id'] == run_id
    assert runs[0]['base_seed'] == 11
    assert runs[0]['estimates'] == 2
    assert runs[0]['trace_lines'] == 0
    assert runs[0]['parameters']['alpha'] == 4
    assert math.isinf(runs[0]['parameters']['zeta'])

    estimates = store.get_estimates(run_id)
    assert list(estimates.columns) == ESTIMATE_COLUMNS
    assert estimates['k'].tolist() == [2, 6]
    assert estimates['p_hat'].tolist() == [0.0, 0.3]


def test_traces_keep_session_and_line_order(store):
    traces = {
        'b': ['b Committed t_c=1.000ns', 'b Verified t_v=1.000ns'],
        'a': ['a Committed t_c=2.000ns'],
    }
    run_id = store.save_run('simulate', 0, {}, traces=traces, metric='success')
    assert store.get_traces(run_id) == traces['a'] + traces['b']
    assert store.list_runs()[0]['trace_lines'] == 3


def test_runs_are_isolated(store):
    first = store.save_run('simulate', 0, {}, _rows()[:1])
    second = store.save_run('simulate', 1, {}, _rows())
    assert len(store.get_estimates(first)) == 1
    assert len(store.get_estimates(second)) == 2
    assert store.get_estimates(99).empty
    assert store.get_traces(99) == []


def test_store_accepts_existing_manager():
    db = DatabaseManager('sqlite://')
    store = ResultStore(db=db)
    assert store.db is db
    store.save_run('analytic', 0, {})
    assert len(store.list_runs()) == 1
    db.drop_tables()
    db.dispose()
