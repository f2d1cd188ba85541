import setup_db
from services.result_store import ResultStore


def test_creates_result_tables(capsys):
    manager = setup_db.main([], database_url='sqlite://')
    out = capsys.readouterr().out
    for table in ('estimates', 'session_traces', 'simulation_runs'):
        assert f"  - {table}" in out
    manager.dispose()


def test_recreate_drops_previous_runs(tmp_path):
    url = f"sqlite:///{tmp_path / 'results.db'}"
    setup_db.main([], database_url=url).dispose()
    store = ResultStore(url)
    store.save_run('analytic', 0, {})
    store.db.dispose()

    setup_db.main([], database_url=url).dispose()
    kept = ResultStore(url)
    assert len(kept.list_runs()) == 1
    kept.db.dispose()

    setup_db.main(['--recriar'], database_url=url).dispose()
    fresh = ResultStore(url)
    assert fresh.list_runs() == []
    fresh.db.dispose()
