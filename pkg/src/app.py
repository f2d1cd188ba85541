"""
API Flask do laboratório UWB-ED: curvas analíticas, exemplo numérico e
consulta das execuções salvas.
"""
import logging
import math
from typing import Optional

from flask import Flask, jsonify, request

from constants.config import LOG_LEVEL
from services.analytic import FORMULAS, AnalyticParams, best_k, sweep
from services.errors import UwbEdError
from services.result_store import ResultStore
from services.worked_example import ExampleSettings, run_example

logger = logging.getLogger(__name__)

# limite de pontos por requisição de curva
MAX_CURVE_POINTS = 2001


def _arg(name: str, convert, default=None):
    value = request.args.get(name)
    if value is None or value == '':
        return default
    try:
        return convert(value)
    except ValueError:
        raise UwbEdError(f"parâmetro inválido {name}={value}")


def _zeta(value: str) -> float:
    return math.inf if value.lower() in ('inf', 'infinity') else float(value)


def create_app(database_url: Optional[str] = None) -> Flask:
    app = Flask(__name__)
    app.config['RESULT_STORE'] = ResultStore(database_url)

    @app.errorhandler(UwbEdError)
    def handle_domain_error(e):
        logger.info(f"requisição rejeitada: {e}")
        return jsonify({'success': False, 'message': str(e)}), 400

    @app.route('/api/formulas', methods=['GET'])
    def api_formulas():
        return jsonify({'success': True, 'formulas': list(FORMULAS)})

    @app.route('/api/analytic/<formula>', methods=['GET'])
    def api_analytic(formula):
        """Curva de uma fórmula fechada; ?alpha=&beta=&r=&zeta=&kappa=&k_min=&k_max="""
        params = AnalyticParams(
            alpha=_arg('alpha', int, 50),
            beta=_arg('beta', int, 50),
            r=_arg('r', int, 1),
            zeta=_arg('zeta', _zeta, math.inf),
            kappa=_arg('kappa', int, 0),
        )
        k_min = _arg('k_min', int, 0)
        k_max = _arg('k_max', int, params.n)
        if k_max - k_min + 1 > MAX_CURVE_POINTS:
            raise UwbEdError(f"curva muito longa: no máximo {MAX_CURVE_POINTS} pontos")
        curve = sweep(formula, params, range(k_min, k_max + 1))
        k, p = best_k(curve) if not curve.empty else (None, None)
        return jsonify({
            'success': True,
            'formula': formula,
            'points': curve[['k', 'p']].to_dict(orient='records'),
            'best_k': k,
            'best_p': p,
        })

    @app.route('/api/example', methods=['GET'])
    def api_example():
        defaults = ExampleSettings()
        settings = ExampleSettings(
            d1_m=_arg('d1', float, defaults.d1_m),
            d2_m=_arg('d2', float, defaults.d2_m),
            d3_m=_arg('d3', float, defaults.d3_m),
            e_db=_arg('e', float, defaults.e_db),
            p_sent=_arg('p_sent', float, defaults.p_sent),
            p_adv_sent=_arg('p_adv_sent', float, defaults.p_adv_sent),
        )
        result = run_example(settings)
        return jsonify({'success': True, **result})

    @app.route('/api/runs', methods=['GET'])
    def api_runs():
        return jsonify({'success': True, 'runs': app.config['RESULT_STORE'].list_runs()})

    @app.route('/api/runs/<int:run_id>', methods=['GET'])
    def api_run(run_id):
        store = app.config['RESULT_STORE']
        if run_id not in {run['id'] for run in store.list_runs()}:
            return jsonify({'success': False, 'message': 'Execução não encontrada'}), 404
        estimates = store.get_estimates(run_id)
        return jsonify({
            'success': True,
            'estimates': estimates.astype(object).where(estimates.notna(), None).to_dict(orient='records'),
            'traces': store.get_traces(run_id),
        })

    return app


# ==================== MAIN ====================

if __name__ == '__main__':
    logging.basicConfig(level=getattr(logging, LOG_LEVEL.upper(), logging.INFO))
    create_app().run(debug=True, host='0.0.0.0', port=5000, threaded=True)
