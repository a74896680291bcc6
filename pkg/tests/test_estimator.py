import math

import numpy as np
import pytest

from qcpm import estimator
from qcpm.lo_core import make_problem
from qcpm.schedule import AdiabaticSchedule


def _sched(**kw):
    base = dict(mu_f=0.25, gamma=0.5, delta=0.1, R1=4.0, nbar=4)
    base.update(kw)
    return AdiabaticSchedule(**base)


def test_vnorm_frozen(frozen):
    assert estimator.vnorm_bound(_sched(), 1.0) == pytest.approx(
        frozen["vnorm_K1_g05_d01_R4_n4_e025"], rel=1e-12)


def test_vnorm_independent_of_gamma():
    assert estimator.vnorm_bound(_sched(gamma=0.1), 1.0) == pytest.approx(
        estimator.vnorm_bound(_sched(gamma=0.9), 1.0), rel=1e-12)


def test_vnorm_linear_in_K_and_R1():
    base = estimator.vnorm_bound(_sched(), 1.0)
    assert estimator.vnorm_bound(_sched(), 3.0) == pytest.approx(3 * base)
    assert estimator.vnorm_bound(_sched(R1=8.0), 1.0) == pytest.approx(2 * base)


def test_lipschitz_positive_and_scaling():
    a = estimator.lipschitz_bound(_sched(), 1.0)
    b = estimator.lipschitz_bound(_sched(R1=8.0), 1.0)
    assert a > 0 and b == pytest.approx(4 * a)


def test_queries_frozen(frozen):
    assert estimator.query_count(4.0, 0.25, 4, 0.1) == pytest.approx(
        frozen["queries_R4_e025_n4_d01"], rel=1e-12)


def test_queries_sqrt_nbar_regime():
    ratio = estimator.query_count(1.0, 0.1, 4e4, 0.1) / estimator.query_count(1.0, 0.1, 1e4, 0.1)
    assert 1.9 <= ratio <= 2.6


def test_queries_exact_under_eps_scaling():
    q1 = estimator.query_count(3.0, 0.5, 10, 0.05)
    assert estimator.query_count(3.0, 0.05, 10, 0.05) == 10 * q1


@pytest.mark.parametrize("kw", [dict(epsilon=0.0), dict(delta=1.0), dict(R1=-1.0), dict(nbar=0)])
def test_queries_validation(kw):
    args = dict(R1=1.0, epsilon=0.1, nbar=4, delta=0.1)
    args.update(kw)
    with pytest.raises(ValueError):
        estimator.query_count(**args)


def test_oracle_gates_fixture():
    p = make_problem([[1.0]], [0.5], [0.5])
    og = estimator.oracle_gate_count(p, 32)
    assert og.multipliers == 17 and og.adders == 8
    assert og.gates == pytest.approx(17 * 32 ** math.log2(3) + (8 + og.slack_adders) * 32)


def test_ell_doubling_triples_multiplier_term():
    p = make_problem([[1.0]], [0.5], [0.5])
    a, b = estimator.oracle_gate_count(p, 16), estimator.oracle_gate_count(p, 32)
    mult_a = a.gates - (a.adders + a.slack_adders) * 16
    mult_b = b.gates - (b.adders + b.slack_adders) * 32
    assert mult_b == pytest.approx(3 * mult_a, rel=1e-12)


def test_gates_monotone_in_nnz():
    A = np.zeros((3, 3))
    counts = []
    for k in range(1, 10):
        A.flat[k - 1] = 0.3
        counts.append(estimator.oracle_gate_count(make_problem(A, 0.1 * np.ones(3), 0.1 * np.ones(3)), 32).gates)
    assert all(x < y for x, y in zip(counts, counts[1:]))


def test_total_gates_exact_scaling_and_flag():
    p = make_problem([[1.0]], [0.5], [0.5])
    t1 = estimator.total_gate_count(p, 4.0, 0.5, 0.1)
    t10 = estimator.total_gate_count(p, 4.0, 0.05, 0.1)
    assert t10.total == 10 * t1.total
    assert t1.total == pytest.approx(t1.queries * t1.per_query + t1.additional, rel=1e-12)
    assert t1.assumption_ok is False
    dense = make_problem(np.full((4, 4), 0.25), 0.5 * np.ones(4) / 2, 0.5 * np.ones(4) / 2)
    assert estimator.total_gate_count(dense, 4.0, 0.5, 0.1).assumption_ok


def test_resource_report_fields():
    rep = estimator.resource_report(make_problem([[1.0]], [0.5], [0.5]), 4.0, 0.25, 0.1)
    d = rep.as_dict()
    assert d["mode"] == estimator.CONSTANTS_MODE and d["multipliers"] == 17
    assert d["queries"] == pytest.approx(estimator.query_count(4.0, 0.25, 4, 0.1))


def test_with_schedule_params_recomputes_eta():
    s = _sched()
    t = estimator.with_schedule_params(s, delta=0.01)
    assert t.eta == pytest.approx(1 / math.log(800.0)) and s.eta == pytest.approx(1 / math.log(80.0))


def test_crossover_rows():
    rows = estimator.crossover_rows([10, 100], [0.1, 1.0], [10.0, 100.0], omega=2.5)
    assert len(rows) == 8 and all(len(r) == len(estimator.CROSSOVER_COLUMNS) for r in rows)
    r = rows[0]
    assert r[0] == 10 and r[6] == pytest.approx(10 ** 2.5)
    assert r[7] == pytest.approx(math.sqrt(10) * 10 ** 2.5 + 10 ** 3)
    assert rows[1][5] > rows[0][5]
