import numpy as np
import pytest

from pifo_bench import algorithms as alg
from pifo_bench import instances as ins
from pifo_bench import instances_min as im
from pifo_bench import reference as ref
from pifo_bench.linalg import project_ball, subspace_index
from pifo_bench.oracle import component_grad

NAMES = sorted(alg.ALGORITHMS)


def _run(inst, name, budget, seed=0, record=False, **kw):
    spec = alg.AlgorithmSpec(name, **kw)
    stop = alg.Stop(max_queries=budget, record=record)
    return alg.run_algorithm(inst, spec, stop, np.random.default_rng(seed), seed)


def test_zero_step_sgda_stays_at_origin(zoo):
    inst = zoo["SCSC"]
    tr = _run(inst, "sgda", 50, step=0.0)
    assert not tr.x.any() and not tr.y.any()
    assert tr.total_queries == 50 and tr.stop_reason == "budget"


def test_forced_sampler_keeps_origin():
    # only component 1 carries the linear term; never sampling it keeps x = 0
    L, Rx = 2.0, 1.0
    inst = ins.make_1d("H_SCSC", L, 3, Rx, 1.0)
    tr = _run(inst, "sgda", 200, probs=(0.0, 0.5, 0.5))
    assert tr.x[0] == 0.0
    assert tr.final_value >= L * Rx ** 2 / 2 - 1e-12


def test_invalid_distribution(zoo):
    with pytest.raises(ValueError):
        _run(zoo["SC"], "sgda", 10, probs=(0.5, 0.5))


def test_svrg_accounting(zoo):
    inst = zoo["SC"]
    n, T = inst.n, 5
    tr = _run(inst, "svrg", n + 2 * T, epoch=T)
    assert tr.total_queries == n + 2 * T
    assert np.diff(tr.step_queries[n - 1:]).tolist() == [2] * T
    # a budget that cannot fit another anchor plus one inner step stops early
    tr = _run(inst, "svrg", n + 2 * T + n + 1, epoch=T)
    assert tr.total_queries == n + 2 * T


def test_svrg_first_inner_step_is_gradient_step(zoo):
    inst = zoo["SC"]
    eta = 0.01
    tr = _run(inst, "svrg", inst.n + 2, step=eta, epoch=1)
    x0 = np.zeros(inst.dim_x)
    g = np.mean([component_grad(inst, i, x0)[0] for i in range(1, inst.n + 1)], axis=0)
    assert np.allclose(tr.x, project_ball(-eta * g, inst.feasible.Rx), atol=1e-15)


def test_extragradient_cost_and_determinism(zoo):
    inst = zoo["CC"]
    n = inst.n
    tr = _run(inst, "extragradient", 10 * n + 1)
    assert tr.total_queries == 10 * n
    assert set(np.diff(tr.step_queries).tolist()) == {2 * n}
    tr2 = _run(inst, "extragradient", 10 * n + 1, seed=99)
    assert np.array_equal(tr.x, tr2.x) and np.array_equal(tr.y, tr2.y)


def test_extragradient_converges_to_saddle():
    inst = ins.make_scsc(16, 1, 1, 1, 1, 3, 6)
    pt = ref.saddle_point_scsc(inst)
    tr = _run(inst, "extragradient", 3 * 2 * 3000)
    assert np.linalg.norm(tr.x - pt.x_star) <= 1e-6
    assert np.linalg.norm(tr.y - pt.y_star) <= 1e-6


@pytest.mark.parametrize("name", ["svrg", "point_prox", "extragradient"])
def test_methods_reduce_gap(zoo, name):
    for kind in ("SCSC", "SC"):
        inst = zoo[kind]
        tr = _run(inst, name, 400 * inst.n)
        assert tr.stop_reason == "budget"
        assert tr.final_value < 0.5 * tr.eval_values[0], (kind, name)


def test_sgda_small_step_reduces_gap(zoo):
    # plain SGDA has a noise floor that scales with the step
    for kind in ("SCSC", "SC"):
        inst = zoo[kind]
        tr = _run(inst, "sgda", 4000, step=1 / (30 * inst.regularity.L))
        assert tr.stop_reason == "budget"
        assert tr.final_value < 0.5 * tr.eval_values[0], (kind, name)


def test_point_prox_reaches_saddle():
    inst = ins.make_scsc(16, 1, 1, 1, 1, 3, 6)
    pt = ref.saddle_point_scsc(inst)
    tr = _run(inst, "point_prox", 6000)
    assert np.linalg.norm(tr.x - pt.x_star) <= 1e-4
    assert np.linalg.norm(tr.y - pt.y_star) <= 1e-4


def test_same_seed_same_trace(zoo):
    for name in NAMES:
        a = _run(zoo["CSC"], name, 300, seed=5)
        b = _run(zoo["CSC"], name, 300, seed=5)
        assert a.eval_values == b.eval_values and np.array_equal(a.x, b.x)


def test_eps_stop(zoo):
    inst = zoo["SC"]
    spec = alg.AlgorithmSpec("svrg")
    tr = alg.run_algorithm(inst, spec, alg.Stop(10 ** 5, eps=1e-3), np.random.default_rng(1))
    assert tr.stop_reason == "eps"
    assert tr.queries_to_eps == tr.eval_queries[-1] and tr.final_value <= 1e-3


def test_divergence_flagged(zoo):
    tr = _run(zoo["NC"], "sgda", 2000, step=50.0)
    assert tr.stop_reason == "diverged"


def test_measure_by_kind(zoo):
    x = np.zeros(zoo["NC"].dim_x)
    assert alg.measure(zoo["NC"], x) == pytest.approx(ref.stationarity(zoo["NC"], x))
    inst = zoo["SC"]
    x = np.zeros(inst.dim_x)
    assert alg.measure(inst, x) == pytest.approx(ref.suboptimality(inst, x))


def test_tilde_depth_grows_one_per_query():
    inst = ins.make_tilde_r(12, 0.8, (0.3, 0.5), 3)
    for name in NAMES:
        tr = _run(inst, name, 60, record=True)
        queries = [0] + tr.step_queries
        for (x, y), q in zip(tr.iterates, queries):
            assert subspace_index(x) <= q and subspace_index(y) <= q


@pytest.mark.parametrize("name", NAMES)
def test_audit_passes(zoo, name):
    for kind in ("TILDE_R", "HAT_R", "SCSC", "C", "R_BASE_NC"):
        tr = _run(zoo[kind], name, 50, record=True)
        rep = alg.protocol_audit(tr, zoo[kind])
        assert rep.passed, (kind, rep)


def test_audit_catches_injected_violator():
    inst = ins.make_tilde_r(10, 0.8, (0.3, 0.5), 3)
    tr = _run(inst, "sgda", 30, record=True)
    t = 12
    x, y = tr.iterates[t]
    k = max(subspace_index(v) for v, _ in tr.iterates[: t + 1])
    bad = x.copy()
    bad[k + 1] += 0.5
    tr.iterates[t] = (bad, y)
    rep = alg.protocol_audit(tr, inst)
    assert not rep.passed and rep.first_violation == t


def test_audit_requires_record(zoo):
    with pytest.raises(ValueError):
        alg.protocol_audit(_run(zoo["SC"], "sgda", 10), zoo["SC"])


def test_default_prox_weight_strongly_convex():
    inst = im.make_sc(32, 1, 1, 8, 6)
    L, n, mu = inst.regularity.L, 8, 1.0
    g = np.sqrt((n - 1) ** 2 + 4 * n * L / mu) / (2 * L * n) - (1 - 1 / n) / (2 * L)
    assert alg.default_prox_weight(inst) == pytest.approx(g)
