import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from oracles import restricted_min_gap, restricted_saddle_gap_lower
from pifo_bench import instances as ins
from pifo_bench import instances_min as im
from pifo_bench import reference as ref
from pifo_bench.linalg import project_ball


def test_scsc_saddle_point():
    inst = ins.make_scsc(16, 1, 1, 1, 1, 4, 8)
    pt = ref.saddle_point_scsc(inst)
    assert pt.residual <= 1e-8
    assert np.linalg.norm(pt.x_star) <= 1 and np.linalg.norm(pt.y_star) <= 1
    assert abs(ref.primal_dual_gap(inst, pt.x_star, pt.y_star)) <= 1e-8


@pytest.mark.parametrize("L,n,m", [(8, 4, 5), (32, 8, 9), (128, 3, 12)])
def test_sc_minimizer(L, n, m):
    inst = im.make_sc(L, 1, 1, n, m)
    pt = ref.minimizer_closed_form(inst)
    a = im.sc_constants(L, 1, 1, n)["alpha"]
    assert pt.residual <= 1e-9
    assert np.linalg.norm(pt.x_star) <= 1
    assert pt.value == pytest.approx(-a / (a + 1), rel=1e-10)
    assert ref.optimal_value(inst) == pytest.approx(pt.value, rel=1e-10)


@pytest.mark.parametrize("L,n,m", [(4, 3, 6), (10, 2, 9)])
def test_c_minimizer(L, n, m):
    inst = im.make_c(L, 1, n, m)
    pt = ref.minimizer_closed_form(inst)
    xi = im.c_constants(L, 1, n, m)["xi"]
    assert pt.residual <= 1e-9
    assert np.linalg.norm(pt.x_star) <= 1
    assert np.allclose(pt.x_star, 2 * xi / L * np.arange(m, 0, -1))
    assert pt.value == pytest.approx(-m * xi ** 2 / (n * L), rel=1e-10)


def test_cc_envelopes():
    L, Rx, Ry, n, m = 2.0, 1.0, 1.0, 3, 5
    inst = ins.make_cc(L, Rx, Ry, n, m)
    assert ref.phi_eval(inst, np.zeros(m)) == pytest.approx(0.0, abs=1e-14)
    assert ref.psi_eval(inst, np.full(m, Ry / math.sqrt(m))) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_cc_psi_restricted_max(k):
    L, Rx, Ry, n, m = 2.0, 1.0, 1.0, 3, 5
    inst = ins.make_cc(L, Rx, Ry, n, m)

    def neg(v):
        y = np.zeros(m)
        y[:k] = v
        return -ref.psi_eval(inst, y)

    cons = dict(type="ineq", fun=lambda v: Ry ** 2 - v @ v)
    best = min((optimize.minimize(neg, x0, method="SLSQP", constraints=[cons],
                                  options=dict(ftol=1e-14, maxiter=500))
                for x0 in (np.full(k, 0.1), np.full(k, 0.3))), key=lambda r: r.fun)
    expect = -(L * Rx / (2 * n)) * Ry / math.sqrt(m * (k + 1))
    assert -best.fun == pytest.approx(expect, abs=1e-6)


def test_phi_matches_brute_force(rng):
    inst = ins.make_scsc(16, 1, 1, 1, 0.3, 3, 4)
    for _ in range(5):
        x = rng.normal(size=4)

        def neg(y):
            return -inst.model.agg_value(x, y)

        cons = dict(type="ineq", fun=lambda y: 0.3 ** 2 - y @ y)
        res = optimize.minimize(neg, np.zeros(4), method="SLSQP", constraints=[cons],
                                options=dict(ftol=1e-15, maxiter=1000))
        assert ref.phi_eval(inst, x) == pytest.approx(-res.fun, abs=1e-6)


@given(st.integers(0, 2 ** 31), st.sampled_from(["SCSC", "CSC", "CC"]))
def test_gap_nonnegative_on_feasible_points(seed, kind):
    rng = np.random.default_rng(seed)
    inst = {"SCSC": ins.make_scsc(16, 1, 1, 1, 1, 3, 5),
            "CSC": ins.make_csc(16, 1, 1, 1, 3, 5),
            "CC": ins.make_cc(2, 1, 1, 3, 5)}[kind]
    x = project_ball(rng.normal(size=5), 1.0)
    y = project_ball(rng.normal(size=5), 1.0)
    assert ref.primal_dual_gap(inst, x, y) >= -1e-12


def test_h_scsc_gap_floor(rng):
    L, Rx = 2.0, 0.7
    inst = ins.make_1d("H_SCSC", L, 3, Rx, 1.0)
    for _ in range(10):
        y = project_ball(rng.normal(size=1), 1.0)
        assert ref.primal_dual_gap(inst, np.zeros(1), y) >= L * Rx ** 2 / 2 - 1e-12


def test_grad_phi_finite_difference(zoo, rng):
    for kind in ("NCSC", "NCSC_AVG", "NC", "NC_AVG", "HAT_R"):
        inst = zoo[kind]
        beta = inst.scale.beta
        x = rng.normal(size=inst.dim_x) * beta
        g = ref.grad_phi(inst, x)
        h = 1e-6 * beta
        for j in range(inst.dim_x):
            e = np.zeros(inst.dim_x)
            e[j] = h
            fd = (ref.phi_eval(inst, x + e) - ref.phi_eval(inst, x - e)) / (2 * h)
            assert fd == pytest.approx(g[j], rel=1e-5, abs=1e-7 * max(1.0, np.abs(g).max())), kind


def _min_stationarity_on(inst, k, rng, starts=6):
    beta = inst.scale.beta

    def obj(v):
        x = np.zeros(inst.dim_x)
        x[:k] = v
        return ref.stationarity(inst, x) ** 2

    best = math.inf
    for s in range(starts):
        v0 = rng.normal(size=k) * beta * (s + 1)
        res = optimize.minimize(obj, v0, method="Nelder-Mead",
                                options=dict(xatol=1e-12 * beta, fatol=1e-30, maxiter=20000))
        best = min(best, res.fun)
    return math.sqrt(best)


def test_ncsc_stationarity_floor(zoo, rng):
    inst = zoo["NCSC"]
    m = inst.dim_x - 1
    assert _min_stationarity_on(inst, m - 1, rng) >= 9 * inst.params["eps"]


def test_nc_stationarity_floor(zoo, rng):
    inst = zoo["NC"]
    m = inst.dim_x - 1
    assert _min_stationarity_on(inst, m - 1, rng) >= 9 * inst.params["eps"]


def test_stationary_point_found_by_descent(zoo, rng):
    inst = zoo["NCSC"]
    res = optimize.minimize(lambda x: ref.phi_eval(inst, x), rng.normal(size=inst.dim_x),
                            jac=lambda x: ref.grad_phi(inst, x), method="BFGS",
                            options=dict(gtol=1e-10, maxiter=10000))
    assert ref.stationarity(inst, res.x) <= 1e-6


def test_restricted_gap_examples():
    L, Rx, Ry, n, m = 2.0, 1.0, 1.0, 3, 5
    inst = ins.make_cc(L, Rx, Ry, n, m)
    assert ref.restricted_gap(inst, m - 1) == pytest.approx(L * Rx * Ry / (2 * n * m))
    with pytest.raises(ValueError):
        ref.restricted_gap(inst, m)
    with pytest.raises(ValueError):
        ref.restricted_gap(inst, 0)


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_c_restricted_gap_exact(m):
    inst = im.make_c(4, 1, 3, m)
    for k in range(1, m):
        assert restricted_min_gap(inst, k) == pytest.approx(ref.restricted_gap(inst, k),
                                                            rel=1e-6)


@pytest.mark.parametrize("m", [3, 5])
def test_minimax_restricted_gaps_dominate(m):
    for inst in (ins.make_scsc(16, 1, 1, 1, 1, 2, m), ins.make_csc(16, 1, 1, 1, 2, m),
                 ins.make_cc(2, 1, 1, 2, m)):
        for k in range(1, m):
            assert restricted_saddle_gap_lower(inst, k) >= ref.restricted_gap(inst, k) - 1e-6


def test_select_m_N_frozen():
    # values computed with the independent recipe arithmetic and frozen here
    assert ref.select_m_N("SC", dict(L=32, mu=1, R=1, n=8), 1e-6) == ref.ChainBudget(9, 8, 18.0)
    assert ref.select_m_N("SCSC", dict(L=16, mu_x=1, mu_y=1, Rx=1, Ry=1, n=4), 1e-6) == \
        ref.ChainBudget(12, 8, 9.0)
    assert ref.select_m_N("NCSC", dict(L=4, mu_x=1, mu_y=1, Delta=1, n=20), 1e-4) == \
        ref.ChainBudget(18, 17, 90.0)


def test_budget_example():
    assert ref.budget_N(4, 7) == 8


def test_recipe_m_arithmetic():
    # alpha = 4 and max{mu_x Rx^2, mu_y Ry^2}/(9 eps) = e^4 give m = 5
    alpha, ratio = 4.0, math.e ** 4
    assert math.floor(alpha / 4 * math.log(ratio)) + 1 == 5


def test_floor_at_depth_M():
    # gap over F_M stays above 9 eps for the construction recipe
    eps = 1e-6
    b = ref.select_m_N("SC", dict(L=32, mu=1, R=1, n=8), eps)
    assert restricted_min_gap(im.make_sc(32, 1, 1, 8, b.m), b.M) >= 9 * eps
    b = ref.select_m_N("SCSC", dict(L=16, mu_x=1, mu_y=1, Rx=1, Ry=1, n=4), eps)
    inst = ins.make_scsc(16, 1, 1, 1, 1, 4, b.m)
    assert restricted_saddle_gap_lower(inst, b.M) >= 9 * eps


def test_curve_examples():
    q = ref.LowerBoundQuery("SCSC", dict(L=16, mu_x=1, mu_y=1, Rx=1, Ry=1, n=4), 1e-3)
    assert ref.lower_bound_curve(q, check=False) == pytest.approx(20 * math.log(1e3))
    with pytest.raises(ref.PreconditionError):
        ref.lower_bound_curve(q)
    p = dict(L_prime=1.0, Rx=1, Ry=1)
    lo = ref.lower_bound_curve(ref.LowerBoundQuery("CC_AVG", dict(p, n=4), 1e-9))
    hi = ref.lower_bound_curve(ref.LowerBoundQuery("CC_AVG", dict(p, n=16), 1e-9))
    assert hi / lo == pytest.approx(2.0, rel=1e-3)


def test_preconditions_quote_threshold():
    with pytest.raises(ref.PreconditionError, match="mu R\\^2 q\\^2/18"):
        ref.select_m_N("SC", dict(L=32, mu=1, R=1, n=8), 0.5)
    with pytest.raises(ref.PreconditionError, match="L R\\^2/4"):
        ref.lower_bound_curve(ref.LowerBoundQuery("C", dict(L=1, R=1, n=4), 10.0))
    with pytest.raises(ref.PreconditionError):
        ref.select_m_N("NC", dict(L=1, mu=1, Delta=1, n=20), 1.0)


def test_max_concave_quadratic_boundary(rng):
    H = np.diag([1.0, 0.0, 3.0])
    g = np.array([1.0, 2.0, 0.5])
    val, z = ref.max_concave_quadratic(g, H, 1.0)
    assert np.linalg.norm(z) == pytest.approx(1.0)
    # compare with a dense scan of the sphere in the optimal plane of a few directions
    for _ in range(200):
        w = project_ball(rng.normal(size=3), 1.0)
        assert g @ w - 0.5 * w @ H @ w <= val + 1e-12
    assert ref.max_concave_quadratic(g, H)[0] == math.inf
