import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import geo_tail_enumerate, hypothesis_point, random_gamma
from pifo_bench import instances as ins
from pifo_bench import instances_min as im
from pifo_bench import zero_chain as zc
from pifo_bench.linalg import subspace_index
from pifo_bench.oracle import pifo


def _chain_instances(n, m):
    return {
        "TILDE_R": ins.make_tilde_r(m, 0.8, (0.3, 0.5), n),
        "HAT_R": ins.make_hat_r(m, 0.8, (0.4, 0.01, 0.7), n),
        "R_BASE": im.make_r(m, 0.5, 1.0, (0.3, 0.0, 1.0), n),
        "R_BASE_NC": im.make_r(m, 0.5, 0.7, (0.0, 0.01, 1.0), n),
    }


def test_predict_examples():
    assert zc.predict_next_subspace("TILDE", 0, 1, 2) == (1, 0)
    assert zc.predict_next_subspace("TILDE", 0, 2, 2) == (0, 0)
    assert zc.predict_next_subspace("HAT", 1, 2, 3) == (2, 2)
    assert zc.predict_next_subspace("MIN", 4, 2, 3) == (5, None)
    assert zc.predict_next_subspace("MIN", 4, 1, 3) == (4, None)


def test_hat_range_error():
    with pytest.raises(ValueError):
        zc.predict_next_subspace("HAT", 4, 1, 3, m=5)
    zc.predict_next_subspace("TILDE", 4, 1, 3, m=5)
    with pytest.raises(ValueError):
        zc.predict_next_subspace("TILDE", 5, 1, 3, m=5)


def test_origin_stays_put():
    inst = ins.make_tilde_r(6, 0.8, (0.3, 0.5), 3)
    z = np.zeros(6)
    for i in (2, 3):
        rep = zc.check_jump(inst, (z, z), i, 0.5)
        assert rep.passed and rep.observed == (0, 0)


def test_activation_example(rng):
    inst = ins.make_tilde_r(8, 0.8, (0.3, 0.5), 2)
    x, y = hypothesis_point(inst, "TILDE", 3, rng)
    # row 3 belongs to component 2 when n = 2
    rep = zc.check_jump(inst, (x, y), 2, 0.5)
    assert rep.passed and rep.predicted == (4, 3) and rep.observed == (4, 3)
    rep = zc.check_jump(inst, (x, y), 1, 0.5)
    assert rep.passed and rep.observed == (3, 2)


def test_hypothesis_violation_is_flagged(rng):
    # depth is inferred from the point; only the HAT range limit can be violated
    inst = ins.make_hat_r(6, 0.8, (0.4, 0.01, 0.7), 2)
    x, y = hypothesis_point(inst, "HAT", 5, rng)
    rep = zc.check_jump(inst, (x, y), 1, 0.1)
    assert rep.k == 5 and not rep.hypothesis_ok and not rep.passed


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3, 5]),
       st.sampled_from(["TILDE_R", "HAT_R", "R_BASE", "R_BASE_NC"]))
def test_check_jump_random_points(seed, n, kind):
    rng = np.random.default_rng(seed)
    m = 12
    inst = _chain_instances(n, m)[kind]
    case = zc.chain_case(inst)
    top = m - 1 if case == "HAT" else m
    k = int(rng.integers(top))
    point = hypothesis_point(inst, case, k, rng)
    i = int(rng.integers(n)) + 1
    rep = zc.check_jump(inst, point, i, random_gamma(inst, rng))
    assert rep.hypothesis_ok and rep.passed, rep


def test_activation_ordering(rng):
    # walk the oracle outputs; depth never exceeds the activation count and reaches it
    n, m = 3, 9
    for kind, inst in _chain_instances(n, m).items():
        case = zc.chain_case(inst)
        mm = inst.is_minimax
        x = np.zeros(inst.dim_x)
        y = np.zeros(inst.dim_y) if mm else None
        k = 0
        top = m - 1 if case == "HAT" else m
        for _ in range(60):
            i = int(rng.integers(n)) + 1
            r = pifo(inst, i, x, y, random_gamma(inst, rng))
            if k < top and (i - 1) % n == k % n:
                k += 1
            a = rng.normal(size=3)
            x = a[0] * x + a[1] * r.grad_x + a[2] * r.prox_x
            if mm:
                y = a[0] * y + a[1] * r.grad_y + a[2] * r.prox_y
            tol = 1e-10 if math.isfinite(inst.gamma_max) else 0.0
            assert subspace_index(x, tol) == k, kind
            if mm:
                ky = max(k - 1, 0) if case == "TILDE" else k
                assert subspace_index(y, tol) <= max(ky, 1 if case == "HAT" else 0), kind
            if k == top:
                break


def test_geo_examples():
    assert zc.geo_tail_exact([0.5, 0.5], 2) == pytest.approx(0.75, abs=1e-15)
    assert zc.geo_tail_exact([0.5, 0.25], 2) == pytest.approx(0.875, abs=1e-15)
    assert zc.geo_tail_exact([0.3, 0.3, 0.3], 2) == 1.0
    assert zc.f2j_closed_form(0.5, 0.5, 2) == pytest.approx(0.75)
    assert zc.f2j_closed_form(0.5, 0.25, 2) == pytest.approx(0.875)
    with pytest.raises(ValueError):
        zc.geo_tail_exact([0.0, 0.5], 3)


@pytest.mark.parametrize("p1", [0.05, 0.3, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("p2", [0.1, 0.3, 0.77])
def test_f2j_matches_dp(p1, p2):
    for j in range(1, 40):
        assert abs(zc.f2j_closed_form(p1, p2, j) - zc.geo_tail_exact([p1, p2], j)) <= 1e-12


def test_f2j_continuity():
    for j in (1, 3, 10):
        assert zc.f2j_closed_form(0.3, 0.3 + 1e-7, j) == pytest.approx(
            zc.f2j_closed_form(0.3, 0.3, j), abs=1e-5)


@given(st.lists(st.floats(0.02, 1.0), min_size=1, max_size=4), st.integers(0, 12))
def test_dp_matches_enumeration(p, j):
    assert zc.geo_tail_exact(p, j) == pytest.approx(geo_tail_enumerate(p, j), abs=1e-12)


@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3), st.integers(1, 8))
def test_averaging_inequality(p, j):
    pbar = [sum(p) / 3] * 3
    assert zc.geo_tail_exact(p, j) >= zc.geo_tail_exact(pbar, j) - 1e-12


@pytest.mark.parametrize("m", [2, 4, 8])
def test_concentration_equal_p(m, rng):
    rep = zc.verify_geo_concentration([1.0 / m] * m, 20000, rng)
    assert rep.exact >= 1 / 9 and rep.passed
    assert rep.mc_estimate == pytest.approx(rep.exact, abs=4 * math.sqrt(0.25 / 20000))


def test_concentration_two_halves():
    rep = zc.verify_geo_concentration([0.5, 0.5], 0, np.random.default_rng(0))
    assert rep.threshold == 1.0 and rep.exact == 1.0


def test_stopping_times_deterministic():
    a = zc.simulate_stopping_times([0.5, 0.5], 20, np.random.default_rng(7))
    b = zc.simulate_stopping_times([0.5, 0.5], 20, np.random.default_rng(7))
    assert np.array_equal(a.stopping_times, b.stopping_times)
    assert np.all(a.increments >= 1)
    with pytest.raises(ValueError):
        zc.simulate_stopping_times([0.5, 0.5], 0, np.random.default_rng(7))


def test_increment_means():
    # E[Y_k] = 1/p_{k'}; one long process pools the increments per residue class
    p = np.array([0.1, 0.3, 0.6])
    K = 3 * 40000
    g = zc.simulate_stopping_times(p, K, np.random.default_rng(11), chunk=4096)
    for c in range(3):
        assert g.increments[c::3].mean() == pytest.approx(1 / p[c], rel=0.02)


def test_stopping_tail_mc_matches_sum_of_geometrics(rng):
    # uniform sampling: T_K is a sum of K geometric(1/n) variables
    n, K = 4, 3
    j = 10
    exact = zc.geo_tail_exact([1.0 / n] * K, j)
    est = zc.stopping_tail_mc([1.0 / n] * n, K, j, 40000, rng)
    assert est == pytest.approx(exact, abs=3 * math.sqrt(exact * (1 - exact) / 40000) + 1e-3)
