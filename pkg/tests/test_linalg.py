import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from pifo_bench.linalg import (
    GAMMA_SMOOTH,
    GAMMA_WEAK,
    BMatrixSpec,
    ClassRows,
    gamma_deriv,
    gamma_second,
    gamma_value,
    make_B,
    partition_indices,
    project_ball,
    row_b,
    solve_tridiagonal,
    subspace_index,
)

S2 = math.sqrt(2)


def test_make_B_examples():
    assert np.array_equal(make_B(BMatrixSpec(3, 0, 1)),
                          [[0, 0, 0], [1, -1, 0], [0, 1, -1], [0, 0, 1]])
    assert np.array_equal(make_B(BMatrixSpec(2, 0, 0)), [[0, 0], [1, -1], [0, 0]])
    assert np.allclose(make_B(BMatrixSpec(2, S2, S2)), [[S2, 0], [1, -1], [0, S2]])


def test_row_b():
    assert not row_b(0, BMatrixSpec(4, 0, 1)).any()
    assert not row_b(4, BMatrixSpec(4, 1, 0)).any()
    assert np.array_equal(row_b(1, BMatrixSpec(3, 0, 1)), [1, -1, 0])
    with pytest.raises(IndexError):
        row_b(4, BMatrixSpec(3))


def test_spec_validation():
    with pytest.raises(ValueError):
        BMatrixSpec(0)
    with pytest.raises(ValueError):
        BMatrixSpec(3, -1)
    with pytest.raises(ValueError):
        BMatrixSpec(3, 2.0).check_instance_range()


def test_partition_examples():
    assert partition_indices(5, 3).sets == ((0, 3), (1, 4), (2, 5))
    assert partition_indices(5, 2).sets == ((0, 2, 4), (1, 3, 5))
    assert partition_indices(1, 2).sets == ((0,), (1,))
    p = partition_indices(7, 3)
    assert all(p.owner(l) == i for i in (1, 2, 3) for l in p.of(i))
    with pytest.raises(ValueError):
        partition_indices(3, 1)


@given(st.integers(1, 30), st.integers(2, 9))
def test_partition_covers_rows_once(m, n):
    rows = sorted(l for s in partition_indices(m, n).sets for l in s)
    assert rows == list(range(m + 1))


@given(st.integers(2, 12), st.integers(2, 5), st.floats(0, S2), st.floats(0, S2))
def test_class_rows_orthogonal_and_bounded(m, n, om, ze):
    spec = BMatrixSpec(m, om, ze)
    B = make_B(spec)
    for rows in partition_indices(m, n).sets:
        G = B[list(rows)] @ B[list(rows)].T
        assert np.array_equal(G, np.diag(np.diag(G)))
    assert np.all(np.sum(B * B, axis=1) <= 2 + 1e-12)


@given(st.integers(2, 12), st.integers(2, 5), st.integers(0, 2 ** 31))
def test_class_rows_match_dense(m, n, seed):
    rng = np.random.default_rng(seed)
    spec = BMatrixSpec(m, 0.7, 1.1)
    B = make_B(spec)
    x = rng.normal(size=m)
    for rows in partition_indices(m, n).sets:
        R = ClassRows(spec, rows)
        assert np.allclose(R.act(x), B[R.rows] @ x)
        w = rng.normal(size=R.rows.size)
        assert np.allclose(R.adjoint(w), B[R.rows].T @ w)


def test_subspace_index():
    assert subspace_index([0, 0, 0]) == 0
    assert subspace_index([1, 2, 0, 0]) == 2
    assert subspace_index([0, 1e-12, 0], 1e-10) == 0


def test_project_ball_examples():
    assert np.array_equal(project_ball([3, 4], 5), [3, 4])
    assert np.allclose(project_ball([6, 8], 5), [3, 4])
    assert np.array_equal(project_ball([0, 0], 1), [0, 0])
    assert np.array_equal(project_ball([6, 8], math.inf), [6, 8])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8), st.floats(0.1, 100))
def test_project_ball_properties(v, R):
    p = project_ball(v, R)
    assert np.linalg.norm(p) <= R * (1 + 1e-12)
    assert np.allclose(project_ball(p, R), p)


def test_gamma_examples():
    assert gamma_value(1.0) == pytest.approx(0.0, abs=1e-12)
    assert gamma_deriv(0.0) == 0.0
    assert gamma_deriv(2.0) == pytest.approx(96.0)


def test_gamma_matches_quadrature():
    for x in np.linspace(-5, 5, 41):
        integral, _ = quad(lambda t: 120 * t * t * (t - 1) / (1 + t * t), 1, x,
                           epsabs=1e-13, epsrel=1e-13)
        assert gamma_value(x) == pytest.approx(integral, abs=1e-9)


def test_gamma_second_matches_difference():
    x = np.linspace(-4, 4, 33)
    h = 1e-6
    fd = (gamma_deriv(x + h) - gamma_deriv(x - h)) / (2 * h)
    assert np.allclose(gamma_second(x), fd, atol=1e-5)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_gamma_smooth(a, b):
    assert abs(gamma_deriv(a) - gamma_deriv(b)) <= GAMMA_SMOOTH * abs(a - b) + 1e-9


def test_gamma_weak_convexity_floor():
    x = np.linspace(-10, 10, 200001)
    assert gamma_second(x).min() >= -GAMMA_WEAK - 1e-9
    # the floor is attained: constant is tight
    assert gamma_second(x).min() <= -GAMMA_WEAK + 1e-3


def test_tridiagonal_examples():
    assert np.allclose(solve_tridiagonal([1, 1], [0], [0], [1, 2]), [1, 2])
    assert np.allclose(solve_tridiagonal([2, 2], [-1], [-1], [1, 0]), [2 / 3, 1 / 3])
    with pytest.raises(np.linalg.LinAlgError):
        solve_tridiagonal([1, 1], [1], [1], [1, 1])
    with pytest.raises(ValueError):
        solve_tridiagonal([1, 1], [1, 1], [1], [1, 1])


@given(st.integers(2, 20), st.integers(0, 2 ** 31))
def test_tridiagonal_vs_dense(n, seed):
    rng = np.random.default_rng(seed)
    sub, sup = rng.normal(size=n - 1), rng.normal(size=n - 1)
    diag = 4 + np.abs(rng.normal(size=n))
    rhs = rng.normal(size=n)
    A = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    assert np.allclose(solve_tridiagonal(diag, sub, sup, rhs), np.linalg.solve(A, rhs))
