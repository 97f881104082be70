import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from heatopt.errors import SolverFailure
from heatopt.linalg import extreme_generalized_eigenvalue, solve_spd
from heatopt.problem import Discretization


def random_spd(n, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    return G.T @ G + np.eye(n), rng


def test_identity_system_one_iteration():
    rhs = np.array([1.0, -2.0, 3.0])
    report = solve_spd(sp.eye(3, format="csr"), rhs)
    assert report.iterations <= 1
    assert np.allclose(report.x, rhs, atol=1e-14)


def test_two_by_two_hand_inversion():
    A = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    report = solve_spd(A, np.array([3.0, 3.0]))
    assert np.allclose(report.x, [1.0, 1.0], atol=1e-12)


def test_zero_rhs():
    A = sp.eye(4, format="csr")
    report = solve_spd(A, np.zeros(4))
    assert np.all(report.x == 0.0) and report.iterations == 0


def test_against_dense_elimination_oracle():
    A, rng = random_spd(50, seed=3)
    rhs = rng.standard_normal(50)
    expected = np.linalg.solve(A, rhs)
    report = solve_spd(sp.csr_matrix(A), rhs, tol=1e-13)
    assert np.linalg.norm(report.x - expected) / np.linalg.norm(expected) <= 1e-10
    assert report.residual <= 1e-13 * np.linalg.norm(rhs)


def test_linearity_in_rhs():
    A, rng = random_spd(30, seed=5)
    As = sp.csr_matrix(A)
    r1 = rng.standard_normal(30)
    r2 = rng.standard_normal(30)
    tol = 1e-12
    x1 = solve_spd(As, r1, tol=tol).x
    x2 = solve_spd(As, r2, tol=tol).x
    x12 = solve_spd(As, r1 + r2, tol=tol).x
    assert np.linalg.norm(x12 - x1 - x2) <= 10 * tol * np.linalg.norm(x12)


def test_iteration_cap_raises_with_residual():
    A, rng = random_spd(40, seed=9)
    rhs = rng.standard_normal(40)
    with pytest.raises(SolverFailure) as info:
        solve_spd(sp.csr_matrix(A), rhs, tol=1e-14, max_iter=2)
    assert info.value.residual is not None and info.value.residual > 0


def test_invalid_tolerance():
    with pytest.raises(ValueError):
        solve_spd(sp.eye(2, format="csr"), np.ones(2), tol=0.0)


def test_warm_start_converges_faster():
    A, rng = random_spd(60, seed=13)
    As = sp.csr_matrix(A)
    rhs = rng.standard_normal(60)
    cold = solve_spd(As, rhs)
    warm = solve_spd(As, rhs, x0=cold.x)
    assert warm.iterations <= 1


def test_diagonal_pencil_extremes():
    A = sp.diags([1.0, 2.0, 3.0]).tocsr()
    B = sp.eye(3, format="csr")
    smallest, _ = extreme_generalized_eigenvalue(A, B, "smallest")
    largest, _ = extreme_generalized_eigenvalue(A, B, "largest")
    assert abs(smallest - 1.0) <= 1e-9
    assert abs(largest - 3.0) <= 1e-9


def test_pencil_scaling():
    A = sp.diags([1.0, 2.0, 5.0]).tocsr()
    B = sp.eye(3, format="csr")
    small1, _ = extreme_generalized_eigenvalue(A, B, "smallest")
    small2, _ = extreme_generalized_eigenvalue(A, (2 * B).tocsr(), "smallest")
    assert abs(small2 - small1 / 2) <= 1e-9
    large1, _ = extreme_generalized_eigenvalue(A, B, "largest")
    large2, _ = extreme_generalized_eigenvalue(A, (2 * B).tocsr(), "largest")
    assert abs(large2 - large1 / 2) <= 1e-9


def test_fem_pencil_against_dense_oracle():
    d = Discretization(4, ("left",))
    free = d.free
    A = d.stiffness_free
    B = d.gram[free][:, free].tocsr()
    spectrum = scipy.linalg.eigh(A.toarray(), B.toarray(), eigvals_only=True)
    smallest, _ = extreme_generalized_eigenvalue(A, B, "smallest")
    largest, _ = extreme_generalized_eigenvalue(A, B, "largest")
    assert abs(smallest - spectrum[0]) <= 1e-8
    assert abs(largest - spectrum[-1]) <= 1e-8

    trace_spec = scipy.linalg.eigh(d.gamma2_mass.toarray(), d.gram.toarray(),
                                   eigvals_only=True)
    mu, _ = extreme_generalized_eigenvalue(d.gamma2_mass, d.gram, "largest")
    assert abs(mu - trace_spec[-1]) <= 1e-8


def test_extreme_values_bound_rayleigh_samples():
    d = Discretization(3, ("left",))
    free = d.free
    A = d.stiffness_free
    B = d.gram[free][:, free].tocsr()
    smallest, _ = extreme_generalized_eigenvalue(A, B, "smallest")
    largest, _ = extreme_generalized_eigenvalue(A, B, "largest")
    rng = np.random.default_rng(2024)
    slack = 1e-9
    for _ in range(100):
        x = rng.standard_normal(A.shape[0])
        quotient = (x @ (A @ x)) / (x @ (B @ x))
        assert smallest <= quotient + slack
        assert largest >= quotient - slack


def test_unknown_which_rejected():
    A = sp.eye(2, format="csr")
    with pytest.raises(ValueError):
        extreme_generalized_eigenvalue(A, A, "median")
