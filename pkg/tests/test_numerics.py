import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timeschwarz.numerics import (BandedLU, BandedMatrix, SingularMatrixError, banded_solve,
                                  lu_solve, sym_eigen)
from timeschwarz.model import laplacian_1d


def test_lu_solve_hand_example():
    # 2x + y = 3, x + 3y = 5  ->  x = 0.8, y = 1.4
    x = lu_solve([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0])
    np.testing.assert_allclose(x, [0.8, 1.4], rtol=1e-15)


def test_lu_solve_needs_pivoting():
    # zero leading pivot: only solvable with row exchange
    M = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
    x_true = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(lu_solve(M, M @ x_true), x_true, rtol=1e-14)


def test_lu_solve_singular():
    with pytest.raises(SingularMatrixError):
        lu_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_lu_solve_shape_mismatch():
    with pytest.raises(ValueError):
        lu_solve(np.eye(3), np.ones(2))


def test_banded_roundtrip():
    rng = np.random.default_rng(0)
    M = np.triu(np.tril(rng.standard_normal((7, 7)), 1), -2)
    B = BandedMatrix.from_dense(M)
    assert (B.bl, B.bu) == (2, 1)
    np.testing.assert_array_equal(B.to_dense(), M)
    x = rng.standard_normal(7)
    np.testing.assert_allclose(B.matvec(x), M @ x, rtol=1e-14, atol=1e-14)
    assert B.norm_inf() == pytest.approx(np.abs(M).sum(axis=1).max())


def test_banded_rejects_entries_outside_band():
    with pytest.raises(ValueError):
        BandedMatrix.from_dense(np.ones((3, 3)), bl=0, bu=0)


def test_banded_tridiagonal_known_solution():
    # -u'' = 2 on (0,1), u(0)=u(1)=0 has u = x(1-x); the FD solution is exact
    n = 9
    h = 1.0 / (n + 1)
    B = BandedMatrix.from_dense(laplacian_1d(n + 1))
    x = h * np.arange(1, n + 1)
    np.testing.assert_allclose(banded_solve(B, 2.0 * np.ones(n)), x * (1 - x), atol=1e-13)


def test_banded_lu_pivots_zero_diagonal():
    M = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(banded_solve(BandedMatrix.from_dense(M), b), lu_solve(M, b),
                               rtol=1e-14)


def test_banded_lu_singular():
    M = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularMatrixError):
        BandedLU(BandedMatrix.from_dense(M))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 25), bl=st.integers(0, 4), bu=st.integers(0, 4),
       seed=st.integers(0, 2**31 - 1))
def test_banded_lu_matches_dense(n, bl, bu, seed):
    bl, bu = min(bl, n - 1), min(bu, n - 1)
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    M = np.triu(np.tril(M, bu), -bl) + 4 * np.eye(n) * (bl + bu + 1)
    b = rng.standard_normal(n)
    lu = BandedLU(BandedMatrix.from_dense(M, bl, bu))
    x = lu.solve(b)
    np.testing.assert_allclose(M @ x, b, atol=1e-11 * np.abs(b).max())
    # factorization is reusable
    np.testing.assert_allclose(M @ lu.solve(2 * b), 2 * b, atol=1e-11 * np.abs(b).max())


def test_sym_eigen_laplacian_closed_form():
    nx = 32
    h = 1.0 / nx
    k = np.arange(1, nx)
    exact = np.sort(4 / h**2 * np.sin(k * np.pi * h / 2) ** 2)
    eig = sym_eigen(laplacian_1d(nx))
    np.testing.assert_allclose(eig.eigenvalues, exact, rtol=1e-12)
    V = eig.eigenvectors
    np.testing.assert_allclose(V.T @ V, np.eye(nx - 1), atol=1e-12)
    np.testing.assert_allclose(eig.reconstruct(), laplacian_1d(nx), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**31 - 1))
def test_sym_eigen_random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    A = B + B.T
    eig = sym_eigen(A)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    np.testing.assert_allclose(eig.eigenvalues, np.linalg.eigvalsh(A), atol=1e-10 * max(1, np.abs(A).max()))
    np.testing.assert_allclose(A @ eig.eigenvectors, eig.eigenvectors * eig.eigenvalues,
                               atol=1e-10 * max(1, np.abs(A).max()))


def test_sym_eigen_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eigen([[1.0, 2.0], [0.0, 1.0]])
