import numpy as np
import pytest

from rbsmc import linalg as la
from rbsmc.errors import DimensionMismatch, NotHermitian, SingularMatrix

from conftest import match_roots


def test_lu_solve_identity_and_scalar():
    v = np.array([3.0, -1.0])
    assert np.allclose(la.lu_solve(np.eye(2), v), v)
    assert la.lu_solve([[-0.5]], [[1.0]])[0, 0] == -2.0


def test_lu_solve_residual(rng):
    a = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    b = rng.standard_normal((4, 3))
    x = la.lu_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10


def test_lu_solve_complex_matches_numpy(rng):
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    b = rng.standard_normal(5) + 0j
    assert np.allclose(la.lu_solve(a, b), np.linalg.solve(a, b), atol=1e-12)


def test_lu_solve_singular():
    with pytest.raises(SingularMatrix):
        la.lu_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_lu_solve_shape_errors():
    with pytest.raises(DimensionMismatch):
        la.lu_solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(DimensionMismatch):
        la.lu_solve(np.eye(2), np.ones(3))


def test_as_matrix_rejects_nan():
    with pytest.raises(ValueError):
        la.as_matrix([[np.nan]])


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 15])
def test_eigenvalues_against_numpy(rng, n):
    a = rng.standard_normal((n, n))
    assert match_roots(la.eigenvalues(a), np.linalg.eigvals(a)) <= 1e-8
    z = a + 1j * rng.standard_normal((n, n))
    assert match_roots(la.eigenvalues(z), np.linalg.eigvals(z)) <= 1e-8


def test_eigenvalues_simple_cases():
    assert match_roots(la.eigenvalues(np.diag([0.3, -0.7])), [0.3, -0.7]) <= 1e-14
    abar = [[-0.225, 0.0875], [0.450, -0.175]]
    assert match_roots(la.eigenvalues(abar), [0.0, -0.4]) <= 1e-9
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert match_roots(la.eigenvalues(rot), [1j, -1j]) <= 1e-12


def test_spectral_radius():
    assert la.spectral_radius(np.diag([0.5, -2.0])) == pytest.approx(2.0)


def test_spectral_norm(rng):
    assert la.spectral_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-14)
    a = rng.standard_normal((3, 5))
    assert la.spectral_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-12)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert la.spectral_norm(z) == pytest.approx(np.linalg.norm(z, 2), rel=1e-12)


def test_frobenius():
    assert la.frobenius_norm(np.zeros((2, 2))) == 0.0
    assert la.frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2))
    assert la.frobenius_norm([[3.0, 4.0], [0.0, 0.0]]) == 5.0


def test_symmetric_eigenvalues(rng):
    assert la.min_symmetric_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert la.min_symmetric_eigenvalue(np.diag([-2.0, 5.0])) == pytest.approx(-2.0)
    m = rng.standard_normal((6, 6))
    m = m + m.T
    assert np.allclose(np.sort(la.symmetric_eigenvalues(m)), np.linalg.eigvalsh(m), atol=1e-12)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = h + h.conj().T
    assert np.allclose(np.sort(la.symmetric_eigenvalues(h)), np.linalg.eigvalsh(h), atol=1e-12)


def test_symmetric_eig_vectors(rng):
    m = rng.standard_normal((5, 5))
    m = m + m.T
    w, v = la.symmetric_eig(m)
    assert np.allclose(m @ v, v * w, atol=1e-12)
    assert np.allclose(v.T @ v, np.eye(5), atol=1e-12)


def test_not_hermitian():
    with pytest.raises(NotHermitian):
        la.min_symmetric_eigenvalue(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_positive_definite():
    assert la.is_positive_definite(np.eye(2), 0.5)
    assert not la.is_positive_definite(np.diag([1.0, -1e-3]), 0.0)
    assert la.is_positive_definite([[2.95, 0.42], [0.42, 3.18]], 1e-6)


def test_cholesky_and_inverse(rng):
    g = rng.standard_normal((4, 4))
    s = g @ g.T + np.eye(4)
    low = la.cholesky(s)
    assert np.allclose(low @ low.T, s, atol=1e-12)
    assert np.allclose(la.inv(s) @ s, np.eye(4), atol=1e-10)
    with pytest.raises(SingularMatrix):
        la.cholesky(-np.eye(2))


def test_det(rng):
    a = rng.standard_normal((5, 5))
    assert la.det(a) == pytest.approx(np.linalg.det(a), rel=1e-10)
    assert la.det(np.zeros((2, 2))) == 0
