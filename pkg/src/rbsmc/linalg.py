"""Dense linear algebra over real and complex scalars.

Thin validated wrappers around the compiled kernels in :mod:`rbsmc.kernels.linalg`.
Matrices are plain 2-D numpy arrays; real input stays real where the
algorithm allows it.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, SingularMatrix
from .kernels import linalg as _k

PIVOT_RTOL = 1e-13
HERMITIAN_RTOL = 1e-12
JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 100


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D float64 or complex128 array."""
    a = np.asarray(x)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(f"{name}: expected a non-empty 2-D matrix, got shape {a.shape}")
    if np.iscomplexobj(a):
        a = np.ascontiguousarray(a, dtype=np.complex128)
    else:
        a = np.ascontiguousarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name}: entries must be finite")
    return a


def _square(a, name="a"):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name}: expected a square matrix, got shape {a.shape}")
    return a


def frobenius_norm(a) -> float:
    a = np.asarray(a)
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + float(np.max(np.abs(a)))
    return float(np.max(np.abs(a - a.conj().T))) <= rtol * scale


def _real_symmetric(a, name="a"):
    """Real symmetric matrix with the same spectrum as Hermitian ``a`` (each eigenvalue doubled if complex)."""
    a = _square(a, name)
    if not is_hermitian(a):
        raise NotHermitian(f"{name} is not Hermitian within tolerance")
    if np.iscomplexobj(a):
        if np.any(a.imag != 0.0):
            re, im = a.real, a.imag
            emb = np.block([[re, -im], [im, re]])
            return np.ascontiguousarray(0.5 * (emb + emb.T)), True
        a = a.real
    return np.ascontiguousarray(0.5 * (a + a.T)), False


def symmetric_eigenvalues(a) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix by cyclic Jacobi."""
    m, doubled = _real_symmetric(a)
    w, _, sweeps = _k.jacobi_eigh(m, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence("Jacobi sweeps exhausted")
    w = np.sort(w)
    return w[::2] if doubled else w


def symmetric_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenpairs of a real symmetric matrix."""
    m, doubled = _real_symmetric(a)
    if doubled:
        raise ValueError("symmetric_eig supports real symmetric input only")
    w, v, sweeps = _k.jacobi_eigh(m, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence("Jacobi sweeps exhausted")
    order = np.argsort(w)
    return w[order], v[:, order]


def min_symmetric_eigenvalue(a) -> float:
    return float(symmetric_eigenvalues(a)[0])


def max_symmetric_eigenvalue(a) -> float:
    return float(symmetric_eigenvalues(a)[-1])


def spectral_norm(a) -> float:
    """Largest singular value, from the Jacobi spectrum of ``a^H a``."""
    a = as_matrix(a)
    gram = a.conj().T @ a
    gram = 0.5 * (gram + gram.conj().T)
    w = symmetric_eigenvalues(gram)
    return float(np.sqrt(max(w[-1], 0.0)))


def cholesky(a) -> np.ndarray:
    """Lower Cholesky factor of a real symmetric positive definite matrix."""
    m, doubled = _real_symmetric(a)
    if doubled:
        raise ValueError("cholesky supports real symmetric input only")
    low, ok = _k.cholesky(m)
    if not ok:
        raise SingularMatrix("matrix is not positive definite")
    return low


def is_positive_definite(a, margin: float = 0.0) -> bool:
    """True iff Cholesky succeeds on ``a - margin I`` (complex input via its real embedding)."""
    m, _ = _real_symmetric(a)
    _, ok = _k.cholesky(m - margin * np.eye(m.shape[0]))
    return bool(ok)


def _factor(a):
    a = _square(a)
    tol = PIVOT_RTOL * frobenius_norm(a)
    lu, piv, bad = _k.lu_factor(a.astype(np.complex128), tol)
    if bad >= 0:
        raise SingularMatrix(f"pivot {bad} below {tol:.3e}; matrix is numerically singular")
    return lu, piv, np.iscomplexobj(a)


def lu_solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` by LU with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot magnitude drops to
    ``1e-13 * ||a||_F`` or below.
    """
    a = _square(a)
    b_arr = np.asarray(b)
    vector = b_arr.ndim == 1
    b = as_matrix(b_arr, "b")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"b has {b.shape[0]} rows, a is {a.shape[0]}x{a.shape[0]}")
    lu, piv, a_complex = _factor(a)
    x = _k.lu_solve(lu, piv, b.astype(np.complex128))
    if not a_complex and not np.iscomplexobj(b):
        x = x.real.copy()
    return x[:, 0] if vector else x


def inv(a) -> np.ndarray:
    a = _square(a)
    return lu_solve(a, np.eye(a.shape[0], dtype=a.dtype))


def det(a) -> complex:
    """Determinant via LU; exactly 0 when the pivot test reports singularity."""
    a = _square(a)
    lu, piv, bad = _k.lu_factor(a.astype(np.complex128), 0.0)
    if bad >= 0:
        return 0j
    return complex(_k.lu_det(lu, piv))


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues of a square matrix (Hessenberg reduction + shifted QR).

    Raises :class:`NoConvergence` after ``100 n`` QR iterations.
    """
    a = _square(a)
    n = a.shape[0]
    h = _k.hessenberg(a.astype(np.complex128))
    w, iters = _k.hessenberg_qr_eigvals(h, 100 * n)
    if iters < 0:
        raise NoConvergence(f"shifted QR did not converge within {100 * n} iterations")
    return w


def spectral_radius(a) -> float:
    return float(np.max(np.abs(eigenvalues(a))))
