"""Log-det barrier derivatives for an affine symmetric matrix function."""
import numpy as np

from .._accel import kernel


@kernel
def logdet_derivatives(s_inv, basis):
    """Gradient and Hessian of ``-log det S(z)`` where ``dS/dz_k = -basis[k]``.

    ``grad[k] = tr(S^-1 F_k)`` and ``hess[k, l] = tr(S^-1 F_k S^-1 F_l)``.
    """
    nvar = basis.shape[0]
    m = s_inv.shape[0]
    work = np.empty((nvar, m, m))
    grad = np.empty(nvar)
    for k in range(nvar):
        wk = s_inv @ np.ascontiguousarray(basis[k])
        work[k] = wk
        grad[k] = np.trace(wk)
    hess = np.empty((nvar, nvar))
    for k in range(nvar):
        for l in range(k, nvar):
            acc = 0.0
            for i in range(m):
                for j in range(m):
                    acc += work[k, i, j] * work[l, j, i]
            hess[k, l] = acc
            hess[l, k] = acc
    return grad, hess


@kernel
def affine_combination(base, basis, z):
    out = base.copy()
    for k in range(basis.shape[0]):
        if z[k] != 0.0:
            out += z[k] * basis[k]
    return out
