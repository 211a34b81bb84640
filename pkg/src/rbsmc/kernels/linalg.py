"""Dense linear algebra kernels.

All kernels take contiguous float64 or complex128 arrays, copy their input,
and report failure through a status value instead of raising (numba-friendly).
"""
import numpy as np

from .._accel import kernel


@kernel
def lu_factor(a, tol):
    """Partial-pivot LU of a square complex matrix.

    Returns ``(lu, piv, bad)`` where ``bad`` is -1 on success, otherwise the
    column whose pivot magnitude fell to ``tol`` or below.
    """
    n = a.shape[0]
    lu = a.copy()
    piv = np.arange(n)
    bad = -1
    for k in range(n):
        p = k
        best = np.abs(lu[k, k])
        for i in range(k + 1, n):
            v = np.abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if best <= tol:
            bad = k
            break
        if p != k:
            row = lu[k, :].copy()
            lu[k, :] = lu[p, :]
            lu[p, :] = row
            tmp = piv[k]
            piv[k] = piv[p]
            piv[p] = tmp
        lu[k + 1:, k] = lu[k + 1:, k] / lu[k, k]
        for i in range(k + 1, n):
            lu[i, k + 1:] -= lu[i, k] * lu[k, k + 1:]
    return lu, piv, bad


@kernel
def lu_solve(lu, piv, b):
    n = lu.shape[0]
    x = np.empty_like(b)
    for i in range(n):
        x[i, :] = b[piv[i], :]
    for i in range(n):
        for j in range(i):
            x[i, :] -= lu[i, j] * x[j, :]
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            x[i, :] -= lu[i, j] * x[j, :]
        x[i, :] = x[i, :] / lu[i, i]
    return x


@kernel
def lu_det(lu, piv):
    n = lu.shape[0]
    det = 1.0 + 0.0j
    seen = np.zeros(n, dtype=np.bool_)
    # sign of the permutation from its cycle decomposition
    for i in range(n):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = piv[j]
            length += 1
        if length % 2 == 0:
            det = -det
    for i in range(n):
        det *= lu[i, i]
    return det


@kernel
def cholesky(a):
    """Lower Cholesky factor of a real symmetric matrix; ``ok`` is False if not PD."""
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - np.dot(low[j, :j], low[j, :j])
        if not d > 0.0:
            return low, False
        low[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (a[i, j] - np.dot(low[i, :j], low[j, :j])) / low[j, j]
    return low, True


@kernel
def cholesky_inverse(low):
    """Inverse of ``L L^T`` from its Cholesky factor."""
    n = low.shape[0]
    linv = np.zeros_like(low)
    for j in range(n):
        linv[j, j] = 1.0 / low[j, j]
        for i in range(j + 1, n):
            s = 0.0
            for k in range(j, i):
                s += low[i, k] * linv[k, j]
            linv[i, j] = -s / low[i, i]
    return linv.T @ linv


@kernel
def jacobi_eigh(a, tol, max_sweeps):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ``(w, v, sweeps)`` with eigenvalues unsorted, eigenvectors in the
    columns of ``v``, and ``sweeps = -1`` if ``max_sweeps`` was exhausted.
    """
    n = a.shape[0]
    m = a.copy()
    v = np.eye(n)
    scale = np.sqrt(np.sum(m * m))
    if scale == 0.0:
        return np.zeros(n), v, 0
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += m[p, q] * m[p, q]
        if np.sqrt(2.0 * off) <= tol * scale:
            return np.diag(m).copy(), v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = m[:, p].copy()
                colq = m[:, q].copy()
                m[:, p] = c * colp - s * colq
                m[:, q] = s * colp + c * colq
                rowp = m[p, :].copy()
                rowq = m[q, :].copy()
                m[p, :] = c * rowp - s * rowq
                m[q, :] = s * rowp + c * rowq
                m[p, q] = 0.0
                m[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(m).copy(), v, -1


@kernel
def hessenberg(a):
    """Householder reduction of a complex square matrix to upper Hessenberg form."""
    n = a.shape[0]
    h = a.copy()
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        norm = np.sqrt(np.sum(np.abs(x) ** 2))
        if norm == 0.0:
            continue
        x0 = x[0]
        if np.abs(x0) == 0.0:
            phase = 1.0 + 0.0j
        else:
            phase = x0 / np.abs(x0)
        v = x
        v[0] = x0 + phase * norm
        vnorm = np.sqrt(np.sum(np.abs(v) ** 2))
        v = v / vnorm
        vc = np.conj(v)
        block = np.ascontiguousarray(h[k + 1:, :])
        h[k + 1:, :] = block - 2.0 * np.outer(v, vc @ block)
        block = np.ascontiguousarray(h[:, k + 1:])
        h[:, k + 1:] = block - 2.0 * np.outer(block @ v, vc)
        h[k + 2:, k] = 0.0
    return h


@kernel
def _two_by_two(a, b, c, d):
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) * (a - d) + b * c + 0.0j)
    return half_tr + disc, half_tr - disc


@kernel
def hessenberg_qr_eigvals(h, max_iter):
    """Eigenvalues of an upper Hessenberg matrix by Wilkinson-shifted QR.

    Works on the active unreduced block only, deflating from the bottom.
    Returns ``(w, iterations)``; ``iterations = -1`` signals no convergence.
    """
    n = h.shape[0]
    m = h.copy()
    w = np.zeros(n, dtype=np.complex128)
    eps = 2.220446049250313e-16
    hnorm = np.sqrt(np.sum(np.abs(m) ** 2))
    hi = n - 1
    total = 0
    stall = 0
    while hi >= 0:
        if hi == 0:
            w[0] = m[0, 0]
            break
        lo = hi
        while lo > 0:
            ref = np.abs(m[lo, lo]) + np.abs(m[lo - 1, lo - 1])
            if ref == 0.0:
                ref = hnorm
            if np.abs(m[lo, lo - 1]) <= eps * ref:
                m[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = m[hi, hi]
            hi -= 1
            stall = 0
            continue
        if lo == hi - 1:
            e1, e2 = _two_by_two(m[hi - 1, hi - 1], m[hi - 1, hi], m[hi, hi - 1], m[hi, hi])
            w[hi - 1] = e1
            w[hi] = e2
            hi -= 2
            stall = 0
            continue
        total += 1
        stall += 1
        if total > max_iter:
            return w, -1
        if stall % 11 == 10:
            # exceptional shift breaks symmetric cycling
            mu = m[hi, hi] + 0.75 * np.abs(m[hi, hi - 1])
        else:
            e1, e2 = _two_by_two(m[hi - 1, hi - 1], m[hi - 1, hi], m[hi, hi - 1], m[hi, hi])
            if np.abs(e1 - m[hi, hi]) < np.abs(e2 - m[hi, hi]):
                mu = e1
            else:
                mu = e2
        size = hi - lo + 1
        blk = m[lo:hi + 1, lo:hi + 1].copy()
        for i in range(size):
            blk[i, i] -= mu
        cs = np.zeros(size - 1)
        sn = np.zeros(size - 1, dtype=np.complex128)
        for k in range(size - 1):
            x = blk[k, k]
            y = blk[k + 1, k]
            r = np.sqrt(np.abs(x) ** 2 + np.abs(y) ** 2)
            if r == 0.0:
                c = 1.0
                s = 0.0 + 0.0j
            elif np.abs(x) == 0.0:
                c = 0.0
                s = np.conj(y) / np.abs(y)
            else:
                c = np.abs(x) / r
                s = (x / np.abs(x)) * np.conj(y) / r
            cs[k] = c
            sn[k] = s
            rk = blk[k, k:].copy()
            rk1 = blk[k + 1, k:].copy()
            blk[k, k:] = c * rk + s * rk1
            blk[k + 1, k:] = -np.conj(s) * rk + c * rk1
        for k in range(size - 1):
            c = cs[k]
            s = sn[k]
            top = min(k + 2, size)
            ck = blk[:top, k].copy()
            ck1 = blk[:top, k + 1].copy()
            blk[:top, k] = c * ck + np.conj(s) * ck1
            blk[:top, k + 1] = -s * ck + c * ck1
        for i in range(size):
            blk[i, i] += mu
        m[lo:hi + 1, lo:hi + 1] = blk
    return w, total
