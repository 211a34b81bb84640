"""Lyapunov-Krasovskii matrix inequalities and a small interior-point solver.

With ``F = [A_bar A_dbar D_bar]`` the stability condition reads

    M = F' X F + diag(-X + Y, -Y, -gamma^2 I) < 0,

and the change of variables ``Q = X^-1``, ``Y_tilde = Q Y Q`` turns its Schur
form into an LMI that is affine in ``(Q, Y_tilde, gamma^2)``.  The solver
minimizes the largest eigenvalue of that LMI (stacked with the positivity
blocks) by a damped Newton barrier method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DimensionMismatch, HistoryLengthMismatch, Infeasible, NumericalFailure,
                     SingularMatrix)
from .kernels import barrier as _bk
from .kernels import linalg as _lk
from .linalg import (as_matrix, inv, lu_solve, max_symmetric_eigenvalue,
                     min_symmetric_eigenvalue, spectral_norm)

MARGIN = 1e-6
Q_BOUND = 10.0
MAX_NEWTON = 500
ARMIJO_FACTOR = 0.5
ARMIJO_SLOPE = 0.25
BISECTION_RTOL = 1e-3
MAX_BISECTIONS = 100


@dataclass(frozen=True, eq=False)
class LmiProblem:
    """Reduced system data for the stability LMI.

    The solver keeps ``q_lower I <= Q <= q_upper I`` (with the strictness
    margin).  Scaling ``(Q, Y_tilde)`` by ``s`` is equivalent to scaling
    ``gamma^2`` by ``1/s``, so without an upper cap the infimum of ``gamma`` is
    zero.  Tightening the band bounds the condition number of ``X``.
    """

    a_bar: np.ndarray
    a_dbar: np.ndarray
    d_bar: np.ndarray
    epsilon_margin: float = MARGIN
    q_lower: float = 0.0
    q_upper: float = Q_BOUND
    tau: Optional[int] = None

    def __post_init__(self):
        a = as_matrix(self.a_bar, "a_bar")
        n = a.shape[0]
        ad = as_matrix(self.a_dbar, "a_dbar")
        d = as_matrix(self.d_bar, "d_bar")
        if a.shape != (n, n) or ad.shape != (n, n) or d.shape[0] != n:
            raise DimensionMismatch(f"inconsistent shapes {a.shape}, {ad.shape}, {d.shape}")
        for name, val in (("a_bar", a), ("a_dbar", ad), ("d_bar", d)):
            object.__setattr__(self, name, np.real(val).astype(float))
        if not self.epsilon_margin > 0:
            raise ValueError("epsilon_margin must be positive")
        if not (self.q_lower < 1.0 - self.epsilon_margin and self.q_upper > 1.0 + self.epsilon_margin):
            raise ValueError("need q_lower < 1 < q_upper so the trial point Q = I is interior")

    @classmethod
    def from_deformed(cls, dfm, **kw) -> "LmiProblem":
        kw.setdefault("tau", dfm.system.tau)
        return cls(dfm.a_bar, dfm.a_dbar, dfm.d_bar, **kw)

    @property
    def n(self) -> int:
        return self.a_bar.shape[0]

    @property
    def p(self) -> int:
        return self.d_bar.shape[1]

    @property
    def block_layout(self) -> tuple:
        return (self.n, self.n, self.p, self.n)

    @property
    def f(self) -> np.ndarray:
        return np.hstack([self.a_bar, self.a_dbar, self.d_bar])


def _sym(m):
    return 0.5 * (m + m.T)


def _square_n(x, n, name):
    x = np.real(as_matrix(x, name))
    if x.shape != (n, n):
        raise DimensionMismatch(f"{name} must be {n}x{n}, got {x.shape}")
    return x


def assemble_linear_lmi(prob: LmiProblem, q, y_tilde, gamma_sq) -> np.ndarray:
    """The ``(3n+p)``-square LMI in ``(Q, Y_tilde, gamma^2)``."""
    n, p = prob.n, prob.p
    q = _square_n(q, n, "q")
    yt = _square_n(y_tilde, n, "y_tilde")
    a, ad, d = prob.a_bar, prob.a_dbar, prob.d_bar
    z = np.zeros
    m = np.block([
        [-q + yt, z((n, n)), z((n, p)), q @ a.T],
        [z((n, n)), -yt, z((n, p)), q @ ad.T],
        [z((p, n)), z((p, n)), -gamma_sq * np.eye(p), d.T],
        [a @ q, ad @ q, d, -q],
    ])
    return _sym(m)


def assemble_bmi(prob: LmiProblem, x, y, gamma) -> np.ndarray:
    """``F' X F + diag(-X + Y, -Y, -gamma^2 I)`` of size ``2n+p``."""
    n, p = prob.n, prob.p
    x = _square_n(x, n, "x")
    y = _square_n(y, n, "y")
    f = prob.f
    m = f.T @ x @ f
    m[:n, :n] += -x + y
    m[n:2 * n, n:2 * n] -= y
    m[2 * n:, 2 * n:] -= gamma * gamma * np.eye(p)
    return _sym(m)


def assemble_schur(prob: LmiProblem, x, y, gamma) -> np.ndarray:
    """Schur-complement form of :func:`assemble_bmi` with ``-X^-1`` in the last block."""
    n, p = prob.n, prob.p
    x = _square_n(x, n, "x")
    y = _square_n(y, n, "y")
    x_inv = lu_solve(x, np.eye(n))
    a, ad, d = prob.a_bar, prob.a_dbar, prob.d_bar
    z = np.zeros
    m = np.block([
        [-x + y, z((n, n)), z((n, p)), a.T],
        [z((n, n)), -y, z((n, p)), ad.T],
        [z((p, n)), z((p, n)), -gamma * gamma * np.eye(p), d.T],
        [a, ad, d, -x_inv],
    ])
    return _sym(m)


def congruence(prob: LmiProblem, q) -> np.ndarray:
    """``diag(Q, Q, I_p, I_n)``, mapping the Schur form onto the linear LMI."""
    n, p = prob.n, prob.p
    q = _square_n(q, n, "q")
    s = np.zeros((3 * n + p, 3 * n + p))
    s[:n, :n] = q
    s[n:2 * n, n:2 * n] = q
    s[2 * n:, 2 * n:] = np.eye(n + p)
    return s


# -- phase-I barrier solver ---------------------------------------------------

def _sym_basis(n):
    out = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            e[i, j] = 1.0
            e[j, i] = 1.0
            out.append(e)
    return out


def _stacked(prob, q, yt, gamma_sq):
    """Block-diagonal constraint matrix whose negativity encodes every condition."""
    n = prob.n
    lmi = assemble_linear_lmi(prob, q, yt, gamma_sq)
    k = lmi.shape[0]
    g = np.zeros((k + 3 * n, k + 3 * n))
    g[:k, :k] = lmi
    g[k:k + n, k:k + n] = prob.q_lower * np.eye(n) - q
    g[k + n:k + 2 * n, k + n:k + 2 * n] = -yt
    g[k + 2 * n:, k + 2 * n:] = q - prob.q_upper * np.eye(n)
    return g


class _PhaseOne:
    """Minimize ``t`` subject to ``G(z) <= t I`` with the log-det barrier.

    The decision vector stacks the upper-triangle entries of ``Q`` and
    ``Y_tilde`` followed by ``t``.
    """

    def __init__(self, prob: LmiProblem, gamma_sq: float):
        self.prob = prob
        n = prob.n
        self.sym = _sym_basis(n)
        nq = len(self.sym)
        zero = np.zeros((n, n))
        self.g0 = _stacked(prob, zero, zero, gamma_sq)
        mats = [_stacked(prob, e, zero, gamma_sq) - self.g0 for e in self.sym]
        mats += [_stacked(prob, zero, e, gamma_sq) - self.g0 for e in self.sym]
        self.size = self.g0.shape[0]
        mats.append(-np.eye(self.size))
        self.basis = np.ascontiguousarray(np.array(mats))
        self.nq = nq
        self.newton_steps = 0

    def to_matrices(self, w):
        q = sum((w[k] * e for k, e in enumerate(self.sym)), np.zeros_like(self.sym[0]))
        yt = sum((w[self.nq + k] * e for k, e in enumerate(self.sym)), np.zeros_like(self.sym[0]))
        return q, yt

    def from_matrices(self, q, yt):
        n = self.prob.n
        iu = np.triu_indices(n)
        return np.concatenate([q[iu], yt[iu]])

    def g_of(self, w):
        # G(z) alone: drop the t column, which enters as -t I
        return _bk.affine_combination(self.g0, self.basis[:-1], w[:-1])

    def slack(self, w):
        """``S = t I - G(z)``."""
        return _bk.affine_combination(-self.g0, self.basis, -w)

    def objective(self, w, c):
        low, ok = _lk.cholesky(self.slack(w))
        if not ok:
            return math.inf, None
        return c * w[-1] - 2.0 * float(np.sum(np.log(np.diag(low)))), low

    def solve(self, gamma_sq, center=False):
        prob = self.prob
        margin = prob.epsilon_margin
        n = prob.n
        z0 = self.from_matrices(np.eye(n), 0.5 * np.eye(n))
        lam0 = max_symmetric_eigenvalue(self.g_of(np.append(z0, 0.0)))
        w = np.append(z0, lam0 + 1.0)
        nvar = w.shape[0]
        best_w, best_t = None, math.inf

        def record(w):
            nonlocal best_w, best_t
            lam = max_symmetric_eigenvalue(self.g_of(w))
            if lam < best_t:
                best_t, best_w = lam, w.copy()
            return lam

        if record(w) < -margin and not center:
            return best_w, best_t
        c = 1.0
        while self.newton_steps < MAX_NEWTON:
            # centering for the current weight c
            for _ in range(60):
                f0, low = self.objective(w, c)
                s_inv = _lk.cholesky_inverse(low)
                grad, hess = _bk.logdet_derivatives(s_inv, self.basis)
                grad[-1] += c
                hl, ok = _lk.cholesky(_sym(hess))
                if not ok:
                    raise NumericalFailure("barrier Hessian is not positive definite")
                step = -_lk.cholesky_inverse(hl) @ grad
                slope = float(grad @ step)
                if -slope < 1e-10:
                    break
                s = 1.0
                while True:
                    f1, _ = self.objective(w + s * step, c)
                    if f1 <= f0 + ARMIJO_SLOPE * s * slope:
                        break
                    s *= ARMIJO_FACTOR
                    if s < 1e-14:
                        break
                if s < 1e-14:
                    break
                w = w + s * step
                self.newton_steps += 1
                if record(w) < -margin and not center:
                    return best_w, best_t
                if self.newton_steps >= MAX_NEWTON:
                    break
            gap = self.size / c
            if best_t < -margin and center and gap < 1e-9:
                return best_w, best_t
            if w[-1] - gap >= -margin:
                break
            c *= 10.0
        if best_t < -margin:
            return best_w, best_t
        raise Infeasible(f"no point with LMI max eigenvalue below {-margin:g} at gamma^2 = "
                         f"{gamma_sq:.6g} (best {best_t:.3e})")


def solve_feasibility(prob: LmiProblem, gamma_sq: float, center: bool = False):
    """Find ``(Q, Y_tilde)`` making the linear LMI ``<= -margin I`` at the given ``gamma^2``.

    With ``center`` the barrier path is followed to convergence, returning
    the most interior point rather than the first feasible one.
    """
    if not gamma_sq > 0:
        raise ValueError("gamma_sq must be positive")
    solver = _PhaseOne(prob, gamma_sq)
    w, _ = solver.solve(gamma_sq, center=center)
    q, yt = solver.to_matrices(w)
    return _sym(q), _sym(yt)


@dataclass(eq=False)
class StabilityCertificate:
    q: np.ndarray
    y_tilde: np.ndarray
    gamma: float
    x: np.ndarray
    y: np.ndarray
    m_full: np.ndarray
    mu: float
    mu0: float
    effective_gain: float
    lmi_max_eig: float
    v0: Optional[float] = None
    r: Optional[float] = None
    tau: Optional[int] = None
    extra: dict = field(default_factory=dict)

    @property
    def lambda_min_x(self) -> float:
        return min_symmetric_eigenvalue(self.x)

    def to_dict(self) -> dict:
        out = {
            "q": self.q.tolist(), "y_tilde": self.y_tilde.tolist(), "gamma": self.gamma,
            "x": self.x.tolist(), "y": self.y.tolist(), "m_full": self.m_full.tolist(),
            "mu": self.mu, "mu0": self.mu0, "effective_gain": _finite(self.effective_gain),
            "lambda_min_x": self.lambda_min_x, "v0": self.v0, "r": self.r,
            "lmi_max_eig": self.lmi_max_eig, "tau": self.tau,
        }
        out.update(self.extra)
        return out

    @classmethod
    def from_dict(cls, data: dict, prob: Optional[LmiProblem] = None) -> "StabilityCertificate":
        """Rebuild a certificate; derived fields are recomputed when ``prob`` is given."""
        q = np.asarray(data["q"], dtype=float)
        yt = np.asarray(data["y_tilde"], dtype=float)
        gamma = float(data["gamma"])
        if prob is not None:
            cert = certificate_from(prob, q, yt, gamma)
        else:
            x = np.asarray(data["x"], dtype=float) if "x" in data else inv(q)
            cert = cls(q, yt, gamma, x,
                       np.asarray(data["y"], dtype=float) if "y" in data else x @ yt @ x,
                       np.asarray(data.get("m_full", np.zeros((0, 0))), dtype=float),
                       float(data["mu"]), float(data["mu0"]),
                       float(data["effective_gain"]) if data.get("effective_gain") is not None
                       else math.inf,
                       float(data["lmi_max_eig"]))
        cert.v0 = data.get("v0")
        cert.r = data.get("r")
        cert.tau = data.get("tau", cert.tau)
        return cert


def _finite(v):
    return v if math.isfinite(v) else None


def certificate_from(prob: LmiProblem, q, y_tilde, gamma) -> StabilityCertificate:
    """Derive ``X, Y, M, mu, mu0`` and the effective gain from ``(Q, Y_tilde, gamma)``."""
    n = prob.n
    q = _sym(_square_n(q, n, "q"))
    yt = _sym(_square_n(y_tilde, n, "y_tilde"))
    try:
        x = _sym(lu_solve(q, np.eye(n)))
    except SingularMatrix as exc:
        raise NumericalFailure(f"Q is singular: {exc}") from exc
    y = _sym(x @ yt @ x)
    m_full = assemble_bmi(prob, x, y, gamma)
    mu = min_symmetric_eigenvalue(-m_full)
    mu0 = min_symmetric_eigenvalue(-m_full[:2 * n, :2 * n])
    gain = gamma / math.sqrt(mu) if mu > 0 else math.inf
    lmi_max = max_symmetric_eigenvalue(assemble_linear_lmi(prob, q, yt, gamma * gamma))
    return StabilityCertificate(q, yt, float(gamma), x, y, m_full, mu, mu0, gain, lmi_max,
                                tau=prob.tau)


def minimize_gamma(prob: LmiProblem, gamma_hi: float = 1.0) -> StabilityCertificate:
    """Bisect ``gamma^2`` on ``[0, gamma_hi^2]`` to relative width ``1e-3``.

    The returned certificate sits at the smallest feasible ``gamma`` found,
    re-solved along the central path for the largest interior margin.
    """
    if not gamma_hi > 0:
        raise ValueError("gamma_hi must be positive")
    hi = gamma_hi * gamma_hi
    solve_feasibility(prob, hi)
    lo = 0.0
    rounds = 0
    while hi - lo > BISECTION_RTOL * hi and rounds < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        try:
            solve_feasibility(prob, mid)
            hi = mid
        except Infeasible:
            lo = mid
        rounds += 1
    q, yt = solve_feasibility(prob, hi, center=True)
    cert = certificate_from(prob, q, yt, math.sqrt(hi))
    cert.extra = {"gamma_sq_bracket": [lo, hi], "bisection_rounds": rounds}
    return cert


def validate_certificate(prob: LmiProblem, cert: StabilityCertificate) -> float:
    """Largest eigenvalue of the reassembled linear LMI at the certificate point."""
    return max_symmetric_eigenvalue(
        assemble_linear_lmi(prob, cert.q, cert.y_tilde, cert.gamma ** 2))


def v0_and_r(cert: StabilityCertificate, x_history, tau: Optional[int] = None):
    """Initial functional value and level-set radius.

    ``x_history`` lists ``x(0), x(-1), ..., x(-tau)``.
    """
    hist = np.atleast_2d(np.asarray(x_history, dtype=float))
    n = cert.x.shape[0]
    if hist.shape[1] != n:
        raise DimensionMismatch(f"history states must have length {n}")
    tau = tau if tau is not None else cert.tau
    if tau is not None and hist.shape[0] != tau + 1:
        raise HistoryLengthMismatch(f"history needs {tau + 1} states, got {hist.shape[0]}")
    v0 = float(hist[0] @ cert.x @ hist[0])
    for xi in hist[1:]:
        v0 += float(xi @ cert.y @ xi)
    lam = cert.lambda_min_x
    return v0, math.sqrt(max(v0, 0.0) / lam)


@dataclass(frozen=True)
class FeasibilityReport:
    sigma_max_f: float
    ok: bool


def feasibility_sufficient(prob: LmiProblem, epsilon: float = 0.5, gamma: float = 1.0):
    """Closed-form sufficient condition ``sigma_max(F)^2 < min(1-eps, eps, gamma^2)``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    s = spectral_norm(prob.f)
    return FeasibilityReport(s, s * s < min(1.0 - epsilon, epsilon, gamma * gamma))
