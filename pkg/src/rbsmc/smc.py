"""Deformed delayed sliding-mode systems and the sequential design procedure.

The plant is

    x(k+1) = A x(k) + A_d x(k - tau) + B u(k) + D delta(k),   s(k) = C x(k),

with ``u = -K x - rho sat(C x / phi)``.  Deforming by a Rota-Baxter operator
replaces ``A, A_d, B`` by ``P(A), P(A_d), P(B)``; the equivalent-control
projection ``Pi = I - B_P (C B_P)^-1 C`` gives the reduced dynamics.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import (DesignStepError, DimensionMismatch, KStrongViolated, PhiTooSmall,
                     RhoTooLarge, SingularActuation, SingularMatrix, UnsupportedDeformation)
from .linalg import as_matrix, lu_solve, spectral_norm
from .rota_baxter import SCALAR, RotaBaxterOperator, apply

EDGE_TOL = 1e-12


def _real(x, name):
    a = as_matrix(x, name)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0.0):
            raise UnsupportedDeformation(f"{name}: control matrices must be real")
        a = np.ascontiguousarray(a.real)
    return a


@dataclass(frozen=True, eq=False)
class DelayedSystem:
    """Plant data ``(A, A_d, B, C, D, tau, delta_max)``."""

    a: np.ndarray
    a_d: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    tau: int
    delta_max: float = 0.0

    def __post_init__(self):
        for name in ("a", "a_d", "b", "c", "d"):
            object.__setattr__(self, name, _real(getattr(self, name), name))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {self.a.shape}")
        if self.a_d.shape != (n, n):
            raise DimensionMismatch(f"A_d must be {n}x{n}, got {self.a_d.shape}")
        if self.b.shape[0] != n:
            raise DimensionMismatch(f"B must have {n} rows, got {self.b.shape}")
        m = self.b.shape[1]
        if self.c.shape != (m, n):
            raise DimensionMismatch(f"C must be {m}x{n}, got {self.c.shape}")
        if self.d.shape[0] != n:
            raise DimensionMismatch(f"D must have {n} rows, got {self.d.shape}")
        if isinstance(self.tau, bool) or int(self.tau) != self.tau or self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))
        dm = float(self.delta_max)
        if not (dm >= 0.0 and math.isfinite(dm)):
            raise ValueError(f"delta_max must be finite and nonnegative, got {self.delta_max!r}")
        object.__setattr__(self, "delta_max", dm)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def p(self) -> int:
        return self.d.shape[1]


@dataclass(frozen=True, eq=False)
class DeformedSystem:
    system: DelayedSystem
    operator: RotaBaxterOperator
    a_p: np.ndarray
    a_dp: np.ndarray
    b_p: np.ndarray
    cb_p: np.ndarray
    pi: np.ndarray
    a_bar: np.ndarray
    a_dbar: np.ndarray
    d_bar: np.ndarray

    @property
    def is_degenerate(self) -> bool:
        """True when ``Pi`` vanishes, so the reduced dynamics are ``x(k+1) = 0``."""
        return float(np.sqrt(np.sum(self.pi ** 2))) <= 1e-12


def deform(sys: DelayedSystem, p: RotaBaxterOperator) -> DeformedSystem:
    """Apply ``p`` to ``A, A_d, B`` and build the sliding projection and reduced matrices.

    A rectangular ``B`` is only accepted for scalar scaling, which acts entrywise.
    """
    if p.is_complex:
        raise UnsupportedDeformation("complex operators are not supported for control data")
    a_p = np.real(apply(p, sys.a))
    a_dp = np.real(apply(p, sys.a_d))
    if p.kind == SCALAR:
        b_p = -float(p.weight) * sys.b
    elif sys.m == sys.n:
        b_p = np.real(apply(p, sys.b))
    else:
        raise UnsupportedDeformation(
            f"operator kind {p.kind!r} is undefined on a {sys.n}x{sys.m} input matrix")
    cb_p = sys.c @ b_p
    try:
        gain = lu_solve(cb_p, sys.c)
    except SingularMatrix as exc:
        raise SingularActuation(f"C B_P is not invertible: {exc}") from exc
    pi = np.eye(sys.n) - b_p @ gain
    return DeformedSystem(sys, p, a_p, a_dp, b_p, cb_p, pi,
                          pi @ a_p, pi @ a_dp, pi @ sys.d)


def _gain(k, dfm):
    k = _real(k, "K")
    if k.shape != (dfm.system.m, dfm.system.n):
        raise DimensionMismatch(f"K must be {dfm.system.m}x{dfm.system.n}, got {k.shape}")
    return k


def closed_loop_matrix(dfm: DeformedSystem, k) -> np.ndarray:
    return dfm.a_p - dfm.b_p @ _gain(k, dfm)


@dataclass(frozen=True)
class KStrongReport:
    norm: float
    ok: bool


def check_k_strong(dfm: DeformedSystem, k) -> KStrongReport:
    """``||A_P - B_P K|| < 1``."""
    nrm = spectral_norm(closed_loop_matrix(dfm, k))
    return KStrongReport(nrm, nrm < 1.0)


@dataclass(frozen=True)
class R0Report:
    required_r0: float
    ok: bool


def check_r0(dfm: DeformedSystem, k, r0, r_d0, rho_max, delta_max=None) -> R0Report:
    """Sufficient initial-state radius for the uniform state bound."""
    if delta_max is None:
        delta_max = dfm.system.delta_max
    denom = 1.0 - check_k_strong(dfm, k).norm
    if denom <= 0.0:
        raise KStrongViolated(f"||A_P - B_P K|| = {1.0 - denom:.6g} >= 1")
    num = (spectral_norm(dfm.a_dp) * r_d0 + rho_max * spectral_norm(dfm.b_p)
           + delta_max * spectral_norm(dfm.system.d))
    req = num / denom
    return R0Report(req, r0 >= req)


def alpha0(dfm: DeformedSystem, k, r0, r_d0, delta_max=None) -> float:
    """Worst-case one-step sliding-variable bound from bounded data."""
    sys = dfm.system
    if delta_max is None:
        delta_max = sys.delta_max
    return (spectral_norm(sys.c @ closed_loop_matrix(dfm, k)) * r0
            + spectral_norm(sys.c @ dfm.a_dp) * r_d0
            + delta_max * spectral_norm(sys.c @ sys.d))


def reaching_time(s0_norm, phi, beta, s_star) -> int:
    """Upper bound on the number of steps before ``||s|| <= phi``."""
    if s0_norm <= phi:
        return 0
    if beta == 0.0 or abs(phi - s_star) <= EDGE_TOL:
        return 1
    ratio = (s0_norm - s_star) / (phi - s_star)
    return max(1, int(math.ceil(math.log(ratio) / math.log(1.0 / beta))))


@dataclass(frozen=True)
class ReachingReport:
    alpha0: float
    beta: float
    s_star: float
    t_star: int


def reaching_report(dfm: DeformedSystem, k, r0, r_d0, phi, rho, s0_norm) -> ReachingReport:
    a0 = alpha0(dfm, k, r0, r_d0)
    if not phi > a0:
        raise PhiTooSmall(f"phi = {phi:.6g} must exceed alpha0 = {a0:.6g}")
    cb = spectral_norm(dfm.cb_p)
    if rho * cb > (phi - a0) * (1.0 + EDGE_TOL):
        raise RhoTooLarge(f"rho ||C B_P|| = {rho * cb:.6g} exceeds phi - alpha0 = {phi - a0:.6g}")
    beta = rho * cb / phi
    s_star = a0 / (1.0 - beta)
    return ReachingReport(a0, beta, s_star, reaching_time(s0_norm, phi, beta, s_star))


def phi_rho(dfm: DeformedSystem, k, rho, phi) -> np.ndarray:
    """Linear-regime sliding map ``C(A_P - B_P K) - (rho/phi) C B_P C``."""
    c = dfm.system.c
    return c @ closed_loop_matrix(dfm, k) - (rho / phi) * (dfm.cb_p @ c)


@dataclass(frozen=True)
class BandReport:
    lhs: float
    ok: bool
    phi_rho_norm: float
    terms: tuple


def band_invariance_check(dfm: DeformedSystem, k, rho, phi, r) -> BandReport:
    """Check that the band ``||s|| <= phi`` is invariant for states of size at most ``r``."""
    if not phi > 0:
        raise ValueError("phi must be positive")
    if r < 0:
        raise ValueError("r must be nonnegative")
    sys = dfm.system
    pn = spectral_norm(phi_rho(dfm, k, rho, phi))
    terms = (pn * r, spectral_norm(sys.c @ dfm.a_dp) * r,
             sys.delta_max * spectral_norm(sys.c @ sys.d))
    lhs = float(sum(terms))
    return BandReport(lhs, lhs <= phi, pn, terms)


STEP_NAMES = ("bounds", "k_strong", "r0", "phi", "rho", "certificate")


@dataclass
class DesignState:
    """Record of the six design steps; ``step_flags[j]`` is set only if steps ``0..j-1`` passed."""

    r0: float
    r_d0: float
    rho_max: float
    k: np.ndarray
    phi: float
    rho: float
    alpha0: float = float("nan")
    beta: float = float("nan")
    s_star: float = float("nan")
    t_star: Optional[int] = None
    s0_norm: Optional[float] = None
    k_norm: float = float("nan")
    required_r0: float = float("nan")
    rho_cap: float = float("nan")
    v0: Optional[float] = None
    r: Optional[float] = None
    band_lhs: Optional[float] = None
    phi_rho_norm: Optional[float] = None
    step_flags: list = field(default_factory=lambda: [False] * 6)
    failed_step: Optional[int] = None
    message: str = ""

    @property
    def passed(self) -> bool:
        return all(self.step_flags)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["k"] = np.asarray(self.k).tolist()
        out["steps"] = {name: flag for name, flag in zip(STEP_NAMES, self.step_flags)}
        for key, val in list(out.items()):
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None
        return out


def run_design(sys: DelayedSystem, p: RotaBaxterOperator, k, r0, r_d0, rho_max, phi, rho,
               certificate=None, x_history=None, s0_norm=None,
               deformed: Optional[DeformedSystem] = None) -> DesignState:
    """Execute the design steps in order, stopping at the first failure.

    Without ``certificate`` steps one to five run and the last flag stays
    False.  ``s0_norm`` defaults to ``||C|| r0``, the worst case admitted by
    the initial bound.  Raises :class:`DesignStepError` carrying the partial
    state on failure.
    """
    dfm = deformed if deformed is not None else deform(sys, p)
    k = _gain(k, dfm)
    state = DesignState(float(r0), float(r_d0), float(rho_max), k, float(phi), float(rho))

    def fail(step, exc):
        state.failed_step = step
        state.message = str(exc)
        err = DesignStepError(step, str(exc), state)
        raise err from exc

    # (i) bounds
    bad = [name for name, v in (("r0", r0), ("r_d0", r_d0), ("rho_max", rho_max), ("rho", rho))
           if not (math.isfinite(v) and v >= 0)]
    if bad or not (math.isfinite(phi) and phi > 0):
        fail(1, ValueError(f"invalid bounds: {', '.join(bad) or 'phi'}"))
    state.step_flags[0] = True

    # (ii) contraction of the nominal closed loop
    ks = check_k_strong(dfm, k)
    state.k_norm = ks.norm
    if not ks.ok:
        fail(2, KStrongViolated(f"||A_P - B_P K|| = {ks.norm:.6g} >= 1"))
    state.step_flags[1] = True

    # (iii) initial radius
    rr = check_r0(dfm, k, r0, r_d0, rho_max)
    state.required_r0 = rr.required_r0
    if not rr.ok:
        fail(3, ValueError(f"r0 = {r0:.6g} below required {rr.required_r0:.6g}"))
    state.step_flags[2] = True

    # (iv) band width
    state.alpha0 = alpha0(dfm, k, r0, r_d0)
    if not phi > state.alpha0:
        fail(4, PhiTooSmall(f"phi = {phi:.6g} must exceed alpha0 = {state.alpha0:.6g}"))
    state.step_flags[3] = True

    # (v) switching gain
    cb = spectral_norm(dfm.cb_p)
    state.rho_cap = min(rho_max, (phi - state.alpha0) / cb)
    if rho > state.rho_cap * (1.0 + EDGE_TOL):
        fail(5, RhoTooLarge(f"rho = {rho:.6g} exceeds min(rho_max, (phi - alpha0)/||C B_P||) "
                            f"= {state.rho_cap:.6g}"))
    state.beta = rho * cb / phi
    state.s_star = state.alpha0 / (1.0 - state.beta)
    if s0_norm is None:
        s0_norm = spectral_norm(sys.c) * r0
    state.s0_norm = float(s0_norm)
    state.t_star = reaching_time(state.s0_norm, phi, state.beta, state.s_star)
    state.step_flags[4] = True

    # (vi) certificate-based band invariance
    if certificate is None:
        state.message = "no certificate supplied; step 6 not evaluated"
        return state
    from .lmi import v0_and_r

    hist = x_history if x_history is not None else np.zeros((sys.tau + 1, sys.n))
    state.v0, state.r = v0_and_r(certificate, hist)
    band = band_invariance_check(dfm, k, rho, phi, state.r)
    state.band_lhs = band.lhs
    state.phi_rho_norm = band.phi_rho_norm
    if not band.ok:
        fail(6, ValueError(f"band invariance LHS = {band.lhs:.6g} exceeds phi = {phi:.6g}"))
    state.step_flags[5] = True
    return state

