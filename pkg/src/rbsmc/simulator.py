"""Rollouts of the delayed sliding-mode loop and of its reduced dynamics.

State histories passed to the public functions are ordered newest first,
``x(k), x(k-1), ..., x(k-tau)``.  Trajectories store states oldest first,
``x(-tau), ..., x(N)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DimensionMismatch, DisturbanceTooLarge, HistoryTooShort, ModeMismatch,
                     NonpositivePhi)
from .kernels import rollout as _rk
from .linalg import lu_solve

CLOSED = "closed"
REDUCED = "reduced"
NORM_SLACK = 1e-12


def saturate(v, phi) -> np.ndarray:
    """Componentwise ``v_i / phi`` clipped to ``[-1, 1]``."""
    if not phi > 0:
        raise NonpositivePhi(f"phi must be positive, got {phi!r}")
    v = np.asarray(v, dtype=float)
    return np.clip(v / phi, -1.0, 1.0)


def _history(history, tau, n):
    h = np.atleast_2d(np.asarray(history, dtype=float))
    if h.shape[1] != n:
        raise DimensionMismatch(f"history states must have length {n}, got {h.shape[1]}")
    if h.shape[0] < tau + 1:
        raise HistoryTooShort(f"need at least {tau + 1} past states, got {h.shape[0]}")
    return h


def _delta(delta, p, delta_max):
    d = np.asarray(delta, dtype=float).reshape(-1)
    if d.shape[0] != p:
        raise DimensionMismatch(f"disturbance must have length {p}")
    if np.linalg.norm(d) > delta_max * (1.0 + NORM_SLACK) + NORM_SLACK:
        raise DisturbanceTooLarge(f"||delta|| = {np.linalg.norm(d):.6g} exceeds {delta_max:.6g}")
    return d


def step_closed_loop(dfm, k_gain, rho, phi, history, delta_k) -> np.ndarray:
    """One step of ``x+ = (A_P - B_P K) x + A_dP x(k-tau) - rho B_P sat(Cx/phi) + D delta``."""
    sys = dfm.system
    h = _history(history, sys.tau, sys.n)
    d = _delta(delta_k, sys.p, sys.delta_max)
    k_gain = np.atleast_2d(np.asarray(k_gain, dtype=float))
    x, xd = h[0], h[sys.tau]
    sat = saturate(sys.c @ x, phi)
    return ((dfm.a_p - dfm.b_p @ k_gain) @ x + dfm.a_dp @ xd
            - rho * (dfm.b_p @ sat) + sys.d @ d)


def step_reduced(dfm, history, delta_k) -> np.ndarray:
    """One step of ``x+ = A_bar x + A_dbar x(k-tau) + D_bar delta``."""
    sys = dfm.system
    h = _history(history, sys.tau, sys.n)
    d = _delta(delta_k, sys.p, sys.delta_max)
    return dfm.a_bar @ h[0] + dfm.a_dbar @ h[sys.tau] + dfm.d_bar @ d


# -- disturbances -------------------------------------------------------------

def make_disturbance(spec, horizon: int, p: int, delta_max: float, seed=None) -> np.ndarray:
    """Disturbance samples ``delta(0..horizon-1)`` as an array of shape ``(horizon, p)``.

    ``spec`` is ``None``/``{"kind": "zero"}``, ``{"kind": "constant", "value": [...]}``,
    ``{"kind": "sinusoid", "amplitude": a, "frequency": w, "phase": f}``,
    ``{"kind": "uniform_ball", "seed": s}`` or ``{"kind": "sequence", "values": [[...], ...]}``.
    An array-like is treated as an explicit sequence.
    """
    if spec is None:
        spec = {"kind": "zero"}
    if not isinstance(spec, dict):
        spec = {"kind": "sequence", "values": spec}
    kind = spec.get("kind", "zero")
    if kind == "zero":
        out = np.zeros((horizon, p))
    elif kind == "constant":
        val = np.asarray(spec["value"], dtype=float).reshape(-1)
        if val.shape[0] != p:
            raise DimensionMismatch(f"constant disturbance must have length {p}")
        out = np.tile(val, (horizon, 1))
    elif kind == "sinusoid":
        amp = np.broadcast_to(np.asarray(spec.get("amplitude", delta_max / math.sqrt(p)),
                                         dtype=float), (p,))
        w = float(spec.get("frequency", 0.5))
        ph = np.broadcast_to(np.asarray(spec.get("phase", 0.0), dtype=float), (p,))
        k = np.arange(horizon)[:, None]
        out = amp * np.sin(w * k + ph)
    elif kind == "uniform_ball":
        rng = np.random.default_rng(spec.get("seed", seed))
        g = rng.standard_normal((horizon, p))
        nrm = np.linalg.norm(g, axis=1, keepdims=True)
        nrm[nrm == 0.0] = 1.0
        radius = delta_max * rng.random((horizon, 1)) ** (1.0 / p)
        out = g / nrm * radius
    elif kind == "sequence":
        out = np.asarray(spec["values"], dtype=float).reshape(-1, p) if p else np.zeros((0, 0))
        if out.shape[0] < horizon:
            raise DimensionMismatch(f"sequence has {out.shape[0]} samples, horizon is {horizon}")
        out = out[:horizon]
    else:
        raise ValueError(f"unknown disturbance kind {kind!r}")
    norms = np.linalg.norm(out, axis=1) if horizon else np.zeros(0)
    if np.any(norms > delta_max * (1.0 + NORM_SLACK) + NORM_SLACK):
        k = int(np.argmax(norms))
        raise DisturbanceTooLarge(f"||delta({k})|| = {norms[k]:.6g} exceeds delta_max = {delta_max:.6g}")
    return np.ascontiguousarray(out)


# -- trajectories -------------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    states: np.ndarray         # (tau + N + 1, n), x(-tau) .. x(N)
    sliding: np.ndarray        # (N + 1, m), s(0) .. s(N)
    controls: np.ndarray       # (N, m); equivalent control in reduced mode
    disturbances: np.ndarray   # (N, p)
    lyapunov: Optional[np.ndarray]
    mode: str
    tau: int
    deformed: object = None

    @property
    def horizon(self) -> int:
        return self.disturbances.shape[0]

    @property
    def lyapunov_informative_only(self) -> bool:
        """Closed-loop values of V are reported but carry no decrease guarantee."""
        return self.mode == CLOSED

    def x(self, k: int) -> np.ndarray:
        return self.states[self.tau + k]

    def sliding_norms(self) -> np.ndarray:
        return np.linalg.norm(self.sliding, axis=1)

    def to_csv(self, path) -> None:
        """Columns ``k, x_i, s_i, u_i, delta_i, V, norm_s`` for ``k = 0..N``."""
        n, m = self.states.shape[1], self.sliding.shape[1]
        p = self.disturbances.shape[1]
        header = (["k"] + [f"x_{i + 1}" for i in range(n)] + [f"s_{i + 1}" for i in range(m)]
                  + [f"u_{i + 1}" for i in range(m)] + [f"delta_{i + 1}" for i in range(p)]
                  + ["V", "norm_s"])
        fmt = "{:.15g}".format
        norms = self.sliding_norms()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(self.horizon + 1):
                row = [str(k)] + [fmt(v) for v in self.x(k)] + [fmt(v) for v in self.sliding[k]]
                if k < self.horizon:
                    row += [fmt(v) for v in self.controls[k]] + [fmt(v) for v in self.disturbances[k]]
                else:
                    row += [""] * (m + p)
                row.append(fmt(self.lyapunov[k]) if self.lyapunov is not None else "")
                row.append(fmt(norms[k]))
                w.writerow(row)


def simulate(dfm, horizon: int, initial_history, mode: str = CLOSED, design=None,
             disturbance=None, cert=None, seed=None, k_gain=None, rho=None, phi=None) -> Trajectory:
    """Roll out ``horizon`` steps of the closed loop or the reduced dynamics.

    Closed-loop mode needs ``K, rho, phi``, taken from ``design`` (a
    :class:`~rbsmc.smc.DesignState`) unless given explicitly.  With ``cert``
    the functional ``V_k`` is evaluated for ``k = 0..N``.
    """
    sys = dfm.system
    if isinstance(horizon, bool) or int(horizon) != horizon or horizon < 1:
        raise ValueError("horizon must be a positive integer")
    horizon = int(horizon)
    hist = _history(initial_history, sys.tau, sys.n)[: sys.tau + 1][::-1]
    hist = np.ascontiguousarray(hist)
    deltas = make_disturbance(disturbance, horizon, sys.p, sys.delta_max, seed)
    if mode == CLOSED:
        if design is not None:
            k_gain = design.k if k_gain is None else k_gain
            rho = design.rho if rho is None else rho
            phi = design.phi if phi is None else phi
        if k_gain is None or rho is None or phi is None:
            raise ValueError("closed-loop simulation needs K, rho and phi")
        if not phi > 0:
            raise NonpositivePhi(f"phi must be positive, got {phi!r}")
        k_gain = np.ascontiguousarray(np.atleast_2d(np.asarray(k_gain, dtype=float)))
        a_cl = np.ascontiguousarray(dfm.a_p - dfm.b_p @ k_gain)
        states, controls = _rk.rollout_closed(a_cl, np.ascontiguousarray(dfm.a_dp),
                                              np.ascontiguousarray(dfm.b_p), sys.c,
                                              sys.d, k_gain, float(rho), float(phi), hist, deltas)
    elif mode == REDUCED:
        states = _rk.rollout_reduced(np.ascontiguousarray(dfm.a_bar),
                                     np.ascontiguousarray(dfm.a_dbar),
                                     np.ascontiguousarray(dfm.d_bar), hist, deltas)
        tau = sys.tau
        drift = (states[tau:tau + horizon] @ dfm.a_p.T + states[:horizon] @ dfm.a_dp.T
                 + deltas @ sys.d.T)
        controls = -lu_solve(dfm.cb_p, sys.c @ drift.T).T
    else:
        raise ValueError(f"mode must be {CLOSED!r} or {REDUCED!r}, got {mode!r}")
    sliding = states[sys.tau:] @ sys.c.T
    lyap = None
    if cert is not None:
        lyap = _rk.lyapunov_values(np.ascontiguousarray(cert.x), np.ascontiguousarray(cert.y),
                                   states, sys.tau)
    return Trajectory(states, sliding, controls, deltas, lyap, mode, sys.tau, dfm)


@dataclass(frozen=True)
class DeltaVReport:
    max_violation: float
    telescoping_residual: float
    max_violation_mu0: float


def delta_v_check(traj: Trajectory, cert) -> DeltaVReport:
    """Compare ``V_{k+1} - V_k`` with its quadratic form and with the dissipation bound.

    ``max_violation`` is the largest ``dV_k + mu ||x(k)||^2 - gamma^2 ||delta(k)||^2``;
    ``max_violation_mu0`` uses ``mu0`` and omits the disturbance term.
    """
    if traj.mode != REDUCED:
        raise ModeMismatch("the dissipation inequality is only established for the reduced dynamics")
    if traj.lyapunov is None:
        raise ValueError("trajectory carries no Lyapunov values; simulate with a certificate")
    dfm, tau, n = traj.deformed, traj.tau, traj.states.shape[1]
    f = np.hstack([dfm.a_bar, dfm.a_dbar, dfm.d_bar])
    x_mat, y_mat = cert.x, cert.y
    g2 = cert.gamma ** 2
    worst = worst0 = -math.inf
    tele = 0.0
    for k in range(traj.horizon):
        xk, xd, dk = traj.x(k), traj.x(k - tau), traj.disturbances[k]
        xi = np.concatenate([xk, xd, dk])
        fx = f @ xi
        dv = traj.lyapunov[k + 1] - traj.lyapunov[k]
        form = fx @ x_mat @ fx + xk @ (y_mat - x_mat) @ xk - xd @ y_mat @ xd
        tele = max(tele, abs(dv - form))
        worst = max(worst, dv + cert.mu * (xk @ xk) - g2 * (dk @ dk))
        worst0 = max(worst0, dv + cert.mu0 * (xk @ xk))
    if traj.horizon == 0:
        worst = worst0 = 0.0
    return DeltaVReport(float(worst), float(tele), float(worst0))


def l2_slack(traj: Trajectory, cert) -> np.ndarray:
    """Slack of ``sum_{k<N} ||x(k)||^2 <= (V_0 + gamma^2 sum_{k<N} ||delta(k)||^2) / mu`` per N."""
    if traj.lyapunov is None:
        raise ValueError("trajectory carries no Lyapunov values; simulate with a certificate")
    xs = traj.states[traj.tau:traj.tau + traj.horizon]
    lhs = np.cumsum(np.sum(xs * xs, axis=1))
    dist = np.cumsum(np.sum(traj.disturbances ** 2, axis=1))
    rhs = (traj.lyapunov[0] + cert.gamma ** 2 * dist) / cert.mu
    return rhs - lhs


def summary(traj: Trajectory, phi: Optional[float] = None, cert=None) -> dict:
    norms = traj.sliding_norms()
    out = {"mode": traj.mode, "horizon": traj.horizon, "tau": traj.tau,
           "max_norm_x": float(np.max(np.linalg.norm(traj.states, axis=1))),
           "final_norm_x": float(np.linalg.norm(traj.x(traj.horizon)))}
    if phi is not None:
        inside = np.nonzero(norms <= phi)[0]
        entry = int(inside[0]) if inside.size else None
        out["phi"] = float(phi)
        out["reaching_step"] = entry
        out["max_norm_s_after_entry"] = float(np.max(norms[entry:])) if entry is not None else None
    if cert is not None and traj.lyapunov is not None:
        out["lyapunov_informative_only"] = traj.lyapunov_informative_only
        if traj.mode == REDUCED and cert.mu > 0:
            out["l2_bound_min_slack"] = float(np.min(l2_slack(traj, cert)))
            rep = delta_v_check(traj, cert)
            out["delta_v_max_violation"] = rep.max_violation
            out["telescoping_residual"] = rep.telescoping_residual
    return out
