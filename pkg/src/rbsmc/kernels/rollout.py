"""Time-stepping loops for the delayed closed-loop and reduced recursions.

``states`` rows are ``x(-tau), ..., x(0), x(1), ..., x(N)``; row ``tau + k`` is ``x(k)``.
"""
import numpy as np

from .._accel import kernel


@kernel
def saturate(v, phi):
    out = np.empty_like(v)
    for i in range(v.shape[0]):
        r = v[i] / phi
        if r > 1.0:
            out[i] = 1.0
        elif r < -1.0:
            out[i] = -1.0
        else:
            out[i] = r
    return out


@kernel
def rollout_closed(a_cl, a_dp, b_p, c, d, k_gain, rho, phi, history, deltas):
    """x(k+1) = (A_P - B_P K) x(k) + A_dP x(k-tau) - rho B_P sat(Cx(k)/phi) + D delta(k)."""
    tau = history.shape[0] - 1
    steps = deltas.shape[0]
    n = history.shape[1]
    m = b_p.shape[1]
    states = np.empty((tau + 1 + steps, n))
    states[: tau + 1] = history
    controls = np.empty((steps, m))
    for k in range(steps):
        xk = states[tau + k]
        xd = states[k]
        sat = saturate(c @ xk, phi)
        controls[k] = -(k_gain @ xk) - rho * sat
        states[tau + k + 1] = a_cl @ xk + a_dp @ xd - rho * (b_p @ sat) + d @ deltas[k]
    return states, controls


@kernel
def rollout_reduced(a_bar, a_dbar, d_bar, history, deltas):
    """x(k+1) = A_bar x(k) + A_dbar x(k-tau) + D_bar delta(k)."""
    tau = history.shape[0] - 1
    steps = deltas.shape[0]
    n = history.shape[1]
    states = np.empty((tau + 1 + steps, n))
    states[: tau + 1] = history
    for k in range(steps):
        states[tau + k + 1] = a_bar @ states[tau + k] + a_dbar @ states[k] + d_bar @ deltas[k]
    return states


@kernel
def lyapunov_values(x_mat, y_mat, states, tau):
    """V_k = x(k)' X x(k) + sum_{i=1..tau} x(k-i)' Y x(k-i) for k = 0..N."""
    count = states.shape[0] - tau
    out = np.empty(count)
    for k in range(count):
        xk = states[tau + k]
        v = xk @ (x_mat @ xk)
        for i in range(1, tau + 1):
            xi = states[tau + k - i]
            v += xi @ (y_mat @ xi)
        out[k] = v
    return out
