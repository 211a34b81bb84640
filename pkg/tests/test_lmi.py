import math

import numpy as np
import pytest

from rbsmc import lmi
from rbsmc.errors import DimensionMismatch, HistoryLengthMismatch, Infeasible

from conftest import Q_REP, YT_REP


def zero_problem(n=2, p=1):
    return lmi.LmiProblem(np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, p)))


def eig_max(m):
    return np.linalg.eigvalsh(m).max()


def test_linear_lmi_trivial():
    prob = zero_problem()
    got = lmi.assemble_linear_lmi(prob, np.eye(2), np.eye(2), 1.0)
    want = np.diag([0, 0, -1, -1, -1, -1, -1.0])
    assert np.array_equal(got, want)
    assert prob.block_layout == (2, 2, 1, 2)


def test_bmi_trivial():
    got = lmi.assemble_bmi(zero_problem(), np.eye(2), np.eye(2), 1.0)
    assert np.array_equal(got, np.diag([0, 0, -1, -1, -1.0]))


def test_fixture_lmi_negative(problem):
    m = lmi.assemble_linear_lmi(problem, Q_REP, YT_REP, 0.24 ** 2)
    assert np.allclose(m, m.T)
    assert eig_max(m) <= -1e-6
    assert eig_max(lmi.assemble_schur(problem, np.linalg.inv(Q_REP),
                                      np.linalg.inv(Q_REP) @ YT_REP @ np.linalg.inv(Q_REP),
                                      0.24)) < 0


def test_fixture_certificate_regression(reported_cert):
    # values recomputed from the reported (Q, Y_tilde, gamma)
    assert reported_cert.lambda_min_x == pytest.approx(0.2857, abs=1e-4)
    assert reported_cert.mu == pytest.approx(0.02830, abs=1e-4)
    assert reported_cert.mu == pytest.approx(np.linalg.eigvalsh(-reported_cert.m_full).min())


def test_congruence_identity(problem, rng):
    for _ in range(5):
        g = rng.standard_normal((2, 2))
        q = g @ g.T + 0.5 * np.eye(2)
        h = rng.standard_normal((2, 2))
        yt = h @ h.T
        x = np.linalg.inv(q)
        y = x @ yt @ x
        sig = lmi.congruence(problem, q)
        lhs = sig @ lmi.assemble_schur(problem, x, y, 0.7) @ sig
        assert np.abs(lhs - lmi.assemble_linear_lmi(problem, q, yt, 0.49)).max() <= 1e-12


def test_dimension_checks(problem):
    with pytest.raises(DimensionMismatch):
        lmi.assemble_linear_lmi(problem, np.eye(3), np.eye(3), 1.0)
    with pytest.raises(DimensionMismatch):
        lmi.LmiProblem(np.eye(2), np.eye(3), np.zeros((2, 1)))


def test_solve_feasibility_at_reported_gamma(problem):
    q, yt = lmi.solve_feasibility(problem, 0.24 ** 2)
    assert np.linalg.eigvalsh(q).min() > 0
    cert = lmi.certificate_from(problem, q, yt, 0.24)
    assert lmi.validate_certificate(problem, cert) <= -problem.epsilon_margin / 2


def test_unstable_infeasible():
    prob = lmi.LmiProblem(2 * np.eye(2), np.zeros((2, 2)), np.zeros((2, 1)))
    with pytest.raises(Infeasible):
        lmi.solve_feasibility(prob, 1.0)
    with pytest.raises(Infeasible):
        lmi.minimize_gamma(prob)


def test_no_disturbance_channel():
    prob = lmi.LmiProblem(np.diag([0.5, -0.3]), 0.1 * np.eye(2), np.zeros((2, 1)))
    cert = lmi.minimize_gamma(prob)
    assert cert.gamma ** 2 <= 2e-3
    lo, hi = cert.extra["gamma_sq_bracket"]
    assert hi - lo <= 1e-3 * hi


def test_minimize_gamma_worked(solved_cert, problem):
    assert solved_cert.gamma <= 0.30
    assert solved_cert.mu > 0
    assert lmi.validate_certificate(problem, solved_cert) <= -5e-7
    assert solved_cert.effective_gain == pytest.approx(solved_cert.gamma / math.sqrt(solved_cert.mu))


def test_minimize_gamma_against_cvxpy(problem, solved_cert):
    cp = pytest.importorskip("cvxpy")
    n, p = problem.n, problem.p
    q = cp.Variable((n, n), symmetric=True)
    yt = cp.Variable((n, n), symmetric=True)
    g2 = cp.Variable()
    a, ad, d = problem.a_bar, problem.a_dbar, problem.d_bar
    z = np.zeros
    m = cp.bmat([
        [-q + yt, z((n, n)), z((n, p)), q @ a.T],
        [z((n, n)), -yt, z((n, p)), q @ ad.T],
        [z((p, n)), z((p, n)), -g2 * np.eye(p), d.T],
        [a @ q, ad @ q, d, -q],
    ])
    eps = problem.epsilon_margin
    k = 3 * n + p
    cons = [0.5 * (m + m.T) << -eps * np.eye(k), q >> eps * np.eye(n), yt >> eps * np.eye(n),
            q << (problem.q_upper - eps) * np.eye(n)]
    cp.Problem(cp.Minimize(g2), cons).solve(solver="CLARABEL", tol_gap_abs=1e-12,
                                            tol_gap_rel=1e-12, tol_feas=1e-12)
    gamma_ref = math.sqrt(g2.value)
    assert solved_cert.gamma == pytest.approx(gamma_ref, rel=2e-3)


def test_v0_and_r(reported_cert):
    assert lmi.v0_and_r(reported_cert, np.zeros((2, 2))) == (0.0, 0.0)
    h = np.array([[0.5, 0.5], [0.3, -0.1]])
    v, r = lmi.v0_and_r(reported_cert, h)
    v2, r2 = lmi.v0_and_r(reported_cert, 2 * h)
    assert v2 == pytest.approx(4 * v, rel=1e-14)
    want = h[0] @ reported_cert.x @ h[0] + h[1] @ reported_cert.y @ h[1]
    assert v == pytest.approx(want, rel=1e-14)
    assert r == pytest.approx(math.sqrt(v / np.linalg.eigvalsh(reported_cert.x).min()))
    with pytest.raises(HistoryLengthMismatch):
        lmi.v0_and_r(reported_cert, np.zeros((3, 2)))


def test_feasibility_sufficient():
    assert lmi.feasibility_sufficient(zero_problem(), 0.3, 0.1).ok
    prob = lmi.LmiProblem(np.array([[0.6]]), np.zeros((1, 1)), np.zeros((1, 1)))
    rep = lmi.feasibility_sufficient(prob, 0.5, 1.0)
    assert rep.sigma_max_f == pytest.approx(0.6) and rep.ok
    assert not lmi.feasibility_sufficient(prob, 0.5, 0.5).ok
    with pytest.raises(ValueError):
        lmi.feasibility_sufficient(prob, 1.0, 1.0)


def test_certificate_round_trip(problem, solved_cert):
    d = solved_cert.to_dict()
    again = lmi.StabilityCertificate.from_dict(d, problem)
    assert np.array_equal(again.q, solved_cert.q) and again.gamma == solved_cert.gamma
    assert again.mu == pytest.approx(solved_cert.mu, rel=1e-12, abs=1e-15)
    bare = lmi.StabilityCertificate.from_dict(d)
    assert bare.mu == solved_cert.mu


def test_problem_band_validation():
    with pytest.raises(ValueError):
        lmi.LmiProblem(np.eye(1), np.eye(1), np.eye(1), q_lower=2.0)
