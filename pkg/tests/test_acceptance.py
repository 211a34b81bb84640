"""Acceptance criteria 1-11, each at its stated tolerance.

Every test prints exactly one ``CRITERION n: PASS|FAIL`` line listing its
sub-checks; the lines are repeated in the terminal summary.
"""
import cmath
import math

import numpy as np
import pytest

from rbsmc import lmi, rota_baxter as rb, simulator as sim, smc
from rbsmc.config import example_path, load_config
from rbsmc.spectral import build_companion, char_poly_residual, delayed_spectrum, is_schur_stable

from conftest import ACCEPTANCE_LINES, Q_REP, YT_REP, GAMMA_REP, match_roots, random_admissible


def report(number, checks):
    """``checks`` is a list of ``(label, ok, detail)``; prints one line and asserts."""
    ok = all(c[1] for c in checks)
    parts = "; ".join(f"{lab}={'ok' if good else 'FAIL'} ({det})" for lab, good, det in checks)
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {parts}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def within(value, target, tol):
    return abs(value - target) <= tol


@pytest.fixture(scope="module")
def cfg():
    return load_config(example_path("nondegenerate"))


@pytest.fixture(scope="module")
def dfm(cfg):
    return smc.deform(cfg.system.build(), cfg.operator_obj())


@pytest.fixture(scope="module")
def prob(cfg, dfm):
    return lmi.LmiProblem.from_deformed(dfm, epsilon_margin=cfg.lmi.epsilon_margin,
                                        q_lower=cfg.lmi.q_lower, q_upper=cfg.lmi.q_upper)


@pytest.fixture(scope="module")
def cert(cfg, prob):
    return lmi.minimize_gamma(prob, cfg.lmi.gamma_hi)


def test_criterion_01_deformation(dfm):
    err = lambda got, want: float(np.abs(np.asarray(got) - np.asarray(want)).max())
    e_pi = err(dfm.pi, [[0.5, -0.25], [-1.0, 0.5]])
    e_cb = err(dfm.cb_p, [[-0.5]])
    e_a = err(dfm.a_bar, [[-0.225, 0.0875], [0.45, -0.175]])
    e_d = err(dfm.d_bar, [[0.025], [-0.05]])
    report(1, [("Pi", e_pi <= 1e-12, f"err {e_pi:.1e}"), ("CB_P", e_cb <= 1e-12, f"err {e_cb:.1e}"),
               ("A_bar", e_a <= 1e-12, f"err {e_a:.1e}"), ("D_bar", e_d <= 1e-12, f"err {e_d:.1e}")])


def test_criterion_02_spectra(cfg, dfm):
    from rbsmc.linalg import eigenvalues, spectral_norm
    k = np.asarray(cfg.design.k)
    e1 = match_roots(eigenvalues(dfm.a_bar), [0.0, -0.4])
    acl = smc.closed_loop_matrix(dfm, k)
    e2 = match_roots(eigenvalues(acl), [0.039, -0.389])
    s = spectral_norm(acl)
    report(2, [("eig(A_bar)", e1 <= 1e-9, f"err {e1:.1e}"),
               ("eig(A_P-B_PK)", e2 <= 2e-3, f"err {e2:.1e}"),
               ("sigma_max", within(s, 0.654, 0.005), f"{s:.5f}")])


def test_criterion_03_reaching(cfg, dfm):
    d = cfg.design
    k = np.asarray(d.k)
    rr = smc.check_r0(dfm, k, d.r0, d.r_d0, d.rho_max)
    rep = smc.reaching_report(dfm, k, d.r0, d.r_d0, d.phi, d.rho, d.s0_norm)
    report(3, [("alpha0", within(rep.alpha0, 0.375, 0.01), f"{rep.alpha0:.5f}"),
               ("required_r0", within(rr.required_r0, 0.509, 0.01), f"{rr.required_r0:.5f}"),
               ("beta", rep.beta == 0.2, f"{rep.beta!r}"),
               ("s_star", within(rep.s_star, 0.469, 0.005), f"{rep.s_star:.5f}"),
               ("T_star", rep.t_star == 3, f"{rep.t_star}")])


def test_criterion_04_lmi(prob, cert):
    val = lmi.validate_certificate(prob, cert)
    report(4, [("gamma<=0.30", cert.gamma <= 0.30, f"{cert.gamma:.6f}"),
               ("mu>0.05", cert.mu > 0.05, f"{cert.mu:.3e}"),
               ("validation<=-5e-7", val <= -5e-7, f"{val:.3e}")])


def test_criterion_05_reported_fixture(cfg, dfm, prob):
    fx = lmi.certificate_from(prob, Q_REP, YT_REP, GAMMA_REP)
    v0, r = lmi.v0_and_r(fx, cfg.design.x_history)
    band = smc.band_invariance_check(dfm, np.asarray(cfg.design.k), cfg.design.rho,
                                     cfg.design.phi, r)
    lam = fx.lambda_min_x
    report(5, [("lambda_min(X)", within(lam, 0.294, 0.01), f"{lam:.4f}"),
               ("V0", within(v0, 0.193, 0.01), f"{v0:.4f}"),
               ("r", within(r, 0.810, 0.02), f"{r:.4f}"),
               ("gamma/sqrt(mu)", within(fx.effective_gain, 0.693, 0.05),
                f"{fx.effective_gain:.4f}"),
               ("band LHS", within(band.lhs, 0.107, 0.02), f"{band.lhs:.4f}")])


def test_criterion_06_degenerate():
    c = load_config(example_path("degenerate"))
    d = smc.deform(c.system.build(), c.operator_obj())
    nrm = float(np.sqrt(np.sum(d.pi ** 2)))
    report(6, [("||Pi||_F<=1e-12", nrm <= 1e-12, f"{nrm:.1e}")])


def test_criterion_07_algebra():
    checks = []
    for name, p in (("scalar", rb.scalar_scaling(0.5)), ("triangular", rb.triangular_projection())):
        res = rb.property_suite(p, samples=200, triples=100, dims=(2, 3, 4, 5), seed=0)
        c = res["checks"]
        checks.append((f"{name} rb", c["rb_identity"]["ok"],
                       f"max ratio {c['rb_identity']['max_ratio']:.1e}"))
        checks.append((f"{name} jacobi", c["jacobi"]["ok"],
                       f"max ratio {c['jacobi']['max_ratio']:.1e}"))
    peirce = rb.rb_residual(rb.peirce_corner(), np.eye(2), np.eye(2))
    checks.append(("peirce rb(I,I)=1", peirce == 1.0, f"{peirce!r}"))
    e = rb.unit
    w = rb.group3_witness(rb.triangular_projection(), e(2, 1, 2), e(2, 2, 1), e(2, 1, 1))
    exact = (np.array_equal(w.g1, e(2, 2, 2) - e(2, 1, 1))
             and np.array_equal(w.g2, e(2, 1, 1) - e(2, 2, 2))
             and not w.h.any() and not w.sum.any())
    checks.append(("group3 witness", exact, "entrywise exact"))
    report(7, checks)


def test_criterion_08_structural():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n + 1))
        sys_, p = random_admissible(rng, n, m, lam=float(rng.uniform(0.2, 2.0)))
        d = smc.deform(sys_, p)
        c = sys_.c
        for mat in (c @ d.pi, d.pi @ d.pi - d.pi, d.pi @ d.b_p, c @ d.a_bar, c @ d.a_dbar):
            worst = max(worst, float(np.abs(mat).max()))
    report(8, [("50 systems", worst <= 1e-10, f"max residual {worst:.1e}")])


def _cubic_roots(a, b):
    """Roots of z^3 - a z^2 - b by Cardano's formula."""
    p = -a * a / 3.0
    q = -2.0 * a ** 3 / 27.0 - b
    disc = cmath.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    u3 = -q / 2.0 + disc
    if abs(u3) < 1e-14:
        u3 = -q / 2.0 - disc
    if abs(u3) < 1e-30:
        return [a / 3.0] * 3
    u = u3 ** (1.0 / 3.0)
    omega = cmath.exp(2j * math.pi / 3.0)
    out = []
    for j in range(3):
        uj = u * omega ** j
        out.append(uj - p / (3.0 * uj) + a / 3.0)
    return out


def test_criterion_09_companion():
    rng = np.random.default_rng(99)
    worst_ratio = 0.0
    for _ in range(30):
        n = int(rng.integers(1, 4))
        tau = int(rng.integers(1, 4))
        form = build_companion(rng.standard_normal((n, n)) * 0.5,
                               rng.standard_normal((n, n)) * 0.5, tau)
        scale = max(1.0, np.abs(form.f).sum(axis=1).max()) ** (n * (tau + 1))
        for z in delayed_spectrum(form):
            worst_ratio = max(worst_ratio, char_poly_residual(form, z) / scale)
    closed = 0.0
    for _ in range(20):
        a, b = rng.standard_normal(2)
        disc = cmath.sqrt(a * a + 4 * b)
        quad = delayed_spectrum(build_companion([[a]], [[b]], 1))
        closed = max(closed, match_roots(quad, [(a + disc) / 2, (a - disc) / 2]))
        cub = delayed_spectrum(build_companion([[a]], [[b]], 2))
        closed = max(closed, match_roots(cub, _cubic_roots(a, b)))
    report(9, [("residual<=1e-6*scale", worst_ratio <= 1e-6, f"max ratio {worst_ratio:.1e}"),
               ("n=1 closed form", closed <= 1e-8, f"max err {closed:.1e}")])


def test_criterion_10_simulation(cfg, dfm, cert):
    worst_dv = -math.inf
    for hist in ([[0.5, -1.0], [0.0, 0.0]], [[1.0, 0.3], [-0.4, 0.2]], [[0.0, 2.0], [1.0, 1.0]]):
        traj = sim.simulate(dfm, 40, hist, mode=sim.REDUCED, cert=cert)
        worst_dv = max(worst_dv, sim.delta_v_check(traj, cert).max_violation_mu0)
    worst_l2 = math.inf
    for seed in range(10):
        traj = sim.simulate(dfm, 60, np.zeros((2, 2)), mode=sim.REDUCED, cert=cert,
                            disturbance={"kind": "uniform_ball"}, seed=seed)
        worst_l2 = min(worst_l2, float(sim.l2_slack(traj, cert).min()))
    d = cfg.design
    traj = sim.simulate(dfm, 10, [[1.5, 0.0], [0.0, 0.0]], k_gain=d.k, rho=d.rho, phi=d.phi)
    norms = traj.sliding_norms()
    inside = np.nonzero(norms <= d.phi)[0]
    entry = int(inside[0]) if inside.size else None
    report(10, [("dV<=-mu0|x|^2+1e-8", worst_dv <= 1e-8, f"max {worst_dv:.1e}"),
                ("L2 bound x10", worst_l2 >= 0.0, f"min slack {worst_l2:.3e}"),
                ("band entry<=3", entry is not None and entry <= 3,
                 f"||s(0)||={norms[0]:.2f}, entry k={entry}")])


def test_criterion_11_schur_bmi():
    rng = np.random.default_rng(7)
    worst_schur = worst_cong = 0.0
    agree = True
    for _ in range(20):
        n = int(rng.integers(1, 4))
        p = int(rng.integers(1, 3))
        f = rng.standard_normal((n, 2 * n + p))
        f *= 0.6 / np.linalg.norm(f, 2)
        prob = lmi.LmiProblem(f[:, :n], f[:, n:2 * n], f[:, 2 * n:])
        g = rng.standard_normal((n, n)) * 0.1
        x = np.eye(n) + g @ g.T
        y = 0.5 * x + 0.02 * np.eye(n)
        gamma = 1.0 + rng.uniform(0, 1)
        bmi = lmi.assemble_bmi(prob, x, y, gamma)
        schur = lmi.assemble_schur(prob, x, y, gamma)
        k = 2 * n + p
        s11, s12, s22 = schur[:k, :k], schur[:k, k:], schur[k:, k:]
        complement = s11 - s12 @ np.linalg.solve(s22, s12.T)
        worst_schur = max(worst_schur, float(np.abs(complement - bmi).max()))
        feasible_bmi = np.linalg.eigvalsh(bmi).max() < 0
        feasible_schur = np.linalg.eigvalsh(schur).max() < 0
        agree &= feasible_bmi and feasible_schur
        q = np.linalg.inv(x)
        sig = lmi.congruence(prob, q)
        lin = lmi.assemble_linear_lmi(prob, q, q @ y @ q, gamma * gamma)
        worst_cong = max(worst_cong, float(np.abs(sig @ schur @ sig - lin).max()))
    report(11, [("both forms negative definite", agree, "20 points"),
                ("Schur complement = BMI", worst_schur <= 1e-9, f"max err {worst_schur:.1e}"),
                ("congruence", worst_cong <= 1e-9, f"max err {worst_cong:.1e}")])
