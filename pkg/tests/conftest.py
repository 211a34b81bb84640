import numpy as np
import pytest

from rbsmc import lmi
from rbsmc.rota_baxter import scalar_scaling
from rbsmc.smc import DelayedSystem, deform

A = np.array([[0.8, 0.1], [-0.2, 0.9]])
A_D = 0.05 * np.eye(2)
B = np.array([[0.5], [1.0]])
C = np.array([[1.0, 0.5]])
D = np.array([[0.1], [0.1]])
K = np.array([[1.0, 0.5]])

# reported certificate, used as a regression fixture
Q_REP = np.array([[2.95, 0.42], [0.42, 3.18]])
YT_REP = np.diag([0.32, 0.37])
GAMMA_REP = 0.24


def worked_system(tau=1, delta_max=0.1):
    return DelayedSystem(A, A_D, B, C, D, tau, delta_max)


def match_roots(got, want):
    """Largest distance after greedy nearest-neighbour pairing."""
    got = list(np.asarray(got, dtype=complex))
    worst = 0.0
    for w in np.asarray(want, dtype=complex):
        i = int(np.argmin([abs(g - w) for g in got]))
        worst = max(worst, abs(got.pop(i) - w))
    return worst


def random_admissible(rng, n, m, lam=0.5):
    """Random plant whose ``C B_P`` is comfortably invertible."""
    while True:
        b = rng.standard_normal((n, m))
        c = rng.standard_normal((m, n))
        if np.linalg.cond(c @ b) < 50:
            break
    return DelayedSystem(rng.standard_normal((n, n)), rng.standard_normal((n, n)), b, c,
                         rng.standard_normal((n, m)), 1, 0.1), scalar_scaling(lam)


@pytest.fixture(scope="session")
def worked():
    return worked_system()


@pytest.fixture(scope="session")
def deformed(worked):
    return deform(worked, scalar_scaling(0.5))


@pytest.fixture(scope="session")
def problem(deformed):
    return lmi.LmiProblem.from_deformed(deformed)


@pytest.fixture(scope="session")
def reported_cert(problem):
    return lmi.certificate_from(problem, Q_REP, YT_REP, GAMMA_REP)


@pytest.fixture(scope="session")
def solved_cert(problem):
    return lmi.minimize_gamma(problem, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
