import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thermospec.potential import JacobianPotential, Potential, PotentialFamily
from thermospec.sft import validate
from thermospec.systems import golden_mean_system, system_a, system_b

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fam_a():
    return system_a()


@pytest.fixture(scope="session")
def fam_b():
    return system_b()


@pytest.fixture(scope="session")
def fam_golden():
    return golden_mean_system()


def random_irreducible(rng, p):
    """Random irreducible 0/1 matrix: a Hamiltonian cycle plus random extra edges."""
    perm = rng.permutation(p)
    A = (rng.random((p, p)) < 0.4).astype(int)
    A[perm, np.roll(perm, -1)] = 1
    return validate(A)


def random_family(rng, sft=None, depth=None):
    if sft is None:
        sft = random_irreducible(rng, int(rng.integers(2, 5)))
    if depth is None:
        depth = int(rng.integers(1, 3))
    n = len(Potential.constant(sft, 0.0, depth).values)
    g = Potential(sft, depth, rng.normal(size=n))
    jac = JacobianPotential(sft, depth, rng.uniform(0.2, 2.0, size=n))
    return PotentialFamily.build(g, jac)
