import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_irreducible
from thermospec.errors import NotZeroPressure
from thermospec.potential import Potential, birkhoff_sum
from thermospec.sft import cylinders, full_shift, golden_mean, validate
from thermospec.temperature import solve_T
from thermospec.transfer import (asymptotic_variance, bernoulli, conformality_check,
                                 cylinder_masses, cylinder_measure, entropy, equilibrium_state,
                                 free_energy, gibbs_certificate, gibbs_ratios, integrate,
                                 markov_measure, perron, perron_of, pressure,
                                 random_markov_measure, weighted_matrix)

GOLDEN = (1 + np.sqrt(5)) / 2
LOG2 = np.log(2)


def random_potential(rng, sft, depth):
    return Potential(sft, depth, rng.normal(size=len(cylinders(sft, depth))))


def brute_partition(sft, pot, n):
    """``log sum_{|w| = n} exp(S phi(w))`` by enumeration, windows inside ``w``."""
    total = 0.0
    for w in cylinders(sft, n):
        total += np.exp(birkhoff_sum(pot, w, n - pot.depth + 1))
    return np.log(total)


def test_golden_mean_topological_pressure():
    assert pressure(golden_mean(), Potential.constant(golden_mean(), 0.0)) == \
        pytest.approx(np.log(GOLDEN), abs=1e-14)


@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(1, 3))
def test_pressure_matches_dense_eigensolver(seed, p, depth):
    rng = np.random.default_rng(seed)
    sft = random_irreducible(rng, p)
    pot = random_potential(rng, sft, depth)
    lam = np.max(np.abs(np.linalg.eigvals(weighted_matrix(sft, pot))))
    assert pressure(sft, pot) == pytest.approx(np.log(lam), abs=1e-11)


def test_pressure_matches_partition_function_growth():
    rng = np.random.default_rng(5)
    sft = golden_mean()
    pot = random_potential(rng, sft, 2)
    growth = brute_partition(sft, pot, 15) - brute_partition(sft, pot, 14)
    assert pressure(sft, pot) == pytest.approx(growth, abs=1e-4)


def test_perron_handles_periodic_matrix():
    data = perron(np.array([[0.0, 2.0], [0.5, 0.0]]))
    assert data.lambda_ == pytest.approx(1.0, abs=1e-13)
    assert data.right.max() == 1.0
    assert data.left @ data.right == pytest.approx(1.0)


def test_perron_large_values_do_not_overflow():
    sft = full_shift(2)
    data = perron_of(sft, Potential.per_symbol(sft, [800.0, 801.0]))
    assert data.log_lambda == pytest.approx(801 + np.log(1 + np.exp(-1)), abs=1e-12)


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_equilibrium_state_attains_pressure(seed, depth):
    rng = np.random.default_rng(seed)
    sft = random_irreducible(rng, 3)
    pot = random_potential(rng, sft, depth)
    nu = equilibrium_state(sft, pot)
    assert np.allclose(nu.stochastic.sum(axis=1), 1.0, atol=1e-14)
    assert np.allclose(nu.stationary @ nu.stochastic, nu.stationary, atol=1e-13)
    assert free_energy(nu, pot) == pytest.approx(pressure(sft, pot), abs=1e-11)
    for _ in range(10):
        rho = random_markov_measure(sft, rng, nu.state_len, concentration=0.5)
        assert free_energy(rho, pot) <= pressure(sft, pot) + 1e-11


def test_entropy_of_bernoulli_measures():
    s = full_shift(2)
    assert entropy(bernoulli(s, [0.5, 0.5])) == pytest.approx(LOG2, abs=1e-15)
    p = np.array([0.6180, 0.3820])
    assert entropy(bernoulli(s, p)) == pytest.approx(-(p * np.log(p)).sum(), abs=1e-15)
    assert entropy(bernoulli(s, p)) == pytest.approx(0.6650347, abs=1e-7)


def test_integral_of_jacobian_under_golden_bernoulli():
    s = full_shift(2)
    p = np.array([1 / GOLDEN, 1 / GOLDEN**2])
    jac = Potential.per_symbol(s, [LOG2, 2 * LOG2])
    assert integrate(bernoulli(s, p), jac) == pytest.approx(LOG2 * (p[0] + 2 * p[1]), abs=1e-15)


def test_point_mass_chain_has_zero_entropy():
    s = full_shift(2)
    nu = markov_measure(s, [[1.0, 0.0], [1.0, 0.0]])
    assert entropy(nu) == 0.0
    assert cylinder_measure(nu, (0, 0, 0)) == 1.0
    with pytest.raises(ValueError):
        markov_measure(golden_mean(), [[0.5, 0.5], [0.5, 0.5]])


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_cylinder_masses_are_consistent(seed, n):
    rng = np.random.default_rng(seed)
    sft = random_irreducible(rng, 3)
    nu = equilibrium_state(sft, random_potential(rng, sft, 3))
    words, masses = cylinder_masses(nu, n)
    assert masses.sum() == pytest.approx(1.0, abs=1e-13)
    for w, m in zip(words, masses):
        assert cylinder_measure(nu, w) == pytest.approx(m, rel=1e-12, abs=1e-300)
        # additivity and shift invariance
        right = sum(cylinder_measure(nu, w + (a,)) for a in range(3))
        left = sum(cylinder_measure(nu, (a,) + w) for a in range(3))
        assert right == pytest.approx(m, rel=1e-11) and left == pytest.approx(m, rel=1e-11)


def test_inadmissible_cylinder_has_zero_mass():
    nu = equilibrium_state(golden_mean(), Potential.constant(golden_mean(), 0.0))
    assert cylinder_measure(nu, (1, 1)) == 0.0


def test_bernoulli_variance_is_plain_variance():
    s = full_shift(2)
    p = np.array([0.3, 0.7])
    f = Potential.per_symbol(s, [1.0, 3.0])
    nu = bernoulli(s, p)
    plain = p @ np.array([1, 9]) - (p @ np.array([1, 3])) ** 2
    for conv in ("symmetric", "one_sided"):
        assert asymptotic_variance(nu, f, f, conv) == pytest.approx(plain, abs=1e-13)


@given(st.integers(0, 10**6), st.integers(1, 2))
def test_symmetric_variance_is_second_derivative_of_pressure(seed, depth):
    rng = np.random.default_rng(seed)
    sft = random_irreducible(rng, 3)
    phi = random_potential(rng, sft, 2)
    f = random_potential(rng, sft, depth)
    nu = equilibrium_state(sft, phi)
    h = 1e-3
    P = [pressure(sft, phi + s * f) for s in (-2 * h, -h, 0.0, h, 2 * h)]
    fd = (-P[0] + 16 * P[1] - 30 * P[2] + 16 * P[3] - P[4]) / (12 * h * h)
    assert asymptotic_variance(nu, f, f) == pytest.approx(fd, abs=2e-6)


def test_variance_matches_truncated_correlation_series():
    rng = np.random.default_rng(11)
    sft = golden_mean()
    nu = equilibrium_state(sft, random_potential(rng, sft, 2))
    f = random_potential(rng, sft, 2)
    # chain on edges (a, b) built from the symbol-level transition matrix
    edges = cylinders(sft, 2)
    Pm, pi = nu.stochastic, nu.stationary
    w = np.array([pi[a] * Pm[a, b] for a, b in edges])
    Q = np.array([[Pm[b, d] if b == c else 0.0 for c, d in edges] for a, b in edges])
    x = np.array([f.evaluate(e) for e in edges])
    x = x - w @ x
    series, y = w @ (x * x), x.copy()
    for _ in range(200):
        y = Q @ y
        series += 2 * (w @ (x * y))
    assert asymptotic_variance(nu, f, f) == pytest.approx(series, abs=1e-12)


def test_gibbs_ratios_exactly_one_for_uniform_measure():
    s = full_shift(2)
    phi = Potential.constant(s, -LOG2)
    ratios = gibbs_ratios(equilibrium_state(s, phi), phi, 8)
    assert all(np.allclose(r, 1.0, atol=1e-14) for r in ratios.values())


@pytest.mark.parametrize("q", [-2.0, 0.0, 1.0, 2.0])
def test_gibbs_certificate_on_reference_systems(fam_a, fam_b, fam_golden, q):
    for fam in (fam_a, fam_b, fam_golden):
        phi = fam.phi(q, solve_T(fam, q))
        cert = gibbs_certificate(fam.sft, phi, 12)
        assert cert.certified, cert
        assert 0 < cert.c1 * (1 - 1e-9) <= cert.worst_ratio_low
        assert cert.worst_ratio_high <= cert.c2 * (1 + 1e-9)


def test_gibbs_certificate_symmetric_option(fam_b):
    phi = fam_b.phi(0.5, solve_T(fam_b, 0.5))
    cert = gibbs_certificate(fam_b.sft, phi, 10, symmetric=True)
    assert cert.certified and cert.c1 == pytest.approx(1 / cert.c2)


def test_gibbs_certificate_on_deep_potential():
    rng = np.random.default_rng(3)
    sft = golden_mean()
    pot = random_potential(rng, sft, 3)
    pot = pot - pressure(sft, pot)
    cert = gibbs_certificate(sft, pot, 12)
    assert cert.certified and cert.n_cylinders > 0


def test_gibbs_certificate_requires_zero_pressure():
    s = full_shift(2)
    with pytest.raises(NotZeroPressure):
        gibbs_certificate(s, Potential.constant(s, 0.0), 4)


@pytest.mark.parametrize("q", [-2.0, 0.0, 1.0, 2.0])
def test_conformality_at_zero_pressure(fam_b, q):
    phi = fam_b.phi(q, solve_T(fam_b, q))
    assert conformality_check(fam_b.sft, phi, 10) <= 1e-12


def test_conformality_deep_potential_on_golden_mean():
    rng = np.random.default_rng(8)
    sft = golden_mean()
    pot = random_potential(rng, sft, 3)
    assert conformality_check(sft, pot - pressure(sft, pot), 9) <= 1e-12


def test_conformality_defect_grows_off_the_root(fam_b):
    T = solve_T(fam_b, 0.0)
    with pytest.raises(NotZeroPressure):
        conformality_check(fam_b.sft, fam_b.phi(0.0, T + 0.1), 6)
    defects = [conformality_check(fam_b.sft, fam_b.phi(0.0, T + dt), 6, strict=False)
               for dt in (0.01, 0.1, 0.3)]
    assert defects == sorted(defects) and defects[0] > 1e-4


def test_eigenmeasure_identity_against_dense_computation():
    # for depth 1, m([a]) = exp(phi(a)) sum_{a -> b} m([b]): a right eigenvector of M
    sft = validate([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    pot = Potential(sft, 1, [-0.3, -1.1, -0.7])
    pot = pot - pressure(sft, pot)
    M = weighted_matrix(sft, pot)
    vals, vecs = np.linalg.eig(M)
    m = np.abs(np.real(vecs[:, np.argmax(np.real(vals))]))
    m /= m.sum()
    # one-symbol conformality: sum_{a -> b} m[b] = exp(-phi(a)) m[a]
    assert np.allclose(sft.transitions @ m, np.exp(-pot.values) * m, atol=1e-13)
    assert conformality_check(sft, pot, 7) <= 1e-12
