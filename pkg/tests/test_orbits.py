import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_family, random_irreducible
from thermospec.errors import EqualRatios, InadmissibleWord, NotZeroPressure, StreamExhausted
from thermospec.orbits import (BlockSchedule, alternating_word, batch_birkhoff_ratio,
                               birkhoff_ratio, dense_splice, empirical_gibbs_check,
                               irregular_point, level_set_concentration, sample_orbit,
                               sample_orbits, stopping_time)
from thermospec.potential import JacobianPotential, Potential
from thermospec.sft import full_shift, golden_mean
from thermospec.temperature import alpha, nu_q, solve_T
from thermospec.transfer import bernoulli, cylinder_measure, gibbs_certificate, markov_measure

LOG2 = np.log(2)


def scan_stopping_time(jac, symbols, r):
    """Plain product loop straight from the defining inequalities."""
    prod, m = 1.0, 0
    while True:
        nxt = prod * np.exp(-jac.evaluate(symbols[m:m + jac.depth]))
        if prod > r >= nxt:
            return m
        prod, m = nxt, m + 1


# -- sampling ---------------------------------------------------------------------


def test_bernoulli_symbol_frequency():
    s = sample_orbit(bernoulli(full_shift(2), [0.5, 0.5]), 10_000, seed=1)
    assert len(s) == 10_000
    assert abs(np.mean(s.symbols == 0) - 0.5) <= 0.02


def test_point_mass_chain():
    nu = markov_measure(full_shift(2), [[1.0, 0.0], [1.0, 0.0]])
    assert str(sample_orbit(nu, 12, seed=4)) == "0" * 12


def test_sampling_is_deterministic(fam_b):
    nu = nu_q(fam_b, 0.3)
    a, b = sample_orbit(nu, 500, seed=7), sample_orbit(nu, 500, seed=7)
    assert np.array_equal(a.symbols, b.symbols)
    assert not np.array_equal(a.symbols, sample_orbit(nu, 500, seed=8).symbols)


def test_batch_rows_equal_single_streams(fam_golden):
    nu = nu_q(fam_golden, -1.0)
    batch = sample_orbits(nu, 64, 10, seed=3, first_index=5)
    for i, row in enumerate(batch):
        assert np.array_equal(row, sample_orbit(nu, 64, seed=3, index=5 + i).symbols)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_samples_are_admissible(seed, depth):
    rng = np.random.default_rng(seed)
    fam = random_family(rng, random_irreducible(rng, 3), depth=depth)
    nu = nu_q(fam, float(rng.normal()))
    for row in sample_orbits(nu, 40, 5, seed):
        assert fam.sft.is_admissible(row)


def test_empirical_word_frequencies_match_cylinder_masses(fam_golden):
    nu = nu_q(fam_golden, 0.5)
    paths = sample_orbits(nu, 3, 20_000, seed=11)
    for w in ("00", "01", "10", "010"):
        word = tuple(int(c) for c in w)
        hits = np.all(paths[:, :len(word)] == word, axis=1).mean()
        m = cylinder_measure(nu, word)
        assert abs(hits - m) <= 4 * np.sqrt(m * (1 - m) / 20_000)


# -- Birkhoff ratios ----------------------------------------------------------------


def test_fixed_point_ratios(fam_a, fam_b):
    assert birkhoff_ratio(fam_b, [0] * 50, 50) == pytest.approx(1.0, abs=1e-15)
    assert birkhoff_ratio(fam_b, [1] * 50, 50) == pytest.approx(0.5, abs=1e-15)
    rng = np.random.default_rng(0)
    assert birkhoff_ratio(fam_a, rng.integers(0, 2, 77), 77) == pytest.approx(1.0, abs=1e-15)


def test_ratio_of_periodic_orbit_is_per_period_ratio(fam_golden):
    w = (0, 0, 1, 0, 1)
    n = 5 * 40
    word = list(w) * 41
    g = sum(fam_golden.g.evaluate((w + w)[i:i + 1]) for i in range(5))
    j = sum(fam_golden.jac.evaluate((w + w)[i:i + 1]) for i in range(5))
    assert birkhoff_ratio(fam_golden, word, n) == pytest.approx(-g / j, abs=1e-14)


def test_batch_ratio_matches_scalar(fam_b):
    paths = sample_orbits(nu_q(fam_b, 1.0), 300, 8, seed=2)
    batch = batch_birkhoff_ratio(fam_b, paths, 300)
    assert np.allclose(batch, [birkhoff_ratio(fam_b, p, 300) for p in paths], atol=1e-14)
    with pytest.raises(StreamExhausted):
        batch_birkhoff_ratio(fam_b, paths, 301)


def test_ratio_from_iterator(fam_b):
    assert birkhoff_ratio(fam_b, itertools.cycle([0, 1]), 10) == pytest.approx(2 / 3)


# -- stopping times -------------------------------------------------------------------


def test_stopping_time_examples():
    jac = JacobianPotential.per_symbol(full_shift(2), [LOG2, LOG2])
    zeros = [0] * 64
    assert stopping_time(jac, zeros, 2 ** -10.5) == 10
    assert stopping_time(jac, zeros, 2 ** -3) == 2
    assert scan_stopping_time(jac, zeros, 2 ** -10.5) == 10


def test_stopping_time_periodic_orbit_against_scan(fam_b):
    word = [0, 1] * 40
    r = np.exp(-3 * LOG2 * 1.5)
    assert stopping_time(fam_b, word, r) == scan_stopping_time(fam_b.jac, word, r)


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.floats(1e-9, 0.999))
def test_stopping_time_defining_inequalities(seed, r):
    rng = np.random.default_rng(seed)
    fam = random_family(rng, full_shift(2), depth=2)
    word = rng.integers(0, 2, 400).tolist()
    m = stopping_time(fam, word, r)
    assert m == scan_stopping_time(fam.jac, word, r)
    S = np.concatenate([[0.0], np.cumsum(fam.jac.along(word))])
    assert np.exp(-S[m]) > r >= np.exp(-S[m + 1])


def test_stopping_time_from_infinite_stream(fam_b):
    m = stopping_time(fam_b, itertools.cycle([1, 0, 0]), 1e-200, chunk=7)
    assert m == scan_stopping_time(fam_b.jac, [1, 0, 0] * 300, 1e-200)


def test_stopping_time_errors(fam_b):
    with pytest.raises(StreamExhausted):
        stopping_time(fam_b, [0] * 5, 1e-9)
    for r in (0.0, 1.0):
        with pytest.raises(ValueError):
            stopping_time(fam_b, [0] * 5, r)


@given(st.integers(0, 10**6))
def test_stopping_time_monotone_in_r(seed):
    fam = random_family(np.random.default_rng(seed), full_shift(2))
    word = np.random.default_rng(seed + 1).integers(0, 2, 300)
    rs = np.logspace(-30, -0.01, 40)
    ms = [stopping_time(fam, word, r) for r in rs]
    assert all(a >= b for a, b in zip(ms, ms[1:]))


# -- level sets -------------------------------------------------------------------------


def test_concentration_system_a(fam_a):
    res = level_set_concentration(fam_a, 0.4, 200, 50, 1e-9, seed=1)
    assert res.fraction == 1.0 and res.std_ratio <= 1e-14


def test_concentration_small_run_is_reproducible(fam_b):
    r1 = level_set_concentration(fam_b, 0.0, 1000, 300, 0.02, seed=5)
    r2 = level_set_concentration(fam_b, 0.0, 1000, 300, 0.02, seed=5)
    assert r1 == r2
    assert json.loads(json.dumps(r1.to_dict()))["seed"] == 5


def test_concentration_mean_within_three_standard_errors(fam_b, fam_golden):
    for fam in (fam_b, fam_golden):
        res = level_set_concentration(fam, 0.0, 5000, 400, 0.02, seed=9)
        assert abs(res.mean_ratio - alpha(fam, 0.0)) <= 3 * res.std_ratio / np.sqrt(400)


def test_concentration_clt_window_is_nondegenerate(fam_b):
    n = 5000
    res = level_set_concentration(fam_b, 0.0, n, 1000, 0.1 / np.sqrt(n), seed=13)
    assert 0.05 < res.fraction < 0.95


def test_concentration_rejects_bad_arguments(fam_b):
    with pytest.raises(ValueError):
        level_set_concentration(fam_b, 0.0, 10, 10, 0.0, seed=1)


# -- constructed irregular orbits ---------------------------------------------------------


def test_block_schedule_validation():
    BlockSchedule((1, 4, 20), growth_factor=4)
    with pytest.raises(ValueError):
        BlockSchedule((1, 3), growth_factor=4)
    with pytest.raises(ValueError):
        BlockSchedule((1, 4), growth_factor=1.5)
    with pytest.raises(ValueError):
        BlockSchedule((0, 4), growth_factor=4)


@given(st.integers(1, 50), st.floats(2, 20), st.integers(10, 10**6))
def test_geometric_schedule_is_minimal_and_valid(first, growth, horizon):
    sched = BlockSchedule.geometric(first, growth, horizon)
    assert sum(sched.lengths) >= horizon
    total = 0
    for k, x in enumerate(sched.lengths):
        if k:
            assert x == int(np.ceil(growth * total))
        total += x


def test_irregular_point_system_b_growth_16(fam_b):
    sched = BlockSchedule.geometric(1, 16, 10**6)
    rec = irregular_point(fam_b, "0", "1", sched, 10**6)
    assert rec.admissible and rec.certified
    assert rec.spread >= 0.4
    # exact count oracle: g = -log2 everywhere, jac = log2 on 0 and 2 log2 on 1
    word, _, _ = alternating_word(fam_b.sft, "0", "1", sched, 10**6)
    ones = np.cumsum(word == 1)[rec.boundaries - 1]
    expected = rec.boundaries / (rec.boundaries + ones)
    assert np.allclose(rec.ratios, expected, atol=1e-12)


def test_irregular_point_tail_bounded_by_orbit_ratios(fam_b):
    rec = irregular_point(fam_b, "0", "1", BlockSchedule.geometric(1, 4, 10**6), 10**6)
    assert 0.5 - 1e-12 <= rec.tail_min <= rec.tail_max <= 1.0 + 1e-12
    # each boundary ratio sits between the two ratios and oscillates
    assert np.all(np.diff(np.sign(np.diff(rec.ratios))) != 0)


@pytest.mark.parametrize("growth", [4, 8, 16, 64])
def test_minimal_schedule_spread_matches_closed_form(fam_b, growth):
    # share of 1s -> 1/(G+2) after a 0-block and (G+1)/(G+2) after a 1-block
    rec = irregular_point(fam_b, "0", "1", BlockSchedule.geometric(1, growth, 10**6), 10**6)
    limit = growth * (growth + 2) / ((growth + 3) * (2 * growth + 3))
    assert rec.spread == pytest.approx(limit, abs=2e-3)
    assert rec.certified == (growth >= 4 + np.sqrt(34))


def test_irregular_point_equal_ratios(fam_a):
    with pytest.raises(EqualRatios):
        irregular_point(fam_a, "0", "1", BlockSchedule.geometric(1, 4, 1000), 1000)


def test_irregular_point_golden_mean_uses_connectors(fam_golden):
    sched = BlockSchedule.geometric(1, 16, 10**5)
    word, bounds, used = alternating_word(fam_golden.sft, "01", "0", sched, 10**5)
    assert fam_golden.sft.is_admissible(word)
    rec = irregular_point(fam_golden, "01", "0", sched, 10**5)
    assert rec.admissible
    # "1" followed by "0"-block never needs a bridge, and "0"-block followed by "01" neither
    assert used == []


def test_alternating_word_inserts_connector_when_required():
    g = golden_mean()
    sched = BlockSchedule((1, 4, 20, 100), growth_factor=4)
    word, bounds, used = alternating_word(g, "01", "10", sched, 125)
    assert g.is_admissible(word)
    assert used  # "01"-block ends with 1 and "10"-block starts with 1
    assert bounds[-1] == 125 or bounds[-1] == word.size


def test_oscillation_record_serialises(fam_b):
    rec = irregular_point(fam_b, "0", "1", BlockSchedule.geometric(1, 16, 10**4), 10**4)
    d = json.loads(rec.to_json())
    assert d["certified"] == rec.certified and d["threshold"] == pytest.approx(0.4)


# -- dense splicing -------------------------------------------------------------------


def test_dense_splice_full_shift(fam_b):
    tail = sample_orbit(nu_q(fam_b, 0.0), 200, seed=2)
    w = dense_splice(full_shift(2), "0110", tail)
    assert "".join(map(str, w[:4])) == "0110"
    assert w.size == 204 and full_shift(2).is_admissible(w)


def test_dense_splice_golden_mean_connector_only_when_needed():
    g = golden_mean()
    assert "".join(map(str, dense_splice(g, "010", [1, 0, 0]))) == "010100"
    assert "".join(map(str, dense_splice(g, "01", [1, 0]))) == "01010"
    with pytest.raises(InadmissibleWord):
        dense_splice(g, "11", [0])


def test_splice_does_not_move_the_ratio(fam_b):
    N = 10**5
    tail = sample_orbit(nu_q(fam_b, 0.0), N, seed=4)
    target = "1101"
    spliced = dense_splice(fam_b.sft, target, tail)
    p = spliced.size - N
    gap = abs(birkhoff_ratio(fam_b, spliced, N) - birkhoff_ratio(fam_b, tail, N))
    g_max = np.max(np.abs(fam_b.g.values))
    assert gap <= p * g_max / (N * fam_b.jac.values.min())


@given(st.integers(0, 10**6))
def test_dense_splice_always_admissible(seed):
    rng = np.random.default_rng(seed)
    sft = random_irreducible(rng, 4)
    from thermospec.sft import cylinders
    words = cylinders(sft, int(rng.integers(1, 5)))
    target = words[int(rng.integers(len(words)))]
    tail = sample_orbit(bernoulli(full_shift(4), [0.25] * 4), 1, seed)
    while not sft.is_admissible(tail.symbols):
        tail = sample_orbit(bernoulli(full_shift(4), [0.25] * 4), 1, seed + 1)
    out = dense_splice(sft, target, tail)
    assert sft.is_admissible(out) and tuple(out[:len(target)]) == tuple(target)


# -- Monte Carlo Gibbs ------------------------------------------------------------------


def test_empirical_gibbs_inside_certificate(fam_b):
    T = solve_T(fam_b, 0.0)
    phi = fam_b.phi(0.0, T)
    res = empirical_gibbs_check(nu_q(fam_b, 0.0, T), phi, 500, 30, seed=1)
    assert res.inside
    cert = gibbs_certificate(fam_b.sft, phi, 12)
    assert res.c1 == pytest.approx(cert.c1) and res.c2 == pytest.approx(cert.c2)


def test_empirical_gibbs_exact_for_uniform_measure():
    s = full_shift(2)
    res = empirical_gibbs_check(bernoulli(s, [0.5, 0.5]), Potential.constant(s, -LOG2), 50, 20, 0)
    assert res.low == pytest.approx(1.0, abs=1e-12) and res.high == pytest.approx(1.0, abs=1e-12)


def test_empirical_gibbs_negative_control(fam_b):
    T = solve_T(fam_b, 0.0)
    phi = fam_b.phi(0.0, T)
    wrong = bernoulli(fam_b.sft, [0.5, 0.5])
    spread = [empirical_gibbs_check(wrong, phi, 200, n, seed=2) for n in (5, 30)]
    assert not spread[1].inside
    assert spread[1].high / spread[1].low > spread[0].high / spread[0].low


def test_empirical_gibbs_requires_zero_pressure(fam_b):
    with pytest.raises(NotZeroPressure):
        empirical_gibbs_check(nu_q(fam_b, 0.0), fam_b.phi(0.0, 0.0), 10, 10, 0)
