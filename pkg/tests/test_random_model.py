import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from artifact import matsumoto as mz
from artifact import random_model as rm
from artifact.errors import MissingPrimeError, ValidationError
from artifact.primes import factorize, primes_up_to
from artifact.smoothing import phi_X

PRIMES = primes_up_to(500)
RIEMANN = mz.builtin_spec("riemann")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 500), st.integers(1, 500))
def test_omega_multiplicative_and_unit(seed, a, b):
    ph = rm.sample_phases(seed, PRIMES)
    wa, wb = rm.omega_n(ph, a), rm.omega_n(ph, b)
    assert abs(abs(wa) - 1) < 1e-14
    if math.gcd(a, b) == 1 and a * b <= 500:
        assert abs(rm.omega_n(ph, a * b) - wa * wb) < 1e-12


def test_omega_completely_multiplicative_on_prime_powers():
    ph = rm.sample_phases(3, PRIMES)
    for n in (8, 81, 100, 360):
        expect = np.prod([ph.omega(p) ** e for p, e in factorize(n).items()])
        assert abs(rm.omega_n(ph, n) - expect) < 1e-12
    assert rm.omega_n(ph, 1) == 1


def test_seed_reproducibility():
    a = rm.sample_phases(42, PRIMES)
    assert a == rm.sample_phases(42, PRIMES[::-1])
    assert not a == rm.sample_phases(43, PRIMES)
    assert not a == rm.sample_phases(42, PRIMES, stream=1)


def test_phase_prefix_stable():
    # extending the prime list must not change the earlier phases
    short = rm.sample_phases(9, PRIMES[:20])
    long = rm.sample_phases(9, PRIMES)
    assert np.array_equal(short.angles, long.angles[:20])


def test_phases_uniform():
    ph = rm.sample_phases(1, primes_up_to(200_000))
    u = ph.angles / (2 * math.pi)
    assert np.all((u >= 0) & (u < 1))
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_phase_errors():
    ph = rm.sample_phases(0, [2, 3])
    with pytest.raises(MissingPrimeError):
        ph.angle(5)
    with pytest.raises(MissingPrimeError):
        rm.omega_n(ph, 10)
    with pytest.raises(ValidationError):
        rm.sample_phases(0, [2, 2, 3])
    with pytest.raises(ValidationError):
        rm.sample_phases(0, [])
    assert ph.covers(4) and not ph.covers(5)


def test_trivial_phases_reduce_to_truncation():
    s = np.array([0.75 + 3j, 0.6 - 200j])
    triv = rm.trivial_phases(primes_up_to(400))
    assert np.max(np.abs(rm.phi_X_random(RIEMANN, s, 200, phases=triv) - phi_X(RIEMANN, s, 200))) < 1e-12


def test_random_truncation_brute_force():
    ph = rm.sample_phases(5, primes_up_to(60))
    s = 0.7 + 11j
    X = 30
    from artifact.smoothing import DEFAULT_CUTOFF, psi

    expect = sum(rm.omega_n(ph, n) * psi(DEFAULT_CUTOFF, n / X) * n ** (-s) for n in range(1, 61))
    assert abs(rm.phi_X_random(RIEMANN, s, X, phases=ph) - expect) < 1e-12


def test_missing_prime_in_truncation():
    with pytest.raises(MissingPrimeError):
        rm.phi_X_random(RIEMANN, 0.8, 100, phases=rm.sample_phases(0, [2, 3, 5]))


def test_ensemble_member_equals_single_sample():
    vals = rm.random_ensemble(RIEMANN, 0.75, 150, rm.DEFAULT_CUTOFF, 300, seed=11, chunk=64)
    ps = primes_up_to(300)
    for j in (0, 63, 64, 299):
        single = rm.phi_X_random(RIEMANN, 0.75, 150, phases=rm.sample_phases(11, ps, stream=j))
        assert abs(vals[j] - single) < 1e-11


def test_ensemble_chunking_irrelevant():
    a = rm.random_ensemble(RIEMANN, 0.8 + 5j, 100, rm.DEFAULT_CUTOFF, 100, seed=2, chunk=7)
    b = rm.random_ensemble(RIEMANN, 0.8 + 5j, 100, rm.DEFAULT_CUTOFF, 100, seed=2, chunk=256)
    assert np.array_equal(a, b)


def test_monte_carlo_moments():
    spec = mz.builtin_spec("zeta_squared")
    vals = rm.random_ensemble(spec, 0.8, 200, rm.DEFAULT_CUTOFF, 4000, seed=7)
    mean, second, var = rm.orthogonality_moments(spec, 0.8, 200)
    assert mean == 1.0
    m2 = np.abs(vals) ** 2
    se = m2.std(ddof=1) / math.sqrt(m2.size)
    assert abs(m2.mean() - second) < 4 * se
    assert abs(vals.mean() - mean) < 4 * math.sqrt(var / vals.size)
    assert second == pytest.approx(var + 1.0)


def test_tail_budget_decreases():
    a = rm.random_tail_second_moment(RIEMANN, 0.75, 100, extent=16)
    b = rm.random_tail_second_moment(RIEMANN, 0.75, 400, extent=16)
    assert 0 < b < a


def test_ensemble_report(tmp_path, small_table):
    rep = rm.ensemble_compare(RIEMANN, 0.75, 1.0, 200, 500, sample_count=400, seed=1, zeros=small_table)
    assert rep.sample_a.size == 201 and rep.sample_b.size == 400
    assert 0 <= rep.ks_re <= 1 and 0 <= rep.ks_abs <= 1
    rep.to_csv(tmp_path / "e.csv", ["h"])
    rep.write_summary(tmp_path / "s.txt", ["h"])
    again = rm.ensemble_compare(RIEMANN, 0.75, 1.0, 200, 500, sample_count=400, seed=1, zeros=small_table)
    again.to_csv(tmp_path / "e2.csv", ["h"])
    assert (tmp_path / "e.csv").read_bytes() == (tmp_path / "e2.csv").read_bytes()
    with pytest.raises(ValidationError):
        rm.ensemble_compare(RIEMANN, 0.75, 1.0, 200, 500, zeros=None)
