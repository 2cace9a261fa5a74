import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import matsumoto as mz
from artifact.errors import (
    CoefficientOverflowError,
    DomainError,
    NoContinuationError,
    PoleError,
    ValidationError,
)
from artifact.primes import factorize, nth_prime, prime_pi, primes_up_to, valuation


def brute_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p**0.5) + 1))]


def brute_divisors(n):
    return [sum(1 for d in range(1, m + 1) if m % d == 0) for m in range(1, n + 1)]


def test_primes_against_trial_division():
    assert primes_up_to(2000).tolist() == brute_primes(2000)
    assert prime_pi(1000) == 168
    assert nth_prime(1000) == 7919


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10**6))
def test_factorize_reconstructs(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f.items()) == n
    for p, e in f.items():
        assert valuation(np.array([n]), p)[0] == e


def test_divisor_function_small():
    b = mz.dirichlet_coeffs(mz.builtin_spec("zeta_squared"), 600).values[1:]
    assert np.array_equal(b.real.astype(int), brute_divisors(600))


def test_zeta_of_2s_indicator_of_squares():
    b = mz.dirichlet_coeffs(mz.builtin_spec("zeta_of_2s"), 2000).values[1:].real
    squares = np.zeros(2000)
    squares[np.arange(1, 45) ** 2 - 1] = 1
    assert np.array_equal(b, squares)


def test_zeta_times_zeta2s_convolution():
    N = 800
    b = mz.dirichlet_coeffs(mz.builtin_spec("zeta_times_zeta2s"), N).values
    # number of ways n = m * k^2
    expect = [sum(1 for k in range(1, int(n**0.5) + 1) if n % (k * k) == 0) for n in range(1, N + 1)]
    assert np.array_equal(b[1:].real.astype(int), expect)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(mz.BUILTIN_NAMES), st.integers(1, 200), st.integers(1, 200))
def test_multiplicativity(name, a, c):
    if math.gcd(a, c) != 1:
        return
    b = mz.dirichlet_coeffs(mz.builtin_spec(name), 40_000).values
    assert b[a * c] == pytest.approx(b[a] * b[c], abs=1e-9)


def test_local_series_geometric():
    c = mz.local_series(((0.5, 1),), 6)
    assert np.allclose(c, 0.5 ** np.arange(7))
    c2 = mz.local_series(((1, 2),), 5)
    assert np.allclose(c2, [1, 0, 1, 0, 1, 0])


def test_coefficient_cap():
    with pytest.raises(CoefficientOverflowError):
        mz.dirichlet_coeffs(mz.builtin_spec("zeta_squared"), 100, cap=3)
    with pytest.raises(ValidationError):
        mz.dirichlet_coeffs(mz.builtin_spec("riemann"), 0)


def test_coefficient_table_csv(tmp_path):
    t = mz.dirichlet_coeffs(mz.builtin_spec("dirichlet_chi4"), 8)
    t.to_csv(tmp_path / "c.csv", ["h=1"])
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[:3] == ["# h=1", "n,re,im", "1,1.0,0.0"]
    assert lines[-1] == "8,0.0,0.0"
    with pytest.raises(IndexError):
        t[9]


def test_kappa_exact():
    for x in (1e2, 1e4):
        assert mz.kappa_statistic(mz.builtin_spec("riemann"), x) == 1.0
        assert mz.kappa_statistic(mz.builtin_spec("dirichlet_chi4"), x) == 1 - 1 / prime_pi(x)
    assert mz.kappa_statistic(mz.builtin_spec("zeta_squared"), 100) == 4.0
    assert mz.kappa_statistic(mz.builtin_spec("zeta_of_2s"), 100) == 0.0
    with pytest.raises(DomainError):
        mz.kappa_statistic(mz.builtin_spec("riemann"), 1.5)


@pytest.mark.filterwarnings("ignore::artifact.errors.AccuracyWarning")
@pytest.mark.parametrize("name", mz.BUILTIN_NAMES)
def test_half_plane_evaluators_agree(name):
    spec = mz.builtin_spec(name)
    s = 2.5 - 7j
    exact = complex(mz.analytic_eval(spec, s))
    assert abs(mz.euler_product_eval(spec, s, 3000) - exact) <= mz.euler_tail_bound(spec, 2.5, 3000) * abs(exact) + 1e-14
    assert abs(mz.series_eval(spec, s, 3000) - exact) <= mz.series_tail_bound(spec, 2.5, 3000) + 1e-14


def test_half_plane_required():
    with pytest.raises(DomainError):
        mz.euler_product_eval(mz.builtin_spec("riemann"), 0.9 + 1j, 100)
    with pytest.raises(DomainError):
        mz.series_eval(mz.builtin_spec("riemann"), 1.0, 100)


def test_chi4_closed_form_matches_mpmath():
    s = 0.7 + 33j
    exact = complex(mpmath.dirichlet(mpmath.mpc(s.real, s.imag), [0, 1, 0, -1]))
    assert abs(mz.analytic_eval(mz.builtin_spec("dirichlet_chi4"), s) - exact) < 1e-10


def test_zeta_squared_closed_form():
    s = 0.8 + 12j
    exact = complex(mpmath.zeta(mpmath.mpc(0.8, 12))) ** 2
    assert abs(mz.analytic_eval(mz.builtin_spec("zeta_squared"), s) - exact) < 1e-10


def test_poles_rejected():
    with pytest.raises(PoleError):
        mz.analytic_eval(mz.builtin_spec("zeta_of_2s"), 0.5 + 1e-10j)


def test_generic_copy_strips_closed_form():
    g = mz.generic_copy(mz.builtin_spec("riemann"))
    assert g.closed_form is None and g.name == "riemann_generic"
    with pytest.raises(DomainError):
        mz.analytic_eval(g, 0.4 + 10j)
    with pytest.raises(NoContinuationError):
        mz.analytic_eval(g, 0.52 + 50j, X=10, tolerance=1e-9)


def test_spec_validation():
    rule = mz.builtin_spec("riemann").factor_rule
    with pytest.raises(ValidationError):
        mz.MatsumotoSpec("bad", -1, 0, 1, 0.5, (), 0.5, rule)
    with pytest.raises(ValidationError):
        mz.MatsumotoSpec("bad", 0, 0, 1, 0.2, (), 0.5, rule)
    with pytest.raises(ValidationError):
        mz.MatsumotoSpec("bad", 0, 0, 1, 0.5, (mz.Pole(0.5, 1),), 0.5, rule)
    with pytest.raises(ValidationError):
        mz.Pole(1, 1, order=3)
    big = mz.MatsumotoSpec("big", 0, 0, 1, 0.5, (), 0.5, lambda n, p: ((2, 1),))
    with pytest.raises(ValidationError):
        big.local_factor(1, 2)
    many = mz.MatsumotoSpec("many", 0, 0, 1, 0.5, (), 0.5, lambda n, p: ((1, 1), (1, 1)))
    with pytest.raises(ValidationError):
        many.local_factor(1, 2)
    with pytest.raises(ValidationError):
        mz.builtin_spec("nope")


def test_load_spec_file(tmp_path):
    path = tmp_path / "chi.spec"
    path.write_text(
        "name = mine\nalpha = 0\nbeta = 0\nC1 = 1\nrho = 0.5\n"
        "factor 2 = (0,1)\nfactor default = (1,1)\n"
    )
    spec = mz.load_spec(path)
    b = mz.dirichlet_coeffs(spec, 20).values[1:].real
    assert np.array_equal(b, [0 if n % 2 == 0 else 1 for n in range(1, 21)])
    path.write_text("builtin = riemann\nclosed_form = no\n")
    assert mz.load_spec(path).closed_form is None
    path.write_text("name = x\n")
    with pytest.raises(ValidationError):
        mz.load_spec(path)


def test_table_rule_missing_prime(tmp_path):
    path = tmp_path / "t.spec"
    path.write_text("name = t\nalpha = 0\nbeta = 0\nC1 = 1\nrho = 0.5\nfactor 2 = (1,1)\n")
    with pytest.raises(ValidationError):
        mz.dirichlet_coeffs(mz.load_spec(path), 10)


def test_growth_and_mean_square_diagnostics():
    spec = mz.builtin_spec("riemann")
    rep = mz.growth_diagnostic(spec, 0.75, [50, 100, 200, 400])
    assert rep.passed
    with pytest.raises(ValidationError):
        mz.growth_diagnostic(spec, 0.75, [50])
    ms = mz.mean_square_diagnostic(spec, 0.75, 40.0)
    assert ms.spread < 3
    with pytest.raises(DomainError):
        mz.mean_square_diagnostic(spec, 1.2, 40.0)
