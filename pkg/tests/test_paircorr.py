import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from artifact import paircorr as pc
from artifact.errors import InsufficientZerosError, ValidationError
from artifact.zeros import ZeroTable


def brute_pairs(g, width):
    return int(np.count_nonzero(np.abs(g[:, None] - g[None, :]) < width))


@settings(max_examples=60, deadline=None)
@given(
    arrays(float, st.integers(1, 60), elements=st.floats(0, 50, allow_nan=False)),
    st.floats(1e-3, 10),
)
def test_close_pairs_against_brute_force(g, width):
    g = np.sort(g)
    assert pc.count_close_pairs(g, width) == brute_pairs(g, width)
    assert pc.count_close_pairs(g, width, include_diagonal=False) == brute_pairs(g, width) - g.size


def test_close_pairs_ties():
    g = np.array([1.0, 1.0, 1.5, 2.0])
    assert pc.count_close_pairs(g, 0.5) == brute_pairs(g, 0.5)


def test_weak_sum_monotone_and_brute(small_table):
    T = small_table.gamma(1500)
    g = small_table.gammas[:1500]
    counts = []
    for c in (0.25, 1.0, 3.0):
        rep = pc.weak_sum(small_table, T, c)
        assert rep.count == brute_pairs(g, c / math.log(T))
        assert rep.zeros_upto_T == 1500
        assert rep.normalized == rep.count / (T * math.log(T))
        counts.append(rep.count)
    assert counts == sorted(counts)
    off = pc.weak_sum(small_table, T, 1.0, include_diagonal=False)
    assert off.count == counts[1] - 1500


def test_weak_sum_errors(small_table):
    with pytest.raises(InsufficientZerosError):
        pc.weak_sum(small_table, small_table.gammas[-1] + 1)
    with pytest.raises(ValidationError):
        pc.weak_sum(small_table, 100.0, c=0)
    with pytest.raises(ValidationError):
        pc.weak_sum(small_table, 2.0)


@pytest.mark.parametrize("a, b", [(0, 0.5), (-1, 1), (0.3, 2.7), (-3, -0.1), (1, 1)])
def test_montgomery_mass_quadrature(a, b):
    f = lambda u: 1 - (np.sinc(u)) ** 2
    expect, _ = integrate.quad(f, a, b, epsabs=1e-13, limit=200)
    assert pc.montgomery_mass(a, b) == pytest.approx(expect, abs=1e-12)


def test_histogram_sums_and_diagonal(small_table):
    T = small_table.gamma(1000)
    g = small_table.gammas[:1000]
    d = (g[:, None] - g[None, :]).ravel() * math.log(T) / (2 * math.pi)
    hist = pc.pair_correlation_histogram(small_table, T, -1.5, 1.5, 6)
    inside = d[(d >= -1.5) & (d <= 1.5)]
    assert hist.total == inside.size
    # brute force binning with a closed last bin
    brute = np.histogram(inside, bins=hist.edges)[0]
    assert np.array_equal(hist.counts, brute)
    assert hist.diagonal_bin == 3
    weight = T / (2 * math.pi) * math.log(T)
    masses = [pc.montgomery_mass(a, b) for a, b in zip(hist.edges[:-1], hist.edges[1:])]
    expect = np.array(masses) * weight
    expect[3] += weight
    assert np.allclose(hist.prediction, expect, rtol=1e-13)


def test_histogram_symmetry(small_table):
    T = small_table.gamma(1200)
    hist = pc.pair_correlation_histogram(small_table, T, -2.0, 2.0, 10)
    # ordered pairs mirror exactly once the 1200 diagonal pairs leave the bin holding 0
    off = hist.counts.copy()
    off[hist.diagonal_bin] -= 1200
    assert hist.diagonal_bin == 5
    assert np.array_equal(off, off[::-1])


@pytest.mark.parametrize(
    "edges, expect",
    [([-1, -0.5, 0, 0.5], 2), ([0, 1, 2], 0), ([-2, -1, 0], 1), ([1, 2, 3], -1), ([-1, 1], 0)],
)
def test_bin_of_zero(edges, expect):
    assert pc._bin_of_zero(np.array(edges, dtype=float)) == expect


def test_histogram_without_zero_bin(small_table):
    T = small_table.gamma(500)
    hist = pc.pair_correlation_histogram(small_table, T, 0.5, 2.0, 3)
    assert hist.diagonal_bin == -1
    with pytest.raises(ValidationError):
        pc.pair_correlation_histogram(small_table, T, 1.0, 1.0, 3)


def test_histogram_csv(tmp_path, small_table):
    hist = pc.pair_correlation_histogram(small_table, small_table.gamma(300), -1, 1, 4)
    hist.to_csv(tmp_path / "h.csv", ["hash=x"])
    rows = (tmp_path / "h.csv").read_text().splitlines()
    assert rows[1] == "alpha_lo,alpha_hi,count,prediction"
    assert sum(int(r.split(",")[2]) for r in rows[2:]) == hist.total


def brute_box(u, v):
    cand_a = sorted(set(u.tolist()) | {1.0})
    cand_b = sorted(set(v.tolist()) | {1.0})
    n = u.size
    worst = 0.0
    for a in cand_a:
        for b in cand_b:
            for cu in (u < a, u <= a):
                for cv in (v < b, v <= b):
                    worst = max(worst, abs(np.count_nonzero(cu & cv) / n - a * b))
    return worst


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_box_discrepancy_brute_force(n, seed):
    r = np.random.default_rng(seed)
    u = np.round(r.random(n), 1)  # rounding forces ties
    v = np.round(r.random(n), 1)
    assert pc.box_discrepancy(u, v) == pytest.approx(brute_box(u, v), abs=1e-15)


def test_box_discrepancy_empty():
    with pytest.raises(ValidationError):
        pc.box_discrepancy([], [])


def test_shifted_phases_window(small_table):
    ph = pc.shifted_phases(small_table, 1.0, 3, 100)
    g = small_table.gammas[99:200]
    assert np.allclose(ph, np.mod(g * math.log(3) / (2 * math.pi), 1.0))
    assert pc.shifted_phases(small_table, 1.0, 2, 0).size == 1


def test_equidistribution_report(small_table):
    rep = pc.phase_equidistribution(small_table, 1.0, (2, 3), 500)
    assert set(rep.ks) == {2, 3}
    assert 0 < rep.box_discrepancy < 1
    assert rep.sample_size == 501
    assert len(rep.lines()) == 4
    single = pc.phase_equidistribution(small_table, 1.0, (7,), 100)
    assert math.isnan(single.box_discrepancy)
    with pytest.raises(ValidationError):
        pc.phase_equidistribution(small_table, 1.0, (), 100)


def test_uniform_sample_box_discrepancy_small():
    r = np.random.default_rng(0)
    assert pc.box_discrepancy(r.random(4000), r.random(4000)) < 0.05


def test_tiny_table_rejected():
    t = ZeroTable(np.array([14.13, 21.02]), 1e-8)
    with pytest.raises(InsufficientZerosError):
        pc.weak_sum(t, 30.0)
