"""Acceptance criteria, one test per criterion, each recording a PASS/FAIL line."""

import math
import time

import mpmath
import numpy as np
import pytest

from artifact import matsumoto as mz
from artifact import paircorr, random_model, smoothing, universality
from artifact.selfcheck import run_selfcheck
from artifact.zeta import zeta

from conftest import ACCEPTANCE_LINES

RIEMANN = mz.builtin_spec("riemann")
K_STRIP = universality.CompactGrid(0.6, 0.8, 0.0, 1.0, 0.05)


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{label}] {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _sieve_pi(x):
    n = int(x)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return int(is_p.sum())


# ------------------------------------------------------------------ 1


def test_c1_zeros_match_bisection_oracle(table):
    """A sign change of mpmath's Z on [gamma - 1e-6, gamma + 1e-6] brackets a zero within 1e-6."""
    g = table.gammas[:1000]
    tol = 1e-6
    with mpmath.workdps(20):
        left = np.array([float(mpmath.siegelz(x - tol)) for x in g])
        right = np.array([float(mpmath.siegelz(x + tol)) for x in g])
        spots = {k: float(mpmath.zetazero(k).imag) for k in (1, 2, 250, 500, 750, 999, 1000)}
    bracketed = np.sign(left) != np.sign(right)
    disjoint = bool(np.all(np.diff(g) > 2 * tol))
    spot_dev = max(abs(table.gamma(k) - v) for k, v in spots.items())
    ok = bool(bracketed.all()) and disjoint and spot_dev < tol
    record(
        "1a zeros vs bisection oracle",
        ok,
        f"{int(bracketed.sum())}/1000 ordinates bracketed within 1e-6 by an independent Z; "
        f"brackets disjoint {disjoint}; zetazero spot max dev {spot_dev:.1e}",
    )


def test_c1_prefix_counts_rvm(table):
    g = table.gammas
    mids = 0.5 * (g[1:] + g[:-1])
    x = mids / (2 * math.pi)
    smooth = x * np.log(x) - x + 7 / 8
    dev = np.arange(1, g.size) - smooth
    worst = float(np.max(np.abs(dev)))
    record("1b prefix counts vs Riemann-von Mangoldt", worst <= 1.0, f"max |k - N(T)| over 9999 prefixes = {worst:.3f}")


@pytest.mark.xfail(
    strict=True,
    reason="the zero count gives gamma_k log gamma_k / (2 pi k) ~ log gamma / log(gamma / 2 pi e), "
    "about 1.45 to 1.64 on this range, so the [0.9, 1.1] band cannot hold",
)
def test_c1_ratio_band(table):
    k = np.arange(1000, 10_001)
    g = table.gammas[999:]
    ratio = g * np.log(g) / (2 * math.pi * k)
    lo, hi = float(ratio.min()), float(ratio.max())
    record("1c gamma_k log gamma_k / (2 pi k) in [0.9, 1.1]", lo >= 0.9 and hi <= 1.1, f"observed range [{lo:.4f}, {hi:.4f}] for k in [1e3, 1e4]")


# ------------------------------------------------------------------ 2


def test_c2_coefficients():
    N = 10_000
    d = np.zeros(N + 1, dtype=np.int64)
    for m in range(1, N + 1):
        d[m::m] += 1
    b = mz.dirichlet_coeffs(mz.builtin_spec("zeta_squared"), N).values
    divisor_ok = bool(np.all(b[1:].imag == 0) and np.all(b[1:].real == d[1:]))
    ones_ok = bool(np.all(mz.dirichlet_coeffs(RIEMANN, N).values[1:] == 1))
    pairs = bad = 0
    for name in mz.BUILTIN_NAMES:
        c = mz.dirichlet_coeffs(mz.builtin_spec(name), 1000).values
        for a in range(1, 1001):
            for m in range(1, 1000 // a + 1):
                if math.gcd(a, m) == 1:
                    pairs += 1
                    bad += c[a * m] != c[a] * c[m]
    ok = divisor_ok and ones_ok and bad == 0
    record("2 coefficients", ok, f"divisor function exact {divisor_ok}; riemann ones {ones_ok}; {bad} multiplicativity failures in {pairs} coprime products <= 1e3")


# ------------------------------------------------------------------ 3


def test_c3_kappa_exact():
    chi = mz.builtin_spec("dirichlet_chi4")
    rows = []
    ok = True
    for x in (1e2, 1e4, 1e6):
        kr = mz.kappa_statistic(RIEMANN, x)
        kc = mz.kappa_statistic(chi, x)
        expect = 1 - 1 / _sieve_pi(x)
        ok &= kr == 1.0 and kc == expect
        rows.append(f"x={x:g}: riemann {kr!r}, chi4 {kc!r} vs {expect!r}")
    record("3 kappa statistic", ok, "; ".join(rows))


# ------------------------------------------------------------------ 4


def test_c4_mellin_suite():
    c = smoothing.DEFAULT_CUTOFF
    res = [abs(s * smoothing.mellin_psi(c, s) - 1) for s in (1e-1, 1e-2, 1e-3)]
    limit_ok = res[0] > res[1] > res[2] and res[2] < 1e-2
    inv = [smoothing.mellin_inversion_check(c, x, 1.0, 200.0) for x in (0.5, 1.5)]
    inv_ok = max(inv) < 1e-4
    # three integrations by parts: |psi_hat(s)| <= 2^(sigma+2) int|psi'''| / |s(s+1)(s+2)|
    x = np.linspace(1, 2, 200_001)
    step = x[1] - x[0]
    d3 = np.gradient(np.gradient(smoothing.psi_prime(c, x), step), step)
    mass3 = float(np.trapezoid(np.abs(d3), x))
    t = np.linspace(1, 100, 991)
    decay_ok = True
    worst = []
    for sigma in (0.5, 1.0, 2.0):
        scaled = np.abs(smoothing.mellin_psi(c, sigma + 1j * t)) * (1 + t) ** 3
        bound = 8 * 2 ** (sigma + 2) * mass3 * 1.05
        decay_ok &= bool(np.all(np.isfinite(scaled)) and scaled.max() <= bound)
        worst.append(f"sigma={sigma}: max {scaled.max():.1f} <= {bound:.0f}")
    record(
        "4 Mellin suite",
        limit_ok and inv_ok and decay_ok,
        f"|s psi_hat(s) - 1| at 1e-1,1e-2,1e-3 = {res[0]:.1e},{res[1]:.1e},{res[2]:.1e}; "
        f"inversion {inv[0]:.1e},{inv[1]:.1e}; decay {'; '.join(worst)}",
    )


# ------------------------------------------------------------------ 5


@pytest.mark.xfail(
    strict=True,
    reason="at X = 1e3 and 1e4 the true error is far below double precision, so both means are "
    "summation roundoff near 1e-14 and their order is not meaningful",
)
def test_c5_truncation_decreasing(table):
    shifts = table.window(1000, 2000)
    scan = smoothing.truncation_error_scan(RIEMANN, K_STRIP, (1e2, 1e3, 1e4), shifts)
    e = scan.mean_sup_error
    decreasing = e[0] > e[1] > e[2]
    small = e[2] < 1e-2
    record(
        "5 truncation error",
        decreasing and small,
        f"mean sup |zeta - phi_X| at X=1e2,1e3,1e4: {e[0]:.3e}, {e[1]:.3e}, {e[2]:.3e}; "
        f"strictly decreasing {decreasing}; < 1e-2 at 1e4 {small}",
    )


# ------------------------------------------------------------------ 6


def test_c6_continuation():
    rng = np.random.default_rng(6)
    sigma = rng.uniform(0.6, 0.9, 100)
    t = rng.uniform(50, 500, 100) * rng.choice([-1.0, 1.0], 100)
    s = sigma + 1j * t
    val, err = smoothing.continued_eval(mz.generic_copy(RIEMANN), s, 1e4)
    dev = np.abs(val - zeta(s))
    ok = bool(np.all(dev <= np.maximum(1e-3, err)))
    record("6 pole-corrected continuation", ok, f"max deviation {dev.max():.2e}, max error estimate {err.max():.2e} over 100 points")


# ------------------------------------------------------------------ 7


def test_c7_pair_correlation(table):
    T = table.gamma(2000)
    g = table.gammas[:2000]
    diff = g[:, None] - g[None, :]
    sweep = {}
    brute = {}
    for c in (0.5, 1.0, 2.0):
        sweep[c] = paircorr.weak_sum(table, T, c).count
        brute[c] = int(np.count_nonzero(np.abs(diff) < c / math.log(T)))
    counts_ok = sweep == brute
    hist = paircorr.pair_correlation_histogram(table, T, -3.0, 3.0, 24)
    scaled = diff * math.log(T) / (2 * math.pi)
    total = int(np.count_nonzero((scaled >= -3) & (scaled <= 3)))
    sums_ok = hist.total == total
    weight = T / (2 * math.pi) * math.log(T)
    mass = np.array([paircorr.montgomery_mass(a, b) for a, b in zip(hist.edges[:-1], hist.edges[1:])])
    delta = hist.prediction / weight - mass
    zero_bin = int(np.flatnonzero((hist.edges[:-1] <= 0) & (0 < hist.edges[1:]))[0])
    expect = np.zeros_like(delta)
    expect[zero_bin] = 1.0
    delta_ok = hist.diagonal_bin == zero_bin and bool(np.max(np.abs(delta - expect)) < 1e-12)
    record(
        "7 pair correlation",
        counts_ok and sums_ok and delta_ok,
        f"sweep {sweep} vs brute force {brute}; bins sum {hist.total} vs {total}; delta on bin {hist.diagonal_bin} only {delta_ok}",
    )


# ------------------------------------------------------------------ 8


def test_c8_phase_equidistribution(table):
    rep = paircorr.phase_equidistribution(table, 1.0, (2, 3, 5), 5000)
    ok = all(v < 0.05 for v in rep.ks.values())
    record("8 phase equidistribution", ok, ", ".join(f"KS(p={p}) = {rep.ks[p]:.4f}" for p in rep.primes))


# ------------------------------------------------------------------ 9


def test_c9_ensemble(table):
    reps = {
        N: random_model.ensemble_compare(RIEMANN, 0.75, 1.0, N, 1000.0, sample_count=5000, seed=0, zeros=table)
        for N in (2500, 5000)
    }
    a, b = reps[2500], reps[5000]
    trend = {
        "re": (a.ks_re, b.ks_re),
        "im": (a.ks_im, b.ks_im),
        "abs": (a.ks_abs, b.ks_abs),
    }
    trend_ok = all(new <= old + 0.02 for old, new in trend.values())
    z = abs(b.second_moment_b - b.predicted_second_moment_b) / b.second_moment_stderr
    moment_ok = z <= 3
    record(
        "9 ensemble comparison",
        trend_ok and moment_ok,
        "KS N=2500 -> 5000: " + ", ".join(f"{k} {o:.4f} -> {n:.4f}" for k, (o, n) in trend.items())
        + f"; second moment {b.second_moment_b:.4f} vs {b.predicted_second_moment_b:.4f} ({z:.2f} stderr)",
    )


# ------------------------------------------------------------------ 10


def test_c10_scan_properties(table, tmp_path):
    N, j = 500, 720
    eps = (0.05, 0.1, 0.2, 0.5, 1.0)
    targets = {
        "self_shift": universality.TargetFunction.self_shift(RIEMANN, j, table),
        "constant": universality.TargetFunction.constant(1.0),
        "exp_polynomial": universality.TargetFunction.exp_polynomial((0.2, 0.1j)),
    }
    ok = True
    notes = []
    for name, target in targets.items():
        rep = universality.universality_scan(RIEMANN, target, K_STRIP, 1.0, N, eps, table)
        dens = list(rep.densities)
        ok &= all(0 <= d <= 1 for d in dens) and dens == sorted(dens)
        if name == "self_shift":
            hit = rep.D[j - N] == 0 and all(d >= 1 / (N + 1) for d in dens)
            ok &= hit
            notes.append(f"D_j = {float(rep.D[j - N])!r}, min density {min(dens):.4f} >= 1/(N+1)")
            rep.write(tmp_path / "first.txt")
            again = universality.universality_scan(RIEMANN, target, K_STRIP, 1.0, N, eps, table)
            again.write(tmp_path / "second.txt")
            same = again.config_hash == rep.config_hash and (tmp_path / "first.txt").read_bytes() == (tmp_path / "second.txt").read_bytes()
            ok &= same
            notes.append(f"byte-identical rerun {same}")
        notes.append(f"{name} densities {', '.join(f'{d:.3f}' for d in dens)}")
    record("10 universality scan properties", ok, "; ".join(notes))


# ------------------------------------------------------------------ 11


def test_c11_selfcheck_runtime(tmp_path):
    lines = []
    start = time.monotonic()
    passed = run_selfcheck(out=tmp_path, log=lines.append)
    elapsed = time.monotonic() - start
    failed = [ln for ln in lines if ln.startswith("FAIL")]
    record("11 selfcheck", passed and elapsed < 600, f"all checks pass {passed} in {elapsed:.1f}s (budget 600s); failures {failed}")
