"""Invariant suite run by the ``selfcheck`` command.

Each check compares an implementation route with an independent one (a
functional equation, a brute-force count, an exact identity) and returns
``(passed, detail)``.
"""

import math
import time
import warnings
from pathlib import Path

import numpy as np
from scipy import special

from . import matsumoto as mz
from . import paircorr, random_model, smoothing, universality, zeros, zeta
from .primes import primes_up_to


def _chi(s):
    # zeta(s) = chi(s) zeta(1 - s)
    return np.exp(s * math.log(2) + (s - 1) * math.log(math.pi) + special.loggamma(1 - s)) * np.sin(math.pi * s / 2)


def check_zeta(ctx):
    pts = np.array([0.6 + 20j, 0.45 + 137.5j, 0.7 + 290j])
    fe = np.abs(zeta.zeta(pts) - _chi(pts) * zeta.zeta(1 - pts)) / np.abs(zeta.zeta(pts))
    special_vals = abs(zeta.zeta(2.0) - math.pi**2 / 6) + abs(zeta.zeta(3.0) - 1.2020569031595942)
    s = np.array([0.8 + 3j, 1.7 - 40j])
    hz = np.abs(zeta.hurwitz_zeta(s, 0.5) - (2**s - 1) * zeta.zeta(s))
    worst = max(float(fe.max()), special_vals, float(hz.max()))
    return worst < 1e-9, f"functional equation / special values / Hurwitz relation worst {worst:.2e}"


def check_hardy(ctx):
    t = np.linspace(10, 2000, 400)
    diff = np.abs(np.abs(zeta.hardy_z(t)) - np.abs(zeta.zeta(0.5 + 1j * t)))
    sign = zeta.hardy_z(14.0) * zeta.hardy_z(14.3) < 0
    return bool(diff.max() < 1e-9 and sign), f"| |Z| - |zeta| | max {diff.max():.2e}; sign change near 14.13: {sign}"


def check_zero_table(ctx):
    table = ctx["zeros"]
    dev = zeros.prefix_deviation(table.gammas)
    g = table.gammas[:: max(1, table.k_max // 200)]
    bw = table.bracket_width
    z0 = np.abs(zeta.hardy_z(g))
    nb = np.minimum(np.abs(zeta.hardy_z(g - bw)), np.abs(zeta.hardy_z(g + bw)))
    local = bool(np.all(z0 < nb))
    same = zeros.compute_zeros(200, bw) == zeros.compute_zeros(200, bw)
    path = Path(ctx["out"]) / "selfcheck_zeros.txt"
    zeros.store_zeros(table.head(500), path)
    back = zeros.load_zeros(path)
    rt = float(np.max(np.abs(back.gammas - table.gammas[:500]) / table.gammas[:500]))
    ok = float(np.max(np.abs(dev))) <= 1 and local and same and rt < 1e-11
    return ok, (
        f"{table.k_max} zeros: prefix deviation in [{dev.min():.3f}, {dev.max():.3f}], "
        f"local minimum of |Z| {local}, deterministic {same}, round trip {rt:.1e}"
    )


def _divisor_counts(n):
    d = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        d[k::k] += 1
    return d


def check_coefficients(ctx):
    n = 10**4
    d = mz.dirichlet_coeffs(mz.builtin_spec("zeta_squared"), n).values
    divisors = bool(np.array_equal(np.rint(d.real).astype(np.int64)[1:], _divisor_counts(n)[1:]) and np.all(d.imag == 0))
    ones = bool(np.all(mz.dirichlet_coeffs(mz.builtin_spec("riemann"), n).values[1:] == 1))
    m = np.arange(1, 1001)
    chi = np.where(m % 2 == 0, 0, np.where(m % 4 == 1, 1, -1))
    chi_ok = bool(np.array_equal(mz.dirichlet_coeffs(mz.builtin_spec("dirichlet_chi4"), 1000).values[1:].real, chi))
    mult = True
    for name in mz.BUILTIN_NAMES:
        b = mz.dirichlet_coeffs(mz.builtin_spec(name), 1000).values
        for a in range(2, 32):
            for c in range(2, 1000 // a + 1):
                if math.gcd(a, c) == 1 and abs(b[a * c] - b[a] * b[c]) > 1e-9 * max(1, abs(b[a * c])):
                    mult = False
    ok = divisors and ones and chi_ok and mult
    return ok, f"divisor function {divisors}, riemann ones {ones}, chi4 {chi_ok}, multiplicative {mult}"


def check_kappa(ctx):
    r = mz.builtin_spec("riemann")
    c = mz.builtin_spec("dirichlet_chi4")
    xs = (1e2, 1e4, 1e6)
    ok_r = all(mz.kappa_statistic(r, x) == 1.0 for x in xs)
    ok_c = all(mz.kappa_statistic(c, x) == 1 - 1 / len(primes_up_to(int(x))) for x in xs)
    return ok_r and ok_c, f"riemann exact {ok_r}; chi4 = 1 - 1/pi(x) exact {ok_c}"


def check_half_plane(ctx):
    s = 2.0 + 3.0j
    worst = 0.0
    ok = True
    for name in mz.BUILTIN_NAMES:
        spec = mz.builtin_spec(name)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", zeta.AccuracyWarning)  # zeta(2s) lands right of the validated box
            exact = mz.analytic_eval(spec, s)
        e = abs(mz.euler_product_eval(spec, s, 2000) - exact) / abs(exact)
        sr = abs(mz.series_eval(spec, s, 4000) - exact)
        ok &= e <= mz.euler_tail_bound(spec, s.real, 2000) and sr <= mz.series_tail_bound(spec, s.real, 4000)
        worst = max(worst, e)
    return bool(ok), f"Euler product and series within their tail bounds at s = 2+3i (worst rel {worst:.1e})"


def check_cutoff(ctx):
    c = smoothing.DEFAULT_CUTOFF
    x = np.linspace(0, 3, 10**4)
    v = smoothing.psi(c, x)
    inv = bool(np.all(v[x <= 1] == 1) and np.all(v[x >= 2] == 0) and np.all((v >= 0) & (v <= 1)) and np.all(np.diff(v) <= 0))
    res = abs(1e-3 * smoothing.mellin_psi(c, 1e-3) - 1)
    sig = np.array([0.1, 0.4, 0.8])[:, None] + 1j * np.array([0.0, 7.0, 60.0])[None, :]
    cons = float(np.max(np.abs(smoothing.mellin_direct(c, sig) - smoothing.mellin_by_parts(c, sig))))
    inv_dev = max(smoothing.mellin_inversion_check(c, x0, 1.0, 200.0) for x0 in (0.5, 1.5))
    ok = inv and res < 1e-2 and cons < 1e-8 and inv_dev < 1e-4
    return ok, f"psi invariants {inv}; s psi_hat(s) - 1 at 1e-3: {res:.1e}; formulas agree {cons:.1e}; inversion {inv_dev:.1e}"


def check_continuation(ctx):
    rng = np.random.default_rng(12345)
    worst = 0.0
    ok = True
    for name in ("riemann", "zeta_squared", "zeta_times_zeta2s"):
        spec = mz.builtin_spec(name)
        g = mz.generic_copy(spec)
        lo = max(0.6, spec.rho + 0.1)
        s = rng.uniform(lo, 0.9, 10) + 1j * rng.uniform(50, 500, 10) * rng.choice([-1, 1], 10)
        val, err = smoothing.continued_eval(g, s, 1e4)
        exact = mz.analytic_eval(spec, s)
        dev = np.abs(val - exact)
        ok &= bool(np.all(dev <= np.maximum(1e-3, err)))
        worst = max(worst, float(dev.max()))
    chi = mz.builtin_spec("dirichlet_chi4")
    strip = np.array([-0.5 + 3j, 0.2 - 40j])
    smoothing.phi_X(chi, strip, 100)  # entire: must not raise
    return ok, f"pole-corrected truncation vs closed forms, worst deviation {worst:.2e}"


def check_random_model(ctx):
    ph = random_model.sample_phases(2024, primes_up_to(1000))
    vals = {n: random_model.omega_n(ph, n) for n in range(1, 1001)}
    unit = all(abs(abs(v) - 1) < 1e-14 for v in vals.values())
    mult = all(
        abs(vals[a * b] - vals[a] * vals[b]) < 1e-12
        for a in range(1, 32)
        for b in range(1, 1000 // a + 1)
        if math.gcd(a, b) == 1
    )
    r = mz.builtin_spec("riemann")
    triv = random_model.trivial_phases(primes_up_to(200))
    reduce = random_model.phi_X_random(r, 0.75 + 3j, 100, phases=triv) == smoothing.phi_X(r, 0.75 + 3j, 100)
    det = random_model.sample_phases(7, [2, 3, 5]) == random_model.sample_phases(7, [5, 3, 2])
    return unit and mult and reduce and det, f"unit {unit}, multiplicative {mult}, trivial phases {reduce}, seeded {det}"


def check_pairs(ctx):
    table = ctx["zeros"]
    T = table.gamma(2000)
    g = table.gammas[: table.count_upto(T)]
    ok = True
    for c in (0.5, 1.0, 2.0):
        brute = int(np.count_nonzero(np.abs(g[:, None] - g[None, :]) < c / math.log(T)))
        ok &= paircorr.weak_sum(table, T, c).count == brute
    counts = [paircorr.weak_sum(table, T, c).count for c in (0.25, 0.5, 1, 2, 4)]
    mono = counts == sorted(counts)
    hist = paircorr.pair_correlation_histogram(table, T, -2.0, 2.0, 16)
    d = (g[:, None] - g[None, :]) * math.log(T) / (2 * math.pi)
    total = int(np.count_nonzero((d >= -2) & (d <= 2)))
    sums = hist.total == total and hist.diagonal_bin == 8
    return bool(ok and mono and sums), f"sweep equals brute force {ok}, monotone in c {mono}, histogram sums {sums}"


def check_phases(ctx):
    table = ctx["zeros"]
    N = min(5000, table.k_max // 2)
    rep = paircorr.phase_equidistribution(table, 1.0, (2, 3, 5), N)
    worst = max(rep.ks.values())
    return worst < 0.05 and rep.box_discrepancy < 0.1, f"N = {N}: KS {', '.join(f'{rep.ks[p]:.4f}' for p in rep.primes)}; box {rep.box_discrepancy:.4f}"


def check_scan(ctx):
    table = ctx["zeros"]
    r = mz.builtin_spec("riemann")
    K = universality.CompactGrid(0.6, 0.8, 0.0, 1.0, 0.05)
    N = 200
    j = 250
    target = universality.TargetFunction.self_shift(r, j, table)
    eps = (0.0, 0.05, 0.5, 1.0, 1e6)
    rep = universality.universality_scan(r, target, K, 1.0, N, eps, table)
    again = universality.universality_scan(r, target, K, 1.0, N, eps, table)
    perm = universality.universality_scan(r, target, K, 1.0, N, eps[::-1], table)
    dens = rep.densities
    rng_ok = all(0 <= d <= 1 for d in dens) and list(dens) == sorted(dens)
    hit = rep.D[j - N] == 0 and all(d >= 1 / (N + 1) for d in dens)
    det = rep.text() == again.text()
    perm_ok = tuple(perm.densities[::-1]) == dens
    g = table.gamma(300)
    fine = universality.discrepancy(r, target, K.refined(), 1.0, g)
    coarse = universality.discrepancy(r, target, K, 1.0, g)
    refine = fine >= coarse
    ok = rng_ok and hit and det and perm_ok and refine
    return ok, f"densities {rng_ok}, self-shift hit {hit}, reproducible {det}, permutation {perm_ok}, refinement {refine}"


CHECKS = (
    ("zeta evaluation", check_zeta),
    ("hardy Z", check_hardy),
    ("zero table", check_zero_table),
    ("dirichlet coefficients", check_coefficients),
    ("prime mean-square statistic", check_kappa),
    ("half-plane evaluators", check_half_plane),
    ("smooth cutoff and Mellin transform", check_cutoff),
    ("pole-corrected continuation", check_continuation),
    ("random phases", check_random_model),
    ("pair counts", check_pairs),
    ("phase equidistribution", check_phases),
    ("universality scan", check_scan),
)


def run_selfcheck(out=".", quick=False, log=print):
    """Run every check; returns True when all pass."""
    start = time.monotonic()
    k_max = 2000 if quick else 10000
    ctx = {"out": out, "zeros": zeros.compute_zeros(k_max)}
    log(f"zero table of {k_max} built in {time.monotonic() - start:.1f}s")
    results = []
    for name, fn in CHECKS:
        t0 = time.monotonic()
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # a crash in one check should not hide the others
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(ok)
        log(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.monotonic() - t0:.1f}s)")
    log(f"selfcheck {'passed' if all(results) else 'FAILED'} in {time.monotonic() - start:.1f}s")
    return all(results)
