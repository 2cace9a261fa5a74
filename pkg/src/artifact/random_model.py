"""Random multiplicative phases and the random truncated model.

Each prime p carries an independent uniform phase omega(p) = exp(2 pi i u_p),
extended to integers by omega(n) = prod omega(p)^{nu(n;p)}.  Phases are drawn
from numpy's Philox counter-based generator keyed by the two 64-bit words
(seed, stream), so sample j of an ensemble is reproducible on its own.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .config import num
from .errors import MissingPrimeError, ValidationError
from .matsumoto import dirichlet_coeffs
from .primes import primes_up_to, valuation
from .dirichlet import integer_logs, unit_phases
from .smoothing import DEFAULT_CUTOFF, require_truncation_height, continued_eval, psi, smoothed_coefficients
from .zeta import as_complex_array

TWO_PI = 2.0 * math.pi
_MASK64 = (1 << 64) - 1


def _generator(seed, stream=0):
    key = (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class PhaseAssignment:
    seed: int
    primes: np.ndarray  # sorted
    angles: np.ndarray  # omega(p) = exp(i angle)
    stream: int = 0
    _index: dict = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {int(p): i for i, p in enumerate(self.primes)})

    def __eq__(self, other):
        if not isinstance(other, PhaseAssignment):
            return NotImplemented
        return np.array_equal(self.primes, other.primes) and np.array_equal(self.angles, other.angles)

    def angle(self, p):
        try:
            return float(self.angles[self._index[int(p)]])
        except KeyError:
            raise MissingPrimeError(f"no phase assigned to the prime {int(p)}") from None

    def omega(self, p):
        return complex(np.exp(1j * self.angle(p)))

    def covers(self, n_max):
        ps = primes_up_to(n_max)
        return all(int(p) in self._index for p in ps)


def sample_phases(seed, primes, stream=0):
    """Independent uniform phases for each prime; u_p is drawn in increasing-p order."""
    primes = np.asarray(primes, dtype=np.int64)
    if primes.size == 0:
        raise ValidationError("need at least one prime")
    order = np.sort(primes)
    if np.any(np.diff(order) == 0):
        dup = int(order[1:][np.diff(order) == 0][0])
        raise ValidationError(f"prime {dup} listed more than once")
    u = _generator(seed, stream).random(order.size)
    order.flags.writeable = False
    angles = TWO_PI * u
    angles.flags.writeable = False
    return PhaseAssignment(int(seed), order, angles, int(stream))


def trivial_phases(primes):
    primes = np.sort(np.asarray(primes, dtype=np.int64))
    return PhaseAssignment(0, primes, np.zeros(primes.size))


def omega_n(phases, n):
    """Multiplicative extension omega(n); omega(1) = 1."""
    n = int(n)
    if n < 1:
        raise ValidationError("omega(n) needs n >= 1")
    total = 0.0
    m, p = n, 2
    while p * p <= m:
        while m % p == 0:
            total += phases.angle(p)
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        total += phases.angle(m)
    return complex(np.exp(1j * total))


@dataclass(frozen=True)
class _PhaseBasis:
    """nu(n;p) for n = 1..n_max as a (primes x n) matrix."""

    primes: np.ndarray
    nu: np.ndarray


def _phase_basis(n_max):
    ps = primes_up_to(n_max)
    n = np.arange(1, n_max + 1)
    nu = np.zeros((ps.size, n_max))
    for i, p in enumerate(ps):
        nu[i, p - 1 :: p] = valuation(n[p - 1 :: p], int(p))
    return _PhaseBasis(ps, nu)


def _angles_for(phases_list, basis):
    rows = []
    for ph in phases_list:
        missing = np.setdiff1d(basis.primes, ph.primes)
        if missing.size:
            raise MissingPrimeError(f"no phase assigned to the prime {int(missing[0])}")
        idx = np.searchsorted(ph.primes, basis.primes)
        rows.append(ph.angles[idx])
    return np.array(rows)


def phi_X_random(spec, s, X, c=DEFAULT_CUTOFF, phases=None):
    """sum_n b_n omega(n) psi(n/X) n^{-s}."""
    require_truncation_height(X)
    s_arr = as_complex_array(s)
    w = smoothed_coefficients(spec, X, c)
    basis = _phase_basis(w.size)
    ang = _angles_for([phases], basis)[0] @ basis.nu
    n = np.arange(1, w.size + 1)
    flat = np.atleast_1d(s_arr).ravel()
    log_ld = integer_logs(w.size)
    terms = np.exp(-np.multiply.outer(flat.real, np.log(n)) + 1j * ang) * unit_phases(flat.imag, log_ld)
    vals = terms @ w
    return vals.reshape(s_arr.shape)[()] if s_arr.ndim else complex(vals[0])


def random_ensemble(spec, s0, X, c, sample_count, seed, chunk=256):
    """phi_X(s0, omega_j) for j = 0..sample_count-1, omega_j from stream j."""
    if sample_count < 1:
        raise ValidationError("sample_count must be positive")
    require_truncation_height(X)
    w = smoothed_coefficients(spec, X, c)
    basis = _phase_basis(w.size)
    n = np.arange(1, w.size + 1)
    s0 = complex(s0)
    base = w * np.exp(-s0.real * np.log(n)) * unit_phases([s0.imag], integer_logs(w.size))[0]
    out = np.empty(sample_count, dtype=complex)
    for start in range(0, sample_count, chunk):
        js = range(start, min(start + chunk, sample_count))
        theta = np.array([TWO_PI * _generator(seed, j).random(basis.primes.size) for j in js])
        out[start : start + len(js)] = np.exp(1j * (theta @ basis.nu)) @ base
    return out


def orthogonality_moments(spec, s0, X, c=DEFAULT_CUTOFF):
    """(mean, second moment, variance) of phi_X(s0, omega) from omega(n) orthogonality."""
    w = smoothed_coefficients(spec, X, c)
    n = np.arange(1, w.size + 1)
    terms = np.abs(w) ** 2 * n ** (-2.0 * complex(s0).real)
    mean = complex(w[0])
    return mean, float(math.fsum(terms)), float(math.fsum(terms[1:]))


def random_tail_second_moment(spec, sigma, X, c=DEFAULT_CUTOFF, extent=64):
    """sum_{n <= extent X} |b_n|^2 (1 - psi(n/X))^2 n^{-2 sigma}: truncation budget of the random model."""
    n_max = int(extent * X)
    b = dirichlet_coeffs(spec, n_max).values[1:]
    n = np.arange(1, n_max + 1)
    return float(math.fsum(np.abs(b) ** 2 * (1 - psi(c, n / X)) ** 2 * n ** (-2.0 * sigma)))


def _ks(a, b):
    return float(stats.ks_2samp(a, b).statistic)


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    spec_name: str
    s0: complex
    h: float
    N: int
    X: float
    seed: int
    k: np.ndarray
    gammas: np.ndarray
    sample_a: np.ndarray
    sample_b: np.ndarray
    ks_re: float
    ks_im: float
    ks_abs: float
    shift_error_budget: float
    random_tail_budget: float
    predicted_mean_b: complex
    predicted_second_moment_b: float
    predicted_var_b: float

    @property
    def mean_a(self):
        return complex(self.sample_a.mean())

    @property
    def mean_b(self):
        return complex(self.sample_b.mean())

    @property
    def var_a(self):
        return float(np.var(self.sample_a))

    @property
    def var_b(self):
        return float(np.var(self.sample_b))

    @property
    def second_moment_b(self):
        return float(np.mean(np.abs(self.sample_b) ** 2))

    @property
    def second_moment_stderr(self):
        m = np.abs(self.sample_b) ** 2
        return float(np.std(m, ddof=1) / math.sqrt(m.size)) if m.size > 1 else math.inf

    def summary_lines(self):
        return [
            f"spec={self.spec_name} s0={num(self.s0.real)}{self.s0.imag:+}j h={num(self.h)} N={self.N} X={num(self.X)} seed={self.seed}",
            f"shift sample size={self.sample_a.size} random sample size={self.sample_b.size}",
            f"KS re={self.ks_re:.6f} im={self.ks_im:.6f} abs={self.ks_abs:.6f}",
            f"mean shift={self.mean_a:.6f} random={self.mean_b:.6f} predicted={self.predicted_mean_b:.6f}",
            f"variance shift={self.var_a:.6f} random={self.var_b:.6f} predicted={self.predicted_var_b:.6f}",
            f"second moment random={self.second_moment_b:.6f} predicted={self.predicted_second_moment_b:.6f} stderr={self.second_moment_stderr:.6f}",
            f"truncation budget shift={self.shift_error_budget:.3e} random_tail_second_moment={self.random_tail_budget:.3e}",
        ]

    def to_csv(self, path, header_lines=()):
        head = [f"# {h}" for h in header_lines]
        rows = head + ["# block: shift sample", "k,gamma_k,re,im"]
        rows += [f"{k},{num(g)},{num(v.real)},{num(v.imag)}" for k, g, v in zip(self.k, self.gammas, self.sample_a)]
        rows += ["# block: random sample", "j,re,im"]
        rows += [f"{j},{num(v.real)},{num(v.imag)}" for j, v in enumerate(self.sample_b)]
        rows += [
            "# block: summary",
            "ks_re,ks_im,ks_abs,mean_a_re,mean_a_im,mean_b_re,mean_b_im,var_a,var_b,predicted_var_b",
            ",".join(
                repr(float(x))
                for x in (
                    self.ks_re, self.ks_im, self.ks_abs,
                    self.mean_a.real, self.mean_a.imag, self.mean_b.real, self.mean_b.imag,
                    self.var_a, self.var_b, self.predicted_var_b,
                )
            ),
        ]
        Path(path).write_text("\n".join(rows) + "\n")

    def write_summary(self, path, header_lines=()):
        Path(path).write_text("\n".join([f"# {h}" for h in header_lines] + self.summary_lines()) + "\n")


def ensemble_compare(spec, s0, h, N, X, c=DEFAULT_CUTOFF, sample_count=5000, seed=0, zeros=None):
    """Shift sample {phi at s0 + i h gamma_k : N <= k <= 2N} against the random model.

    Both samples use the same truncation height X; the KS distances are
    reported for the real part, imaginary part and modulus.
    """
    if zeros is None:
        raise ValidationError("ensemble_compare needs a zero table")
    if sample_count < 1:
        raise ValidationError("sample_count must be positive")
    if N < 1 or not h > 0:
        raise ValidationError("need N >= 1 and h > 0")
    s0 = complex(s0)
    gam = np.array(zeros.window(N, 2 * N))
    pts = s0 + 1j * h * gam
    sample_a, err = continued_eval(spec, pts, X, c)
    sample_b = random_ensemble(spec, s0, X, c, sample_count, seed)
    mean, second, var = orthogonality_moments(spec, s0, X, c)
    return EnsembleReport(
        spec_name=spec.name, s0=s0, h=float(h), N=int(N), X=float(X), seed=int(seed),
        k=np.arange(N, 2 * N + 1), gammas=gam, sample_a=sample_a, sample_b=sample_b,
        ks_re=_ks(sample_a.real, sample_b.real),
        ks_im=_ks(sample_a.imag, sample_b.imag),
        ks_abs=_ks(np.abs(sample_a), np.abs(sample_b)),
        shift_error_budget=float(np.mean(err)),
        random_tail_budget=random_tail_second_moment(spec, s0.real, X, c),
        predicted_mean_b=mean, predicted_second_moment_b=second, predicted_var_b=var,
    )
