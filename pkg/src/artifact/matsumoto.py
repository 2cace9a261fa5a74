"""Matsumoto-class zeta-functions: Euler-product specs, coefficients, diagnostics.

A spec describes ``phi(s) = prod_n prod_j (1 - a_n^(j) p_n^{-f(j,n) s})^{-1}``
through a deterministic ``factor_rule(n, p)`` returning the g(n) pairs
``(a, f)`` for the n-th prime p.  Builtin specs also carry a closed form
for evaluation in the strip; generic specs are continued with the
pole-corrected smoothed truncation from :mod:`artifact.smoothing`.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import num
from .dirichlet import dirichlet_points, integer_logs
from .errors import (
    CoefficientOverflowError,
    DomainError,
    NoContinuationError,
    PoleError,
    ValidationError,
)
from .primes import SIEVE_LIMIT, primes_up_to
from .quadrature import integrate
from .zeta import as_complex_array, hurwitz_zeta_grid, zeta_grid

EULER_GAMMA = 0.57721566490153286061
SINGULAR_FACTOR = 1e-12
POLE_RADIUS = 1e-8


@dataclass(frozen=True)
class Pole:
    """A pole ``z`` with residue ``r`` (coefficient of 1/(s-z)).

    Order-2 poles also carry ``leading``, the coefficient of 1/(s-z)^2.
    """

    location: complex
    residue: complex
    order: int = 1
    leading: complex = 0.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValidationError("only simple and double poles are supported")


@dataclass(frozen=True)
class LocalFactor:
    prime_index: int
    prime: int
    terms: tuple  # ((a, f), ...)

    @property
    def g(self):
        return len(self.terms)

    def check(self, alpha, beta, C1):
        """Enforce g(n) <= C1 p^alpha and |a| <= p^beta."""
        p = self.prime
        if self.g < 1:
            raise ValidationError(f"local factor at p={p} has no terms")
        if self.g > C1 * p**alpha * (1 + 1e-12):
            raise ValidationError(f"g({self.prime_index}) = {self.g} exceeds C1*p^alpha at p={p}")
        for a, f in self.terms:
            if abs(a) > p**beta * (1 + 1e-12):
                raise ValidationError(f"|a| = {abs(a):.6g} exceeds p^beta at p={p}")
            if int(f) != f or f < 1:
                raise ValidationError(f"exponent f = {f} is not a positive integer")


@dataclass(frozen=True)
class MatsumotoSpec:
    """A zeta-function of the Matsumoto class.

    ``closed_form(u, tau)`` evaluates phi on the lattice ``u_r + i tau_c``; it is
    ``None`` for generic specs.
    """

    name: str
    alpha: float
    beta: float
    C1: float
    rho: float
    poles: tuple
    growth_exponent: float
    factor_rule: Callable
    closed_form: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.C1 <= 0:
            raise ValidationError("need alpha, beta >= 0 and C1 > 0")
        lo, hi = self.alpha + self.beta + 0.5, self.alpha + self.beta + 1
        if not lo <= self.rho < hi:
            raise ValidationError(f"rho = {self.rho} outside [{lo}, {hi})")
        for pole in self.poles:
            if complex(pole.location).real == self.rho:
                raise ValidationError("a pole lies on the line sigma = rho")

    @property
    def abscissa(self):
        """alpha + beta + 1: absolute convergence to the right of it."""
        return self.alpha + self.beta + 1

    def strip_poles(self):
        """Poles with real part >= rho, the ones the continuation corrects for."""
        return tuple(p for p in self.poles if complex(p.location).real >= self.rho)

    def in_strip(self, s):
        sig = np.asarray(s).real
        return (sig > self.rho) & (sig < self.abscissa)

    def local_factor(self, n, p):
        terms = tuple((complex(a), int(f)) for a, f in self.factor_rule(n, p))
        factor = LocalFactor(n, p, terms)
        factor.check(self.alpha, self.beta, self.C1)
        return factor

    def local_factors(self, P_max):
        return [self.local_factor(n, int(p)) for n, p in enumerate(primes_up_to(P_max), start=1)]


def generic_copy(spec):
    """The same Euler product with the closed form stripped."""
    return dataclasses.replace(spec, name=spec.name + "_generic", closed_form=None)


# ---------------------------------------------------------------- builtins


def _chi4(p):
    return 0 if p == 2 else (1 if p % 4 == 1 else -1)


def _zeta_cf(u, tau):
    return zeta_grid(u, tau)


def _zeta_squared_cf(u, tau):
    return zeta_grid(u, tau) ** 2


def _zeta_2s_cf(u, tau):
    return zeta_grid(2 * np.asarray(u), 2 * np.asarray(tau))


def _chi4_cf(u, tau):
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    s = u[:, None] + 1j * tau[None, :]
    diff = hurwitz_zeta_grid(u, tau, 0.25) - hurwitz_zeta_grid(u, tau, 0.75)
    return np.exp(-s * math.log(4.0)) * diff


def _zeta_zeta2s_cf(u, tau):
    return _zeta_cf(u, tau) * _zeta_2s_cf(u, tau)


def _rule_riemann(n, p):
    return ((1, 1),)


def _rule_zeta_squared(n, p):
    return ((1, 1), (1, 1))


def _rule_zeta_2s(n, p):
    return ((1, 2),)


def _rule_chi4(n, p):
    return ((_chi4(p), 1),)


def _rule_zeta_zeta2s(n, p):
    return ((1, 1), (1, 2))


_ZETA_HALF = -1.4603545088095868


def _builtins():
    return {
        "riemann": MatsumotoSpec(
            "riemann", 0.0, 0.0, 1.0, 0.5, (Pole(1.0, 1.0),), 0.5, _rule_riemann, _zeta_cf
        ),
        "zeta_squared": MatsumotoSpec(
            "zeta_squared",
            0.0,
            0.0,
            2.0,
            0.5,
            (Pole(1.0, 2 * EULER_GAMMA, order=2, leading=1.0),),
            1.0,
            _rule_zeta_squared,
            _zeta_squared_cf,
        ),
        "zeta_of_2s": MatsumotoSpec(
            "zeta_of_2s", 0.0, 0.0, 1.0, 0.55, (Pole(0.5, 0.5),), 0.5, _rule_zeta_2s, _zeta_2s_cf
        ),
        "dirichlet_chi4": MatsumotoSpec(
            "dirichlet_chi4", 0.0, 0.0, 1.0, 0.5, (), 0.5, _rule_chi4, _chi4_cf
        ),
        "zeta_times_zeta2s": MatsumotoSpec(
            "zeta_times_zeta2s",
            0.0,
            0.0,
            2.0,
            0.55,
            (Pole(1.0, math.pi**2 / 6), Pole(0.5, 0.5 * _ZETA_HALF)),
            1.0,
            _rule_zeta_zeta2s,
            _zeta_zeta2s_cf,
        ),
    }


BUILTIN_NAMES = tuple(_builtins())


def builtin_spec(name):
    specs = _builtins()
    if name not in specs:
        raise ValidationError(f"unknown builtin spec {name!r}; choose from {', '.join(specs)}")
    return specs[name]


# ------------------------------------------------------------ coefficients


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Dirichlet coefficients; ``values[n]`` is b_n and ``values[0]`` is unused (0)."""

    spec_name: str
    values: np.ndarray

    @property
    def N(self):
        return self.values.size - 1

    def __getitem__(self, n):
        if not 1 <= n <= self.N:
            raise IndexError(n)
        return self.values[n]

    def growth_ratio(self, exponent, eps=0.1, min_prime=100):
        """max |b_n| / n^(exponent+eps) over n whose prime factors all exceed min_prime."""
        n = np.arange(self.N + 1)
        ok = n > 1
        for p in primes_up_to(min_prime):
            ok &= n % p != 0
        if not ok.any():
            return 0.0
        return float(np.max(np.abs(self.values[ok]) / n[ok] ** (exponent + eps)))

    def to_csv(self, path, header_lines=()):
        rows = [f"# {h}" for h in header_lines] + ["n,re,im"]
        rows += [f"{n},{num(b.real)},{num(b.imag)}" for n, b in enumerate(self.values[1:], start=1)]
        Path(path).write_text("\n".join(rows) + "\n")


def local_series(terms, degree):
    """Coefficients c_0..c_degree of 1 / prod_j (1 - a_j x^f_j)."""
    poly = np.zeros(degree + 1, dtype=complex)
    poly[0] = 1.0
    for a, f in terms:
        if f <= degree:
            shifted = np.zeros_like(poly)
            shifted[f:] = poly[:-f] * a
            poly = poly - shifted
    inv = np.zeros(degree + 1, dtype=complex)
    inv[0] = 1.0
    for m in range(1, degree + 1):
        inv[m] = -np.dot(poly[1 : m + 1], inv[m - 1 :: -1][:m])
    return inv


@lru_cache(maxsize=32)
def _coeffs_cached(spec, N, cap):
    b = np.zeros(N + 1, dtype=complex)
    b[1:] = 1.0
    for idx, p in enumerate(primes_up_to(N), start=1):
        p = int(p)
        degree = 1
        while p ** (degree + 1) <= N:
            degree += 1
        c = local_series(spec.local_factor(idx, p).terms, degree)
        if degree == 1:
            b[p::p] *= c[1]
            continue
        mult = np.arange(p, N + 1, p)
        v = np.ones(mult.size, dtype=np.int64)
        q = p * p
        while q <= N:
            v[mult % q == 0] += 1
            q *= p
        b[mult] *= c[v]
    if np.any(np.abs(b) > cap):
        n = int(np.argmax(np.abs(b) > cap))
        raise CoefficientOverflowError(
            f"|b_{n}| = {abs(b[n]):.3g} exceeds cap {cap:.3g} for spec {spec.name}"
        )
    b.flags.writeable = False
    return b


def dirichlet_coeffs(spec, N, cap=None):
    """Coefficients b_1..b_N of phi(s) = sum b_n n^{-s}.

    The local coefficients at each prime come from power-series inversion of
    the Euler factor truncated at degree floor(log_p N); b_n is then assembled
    multiplicatively.  ``cap`` defaults to 10^(alpha+beta+2) * N.
    """
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    if cap is None:
        cap = 10 ** (spec.alpha + spec.beta + 2) * N
    return CoefficientTable(spec.name, _coeffs_cached(spec, N, float(cap)))


def _majorant(spec):
    def rule(n, p):
        return tuple((abs(complex(a)), f) for a, f in spec.factor_rule(n, p))

    return dataclasses.replace(spec, name=spec.name + "_majorant", factor_rule=rule, closed_form=None)


# ------------------------------------------------------- half-plane evaluators


def _require_half_plane(spec, s):
    if np.any(np.asarray(s).real <= spec.abscissa):
        raise DomainError(
            f"{spec.name}: Euler product and series need sigma > {spec.abscissa}"
        )


def _factor_arrays(spec, P_max):
    primes, a, f = [], [], []
    for factor in spec.local_factors(P_max):
        for aj, fj in factor.terms:
            primes.append(factor.prime)
            a.append(aj)
            f.append(fj)
    return np.array(primes, dtype=float), np.array(a, dtype=complex), np.array(f, dtype=float)


def euler_product_eval(spec, s, P_max):
    """Partial Euler product over primes p <= P_max."""
    s = as_complex_array(s)
    _require_half_plane(spec, s)
    p, a, f = _factor_arrays(spec, P_max)
    if p.size == 0:
        return np.ones_like(s)[()] if s.ndim else 1.0 + 0j
    x = a * np.exp(-np.multiply.outer(s, f * np.log(p)))
    one_minus = 1.0 - x
    if np.any(np.abs(one_minus) < SINGULAR_FACTOR):
        raise DomainError("an Euler factor is numerically singular")
    val = np.exp(-np.sum(np.log1p(-x), axis=-1))
    return val[()] if s.ndim else complex(val)


def euler_tail_bound(spec, sigma, P_max):
    """Upper bound for |phi(s) - partial product| / |partial product| at Re s = sigma.

    Uses -log(1-x) <= x/(1-x), g <= C1 p^alpha, |a| p^{-f sigma} <= p^{beta-sigma}
    and an integral bound for the remaining sum over integers > P_max.
    """
    u = sigma - spec.alpha - spec.beta
    if u <= 1:
        raise DomainError("tail bound needs sigma > alpha + beta + 1")
    start = max(int(P_max) + 1, 2)
    x_max = start ** (spec.beta - sigma)
    tail_sum = start ** (-u) + start ** (1 - u) / (u - 1)
    E = spec.C1 * tail_sum / (1 - x_max)
    return math.expm1(E)


def series_eval(spec, s, N, coeffs=None):
    """Partial sum of the Dirichlet series, n <= N."""
    s = as_complex_array(s)
    _require_half_plane(spec, s)
    if coeffs is None:
        coeffs = dirichlet_coeffs(spec, N)
    b = coeffs.values[1 : N + 1]
    val = dirichlet_points(b, integer_logs(N), np.atleast_1d(s))
    return val.reshape(s.shape)[()] if s.ndim else complex(val[0])


def series_tail_bound(spec, sigma, N):
    """Upper bound for sum_{n>N} |b_n| n^{-sigma}.

    |b_n| is dominated by the coefficients B_n of the majorant product with
    |a| in place of a, so the tail is at most Phi(sigma) - sum_{n<=N} B_n n^{-sigma},
    and Phi(sigma) is bounded by its partial Euler product times the tail factor.
    """
    _require_half_plane(spec, sigma)
    major = _majorant(spec)
    B = dirichlet_coeffs(major, N).values[1:].real
    head = math.fsum(B * np.arange(1, N + 1, dtype=float) ** (-sigma))
    phi_upper = euler_product_eval(major, sigma, N).real * (1 + euler_tail_bound(major, sigma, N))
    return max(phi_upper - head, 0.0) + 1e-14 * phi_upper


# --------------------------------------------------------- strip evaluation


def _check_poles(spec, s):
    for pole in spec.poles:
        if np.any(np.abs(np.asarray(s) - pole.location) < POLE_RADIUS):
            raise PoleError(f"{spec.name}: point within {POLE_RADIUS} of pole {pole.location}")


def analytic_eval_with_error(spec, s, X=1e4, tolerance=1e-3):
    """phi(s) and an error estimate (0 for closed forms).

    Generic specs go through the pole-corrected smoothed truncation; when its
    error estimate exceeds 10x ``tolerance`` a NoContinuationError is raised.
    """
    s = as_complex_array(s)
    _check_poles(spec, s)
    if spec.closed_form is not None:
        flat = np.atleast_1d(s).ravel()
        vals = spec.closed_form(flat, np.zeros(1))[:, 0].reshape(s.shape)
        return (vals[()] if s.ndim else complex(vals)), 0.0
    if np.any(np.asarray(s).real <= spec.rho):
        raise DomainError(f"{spec.name}: generic continuation requires sigma > rho = {spec.rho}")
    from .smoothing import continued_eval

    value, err = continued_eval(spec, s, X)
    worst = float(np.max(err))
    if worst > 10 * tolerance:
        raise NoContinuationError(
            f"{spec.name}: continuation error estimate {worst:.3g} exceeds "
            f"10 x tolerance {tolerance:g} at X = {X:g}"
        )
    return value, err


def analytic_eval(spec, s, X=1e4, tolerance=1e-3):
    """phi(s) in the strip rho < sigma or the half-plane of convergence."""
    return analytic_eval_with_error(spec, s, X, tolerance)[0]


def evaluate_grid(spec, u, tau, X=1e4):
    """phi on the lattice u_r + i tau_c: closed form, else continued truncation."""
    if spec.closed_form is not None:
        return spec.closed_form(u, tau)
    from .smoothing import continued_eval_grid

    return continued_eval_grid(spec, u, tau, X)[0]


# ------------------------------------------------------------- diagnostics


def kappa_statistic(spec, x):
    """(1/pi(x)) sum_{p<=x} |sum_{j: f=1} a_j|^2 p^{-2(alpha+beta)}."""
    if x < 2:
        raise DomainError("kappa_statistic needs x >= 2")
    if x > SIEVE_LIMIT:
        raise ValidationError(f"kappa_statistic limited to x <= {SIEVE_LIMIT:.0e}")
    weight = 2 * (spec.alpha + spec.beta)
    parts = []
    for factor in spec.local_factors(int(x)):
        inner = sum((a for a, f in factor.terms if f == 1), 0j)
        parts.append(abs(inner) ** 2 * (factor.prime ** (-weight) if weight else 1.0))
    return math.fsum(parts) / len(parts)


@dataclass(frozen=True)
class MeanSquareReport:
    sigma: float
    T_values: tuple
    ratios: tuple

    @property
    def spread(self):
        """max/min of the reported ratios; stays O(1) when the mean square is O(T)."""
        return max(self.ratios) / min(self.ratios)


def _line_values(spec, sigma, t, X):
    return evaluate_grid(spec, np.array([complex(sigma)]), t, X)[0]


def mean_square_diagnostic(spec, sigma, T, X=1e4, rtol=1e-8):
    """(1/T') int_{-T'}^{T'} |phi(sigma+it)|^2 dt for T' in (T/4, T/2, T)."""
    if not T > 0:
        raise DomainError("mean_square_diagnostic needs T > 0")
    pole_re = min((complex(p.location).real for p in spec.strip_poles()), default=math.inf)
    if not spec.rho <= sigma < pole_re:
        raise DomainError(f"sigma must satisfy rho <= sigma < {pole_re}")
    T_values = (T / 4, T / 2, T)
    ratios = []
    for Tv in T_values:
        val, _ = integrate(
            lambda t: np.abs(_line_values(spec, sigma, t, X)) ** 2,
            -Tv,
            Tv,
            rtol=rtol,
            atol=1e-10,
            panels=max(2, int(math.ceil(2 * Tv))),
        )
        ratios.append(float(val) / Tv)
    return MeanSquareReport(float(sigma), T_values, tuple(ratios))


@dataclass(frozen=True)
class GrowthReport:
    slope: float
    intercept: float
    passed: bool


def growth_diagnostic(spec, sigma, t_samples, X=1e4):
    """Least-squares slope of log|phi(sigma+it)| against log t."""
    t = np.asarray(t_samples, dtype=float)
    if t.size < 2 or np.ptp(np.log(t)) == 0:
        raise ValidationError("degenerate regression: need at least two distinct t samples")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValidationError("t_samples must be positive and increasing")
    if sigma <= spec.rho:
        raise DomainError("growth_diagnostic needs sigma > rho")
    y = np.log(np.abs(_line_values(spec, sigma, t, X)))
    slope, intercept = np.polyfit(np.log(t), y, 1)
    return GrowthReport(float(slope), float(intercept), bool(slope <= spec.growth_exponent + 0.5))


# --------------------------------------------------------------- spec files


def _parse_terms(text):
    terms = []
    for chunk in text.replace(")", ") ").split():
        chunk = chunk.strip().strip("()")
        if not chunk:
            continue
        a, f = chunk.split(",")
        terms.append((complex(a.replace(" ", "")), int(f)))
    return tuple(terms)


def _parse_poles(text):
    poles = []
    for item in filter(None, (x.strip() for x in text.split(";"))):
        parts = item.split(":")
        loc, res = complex(parts[0]), complex(parts[1])
        order = int(parts[2]) if len(parts) > 2 else 1
        leading = complex(parts[3]) if len(parts) > 3 else 0.0
        poles.append(Pole(loc, res, order, leading))
    return tuple(poles)


class _TableRule:
    """Factor rule backed by an inline table of local factors."""

    def __init__(self, table, default):
        self.table = table
        self.default = default

    def __call__(self, n, p):
        if p in self.table:
            return self.table[p]
        if self.default is None:
            raise ValidationError(f"spec file has no local factor for p = {p}")
        return self.default


def load_spec(path):
    """Read a key = value spec file.

    Recognized keys: name, alpha, beta, C1, rho, poles, growth_exponent,
    builtin, closed_form (yes/no), ``factor <p>`` and ``factor default``.
    Local factors are written as ``(a,f) (a,f) ...``; poles as
    ``location:residue[:order[:leading]]`` separated by ``;``.
    """
    fields, table, default = {}, {}, None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            if key.startswith("factor "):
                which = key.split()[1]
                if which == "default":
                    default = _parse_terms(value)
                else:
                    table[int(which)] = _parse_terms(value)
            else:
                fields[key] = value
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if "builtin" in fields:
        spec = builtin_spec(fields["builtin"])
        if fields.get("closed_form", "yes").lower() in ("no", "false", "0"):
            spec = generic_copy(spec)
        return spec
    missing = [k for k in ("name", "alpha", "beta", "C1", "rho") if k not in fields]
    if missing:
        raise ValidationError(f"{path}: missing fields {', '.join(missing)}")
    if not table and default is None:
        raise ValidationError(f"{path}: no local factors given")
    return MatsumotoSpec(
        name=fields["name"],
        alpha=float(fields["alpha"]),
        beta=float(fields["beta"]),
        C1=float(fields["C1"]),
        rho=float(fields["rho"]),
        poles=_parse_poles(fields.get("poles", "")),
        growth_exponent=float(fields.get("growth_exponent", 1.0)),
        factor_rule=_TableRule(table, default),
    )
