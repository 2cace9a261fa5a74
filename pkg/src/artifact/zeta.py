"""Riemann and Hurwitz zeta values by Euler-Maclaurin summation.

All evaluators are double precision.  The validated box is
``0.3 <= sigma <= 3, |t| <= 1e4``; points outside it are computed anyway but
raise an :class:`AccuracyWarning`.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli, loggamma

from .dirichlet import dirichlet_grid, log_frequencies, unit_phases
from .errors import AccuracyWarning, DomainError, PoleError, ValidationError

POLE_RADIUS = 1e-8
CORRECTION_TERMS = 20
SIGMA_BOX = (0.3, 3.0)
T_BOX = 1e4
HARDY_IMAG_TOL = 1e-8


@dataclass(frozen=True)
class ComplexPoint:
    """A point ``s = sigma + i t`` with finite components."""

    sigma: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.t)):
            raise ValidationError(f"non-finite point ({self.sigma}, {self.t})")

    @property
    def s(self):
        return complex(self.sigma, self.t)

    def __complex__(self):
        return self.s


def as_complex_array(s):
    """Coerce complex scalars, arrays or ComplexPoints to a complex ndarray."""
    if isinstance(s, ComplexPoint):
        return np.asarray(s.s)
    if isinstance(s, (list, tuple)) and s and isinstance(s[0], ComplexPoint):
        return np.array([p.s for p in s])
    arr = np.asarray(s, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite evaluation point")
    return arr


@lru_cache(maxsize=4)
def _em_coefficients(m):
    b = bernoulli(2 * m)
    return np.array([b[2 * k] / math.factorial(2 * k) for k in range(1, m + 1)])


def default_terms(t_abs):
    """Truncation ``max(20, ceil|t|)`` used by the Euler-Maclaurin evaluator."""
    return max(20, int(math.ceil(t_abs)))


def _grid_terms(t_abs):
    # rounded up to a multiple of 64 so neighbouring shifts share phase tables
    n = default_terms(t_abs)
    return 64 * ((n + 63) // 64)


def _check_box(s):
    sig = s.real
    if (
        np.any(sig < SIGMA_BOX[0])
        or np.any(sig > SIGMA_BOX[1])
        or np.any(np.abs(s.imag) > T_BOX)
    ):
        warnings.warn(
            "zeta evaluated outside the validated box 0.3<=sigma<=3, |t|<=1e4",
            AccuracyWarning,
            stacklevel=3,
        )


def _check_pole(s):
    if np.any(np.abs(s - 1.0) < POLE_RADIUS):
        raise PoleError("zeta has a pole at s = 1")


@lru_cache(maxsize=16)
def _hurwitz_logs(n_terms, a):
    logs = log_frequencies(np.arange(n_terms, dtype=np.longdouble) + np.longdouble(a))
    logs.flags.writeable = False
    return logs


def _em_tail(s, x, m):
    """Euler-Maclaurin remainder of sum_{n>=0} (n+a)^{-s} from x = N + a on."""
    coef = _em_coefficients(m)
    s = np.asarray(s, dtype=complex)
    phase = unit_phases(s.imag.ravel(), log_frequencies([x]))[:, 0].reshape(s.shape)
    x_pow = np.exp(-s.real * math.log(x)) * phase  # x^{-s}
    tail = x * x_pow / (s - 1.0) + 0.5 * x_pow
    # term k: B_2k/(2k)! * s(s+1)...(s+2k-2) * x^{-s-2k+1}
    rising = s * x_pow / x
    tail = tail + coef[0] * rising
    inv_x2 = 1.0 / (x * x)
    for k in range(2, m + 1):
        rising = rising * (s + 2 * k - 3) * (s + 2 * k - 2) * inv_x2
        tail = tail + coef[k - 1] * rising
    return tail


def hurwitz_zeta_grid(u, tau, a=1.0, terms=None, corrections=CORRECTION_TERMS):
    """Hurwitz zeta ``zeta(s, a)`` on the lattice ``s = u_r + i tau_c``.

    ``u`` may be complex: row ``r`` with ``u_r = sigma + i*h`` is the
    horizontal line at height ``h`` shifted by the column heights.
    """
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    s = u[:, None] + 1j * tau[None, :]
    if a == 1.0:
        _check_pole(s)
    _check_box(s)
    n_terms = terms or _grid_terms(np.max(np.abs(s.imag)))
    log_lam = _hurwitz_logs(n_terms, a)
    main = dirichlet_grid(
        np.ones(n_terms), log_lam, u, tau, cache_key=("hurwitz", float(a), n_terms)
    )
    return main + _em_tail(s, n_terms + a, corrections)


def zeta_grid(u, tau, terms=None):
    """Riemann zeta on the lattice ``s = u_r + i tau_c`` (shape (R, C))."""
    return hurwitz_zeta_grid(u, tau, 1.0, terms)


def _em_points(s, a, terms, corrections):
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    order = np.argsort(np.abs(flat.imag), kind="stable")
    chunk = 256
    for i in range(0, flat.size, chunk):
        idx = order[i : i + chunk]
        pts = flat[idx]
        n_terms = terms or default_terms(np.max(np.abs(pts.imag)))
        log_lam = _hurwitz_logs(n_terms, a)
        main = dirichlet_grid(np.ones(n_terms), log_lam, pts, np.zeros(1))[:, 0]
        out[idx] = main + _em_tail(pts, n_terms + a, corrections)
    return out.reshape(s.shape)


def hurwitz_zeta(s, a, terms=None, corrections=CORRECTION_TERMS):
    """Hurwitz zeta ``sum_{n>=0} (n+a)^{-s}`` at arbitrary points."""
    if not 0 < a <= 1:
        raise DomainError("Hurwitz parameter must lie in (0, 1]")
    arr = as_complex_array(s)
    _check_pole(arr)
    _check_box(arr)
    val = _em_points(np.atleast_1d(arr), a, terms, corrections)
    return val.reshape(arr.shape)[()] if arr.ndim else complex(val[0])


def zeta(s, terms=None, corrections=CORRECTION_TERMS):
    """Riemann zeta-function by Euler-Maclaurin summation.

    Parameters
    ----------
    s : complex, ComplexPoint or array_like of complex
    terms : int, optional
        Number of directly summed terms; default ``max(20, ceil|t|)``.
    corrections : int
        Number of Bernoulli correction terms.
    """
    return hurwitz_zeta(s, 1.0, terms, corrections)


def riemann_siegel_theta(t):
    """theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi, with theta(0) = 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("riemann_siegel_theta requires t >= 0")
    val = np.imag(loggamma(0.25 + 0.5j * t_arr)) - 0.5 * t_arr * math.log(math.pi)
    return float(val) if val.ndim == 0 else val


def _rotate(theta, zvals):
    rotated = np.exp(1j * theta) * zvals
    resid = np.abs(rotated.imag)
    if np.any(resid > HARDY_IMAG_TOL * np.maximum(1.0, np.abs(rotated.real))):
        warnings.warn(
            f"Hardy Z imaginary residue {np.max(resid):.2e} exceeds {HARDY_IMAG_TOL}",
            AccuracyWarning,
            stacklevel=3,
        )
    return rotated.real


def hardy_z(t):
    """Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + it), returned as a real number."""
    t_arr = np.asarray(t, dtype=float)
    theta = riemann_siegel_theta(t_arr)
    val = _rotate(theta, zeta(0.5 + 1j * t_arr))
    return float(val) if np.ndim(val) == 0 else val


def hardy_z_grid(t_rows, tau, terms=None):
    """Z on the lattice ``t_r + tau_c``; returns shape (R, C)."""
    t_rows = np.atleast_1d(np.asarray(t_rows, dtype=float))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    t = t_rows[:, None] + tau[None, :]
    if np.any(t < 0):
        raise DomainError("hardy_z requires t >= 0")
    zvals = hurwitz_zeta_grid(0.5 + 1j * t_rows, tau, 1.0, terms)
    return _rotate(riemann_siegel_theta(t), zvals)
