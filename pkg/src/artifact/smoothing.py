"""Smooth cutoff psi, its Mellin transform, and smoothed truncations phi_X.

psi equals 1 on [0, plateau_end], 0 from support_end on, and in between
follows the bridge ``B(u) = g(1-u) / (g(u) + g(1-u))`` with
``g(u) = exp(-1/u)`` for u > 0.  Its Mellin transform has a single simple
pole at 0 with residue 1 and is entire elsewhere, because psi' is
supported in [plateau_end, support_end].
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import num
from .dirichlet import dirichlet_grid, dirichlet_points, integer_logs
from .errors import DomainError, EmptyTableError, NumericAccuracyError, PoleError, ValidationError
from .matsumoto import dirichlet_coeffs
from .quadrature import integrate
from .zeta import as_complex_array

MELLIN_POLE_RADIUS = 1e-8
_RTOL = 1e-12
_ATOL = 1e-15
_FLAT_BLOCK = 1 << 20


@dataclass(frozen=True)
class CutoffSpec:
    plateau_end: float = 1.0
    support_end: float = 2.0

    def __post_init__(self):
        if not 0 < self.plateau_end < self.support_end:
            raise ValidationError("need 0 < plateau_end < support_end")

    @property
    def width(self):
        return self.support_end - self.plateau_end


DEFAULT_CUTOFF = CutoffSpec()


def _g(u):
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / u[pos])
    return out


def bridge(u):
    """B(u): 1 for u <= 0, 0 for u >= 1, smooth and monotone in between."""
    u = np.asarray(u, dtype=float)
    a, b = _g(u), _g(1.0 - u)
    return b / (a + b)


def bridge_prime(u):
    u = np.asarray(u, dtype=float)
    a, b = _g(u), _g(1.0 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(u > 0, a / np.where(u > 0, u, 1.0) ** 2, 0.0)
        v = 1.0 - u
        db = np.where(v > 0, b / np.where(v > 0, v, 1.0) ** 2, 0.0)
        out = -(db * a + b * da) / (a + b) ** 2
    return np.where((u > 0) & (u < 1), out, 0.0)


def psi(c, x):
    """The cutoff psi(x) for x >= 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("psi is defined on [0, inf)")
    val = bridge((x_arr - c.plateau_end) / c.width)
    return float(val) if val.ndim == 0 else val


def psi_prime(c, x):
    x_arr = np.asarray(x, dtype=float)
    val = bridge_prime((x_arr - c.plateau_end) / c.width) / c.width
    return float(val) if val.ndim == 0 else val


def _panels_for(c, t_abs):
    # about one panel per half oscillation of x^{it} across the transition
    need = np.maximum(4.0, t_abs * math.log(c.support_end / c.plateau_end) / math.pi)
    return (2 ** np.ceil(np.log2(need))).astype(int)


def _transition_integral(c, s, weight, power_shift):
    """int_{plateau_end}^{support_end} weight(x) x^{s + power_shift} dx, vectorized over s."""
    s = np.asarray(s, dtype=complex)
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    panels = _panels_for(c, np.abs(flat.imag))
    for p in np.unique(panels):
        group = np.flatnonzero(panels == p)
        step = max(1, _FLAT_BLOCK // (64 * int(p)))
        for a in range(0, group.size, step):
            idx = group[a : a + step]
            ss = flat[idx] + power_shift

            def f(x, ss=ss):
                return weight(x) * np.exp(np.multiply.outer(ss, np.log(x)))

            out[idx], _ = integrate(
                f, c.plateau_end, c.support_end, rtol=_RTOL, atol=_ATOL, panels=int(p)
            )
    return out.reshape(s.shape)


def _check_mellin_pole(s):
    if np.any(np.abs(s) < MELLIN_POLE_RADIUS):
        raise PoleError("the Mellin transform of psi has a pole at s = 0")


def mellin_direct(c, s):
    """plateau_end^s / s + int psi(x) x^{s-1} dx over the transition (sigma > 0)."""
    s = np.asarray(s, dtype=complex)
    _check_mellin_pole(s)
    plateau = np.exp(s * math.log(c.plateau_end)) / s
    return plateau + _transition_integral(c, s, lambda x: psi(c, x), -1.0)


def _flat_moments(c, s, max_nodes=1 << 18):
    """J0 = int psi'(x) x^s dx and J1 = int psi'(x) x^s log x dx.

    In y = log x the integrand is smooth and vanishes to all orders at both
    ends of the transition, so the trapezoid rule converges faster than any
    power of the node count.  Nodes start at a few per oscillation and are
    doubled until two successive rules agree.
    """
    s = np.asarray(s, dtype=complex)
    flat = s.ravel()
    j0 = np.empty(flat.shape, dtype=complex)
    j1 = np.empty(flat.shape, dtype=complex)
    y0, y1 = math.log(c.plateau_end), math.log(c.support_end)
    L = y1 - y0
    # aliases sit at multiples of 2 pi m / L; place the first beyond |t| plus the bandwidth of psi'
    need = (np.abs(flat.imag) + 1200.0) * L / (2.0 * math.pi)
    start = (2 ** np.ceil(np.log2(need))).astype(int)

    def rule(ss, m):
        y = y0 + L * np.arange(1, m) / m
        w = psi_prime(c, np.exp(y)) * (L / m)
        out0 = np.empty(ss.size, dtype=complex)
        out1 = np.empty(ss.size, dtype=complex)
        step = max(1, _FLAT_BLOCK // m)
        for a in range(0, ss.size, step):
            e = np.exp(np.multiply.outer(ss[a : a + step] + 1.0, y))
            out0[a : a + step] = e @ w
            out1[a : a + step] = e @ (w * y)
        return out0, out1

    for m in np.unique(start):
        idx = np.flatnonzero(start == m)
        ss = flat[idx]
        prev = rule(ss, int(m))
        m = int(m)
        while True:
            m *= 2
            cur = rule(ss, m)
            scale = np.maximum(np.abs(cur[0]), 1e-300)
            gap = np.abs(cur[0] - prev[0]) + np.abs(cur[1] - prev[1])
            # phases t*y lose about eps*|t|*L absolutely, which sets the noise floor
            floor = 1e-14 * _psi_mass(c, ss.real) * (1.0 + np.abs(ss.imag) * L / 16.0)
            if np.all(gap <= _RTOL * scale + floor):
                break
            if m >= max_nodes:
                raise NumericAccuracyError("Mellin transform quadrature did not converge")
            prev = cur
        j0[idx], j1[idx] = cur
    return j0.reshape(s.shape), j1.reshape(s.shape)


def _psi_mass(c, sigma):
    # int |psi'(x)| x^sigma dx <= max(a^sigma, b^sigma), since int |psi'| = 1
    return np.maximum(c.plateau_end**sigma, c.support_end**sigma)


def mellin_by_parts(c, s):
    """-(1/s) int psi'(x) x^s dx: valid for every s != 0."""
    s = np.asarray(s, dtype=complex)
    _check_mellin_pole(s)
    return -_flat_moments(c, s)[0] / s


def mellin_by_parts_derivative(c, s):
    """d/ds of the Mellin transform (used for double-pole corrections)."""
    s = np.asarray(s, dtype=complex)
    _check_mellin_pole(s)
    j0, j1 = _flat_moments(c, s)
    return j0 / s**2 - j1 / s


def mellin_psi(c, s):
    """Mellin transform of psi, continued to sigma > -1.

    The defining integral is used for sigma > 0 and the integrated-by-parts
    form for -1 < sigma <= 0.
    """
    s_arr = as_complex_array(s)
    if np.any(s_arr.real <= -1):
        raise DomainError("mellin_psi is provided for sigma > -1")
    _check_mellin_pole(s_arr)
    out = np.empty(s_arr.shape, dtype=complex)
    right = s_arr.real > 0
    if np.any(right):
        out[right] = mellin_direct(c, s_arr[right])
    if np.any(~right):
        out[~right] = mellin_by_parts(c, s_arr[~right])
    return out[()] if out.ndim else complex(out)


def mellin_inversion_check(c, x, sigma, tau_cut):
    """|(1/2pi) int_{-tau_cut}^{tau_cut} psi_hat(sigma+i tau) x^{-sigma-i tau} dtau - psi(x)|."""
    if not sigma > 0:
        raise DomainError("inversion contour needs sigma > 0")
    if not x > 0:
        raise DomainError("inversion check needs x > 0")
    if not tau_cut > 0:
        raise DomainError("tau_cut must be positive")
    lx = math.log(x)

    def f(tau):
        s = sigma + 1j * tau
        return mellin_psi(c, s) * np.exp(-s * lx)

    val, _ = integrate(f, -tau_cut, tau_cut, rtol=1e-10, atol=1e-13, panels=int(math.ceil(2 * tau_cut)))
    return abs(val / (2 * math.pi) - psi(c, x))


# ------------------------------------------------------------ truncations


def truncation_length(c, X):
    """Largest n with psi(n/X) possibly nonzero."""
    return int(math.floor(c.support_end * X))


def require_truncation_height(X):
    if not X >= 2:
        raise DomainError("phi_X needs X >= 2")


def smoothed_coefficients(spec, X, c=DEFAULT_CUTOFF, coeffs=None):
    """b_n psi(n/X) for n = 1..floor(support_end X)."""
    n_max = truncation_length(c, X)
    if coeffs is None:
        coeffs = dirichlet_coeffs(spec, n_max)
    elif coeffs.N < n_max:
        raise ValidationError(
            f"coefficient table has {coeffs.N} entries, phi_X at X={X:g} needs {n_max}"
        )
    n = np.arange(1, n_max + 1)
    return coeffs.values[1 : n_max + 1] * psi(c, n / X)


def phi_X(spec, s, X, c=DEFAULT_CUTOFF, coeffs=None):
    """Smoothed truncation sum_n b_n psi(n/X) n^{-s}; entire in s."""
    require_truncation_height(X)
    return _phi(spec, s, X, c, coeffs)


def _phi(spec, s, X, c, coeffs):
    s_arr = as_complex_array(s)
    w = smoothed_coefficients(spec, X, c, coeffs)
    val = dirichlet_points(w, integer_logs(w.size), np.atleast_1d(s_arr))
    return val.reshape(s_arr.shape)[()] if s_arr.ndim else complex(val[0])


def phi_X_grid(spec, u, tau, X, c=DEFAULT_CUTOFF, coeffs=None):
    require_truncation_height(X)
    return _phi_grid(spec, u, tau, X, c, coeffs)


def _phi_grid(spec, u, tau, X, c, coeffs):
    w = smoothed_coefficients(spec, X, c, coeffs)
    key = ("phi_X", spec, float(X), c)
    return dirichlet_grid(w, integer_logs(w.size), u, tau, cache_key=key)


def _pole_terms(spec, s, c):
    """Per pole: (pole, psi_hat(z - s), psi_hat'(z - s) or None)."""
    terms = []
    for pole in spec.strip_poles():
        w = pole.location - s
        _check_mellin_pole(w)
        j0, j1 = _flat_moments(c, w)
        hat = -j0 / w
        d_hat = j0 / w**2 - j1 / w if pole.order == 2 else None
        terms.append((pole, w, hat, d_hat))
    return terms


def _correction(terms, X):
    total = 0.0
    lX = math.log(X)
    for pole, w, hat, d_hat in terms:
        Xw = np.exp(w * lX)
        total = total + pole.residue * hat * Xw
        if pole.order == 2:
            total = total + pole.leading * (d_hat + hat * lX) * Xw
    return total


def _check_region(spec, s):
    s = np.asarray(s)
    if np.any(s.real <= spec.rho):
        raise DomainError(f"{spec.name}: continuation valid only for sigma > rho = {spec.rho}")
    for pole in spec.poles:
        if np.any(np.abs(s - pole.location) < MELLIN_POLE_RADIUS):
            raise PoleError(f"{spec.name}: point on the pole {pole.location}")


def _error_estimate(spec, s, v_full, v_half):
    # difference of the X and X/2 truncations, scaled as if the error decays like X^-delta
    delta = 0.5 * (np.asarray(s).real - spec.rho)
    return np.abs(v_full - v_half) / np.expm1(delta * math.log(2.0)) + 1e-12


def continued_eval(spec, s, X, c=DEFAULT_CUTOFF):
    """Pole-corrected truncation at points with sigma > rho.

    value = phi_X(s) - sum_j r_j psi_hat(z_j - s) X^{z_j - s}, with the
    Laurent-order-2 term for double poles.  The error estimate compares the
    X and X/2 truncations and extrapolates with an X^{-delta} decay,
    delta = (sigma - rho)/2.
    """
    require_truncation_height(X)
    s_arr = as_complex_array(s)
    _check_region(spec, s_arr)
    flat = np.atleast_1d(s_arr).ravel()
    terms = _pole_terms(spec, flat, c)
    coeffs = dirichlet_coeffs(spec, truncation_length(c, X))
    v_full = phi_X(spec, flat, X, c, coeffs) - _correction(terms, X)
    v_half = _phi(spec, flat, X / 2, c, coeffs) - _correction(terms, X / 2)
    err = _error_estimate(spec, flat, v_full, v_half)
    if s_arr.ndim == 0:
        return complex(v_full[0]), float(err[0])
    return v_full.reshape(s_arr.shape), err.reshape(s_arr.shape)


def continued_eval_grid(spec, u, tau, X, c=DEFAULT_CUTOFF):
    require_truncation_height(X)
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    s = u[:, None] + 1j * tau[None, :]
    _check_region(spec, s)
    terms = _pole_terms(spec, s, c)
    coeffs = dirichlet_coeffs(spec, truncation_length(c, X))
    v_full = phi_X_grid(spec, u, tau, X, c, coeffs) - _correction(terms, X)
    v_half = _phi_grid(spec, u, tau, X / 2, c, coeffs) - _correction(terms, X / 2)
    return v_full, _error_estimate(spec, s, v_full, v_half)


# ---------------------------------------------------------- truncation scan


@dataclass(frozen=True)
class TruncationScan:
    X_values: tuple
    mean_sup_error: tuple
    per_shift: np.ndarray  # (len(X), len(shifts)) sup errors

    def to_csv(self, path, header_lines=()):
        rows = [f"# {h}" for h in header_lines] + ["X,mean_sup_error"]
        rows += [f"{num(X)},{num(e)}" for X, e in zip(self.X_values, self.mean_sup_error)]
        Path(path).write_text("\n".join(rows) + "\n")


def truncation_error_scan(spec, grid, X_list, shifts, c=DEFAULT_CUTOFF):
    """Average over shifts of sup over the grid of |phi - phi_X| at s + i*shift.

    ``grid`` supplies ``sigmas`` and ``ts`` arrays; shifts are the heights
    h*gamma_k.  Requires a builtin spec, whose closed form is the reference.
    """
    if spec.closed_form is None:
        raise ValidationError("truncation_error_scan needs a spec with a closed form")
    shifts = np.asarray(shifts, dtype=float)
    if shifts.size == 0:
        raise EmptyTableError("empty shift list")
    X_list = [float(X) for X in X_list]
    coeffs = dirichlet_coeffs(spec, max(truncation_length(c, X) for X in X_list))
    sig = np.asarray(grid.sigmas, dtype=float)
    ts = np.asarray(grid.ts, dtype=float)
    sup = np.empty((len(X_list), shifts.size))
    for j, h in enumerate(shifts):
        u = sig + 1j * h
        exact = spec.closed_form(u, ts)
        for i, X in enumerate(X_list):
            sup[i, j] = np.max(np.abs(exact - phi_X_grid(spec, u, ts, X, c, coeffs)))
    return TruncationScan(tuple(X_list), tuple(float(x) for x in sup.mean(axis=1)), sup)
