"""Dense evaluation of Dirichlet polynomials on lattices of points.

A Dirichlet polynomial ``sum_n c_n lam_n^{-s}`` evaluated at the points
``s = u_r + i*tau_c`` factors as a matrix product::

    A[r, n] = c_n * exp(-u_r * log lam_n)        (rows: complex offsets)
    E[n, c] = exp(-1j * tau_c * log lam_n)       (columns: real heights)
    values  = A @ E

so a grid of R*C points costs (R + C)*N complex exponentials plus one
GEMM, instead of R*C*N exponentials.  Column phase matrices are cached
because scans reuse the same heights for every shift.

At large heights the phase t*log(lam) is tens of thousands of radians,
and a double-precision product loses about eps*|t log lam| of it.  When
``log_lam`` is passed as ``np.longdouble`` the row phases are formed and
reduced mod 2 pi in extended precision before the complex exponential.
"""

from collections import OrderedDict
from functools import lru_cache

import numpy as np

# budget (complex entries) for one block of A or E
_BLOCK = 1 << 21
_E_CACHE = OrderedDict()
_E_CACHE_SIZE = 6
_TWO_PI_LD = 2 * np.arccos(np.longdouble(-1))


def log_frequencies(lam):
    """Extended-precision logarithms of the frequencies."""
    return np.log(np.asarray(lam, dtype=np.longdouble))


@lru_cache(maxsize=8)
def _integer_logs(n):
    logs = log_frequencies(np.arange(1, n + 1))
    logs.flags.writeable = False
    return logs


def integer_logs(n):
    """log 1, ..., log n in extended precision (cached)."""
    return _integer_logs(int(n))


def unit_phases(t, log_lam):
    """exp(-i t_r log_lam_n) as an (R, N) array; extended-precision reduction for longdouble logs."""
    t = np.asarray(t, dtype=float)
    if np.asarray(log_lam).dtype != np.longdouble:
        return np.exp(-1j * np.multiply.outer(t, log_lam))
    prod = np.multiply.outer(t.astype(np.longdouble), log_lam)
    prod -= _TWO_PI_LD * np.rint(prod / _TWO_PI_LD)
    return np.exp(-1j * prod.astype(float))


def _column_phases(log_lam, tau, key):
    log_lam = np.asarray(log_lam, dtype=float)
    if key is not None:
        full_key = key + (tau.tobytes(),)
        hit = _E_CACHE.get(full_key)
        if hit is not None:
            _E_CACHE.move_to_end(full_key)
            return hit
    phases = np.exp(-1j * np.multiply.outer(log_lam, tau))
    if key is not None:
        _E_CACHE[full_key] = phases
        while len(_E_CACHE) > _E_CACHE_SIZE:
            _E_CACHE.popitem(last=False)
    return phases


def _row_factors(coeffs, log_lam, rows):
    log_d = np.asarray(log_lam, dtype=float)
    # rows on one horizontal line share a single phase vector
    if rows.size > 1 and np.all(rows.imag == rows.imag[0]):
        phase = coeffs * unit_phases(rows.imag[:1], log_lam)[0]
        return np.exp(-np.multiply.outer(rows.real, log_d)) * phase
    return coeffs * np.exp(-np.multiply.outer(rows.real, log_d)) * unit_phases(rows.imag, log_lam)


def dirichlet_grid(coeffs, log_lam, u, tau, cache_key=None):
    """Evaluate ``sum_n coeffs[n] * exp(-(u_r + i tau_c) * log_lam[n])``.

    Parameters
    ----------
    coeffs : (N,) array
    log_lam : (N,) real array of logarithms of the frequencies; pass
        ``np.longdouble`` values (see :func:`log_frequencies`) for accurate
        phases at large heights.
    u : (R,) complex row offsets.
    tau : (C,) real column heights.
    cache_key : hashable or None
        When given, the column phase matrix is cached under
        ``(cache_key, tau)``; the key must identify ``log_lam`` uniquely.

    Returns
    -------
    (R, C) complex array.
    """
    coeffs = np.asarray(coeffs)
    log_lam = np.asarray(log_lam)
    if log_lam.dtype != np.longdouble:
        log_lam = log_lam.astype(float)
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    n_terms = log_lam.size
    out = np.zeros((u.size, tau.size), dtype=complex)
    if n_terms == 0:
        return out
    step = max(1, _BLOCK // n_terms)
    for c0 in range(0, tau.size, step):
        cols = tau[c0 : c0 + step]
        whole = c0 == 0 and cols.size == tau.size
        E = _column_phases(log_lam, cols, cache_key if whole else None)
        for r0 in range(0, u.size, step):
            A = _row_factors(coeffs, log_lam, u[r0 : r0 + step])
            out[r0 : r0 + step, c0 : c0 + step] = A @ E
    return out


def dirichlet_points(coeffs, log_lam, s):
    """Evaluate the polynomial at an arbitrary array of points ``s``."""
    s = np.asarray(s, dtype=complex)
    flat = s.ravel()
    vals = dirichlet_grid(coeffs, log_lam, flat, np.zeros(1))[:, 0]
    return vals.reshape(s.shape)
