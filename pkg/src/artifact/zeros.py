"""Ordinates of the nontrivial zeros of zeta on the critical line.

Zeros are located as sign changes of Hardy's Z on a lattice whose step
follows the local zero density, then refined by repeated 64-way
subdivision of each bracket (a wider bisection), and finally placed by
linear interpolation inside the last bracket.  The sign-change count is
audited against the Riemann-von Mangoldt formula.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import num
from .errors import (
    EmptyTableError,
    InsufficientZerosError,
    MissedZeroError,
    ValidationError,
    ZeroFileError,
)
from .dirichlet import log_frequencies, unit_phases
from .zeta import _em_tail, _grid_terms, hardy_z_grid, riemann_siegel_theta

SCAN_ROWS = 64
SCAN_COLS = 128
SUBDIVISIONS = 64
REFINE_GROUP = 256
FILE_HEADER = "# zeros v1 bracket="


@dataclass(frozen=True, eq=False)
class ZeroTable:
    """First ``k_max`` ordinates ``0 < gamma_1 <= gamma_2 <= ...``."""

    gammas: np.ndarray
    bracket_width: float

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float)
        if g.ndim != 1:
            raise ValidationError("gammas must be one-dimensional")
        if g.size and (g[0] <= 0 or np.any(np.diff(g) < 0)):
            raise ValidationError("gammas must be positive and nondecreasing")
        if not self.bracket_width > 0:
            raise ValidationError("bracket_width must be positive")
        g.flags.writeable = False
        object.__setattr__(self, "gammas", g)

    @property
    def k_max(self):
        return int(self.gammas.size)

    def __len__(self):
        return self.k_max

    def __eq__(self, other):
        if not isinstance(other, ZeroTable):
            return NotImplemented
        return self.bracket_width == other.bracket_width and np.array_equal(
            self.gammas, other.gammas
        )

    def gamma(self, k):
        """1-based access: ``gamma(1) = 14.1347...``."""
        if not 1 <= k <= self.k_max:
            raise InsufficientZerosError(f"zero index {k} outside table of {self.k_max}")
        return float(self.gammas[k - 1])

    def window(self, k_lo, k_hi):
        """Ordinates gamma_k for k_lo <= k <= k_hi (1-based, inclusive)."""
        self.require(k_hi)
        if k_lo < 1:
            raise InsufficientZerosError("zero indices start at 1")
        return self.gammas[k_lo - 1 : k_hi]

    def require(self, k):
        if k > self.k_max:
            raise InsufficientZerosError(
                f"need {k} zeros but the table holds only {self.k_max}"
            )

    def count_upto(self, T):
        return int(np.searchsorted(self.gammas, T, side="right"))

    def head(self, k):
        self.require(k)
        return ZeroTable(self.gammas[:k], self.bracket_width)


def rvm_count(T):
    """Smooth Riemann-von Mangoldt count (T/2pi)log(T/2pi) - T/2pi + 7/8."""
    T = np.asarray(T, dtype=float)
    x = T / (2 * math.pi)
    return x * np.log(x) - x + 0.875


def _rvm_inverse(k):
    t = 2 * math.pi * max(k, 1) / max(math.log(max(k, 2)), 1.0) + 20.0
    for _ in range(50):
        x = t / (2 * math.pi)
        f = x * math.log(x) - x + 0.875 - k
        t -= f / (math.log(x) / (2 * math.pi))
    return t


def scan_step(t):
    """Initial scan step min(0.05, 1/(4 log k)) with k the expected zero count."""
    k_hat = max(float(rvm_count(max(t, 2 * math.pi * math.e))), math.e)
    return min(0.05, 1.0 / (4.0 * math.log(k_hat)))


def _scan_chunk(t0, dt, rows, cols):
    """Sign-change brackets of Z on [t0, t0 + rows*cols*dt]; returns left ends."""
    starts = t0 + dt * cols * np.arange(rows)
    tau = dt * np.arange(cols + 1)
    z = hardy_z_grid(starts, tau)
    pos = z > 0
    r, c = np.nonzero(pos[:, 1:] != pos[:, :-1])
    return starts[r] + tau[c]


def _refine_group(lefts, width, bracket_width):
    """Shrink brackets [l, l + width] to at most ``bracket_width``.

    The row factors n^{-1/2 - i l} are updated multiplicatively as the
    brackets move, so each round costs one GEMM and only N*(m+1)
    exponentials.
    """
    lefts = np.asarray(lefts, dtype=float)
    n_terms = _grid_terms(float(np.max(lefts)) + width)
    log_ld = log_frequencies(np.arange(1, n_terms + 1))
    log_n = log_ld.astype(float)
    rows = np.exp(-0.5 * log_n) * unit_phases(lefts, log_ld)
    while True:
        m = SUBDIVISIONS
        if width / m < bracket_width:
            m = max(2, int(math.ceil(width / bracket_width)))
        tau = width * np.arange(m + 1) / m
        cols = np.exp(-1j * np.multiply.outer(log_n, tau))
        t = lefts[:, None] + tau[None, :]
        s = 0.5 + 1j * t
        zeta_vals = rows @ cols + _em_tail(s, n_terms + 1.0, 20)
        z = (np.exp(1j * riemann_siegel_theta(t)) * zeta_vals).real
        pos = z > 0
        r, c = np.nonzero(pos[:, 1:] != pos[:, :-1])
        width = width / m
        if width <= bracket_width:
            za, zb = z[r, c], z[r, c + 1]
            frac = np.clip(za / (za - zb), 0.0, 1.0)
            return lefts[r] + tau[c] + width * frac
        rows = rows[r] * cols[:, c].T
        lefts = lefts[r] + tau[c]


def _zeros_in_chunk(args):
    t0, dt, n_rows, bracket_width = args
    lefts = _scan_chunk(t0, dt, n_rows, SCAN_COLS)
    if lefts.size == 0:
        return lefts
    found = [
        _refine_group(lefts[i : i + REFINE_GROUP], dt, bracket_width)
        for i in range(0, lefts.size, REFINE_GROUP)
    ]
    return np.concatenate(found)


def _chunks(t_start, t_end, step_factor=1.0):
    """Deterministic partition of [t_start, t_end] into scan chunks."""
    out = []
    t = t_start
    while t < t_end:
        dt = scan_step(t + SCAN_ROWS * SCAN_COLS * 0.05) * step_factor
        span = SCAN_ROWS * SCAN_COLS * dt
        n_rows = SCAN_ROWS
        if t + span > t_end:
            n_rows = max(1, int(math.ceil((t_end - t) / (SCAN_COLS * dt))))
            span = n_rows * SCAN_COLS * dt
        out.append((t, dt, n_rows))
        t += span
    return out


def _scan(t_start, t_end, bracket_width, workers, step_factor=1.0):
    tasks = [(t, dt, n, bracket_width) for t, dt, n in _chunks(t_start, t_end, step_factor)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_zeros_in_chunk, tasks))
    else:
        parts = [_zeros_in_chunk(task) for task in tasks]
    return np.concatenate(parts) if parts else np.array([])


def _merge(a, b, tol):
    merged = np.sort(np.concatenate([a, b]))
    if merged.size < 2:
        return merged
    keep = np.concatenate([[True], np.diff(merged) > tol])
    return merged[keep]


def prefix_deviation(gammas):
    """k - rvm_count(midpoint_k) for every prefix ending between gamma_k, gamma_k+1."""
    g = np.asarray(gammas, dtype=float)
    mids = 0.5 * (g[1:] + g[:-1])
    return np.arange(1, g.size) - rvm_count(mids)


def compute_zeros(k_max, bracket_width=1e-8, workers=1):
    """Compute the first ``k_max`` zero ordinates.

    Raises MissedZeroError if, after local rescans at finer steps, some
    prefix count still differs from the Riemann-von Mangoldt estimate by
    more than one.
    """
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    if not bracket_width > 0:
        raise ValidationError("bracket_width must be positive")
    t_end = _rvm_inverse(k_max + 3) + 2.0
    gammas = _scan(0.0, t_end, bracket_width, workers)
    while gammas.size < k_max + 2:
        t_next = t_end + 50.0
        gammas = _merge(gammas, _scan(t_end, t_next, bracket_width, 1), bracket_width)
        t_end = t_next

    tol = 10 * bracket_width
    for factor in (1 / 8, 1 / 64):
        bad = np.flatnonzero(np.abs(prefix_deviation(gammas)) > 1.0)
        if bad.size == 0:
            break
        for k in bad:
            lo = gammas[max(k - 2, 0)]
            hi = gammas[min(k + 2, gammas.size - 1)]
            extra = _scan(lo, hi, bracket_width, 1, step_factor=factor)
            gammas = _merge(gammas, extra, tol)
    dev = prefix_deviation(gammas)
    bad = np.flatnonzero(np.abs(dev[: k_max]) > 1.0)
    if bad.size:
        k = int(bad[0]) + 1
        raise MissedZeroError(
            f"prefix count {k} deviates from Riemann-von Mangoldt by {dev[k - 1]:+.3f} "
            f"near t = {gammas[k - 1]:.6f}"
        )
    return ZeroTable(gammas[:k_max], bracket_width)


def store_zeros(table, path, extra_header=()):
    """Write ``# zeros v1 bracket=<w>`` then ``k,gamma`` rows (12 sig. digits)."""
    lines = [f"{FILE_HEADER}{num(table.bracket_width)}"]
    lines += [f"# {h}" for h in extra_header]
    lines += [f"{k},{g:.12g}" for k, g in enumerate(table.gammas, start=1)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_zeros(path):
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not text.strip():
        raise EmptyTableError(f"{path}: empty zero-table file")
    if not lines[0].startswith(FILE_HEADER):
        raise ZeroFileError("missing '# zeros v1 bracket=<width>' header", line=1)
    try:
        width = float(lines[0][len(FILE_HEADER) :])
    except ValueError:
        raise ZeroFileError("unreadable bracket width", line=1) from None
    gammas = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            k, g = int(parts[0]), float(parts[1])
            if len(parts) != 2:
                raise ValueError
        except (ValueError, IndexError):
            raise ZeroFileError(f"expected 'k,gamma', got {line!r}", line=lineno) from None
        if k != len(gammas) + 1:
            raise ZeroFileError(f"index {k} out of sequence", line=lineno)
        if g <= 0 or (gammas and g < gammas[-1]):
            raise ZeroFileError(f"gamma {g} breaks positive nondecreasing order", line=lineno)
        gammas.append(g)
    if not gammas:
        raise EmptyTableError(f"{path}: zero table has no entries")
    return ZeroTable(np.array(gammas), width)


@dataclass(frozen=True)
class LowerBoundReport:
    minimum: float
    argmin: int | None
    passed: bool


def lower_bound_check(table):
    """min over k >= 2 of gamma_k log(k) / k; passes when positive."""
    if table.k_max == 0:
        raise EmptyTableError("lower_bound_check needs a nonempty table")
    if table.k_max < 2:
        return LowerBoundReport(math.inf, None, True)
    k = np.arange(2, table.k_max + 1)
    ratio = table.gammas[1:] * np.log(k) / k
    i = int(np.argmin(ratio))
    return LowerBoundReport(float(ratio[i]), int(k[i]), bool(ratio[i] > 0))
