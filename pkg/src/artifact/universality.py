"""Discrete-shift approximation of target functions on rectangles in the strip.

For a rectangle K = [sigma_lo, sigma_hi] x [t_lo, t_hi] inside
rho < sigma < alpha+beta+1, a target f non-vanishing on K, a scaling h > 0
and the zero ordinates gamma_k, the scan computes

    D_k = max over grid points s of |phi(s + i h gamma_k) - f(s)|

for N <= k <= 2N and the densities d_N(eps) = #{k : D_k < eps} / (N + 1).
The grid max is a lower bound for the sup over K; a Lipschitz-inflated
estimate is attached as an optional upper figure.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import CODE_VERSION, array_digest, config_hash, num, spec_description
from .errors import (
    BranchJumpError,
    DomainError,
    InsufficientZerosError,
    NumericAccuracyError,
    ValidationError,
    VanishingTargetError,
)
from .matsumoto import evaluate_grid

DEFAULT_STEP = 0.01
DEFAULT_EPSILONS = (0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_X = 1e4
VANISHING_FLOOR = 1e-12


def _axis(lo, hi, step):
    if hi == lo:
        return np.array([float(lo)])
    n = max(1, int(round((hi - lo) / step)))
    i = np.arange(n + 1)
    return lo + (hi - lo) * (i / n)


@dataclass(frozen=True)
class CompactGrid:
    """Rectangle K with a lattice of n_sigma x n_t points, endpoints included."""

    sigma_lo: float
    sigma_hi: float
    t_lo: float
    t_hi: float
    step: float = DEFAULT_STEP

    def __post_init__(self):
        vals = (self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi, self.step)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("grid bounds must be finite")
        if self.sigma_lo > self.sigma_hi or self.t_lo > self.t_hi:
            raise ValidationError("grid bounds out of order")
        if not self.step > 0:
            raise ValidationError("grid step must be positive")

    @property
    def sigmas(self):
        return _axis(self.sigma_lo, self.sigma_hi, self.step)

    @property
    def ts(self):
        return _axis(self.t_lo, self.t_hi, self.step)

    @property
    def points(self):
        return self.sigmas[:, None] + 1j * self.ts[None, :]

    @property
    def shape(self):
        return (self.sigmas.size, self.ts.size)

    def refined(self):
        """Same rectangle at half the step; its lattice contains this one."""
        return CompactGrid(self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi, self.step / 2)

    def check_strip(self, spec):
        if not (spec.rho < self.sigma_lo and self.sigma_hi < spec.abscissa):
            raise DomainError(
                f"K = [{self.sigma_lo}, {self.sigma_hi}] must lie inside "
                f"({spec.rho}, {spec.abscissa}) for {spec.name}"
            )

    def describe(self):
        return {"sigma": [self.sigma_lo, self.sigma_hi], "t": [self.t_lo, self.t_hi], "step": self.step}


@dataclass(frozen=True)
class RegionR:
    sigma0: float
    sigma1: float
    sigma2: float
    t_lo: float
    t_hi: float


def build_region(K, spec, fractions=(1 / 3, 2 / 3)):
    """sigma0 < sigma1 between rho and min Re K, sigma2 between max Re K and the abscissa.

    sigma0 is lowered below any pole with real part in (rho, sigma0].
    """
    K.check_strip(spec)
    f0, f1 = fractions
    if not 0 < f0 < f1 < 1:
        raise ValidationError("fractions must satisfy 0 < f0 < f1 < 1")
    width = K.sigma_lo - spec.rho
    sigma0 = spec.rho + f0 * width
    sigma1 = spec.rho + f1 * width
    sigma2 = 0.5 * (K.sigma_hi + spec.abscissa)
    for pole in spec.poles:
        re = complex(pole.location).real
        if re <= sigma0:
            if re <= spec.rho:
                continue  # left of rho, irrelevant to the region
            sigma0 = 0.5 * (spec.rho + re)
    if not spec.rho < sigma0 < sigma1:
        raise ValidationError("cannot place sigma0 to the left of every pole")
    return RegionR(sigma0, sigma1, sigma2, K.t_lo - 0.5, K.t_hi + 0.5)


# ----------------------------------------------------------------- targets


def _shifted_values(spec, K, shift, X):
    """phi on the grid K moved up by ``shift``; the single evaluation path of the module."""
    u = K.sigmas + 1j * shift
    return np.asarray(evaluate_grid(spec, u, K.ts, X))


@dataclass(frozen=True)
class TargetFunction:
    """A target f on K.

    kinds: ``constant`` (value), ``exp_polynomial`` (coefficients of G in s,
    f = exp G), ``spec_value`` (spec, offset: f(s) = phi(s + offset)) and
    ``self_shift`` (spec, j, gamma_j, h: f(s) = phi(s + i h gamma_j)).
    """

    kind: str
    value: complex = 1.0
    coefficients: tuple = ()
    spec: object = field(default=None, compare=False)
    offset: complex = 0.0
    j: int = 0
    gamma_j: float = 0.0
    h: float = 1.0
    X: float = DEFAULT_X

    @classmethod
    def constant(cls, value):
        return cls("constant", value=complex(value))

    @classmethod
    def exp_polynomial(cls, coefficients):
        return cls("exp_polynomial", coefficients=tuple(complex(c) for c in coefficients))

    @classmethod
    def spec_value(cls, spec, offset, X=DEFAULT_X):
        return cls("spec_value", spec=spec, offset=complex(offset), X=float(X))

    @classmethod
    def self_shift(cls, spec, j, zeros, h=1.0, X=DEFAULT_X):
        return cls("self_shift", spec=spec, j=int(j), gamma_j=zeros.gamma(int(j)), h=float(h), X=float(X))

    def describe(self):
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "exp_polynomial":
            d["coefficients"] = list(self.coefficients)
        elif self.kind == "spec_value":
            d.update(spec=self.spec.name, offset=self.offset, X=self.X)
        else:
            d.update(spec=self.spec.name, j=self.j, gamma_j=self.gamma_j, h=self.h, X=self.X)
        return d

    def samples(self, K):
        """f on the grid, rows over sigma and columns over t; rejects vanishing targets."""
        if self.kind == "constant":
            vals = np.full(K.shape, self.value, dtype=complex)
        elif self.kind == "exp_polynomial":
            vals = np.exp(np.polyval(self.coefficients[::-1], K.points))
        elif self.kind == "spec_value":
            u = K.sigmas + self.offset
            vals = np.asarray(evaluate_grid(self.spec, u, K.ts, self.X))
        elif self.kind == "self_shift":
            vals = _shifted_values(self.spec, K, self.h * self.gamma_j, self.X)
        else:
            raise ValidationError(f"unknown target kind {self.kind!r}")
        if not np.all(np.isfinite(vals)):
            raise VanishingTargetError("target is not finite on the grid")
        low = float(np.min(np.abs(vals)))
        if low < VANISHING_FLOOR:
            raise VanishingTargetError(f"target nearly vanishes on K (min |f| = {low:.3g})")
        return vals


# -------------------------------------------------- log-polynomial surrogate


def continuous_log(values):
    """log f on a grid with the phase continued in row-major order.

    Each row starts from the first point of the previous row and runs along t.
    Adjacent principal phases must differ by at most pi/2.
    """
    values = np.asarray(values, dtype=complex)
    if np.any(np.abs(values) < VANISHING_FLOOR):
        raise VanishingTargetError("cannot take log of a vanishing target")
    raw = np.angle(values)

    def steps(a):
        d = np.diff(a, axis=-1)
        wrapped = (d + math.pi) % (2 * math.pi) - math.pi
        if np.any(np.abs(wrapped) > math.pi / 2):
            raise BranchJumpError("adjacent grid phases differ by more than pi/2; refine the grid")
        return wrapped

    first_col = raw[:, 0]
    col0 = first_col[0] + np.concatenate([[0.0], np.cumsum(steps(first_col))])
    along = np.concatenate([np.zeros((raw.shape[0], 1)), np.cumsum(steps(raw), axis=1)], axis=1)
    phase = col0[:, None] + along
    return np.log(np.abs(values)) + 1j * phase


@dataclass(frozen=True)
class LogPolynomial:
    """G(s) = sum_j c_j ((s - center) / scale)^j."""

    coefficients: tuple
    center: complex
    scale: float
    deviation: float  # sup over the fit grid of |f - exp G|

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, s):
        z = (np.asarray(s, dtype=complex) - self.center) / self.scale
        return np.polyval(np.array(self.coefficients[::-1]), z)

    def monomial_coefficients(self):
        """Coefficients of G in powers of s (ascending)."""
        out = np.zeros(len(self.coefficients), dtype=complex)
        for j, c in enumerate(self.coefficients):
            for i in range(j + 1):
                out[i] += c * math.comb(j, i) * (-self.center) ** (j - i) / self.scale**j
        return tuple(out)


def fit_log_polynomial(samples, K, degree):
    """Least-squares polynomial fit of a continuous branch of log f on the grid."""
    if int(degree) < 0:
        raise ValidationError("degree must be nonnegative")
    degree = int(degree)
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != K.shape:
        raise ValidationError("samples do not match the grid shape")
    logf = continuous_log(samples).ravel()
    pts = K.points.ravel()
    center = complex(0.5 * (K.sigma_lo + K.sigma_hi), 0.5 * (K.t_lo + K.t_hi))
    scale = max(0.5 * (K.sigma_hi - K.sigma_lo), 0.5 * (K.t_hi - K.t_lo)) or 1.0
    z = (pts - center) / scale
    V = z[:, None] ** np.arange(degree + 1)[None, :]
    coef, *_ = np.linalg.lstsq(V, logf, rcond=None)
    approx = np.exp(V @ coef)
    dev = float(np.max(np.abs(samples.ravel() - approx)))
    return LogPolynomial(tuple(complex(c) for c in coef), center, float(scale), dev)


def fit_to_tolerance(samples, K, tolerance, start_degree=0, max_degree=40):
    """Raise the degree until the sup deviation drops below ``tolerance``."""
    best = None
    for d in range(int(start_degree), int(max_degree) + 1):
        G = fit_log_polynomial(samples, K, d)
        if best is None or G.deviation < best.deviation:
            best = G
        if G.deviation < tolerance:
            return G
    raise NumericAccuracyError(
        f"no degree <= {max_degree} reaches deviation {tolerance:g} (best {best.deviation:.3g} at degree {best.degree})"
    )


# ------------------------------------------------------------ discrepancies


def _discrepancy_values(spec, target_values, K, h, gamma_k, X):
    return np.abs(_shifted_values(spec, K, h * gamma_k, X) - target_values)


def discrepancy(spec, target, K, h, gamma_k, X=DEFAULT_X, target_values=None):
    """max over the grid of |phi(s + i h gamma_k) - f(s)|: a lower bound of the sup over K."""
    if target_values is None:
        target_values = target.samples(K)
    return float(np.max(_discrepancy_values(spec, target_values, K, h, gamma_k, X)))


def lipschitz_upper(diff, K):
    """Grid max inflated by (finite-difference slope) x (half a cell diagonal)."""
    slopes = [0.0]
    if diff.shape[0] > 1:
        slopes.append(float(np.max(np.abs(np.diff(diff, axis=0)))) / K.step)
    if diff.shape[1] > 1:
        slopes.append(float(np.max(np.abs(np.diff(diff, axis=1)))) / K.step)
    return float(np.max(diff)) + max(slopes) * K.step * math.sqrt(0.5)


def density(D, eps):
    """Fraction of shifts with D_k < eps; an exact zero counts as a hit even at eps = 0."""
    D = np.asarray(D, dtype=float)
    hits = (D < eps) | (D == 0)
    return float(np.count_nonzero(hits & np.isfinite(D)) / D.size)


@dataclass(frozen=True, eq=False)
class ScanReport:
    spec_name: str
    h: float
    N: int
    epsilons: tuple
    k: np.ndarray
    gammas: np.ndarray
    D: np.ndarray
    D_upper: np.ndarray
    densities: tuple
    failures: int
    grid: dict
    config: dict
    config_hash: str

    def density_for(self, eps):
        return density(self.D, eps)

    def header_lines(self):
        return [f"config_hash={self.config_hash}"] + [
            f"{k}={v}" for k, v in sorted(self.config.items())
        ]

    def text(self):
        rows = [f"# {h}" for h in self.header_lines()]
        rows.append("k,gamma_k,D_k")
        rows += [f"{k},{num(g)},{num(d)}" for k, g, d in zip(self.k, self.gammas, self.D)]
        rows.append("epsilon,density")
        rows += [f"{num(e)},{num(d)}" for e, d in zip(self.epsilons, self.densities)]
        return "\n".join(rows) + "\n"

    def write(self, path):
        Path(path).write_text(self.text())


def _scan_block(args):
    spec, target_values, K, h, gammas, X = args
    D = np.empty(gammas.size)
    U = np.empty(gammas.size)
    fails = 0
    for i, g in enumerate(gammas):
        try:
            diff = _discrepancy_values(spec, target_values, K, h, float(g), X)
            if not np.all(np.isfinite(diff)):
                raise NumericAccuracyError("non-finite value on the grid")
        except (NumericAccuracyError, ValidationError, FloatingPointError):
            D[i] = U[i] = math.nan
            fails += 1
            continue
        D[i] = float(np.max(diff))
        U[i] = lipschitz_upper(diff, K)
    return D, U, fails


def universality_scan(spec, target, K, h, N, epsilons=DEFAULT_EPSILONS, zeros=None, X=DEFAULT_X, workers=1):
    """D_k for N <= k <= 2N and d_N(eps) for each eps."""
    if zeros is None:
        raise InsufficientZerosError("universality_scan needs a zero table")
    if not h > 0:
        raise ValidationError("h must be positive")
    if int(N) < 1:
        raise ValidationError("N must be at least 1")
    N = int(N)
    eps = tuple(float(e) for e in epsilons)
    if not eps or any(e < 0 or not math.isfinite(e) for e in eps):
        raise ValidationError("epsilons must be finite and nonnegative")
    K.check_strip(spec)
    zeros.require(2 * N)
    gammas = np.array(zeros.window(N, 2 * N))
    target_values = target.samples(K)

    if workers > 1 and gammas.size > 1:
        parts = np.array_split(gammas, min(workers, gammas.size))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_block, [(spec, target_values, K, h, p, X) for p in parts]))
    else:
        results = [_scan_block((spec, target_values, K, h, gammas, X))]
    D = np.concatenate([r[0] for r in results])
    U = np.concatenate([r[1] for r in results])
    failures = sum(r[2] for r in results)

    config = {
        "command": "scan",
        "spec": spec_description(spec),
        "target": target.describe(),
        "K": K.describe(),
        "h": float(h),
        "N": N,
        "epsilons": list(eps),
        "X": float(X),
        "zeros": array_digest(gammas),
        "version": CODE_VERSION,
    }
    flat_config = {
        "spec": spec.name,
        "target": target.kind,
        "K": f"[{num(K.sigma_lo)},{num(K.sigma_hi)}]x[{num(K.t_lo)},{num(K.t_hi)}]",
        "grid_step": repr(K.step),
        "h": repr(float(h)),
        "N": N,
        "epsilons": " ".join(repr(e) for e in eps),
        "X": repr(float(X)),
        "version": CODE_VERSION,
    }
    return ScanReport(
        spec_name=spec.name, h=float(h), N=N, epsilons=eps,
        k=np.arange(N, 2 * N + 1), gammas=gammas, D=D, D_upper=U,
        densities=tuple(density(D, e) for e in eps), failures=failures,
        grid=K.describe(), config=flat_config, config_hash=config_hash(config),
    )


@dataclass(frozen=True)
class HSweepRow:
    h: float
    density: float
    failures: int


def h_sweep(spec, target, K, N, h_list, epsilon, zeros=None, X=DEFAULT_X, workers=1):
    """d_N(epsilon) for each h in the list (in the given order)."""
    h_list = [float(h) for h in h_list]
    if not h_list:
        raise ValidationError("empty h list")
    if any(not h > 0 for h in h_list):
        raise ValidationError("every h must be positive")
    rows = []
    for h in h_list:
        rep = universality_scan(spec, target, K, h, N, (epsilon,), zeros, X, workers)
        rows.append(HSweepRow(h, rep.densities[0], rep.failures))
    return rows
