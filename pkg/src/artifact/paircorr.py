"""Pair statistics of zero ordinates and equidistribution of shifted phases."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special, stats

from .config import num
from .errors import InsufficientZerosError, ValidationError


@dataclass(frozen=True)
class PairCountReport:
    T: float
    c: float
    count: int
    normalized: float
    includes_diagonal: bool
    zeros_upto_T: int


def _ordinates_upto(table, T):
    """gamma <= T, requiring the table to reach past T."""
    if table.k_max == 0 or table.gammas[-1] < T:
        top = table.gammas[-1] if table.k_max else 0.0
        raise InsufficientZerosError(f"zero table ends at {top:.6g}, below T = {T:.6g}")
    return table.gammas[: table.count_upto(T)]


def count_close_pairs(g, width, include_diagonal=True):
    """Ordered pairs (i, j) of the sorted array g with |g_i - g_j| < width."""
    g = np.asarray(g, dtype=float)
    n = g.size
    # searchsorted on g +- width can disagree with |g_i - g_j| < width by one rounding;
    # rounded differences are monotone in j, so the bounds are nudged onto them
    hi = np.searchsorted(g, g + width, side="left")  # first j with g_j - g_i >= width
    lo = np.searchsorted(g, g - width, side="right")  # first j with g_i - g_j < width
    while True:
        up = (hi < n) & (g[np.minimum(hi, n - 1)] - g < width)
        down = (hi > 0) & (g[np.maximum(hi - 1, 0)] - g >= width)
        if not (up.any() or down.any()):
            break
        hi = hi + up - down
    while True:
        down = (lo > 0) & (g - g[np.maximum(lo - 1, 0)] < width)
        up = (lo < n) & (g - g[np.minimum(lo, n - 1)] >= width)
        if not (up.any() or down.any()):
            break
        lo = lo + up - down
    total = int(np.sum(hi - lo))
    return total if include_diagonal else total - g.size


def weak_sum(table, T, c=1.0, include_diagonal=True):
    """Number of ordered pairs 0 < gamma, gamma' <= T with |gamma - gamma'| < c / log T."""
    if not c > 0:
        raise ValidationError("window constant c must be positive")
    if not T > math.e:
        raise ValidationError("weak_sum needs T > e")
    g = _ordinates_upto(table, T)
    count = count_close_pairs(g, c / math.log(T), include_diagonal)
    return PairCountReport(
        T=float(T), c=float(c), count=count, normalized=count / (T * math.log(T)),
        includes_diagonal=include_diagonal, zeros_upto_T=int(g.size),
    )


def montgomery_mass(a, b):
    """int_a^b (1 - (sin pi u / pi u)^2) du via the closed form of int_0^x sinc^2."""

    def F(x):
        # odd antiderivative of sinc^2: Si(2 pi x)/pi - sin^2(pi x)/(pi^2 x)
        x = float(x)
        if x == 0:
            return 0.0
        return float(special.sici(2 * math.pi * x)[0] / math.pi - math.sin(math.pi * x) ** 2 / (math.pi**2 * x))

    return (b - a) - (F(b) - F(a))


@dataclass(frozen=True)
class PairHistogram:
    T: float
    edges: np.ndarray
    counts: np.ndarray
    prediction: np.ndarray
    diagonal_bin: int  # -1 when no bin contains 0

    @property
    def total(self):
        return int(self.counts.sum())

    def to_csv(self, path, header_lines=()):
        rows = [f"# {h}" for h in header_lines] + ["alpha_lo,alpha_hi,count,prediction"]
        for lo, hi, n, p in zip(self.edges[:-1], self.edges[1:], self.counts, self.prediction):
            rows.append(f"{num(lo)},{num(hi)},{int(n)},{num(p)}")
        Path(path).write_text("\n".join(rows) + "\n")


def _bin_of_zero(edges):
    """Index of the half-open bin [e_i, e_{i+1}) holding 0; the last bin is closed."""
    if not edges[0] <= 0 <= edges[-1]:
        return -1
    if edges[-1] == 0:
        return edges.size - 2
    return int(np.searchsorted(edges, 0.0, side="right") - 1)


def pair_correlation_histogram(table, T, alpha1, alpha2, bins):
    """Ordered pair differences (gamma - gamma') log T / 2 pi binned on [alpha1, alpha2].

    Bins are half open except the last, which includes alpha2.  The prediction
    for a bin [a, b] is (int_a^b (1 - sinc^2) du + delta) (T / 2 pi) log T,
    where delta = 1 exactly for the bin containing 0.
    """
    if not alpha1 < alpha2:
        raise ValidationError("need alpha1 < alpha2")
    if int(bins) < 1:
        raise ValidationError("need at least one bin")
    if not T > math.e:
        raise ValidationError("histogram needs T > e")
    g = _ordinates_upto(table, T)
    scale = math.log(T) / (2 * math.pi)
    edges = np.linspace(alpha1, alpha2, int(bins) + 1)
    counts = np.zeros(int(bins), dtype=np.int64)
    # sweep over left points so differences beyond the window are never materialized;
    # the candidate window is padded by a hair and the exact filter on d decides membership
    pad = 1e-9 * (1.0 + abs(alpha1) + abs(alpha2)) / scale
    lo_w, hi_w = alpha1 / scale - pad, alpha2 / scale + pad
    for start in range(0, g.size, 4096):
        gi = g[start : start + 4096]
        j_lo = np.searchsorted(g, gi - hi_w, side="left")
        j_hi = np.searchsorted(g, gi - lo_w, side="right")
        for i, (a, b) in enumerate(zip(j_lo, j_hi)):
            d = (gi[i] - g[a:b]) * scale
            d = d[(d >= alpha1) & (d <= alpha2)]
            if d.size:
                idx = np.minimum(np.searchsorted(edges, d, side="right") - 1, bins - 1)
                counts += np.bincount(idx, minlength=bins)
    weight = T / (2 * math.pi) * math.log(T)
    pred = np.array([montgomery_mass(a, b) for a, b in zip(edges[:-1], edges[1:])])
    zero_bin = _bin_of_zero(edges)
    if zero_bin >= 0:
        pred[zero_bin] += 1.0
    return PairHistogram(float(T), edges, counts, pred * weight, zero_bin)


# ------------------------------------------------------- equidistribution


def shifted_phases(table, h, p, N):
    """frac(h gamma_k log p / 2 pi) for N <= k <= 2N (k >= 1)."""
    lo = max(int(N), 1)
    g = np.asarray(table.window(lo, max(2 * int(N), lo)))
    return np.mod(h * g * math.log(p) / (2 * math.pi), 1.0)


@dataclass(frozen=True)
class EquidistributionReport:
    h: float
    N: int
    primes: tuple
    ks: dict
    box_discrepancy: float  # nan with fewer than two primes
    sample_size: int

    def lines(self):
        out = [f"h={num(self.h)} N={self.N} sample={self.sample_size}"]
        out += [f"p={p} ks={self.ks[p]:.6f}" for p in self.primes]
        if not math.isnan(self.box_discrepancy):
            out.append(f"box_discrepancy(p={self.primes[0]},{self.primes[1]})={self.box_discrepancy:.6f}")
        return out


def box_discrepancy(u, v):
    """sup over anchored boxes [0,a) x [0,b) of |empirical fraction - a b|.

    The empirical count is piecewise constant, so the sup is reached at
    corners on sample coordinates, approached from either side.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.size
    if n == 0:
        raise ValidationError("empty sample")
    v_order = np.argsort(v, kind="stable")
    v_sorted = v[v_order]
    rank = np.empty(n, dtype=np.int64)
    rank[v_order] = np.arange(n)
    u_order = np.argsort(u, kind="stable")
    present = np.zeros(n, dtype=np.int64)

    def worst_at(a):
        cum = np.cumsum(present)
        closed = cum / n  # v <= v_sorted[j]
        open_ = (cum - present) / n  # v < v_sorted[j]
        area = a * v_sorted
        return max(
            float(np.max(np.abs(closed - area))),
            float(np.max(np.abs(open_ - area))),
            abs(cum[-1] / n - a),
        )

    worst = 0.0
    i = 0
    while i < n:
        a = u[u_order[i]]
        worst = max(worst, worst_at(a))  # u < a
        while i < n and u[u_order[i]] == a:
            present[rank[u_order[i]]] = 1
            i += 1
        worst = max(worst, worst_at(a))  # u <= a
    return max(worst, worst_at(1.0))


def phase_equidistribution(table, h, primes, N):
    """Per-prime KS distance of the shifted phases to uniform, plus a 2-d box discrepancy."""
    primes = tuple(int(p) for p in primes)
    if not primes:
        raise ValidationError("need at least one prime")
    samples = {p: shifted_phases(table, h, p, N) for p in primes}
    ks = {p: float(stats.kstest(samples[p], "uniform").statistic) for p in primes}
    box = math.nan
    if len(primes) >= 2:
        box = box_discrepancy(samples[primes[0]], samples[primes[1]])
    size = next(iter(samples.values())).size
    return EquidistributionReport(float(h), int(N), primes, ks, box, size)
