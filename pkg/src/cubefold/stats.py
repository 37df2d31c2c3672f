"""Self-contained statistical test kernels: chi-squared, KS, thresholds.

Quantile routines are computed from series / continued-fraction
evaluations of the regularized incomplete gamma function and the
Kolmogorov distribution, so the verification stack carries no numerics
dependency beyond the standard library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BinnedCounts:
    """Observed counts over a fixed binning; shape () means flat."""

    counts: tuple[int, ...]
    shape: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.counts) == 0:
            raise ValueError("need at least one bin")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if self.shape and math.prod(self.shape) != len(self.counts):
            raise ValueError("shape does not match count vector")

    @property
    def total(self) -> int:
        return sum(self.counts)


def chi_squared(observed, expected) -> tuple[float, int]:
    """Pearson statistic sum (obs-exp)^2/exp and dof = bins - 1.

    `observed` is a BinnedCounts or a flat sequence; `expected` per-bin
    values, all strictly positive, summing to the same total.
    """
    if isinstance(observed, BinnedCounts):
        obs = np.asarray(observed.counts, dtype=float)
    else:
        obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise ValueError("observed and expected must have equal length")
    if np.any(exp <= 0):
        raise ValueError("expected counts must all be positive")
    if not math.isclose(obs.sum(), exp.sum(), rel_tol=1e-9, abs_tol=1e-9):
        raise ValueError("observed and expected totals differ")
    stat = float(((obs - exp) ** 2 / exp).sum())
    return stat, obs.size - 1


def chi_squared_contingency(table) -> tuple[float, int]:
    """Contingency form: expected from margins, dof = (r-1)(c-1)."""
    t = np.asarray(table, dtype=float)
    if t.ndim != 2:
        raise ValueError("contingency table must be 2-dimensional")
    n = t.sum()
    if n <= 0:
        raise ValueError("empty table")
    exp = np.outer(t.sum(axis=1), t.sum(axis=0)) / n
    if np.any(exp <= 0):
        raise ValueError("a margin is empty; expected count would be zero")
    stat = float(((t - exp) ** 2 / exp).sum())
    dof = (t.shape[0] - 1) * (t.shape[1] - 1)
    return stat, dof


def ks_statistic(samples, cdf) -> float:
    """Two-sided sup distance between the empirical CDF and `cdf`.

    `samples` need not be pre-sorted; `cdf` is evaluated pointwise.
    """
    xs = sorted(samples)
    n = len(xs)
    if n == 0:
        raise ValueError("need at least one sample")
    d = 0.0
    for i, x in enumerate(xs):
        fx = float(cdf(x))
        d = max(d, (i + 1) / n - fx, fx - i / n)
    return d


def _gammainc_lower_reg(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("need a > 0 and x >= 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        # series expansion
        term = 1.0 / a
        total = term
        k = a
        for _ in range(10000):
            k += 1.0
            term *= x / k
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    # continued fraction for Q(a, x), modified Lentz
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    q = h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return 1.0 - q


def chi2_cdf(x: float, dof: int) -> float:
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 0.0
    return _gammainc_lower_reg(dof / 2.0, x / 2.0)


def chi2_threshold(dof: int, confidence: float) -> float:
    """Chi-squared quantile by bisection on the series-evaluated CDF."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    lo, hi = 0.0, max(4.0 * dof, 16.0)
    while chi2_cdf(hi, dof) < confidence:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, dof) < confidence:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def kolmogorov_cdf(x: float) -> float:
    """CDF of the Kolmogorov distribution, alternating series."""
    if x <= 0:
        return 0.0
    total = 0.0
    for k in range(1, 200):
        term = math.exp(-2.0 * k * k * x * x)
        total += -term if k % 2 == 0 else term
        if term < 1e-18:
            break
    return max(0.0, 1.0 - 2.0 * total)


def ks_threshold(n: int, confidence: float) -> float:
    """Critical D for sample size n at the given confidence (asymptotic)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    lo, hi = 0.0, 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid) < confidence:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / math.sqrt(n)
