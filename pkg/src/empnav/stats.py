"""Rank-based hypothesis tests for comparing policies on Mean Empowerment.

Implements exactly the three tests the evaluation protocol needs: Shapiro-Wilk
normality (Royston's AS R94 approximation, valid for 3 <= n <= 5000),
Kruskal-Wallis across groups, and Dunn's pairwise post-hoc with Bonferroni
correction. All three share the same average-rank machinery. p-values are
two-sided and tie-corrected. The chi-squared survival function is evaluated
through the regularized incomplete gamma function (relative accuracy well
below 1e-10 in scipy.special).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, ndtri


class DegenerateSampleError(ValueError):
    """Sample has no variation; the requested statistic is undefined."""


@dataclass
class SampleGroup:
    label: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("group values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"group {self.label!r} contains non-finite values")

    @property
    def n(self):
        return len(self.values)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float


def _as_groups(groups):
    out = []
    for i, g in enumerate(groups):
        if isinstance(g, SampleGroup):
            out.append(g)
        else:
            out.append(SampleGroup(label=f"group{i}", values=np.asarray(g, dtype=np.float64)))
    return out


def rank_with_ties(values):
    """Average ranks (1-based); tied values share the mean of their ranks."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot rank an empty sequence")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(all_values):
    """Sum of t^3 - t over tie groups."""
    _, counts = np.unique(all_values, return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def chi2_sf(x, df):
    """Chi-squared survival function via the regularized upper incomplete gamma."""
    if x < 0.0:
        return 1.0
    return float(gammaincc(0.5 * df, 0.5 * x))


def normal_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# Royston (1995) polynomial coefficients, ascending powers.
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coefs, x):
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


def _sw_coefficients(n):
    n2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = ndtri((np.arange(1, n2 + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    coefs = np.empty(n2)
    if n > 5:
        a2 = _poly(_C2, rsn) - m[1] / ssumm2
        fac = math.sqrt(
            (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)
        )
        coefs[0] = a1
        coefs[1] = a2
        coefs[2:] = -m[2:] / fac
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 * a1))
        coefs[0] = a1
        coefs[1:] = -m[1:] / fac
    return coefs


def shapiro_wilk(values):
    """Shapiro-Wilk W and p-value (Royston approximation, 3 <= n <= 5000)."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n < 3 or n > 5000:
        raise ValueError("Shapiro-Wilk supported for 3 <= n <= 5000")
    if x[-1] == x[0]:
        raise DegenerateSampleError("all sample values are identical")

    half = _sw_coefficients(n)
    a_full = np.zeros(n)
    n2 = n // 2
    a_full[:n2] = -half
    a_full[n - n2 :] = half[::-1]

    xc = x - x.mean()
    ssq = float(np.sum(xc * xc))
    w_num = float(a_full @ x)
    W = min(1.0, w_num * w_num / ssq)

    if n == 3:
        p = 1.90985931710274 * (math.asin(math.sqrt(W)) - 1.04719755119660)
        return TestResult(W, min(1.0, max(0.0, p)))
    if n <= 11:
        gamma = _poly(_G, float(n))
        lw = -math.log(gamma - math.log1p(-W))
        mu = _poly(_C3, float(n))
        sigma = math.exp(_poly(_C4, float(n)))
    else:
        ln_n = math.log(n)
        lw = math.log1p(-W)
        mu = _poly(_C5, ln_n)
        sigma = math.exp(_poly(_C6, ln_n))
    z = (lw - mu) / sigma
    return TestResult(W, normal_sf(z))


def kruskal_wallis(groups):
    """Tie-corrected H and chi-squared p-value over >= 2 groups."""
    gs = _as_groups(groups)
    if len(gs) < 2:
        raise ValueError("Kruskal-Wallis needs at least two groups")
    for g in gs:
        if g.n < 3:
            raise ValueError(f"group {g.label!r} has fewer than 3 values")
    pooled = np.concatenate([g.values for g in gs])
    N = pooled.size
    ranks = rank_with_ties(pooled)
    h = 0.0
    start = 0
    for g in gs:
        r_sum = float(np.sum(ranks[start : start + g.n]))
        h += r_sum * r_sum / g.n
        start += g.n
    h = 12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)
    tie = _tie_term(pooled)
    denom = 1.0 - tie / (N ** 3 - N)
    if denom <= 0.0:
        # every pooled value identical
        return TestResult(0.0, 1.0)
    h /= denom
    return TestResult(h, chi2_sf(h, len(gs) - 1))


def dunn_posthoc(groups, correction="bonferroni"):
    """Pairwise Dunn z-tests on pooled ranks; returns a symmetric p matrix.

    Two-sided p-values, multiplied by the number of unordered pairs when
    Bonferroni correction is on, clamped to 1. Diagonal is 1.
    """
    if correction not in ("bonferroni", None, "none"):
        raise ValueError(f"unsupported correction {correction!r}")
    gs = _as_groups(groups)
    if len(gs) < 2:
        raise ValueError("Dunn's test needs at least two groups")
    for g in gs:
        if g.n < 3:
            raise ValueError(f"group {g.label!r} has fewer than 3 values")
    pooled = np.concatenate([g.values for g in gs])
    N = pooled.size
    ranks = rank_with_ties(pooled)
    means = []
    start = 0
    for g in gs:
        means.append(float(np.mean(ranks[start : start + g.n])))
        start += g.n
    tie = _tie_term(pooled)
    base_var = N * (N + 1) / 12.0 - tie / (12.0 * (N - 1))
    k = len(gs)
    n_pairs = k * (k - 1) // 2
    factor = n_pairs if correction == "bonferroni" else 1
    p = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            var = base_var * (1.0 / gs[i].n + 1.0 / gs[j].n)
            if var <= 0.0:
                pij = 1.0
            else:
                z = abs(means[i] - means[j]) / math.sqrt(var)
                pij = min(1.0, 2.0 * normal_sf(z) * factor)
            p[i, j] = pij
            p[j, i] = pij
    return p
