"""Nonparametric rank statistics and distribution summaries.

The Mann-Whitney U here counts pairs where the first sample's value is larger
(ties count one half), so U(a, b) + U(b, a) = n_a * n_b. The p-value is exact
by enumeration of all label assignments for small pooled sizes and a
tie-corrected, continuity-corrected normal approximation otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

EXACT_LIMIT = 16  # pooled size at or below which the exact branch is used


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p: float
    method: str  # "exact" | "normal"


def _midranks(pooled: list) -> list:
    order = sorted(range(len(pooled)), key=pooled.__getitem__)
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        # 1-based average rank of the tied block [i, j]
        avg = 0.5 * (i + j) + 1.0
        for m in range(i, j + 1):
            ranks[order[m]] = avg
        i = j + 1
    return ranks


def _u_from_ranksum(rank_sum: float, n_a: int) -> float:
    return rank_sum - 0.5 * n_a * (n_a + 1)


def _exact_p(ranks: list, n_a: int, u_obs: float) -> float:
    total = 0
    count_le = 0
    count_ge = 0
    eps = 1e-9
    for idx in combinations(range(len(ranks)), n_a):
        u = _u_from_ranksum(sum(ranks[i] for i in idx), n_a)
        total += 1
        if u <= u_obs + eps:
            count_le += 1
        if u >= u_obs - eps:
            count_ge += 1
    p = 2.0 * min(count_le, count_ge) / total
    return min(1.0, p)


def _normal_p(pooled: list, n_a: int, n_b: int, u_obs: float) -> float:
    n = n_a + n_b
    mu = 0.5 * n_a * n_b
    # tie-corrected variance
    tie_term = 0.0
    svals = sorted(pooled)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and svals[j + 1] == svals[i]:
            j += 1
        block = j - i + 1
        if block > 1:
            tie_term += block**3 - block
        i = j + 1
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return 1.0
    diff = u_obs - mu
    if abs(diff) <= 0.5:
        return 1.0
    z = (abs(diff) - 0.5) / math.sqrt(var)  # continuity correction
    return math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(a, b, method: str = "auto") -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    ``method`` is "auto" (exact for pooled size <= 16), "exact" or "normal".
    Identical samples carry no discriminating information and yield p = 1.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    pooled = a + b
    ranks = _midranks(pooled)
    u_obs = _u_from_ranksum(sum(ranks[: len(a)]), len(a))
    if method == "auto":
        method = "exact" if len(pooled) <= EXACT_LIMIT else "normal"
    if method == "exact":
        p = _exact_p(ranks, len(a), u_obs)
    elif method == "normal":
        p = _normal_p(pooled, len(a), len(b), u_obs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MannWhitneyResult(u=u_obs, p=p, method=method)


def bonferroni(p: float, m: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    return min(1.0, m * p)


@dataclass(frozen=True)
class SummaryStats:
    median: float
    q25: float
    q75: float
    whisker_low: float
    whisker_high: float
    mean: float
    std: float
    n: int
    degenerate: bool = False  # single sample: spread undefined, whiskers collapse


def summarize(values) -> SummaryStats:
    """Median and quartiles by linear rank interpolation; whiskers at
    mean +/- 1.96 sample standard deviations (n-1 denominator)."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q25, med, q75 = (float(x) for x in np.percentile(v, [25.0, 50.0, 75.0]))
    mean = float(np.mean(v))
    if v.size == 1:
        return SummaryStats(med, q25, q75, mean, mean, mean, 0.0, 1, degenerate=True)
    std = float(np.std(v, ddof=1))
    return SummaryStats(
        median=med,
        q25=q25,
        q75=q75,
        whisker_low=mean - 1.96 * std,
        whisker_high=mean + 1.96 * std,
        mean=mean,
        std=std,
        n=int(v.size),
    )
