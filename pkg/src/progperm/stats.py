"""Per-feature two-sided tests.

Scalar functions (``wilcoxon_rank_sum``, ``kendall_tau``, ...) operate on
one feature. The ``*Kernel`` classes evaluate one test for every feature
over a block of permutation draws at once: ranks, tie corrections and
variances do not change when labels are permuted, so they are computed once
and each block reduces to a matrix product.

Conventions: rank-sum uses the normal approximation with tie-corrected
variance and a 0.5 continuity correction; zero-variance inputs return
p = 1; p-values are capped at 1 but never floored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import rankdata

from .errors import DomainError, LengthMismatch

# smallest positive normal double; guards -log10(0)
P_FLOOR = np.finfo(float).tiny

_SQRT2 = math.sqrt(2.0)


class Method(str, enum.Enum):
    WILCOXON = "wilcoxon_rank_sum"
    KRUSKAL = "kruskal_wallis"
    KENDALL = "kendall_tau_b"
    SPEARMAN = "spearman_rho"
    Z = "two_sample_z"


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    p_value: float
    method: Method
    tie_corrected: bool


def norm_two_sided(z):
    """2 * Phi(-|z|), computed as erfc(|z| / sqrt 2) to keep tail accuracy."""
    return special.erfc(np.abs(z) / _SQRT2)


def neg_log10(p):
    return -np.log10(np.maximum(p, P_FLOOR))


def midranks(values) -> np.ndarray:
    """Average ranks (1-based); ties share the mean of their positions."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("midranks needs finite values")
    return rankdata(values, method="average", axis=0)


def _tie_sums(values: np.ndarray, axis=0):
    """Per-column sums over tie groups of t(t-1), t(t-1)(t-2), t(t-1)(2t+5)."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    s = np.sort(values, axis=0)
    out = np.zeros((3, s.shape[1]))
    for j in range(s.shape[1]):
        _, t = np.unique(s[:, j], return_counts=True)
        t = t[t > 1].astype(float)
        out[0, j] = np.sum(t * (t - 1))
        out[1, j] = np.sum(t * (t - 1) * (t - 2))
        out[2, j] = np.sum(t * (t - 1) * (2 * t + 5))
    return out


def _tie_term(values) -> np.ndarray:
    """Sum of (t^3 - t) over tie groups, per column."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    out = np.zeros(values.shape[1])
    s = np.sort(values, axis=0)
    for j in range(s.shape[1]):
        _, t = np.unique(s[:, j], return_counts=True)
        t = t.astype(float)
        out[j] = np.sum(t**3 - t)
    return out


def rank_sum_variance(n1: int, n2: int, tie_term):
    n = n1 + n2
    return n1 * n2 / 12.0 * ((n + 1) - np.asarray(tie_term, dtype=float) / (n * (n - 1)))


def rank_sum_pvalue(u1, n1: int, n2: int, var, continuity: bool = True):
    """Two-sided normal-approximation p for Mann-Whitney U of group 1."""
    u1 = np.asarray(u1, dtype=float)
    var = np.broadcast_to(np.asarray(var, dtype=float), u1.shape)
    dev = np.abs(u1 - n1 * n2 / 2.0)
    if continuity:
        dev = np.maximum(dev - 0.5, 0.0)
    ok = var > 0
    z = np.divide(dev, np.sqrt(np.where(ok, var, 1.0)))
    return np.where(ok, np.minimum(norm_two_sided(z), 1.0), 1.0)


def wilcoxon_rank_sum(group1, group2, continuity: bool = True) -> TestResult:
    x = np.asarray(group1, dtype=float)
    y = np.asarray(group2, dtype=float)
    n1, n2 = x.size, y.size
    if n1 < 2 or n2 < 2:
        raise DomainError("rank-sum test needs at least 2 samples per group")
    pooled = np.concatenate([x, y])
    ranks = midranks(pooled)
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    var = rank_sum_variance(n1, n2, _tie_term(pooled)[0])
    p = float(rank_sum_pvalue(u1, n1, n2, var, continuity))
    return TestResult(float(u1), p, Method.WILCOXON, True)


def kruskal_h(rank_sums, sizes, n: int, tie_term):
    """Tie-corrected H from per-group rank sums (group axis first)."""
    rank_sums = np.asarray(rank_sums, dtype=float)
    sizes = np.asarray(sizes, dtype=float).reshape((-1,) + (1,) * (rank_sums.ndim - 1))
    h = 12.0 / (n * (n + 1)) * np.sum(rank_sums**2 / sizes, axis=0) - 3.0 * (n + 1)
    corr = 1.0 - np.asarray(tie_term, dtype=float) / (n**3 - n)
    ok = corr > 0
    return np.where(ok, h / np.where(ok, corr, 1.0), 0.0), ok


def kruskal_wallis(groups) -> TestResult:
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(g.size < 2 for g in groups):
        raise DomainError("Kruskal-Wallis needs >= 2 groups of >= 2 samples")
    pooled = np.concatenate(groups)
    n = pooled.size
    ranks = midranks(pooled)
    bounds = np.cumsum([0] + [g.size for g in groups])
    sums = [ranks[a:b].sum() for a, b in zip(bounds[:-1], bounds[1:])]
    h, ok = kruskal_h(sums, [g.size for g in groups], n, _tie_term(pooled)[0])
    h = float(max(h, 0.0))
    p = float(special.chdtrc(len(groups) - 1, h)) if ok else 1.0
    return TestResult(h, min(p, 1.0), Method.KRUSKAL, True)


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"x and y lengths differ ({x.size} vs {y.size})")
    if x.size < 3:
        raise DomainError("correlation tests need at least 3 observations")
    return x, y


def _count_inversions(seq: list) -> int:
    """Strict inversions (i < j, seq[i] > seq[j]) by merge sort."""
    n = len(seq)
    if n < 2:
        return 0
    buf = list(seq)
    tmp = [None] * n
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, t = lo, mid, lo
            while i < mid and j < hi:
                if buf[j] < buf[i]:
                    tmp[t] = buf[j]
                    inv += mid - i
                    j += 1
                else:
                    tmp[t] = buf[i]
                    i += 1
                t += 1
            tmp[t:hi] = buf[i:mid] + buf[j:hi]
        buf, tmp = tmp, buf
        width *= 2
    return inv


def kendall_s_variance(n: int, x_ties, y_ties):
    """Variance of Kendall's S under independence, with tie adjustment.

    ``x_ties`` / ``y_ties`` are the stacked sums from ``_tie_sums``.
    """
    m = n * (n - 1.0)
    v0 = m * (2 * n + 5)
    var = (v0 - x_ties[2] - y_ties[2]) / 18.0
    var = var + x_ties[0] * y_ties[0] / (2.0 * m)
    if n > 2:
        var = var + x_ties[1] * y_ties[1] / (9.0 * m * (n - 2))
    return var


def kendall_tau(x, y) -> TestResult:
    """Kendall tau-b with a tie-adjusted normal approximation.

    Concordance is counted in O(n log n): sort by (x, y), then the
    discordant pairs are the strict inversions of the y sequence.
    """
    x, y = _check_pair(x, y)
    n = x.size
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = n * (n - 1) // 2
    tx = _tie_sums(x)[:, 0]
    ty = _tie_sums(y)[:, 0]
    n1 = tx[0] / 2
    n2 = ty[0] / 2
    # pairs tied in both x and y
    joint = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[j + 1] == xs[i] and ys[j + 1] == ys[i]:
            j += 1
        c = j - i + 1
        joint += c * (c - 1) // 2
        i = j + 1
    disc = _count_inversions(ys.tolist())
    s = n0 - n1 - n2 + joint - 2 * disc
    denom = (n0 - n1) * (n0 - n2)
    var = kendall_s_variance(n, tx, ty)
    if denom <= 0 or var <= 0:
        return TestResult(0.0, 1.0, Method.KENDALL, True)
    tau = s / math.sqrt(denom)
    p = float(norm_two_sided(s / math.sqrt(var)))
    return TestResult(float(tau), min(p, 1.0), Method.KENDALL, True)


def spearman_from_r(r, n: int):
    """Two-sided p for a rank correlation via Student t with n-2 df."""
    r = np.asarray(r, dtype=float)
    df = n - 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(r) * np.sqrt(df / np.maximum(1.0 - r * r, 0.0))
    return np.where(np.abs(r) >= 1.0, 0.0, special.stdtr(df, -np.where(np.isfinite(t), t, 0.0)) * 2.0)


def spearman_rho(x, y) -> TestResult:
    x, y = _check_pair(x, y)
    rx = midranks(x) - (x.size + 1) / 2.0
    ry = midranks(y) - (y.size + 1) / 2.0
    den = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if den == 0:
        return TestResult(0.0, 1.0, Method.SPEARMAN, True)
    r = float(np.clip(rx @ ry / den, -1.0, 1.0))
    return TestResult(r, float(spearman_from_r(r, x.size)), Method.SPEARMAN, True)


def two_sample_z(mean_diff: float, sigma: float, n1: int, n2: int) -> TestResult:
    """Known-variance Z test for a difference of two group means."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    z = mean_diff / (sigma * math.sqrt((n1 + n2) / (n1 * n2)))
    return TestResult(float(z), float(norm_two_sided(z)), Method.Z, False)


def cliffs_delta(group1, group2) -> float:
    """(#{x > y} - #{x < y}) / (n1 n2) over all cross-group pairs."""
    x = np.asarray(group1, dtype=float)
    y = np.asarray(group2, dtype=float)
    if x.size < 1 or y.size < 1:
        raise DomainError("effect size needs non-empty groups")
    diff = x[:, None] - y[None, :]
    return float((np.sum(diff > 0) - np.sum(diff < 0)) / (x.size * y.size))


# ---------------------------------------------------------------------------
# batched kernels used by the runner


class RankSumKernel:
    """Rank-sum p-values for all features; samples ordered group 1 first."""

    def __init__(self, values: np.ndarray, n1: int, continuity: bool = True):
        self.n1 = n1
        self.n2 = values.shape[0] - n1
        self.ranks = np.ascontiguousarray(midranks(values))
        self.var = rank_sum_variance(self.n1, self.n2, _tie_term(values))
        self.continuity = continuity

    def statistic(self, masks: np.ndarray) -> np.ndarray:
        return masks @ self.ranks - self.n1 * (self.n1 + 1) / 2.0

    def pvalues(self, masks: np.ndarray) -> np.ndarray:
        return rank_sum_pvalue(self.statistic(masks), self.n1, self.n2, self.var, self.continuity)


class KruskalKernel:
    def __init__(self, values: np.ndarray, n1: int):
        self.n1 = n1
        self.n = values.shape[0]
        self.ranks = np.ascontiguousarray(midranks(values))
        self.total = self.ranks.sum(axis=0)
        self.tie = _tie_term(values)

    def statistic(self, masks: np.ndarray) -> np.ndarray:
        r1 = masks @ self.ranks
        h, _ = kruskal_h(np.stack([r1, self.total - r1]), [self.n1, self.n - self.n1], self.n, self.tie)
        return np.maximum(h, 0.0)

    def pvalues(self, masks: np.ndarray) -> np.ndarray:
        ok = (1.0 - self.tie / (self.n**3 - self.n)) > 0
        p = special.chdtrc(1, self.statistic(masks))
        return np.where(ok, np.minimum(p, 1.0), 1.0)


class ZKernel:
    def __init__(self, values: np.ndarray, n1: int, sigma: float):
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        self.values = np.ascontiguousarray(values, dtype=float)
        self.n1 = n1
        self.n2 = values.shape[0] - n1
        self.total = self.values.sum(axis=0)
        self.se = sigma * math.sqrt((self.n1 + self.n2) / (self.n1 * self.n2))

    def mean_diff(self, masks: np.ndarray) -> np.ndarray:
        s1 = masks @ self.values
        return s1 / self.n1 - (self.total - s1) / self.n2

    def statistic(self, masks: np.ndarray) -> np.ndarray:
        return self.mean_diff(masks) / self.se

    def pvalues(self, masks: np.ndarray) -> np.ndarray:
        return norm_two_sided(self.statistic(masks))


class SpearmanKernel:
    """Spearman p-values for all features against permuted outcomes."""

    def __init__(self, values: np.ndarray, outcome: np.ndarray):
        n = values.shape[0]
        self.n = n
        rx = midranks(values) - (n + 1) / 2.0
        self.ry = midranks(outcome) - (n + 1) / 2.0
        self.rx = np.ascontiguousarray(rx)
        self.den = np.sqrt(np.sum(rx * rx, axis=0) * float(self.ry @ self.ry))

    def statistic(self, orders: np.ndarray) -> np.ndarray:
        num = self.ry[orders] @ self.rx
        ok = self.den > 0
        return np.where(ok, np.clip(num / np.where(ok, self.den, 1.0), -1.0, 1.0), 0.0)

    def pvalues(self, orders: np.ndarray) -> np.ndarray:
        r = self.statistic(orders)
        return np.where(self.den > 0, spearman_from_r(r, self.n), 1.0)


class KendallKernel:
    """Kendall tau-b p-values for all features against permuted outcomes.

    S for every (draw, feature) is the product of pairwise sign matrices,
    which turns the whole block into one BLAS call; all entries are small
    integers so the sums are exact.
    """

    max_block = 1 << 22

    def __init__(self, values: np.ndarray, outcome: np.ndarray):
        n = values.shape[0]
        self.n = n
        self.iu, self.ju = np.triu_indices(n, k=1)
        self.values = np.asarray(values, dtype=float)
        self.outcome = np.asarray(outcome, dtype=float)
        n0 = n * (n - 1) / 2.0
        tx = _tie_sums(self.values)
        ty = _tie_sums(self.outcome)[:, 0]
        self.denom = (n0 - tx[0] / 2.0) * (n0 - ty[0] / 2.0)
        self.sd = np.sqrt(np.maximum(kendall_s_variance(n, tx, ty[:, None]), 0.0))
        self.ok = (self.denom > 0) & (self.sd > 0)
        n_pairs = self.iu.size
        self.feature_block = max(1, self.max_block // n_pairs)
        self._sx = self._signs(self.values) if n_pairs * values.shape[1] <= self.max_block else None

    def _signs(self, v: np.ndarray) -> np.ndarray:
        return np.sign(v[self.iu] - v[self.ju])

    def s_statistic(self, orders: np.ndarray) -> np.ndarray:
        y = self.outcome[orders]
        sy = np.sign(y[:, self.iu] - y[:, self.ju])
        if self._sx is not None:
            return sy @ self._sx
        out = np.empty((orders.shape[0], self.values.shape[1]))
        for a in range(0, self.values.shape[1], self.feature_block):
            b = a + self.feature_block
            out[:, a:b] = sy @ self._signs(self.values[:, a:b])
        return out

    def statistic(self, orders: np.ndarray) -> np.ndarray:
        s = self.s_statistic(orders)
        return np.where(self.ok, s / np.sqrt(np.where(self.ok, self.denom, 1.0)), 0.0)

    def pvalues(self, orders: np.ndarray) -> np.ndarray:
        s = self.s_statistic(orders)
        z = s / np.where(self.ok, self.sd, 1.0)
        return np.where(self.ok, np.minimum(norm_two_sided(z), 1.0), 1.0)

    @property
    def preferred_chunk(self) -> int:
        return max(1, min(512, self.max_block // self.iu.size))
