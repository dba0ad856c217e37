"""Correlated negative-binomial count tables via a Gaussian copula.

Each block of samples draws Z ~ N(0, R) with AR(1) correlation
R[i, j] = rho**|i - j|, maps every column through the standard normal CDF
and then through the inverse CDF of its own NB(m, kappa) marginal
(variance m + m^2 / kappa). The final table is divided by one constant
larger than every row sum.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg, special

from .data import FeatureTable, OutcomeKind, OutcomeVector
from .errors import CholeskyError, DomainError

# quantile cap for the cumulative NB tables
TAIL = 1e-12
# floor applied to randomly drawn block means
MEAN_FLOOR = 0.01


@dataclass(frozen=True)
class NbMarginal:
    m: float
    kappa: float

    def __post_init__(self):
        if not (self.m > 0 and self.kappa > 0):
            raise DomainError("NB mean and dispersion must be positive")

    @property
    def variance(self) -> float:
        return self.m + self.m**2 / self.kappa


def ar1_correlation(p: int, rho: float) -> np.ndarray:
    if not 0 <= rho < 1:
        raise DomainError("rho must lie in [0, 1)")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def _nb_log_pmf(x: np.ndarray, m: float, kappa: float) -> np.ndarray:
    # NB with mean m, dispersion kappa: success prob kappa / (kappa + m)
    return (
        special.gammaln(x + kappa)
        - special.gammaln(kappa)
        - special.gammaln(x + 1)
        + kappa * math.log(kappa / (kappa + m))
        + x * math.log(m / (kappa + m))
    )


@functools.lru_cache(maxsize=256)
def nb_cdf_table(m: float, kappa: float) -> np.ndarray:
    """Cumulative probabilities P(X <= x), x = 0, 1, ..., up to 1 - TAIL."""
    size = max(64, int(4 * (m + 10 * math.sqrt(m + m * m / kappa))))
    while True:
        x = np.arange(size, dtype=float)
        cdf = np.cumsum(np.exp(_nb_log_pmf(x, m, kappa)))
        hit = np.flatnonzero(cdf >= 1.0 - TAIL)
        if hit.size:
            table = cdf[: hit[0] + 1]
            table.setflags(write=False)
            return table
        size *= 2


def nb_inverse_cdf(u, m: float, kappa: float) -> np.ndarray:
    """Smallest x with F(x) >= u, by search in the cumulative table."""
    cdf = nb_cdf_table(float(m), float(kappa))
    idx = np.searchsorted(cdf, np.asarray(u), side="left")
    return np.minimum(idx, cdf.size - 1).astype(float)


def nb_copula_sample(rng: np.random.Generator, n: int, marginals: Sequence[NbMarginal], R: np.ndarray) -> np.ndarray:
    """n x p counts with NB marginals coupled through correlation R."""
    p = len(marginals)
    R = np.asarray(R, dtype=float)
    if R.shape != (p, p):
        raise DomainError("correlation matrix does not match the number of marginals")
    try:
        L = linalg.cholesky(R, lower=True)
    except linalg.LinAlgError as exc:
        raise CholeskyError(f"correlation matrix is not positive definite: {exc}") from None
    z = rng.standard_normal((n, p)) @ L.T
    u = special.ndtr(z)
    out = np.empty((n, p))
    for j, mg in enumerate(marginals):
        out[:, j] = nb_inverse_cdf(u[:, j], mg.m, mg.kappa)
    return out


def compositionalize(counts) -> np.ndarray:
    """Divide every entry by 1 + the largest row sum."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise DomainError("counts must be nonnegative")
    c = 1.0 + (counts.sum(axis=1).max() if counts.size else 0.0)
    return counts / c


def zero_fraction_profile(table) -> tuple[np.ndarray, np.ndarray]:
    """(per-sample, per-feature) fraction of zero entries."""
    values = table.values if isinstance(table, FeatureTable) else np.asarray(table)
    zeros = values == 0
    return zeros.mean(axis=1), zeros.mean(axis=0)


@dataclass(frozen=True)
class SimBlock:
    name: str
    n_samples: int
    group: int
    means: tuple[float, ...]
    kappa: float


@dataclass(frozen=True)
class SimScenario:
    blocks: tuple[SimBlock, ...]
    rho: float
    p: int
    nsv: int
    seed: int
    label: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        for b in self.blocks:
            if len(b.means) != self.p:
                raise DomainError(f"block {b.name} has {len(b.means)} means, expected {self.p}")

    @property
    def n_samples(self) -> int:
        return sum(b.n_samples for b in self.blocks)

    def manifest(self) -> dict:
        d = asdict(self)
        d["blocks"] = [asdict(b) for b in self.blocks]
        d["n_samples"] = self.n_samples
        d["generator"] = {
            "copula": "Gaussian, AR(1) correlation rho**|i-j|",
            "marginal": "negative binomial, variance m + m^2/kappa, inverse CDF by cumulative sums",
            "tail_cap": TAIL,
            "compositional_divisor": "1 + max row sum",
            "block_streams": "numpy SeedSequence([seed, block_index])",
        }
        return d


def generate(scenario: SimScenario) -> tuple[FeatureTable, OutcomeVector]:
    R = ar1_correlation(scenario.p, scenario.rho)
    parts, labels = [], []
    for i, b in enumerate(scenario.blocks):
        rng = np.random.default_rng([int(scenario.seed), i])
        margs = [NbMarginal(m, b.kappa) for m in b.means]
        parts.append(nb_copula_sample(rng, b.n_samples, margs, R))
        labels += [b.group] * b.n_samples
    values = compositionalize(np.vstack(parts))
    n = values.shape[0]
    width = len(str(max(n, scenario.p)))
    sids = [f"S{i + 1:0{width}d}" for i in range(n)]
    fnames = [f"F{j + 1:0{width}d}" for j in range(scenario.p)]
    table = FeatureTable(sids, fnames, values)
    outcome = OutcomeVector(OutcomeKind.BINARY, sids, binary_labels=labels, levels=("G1", "G2"))
    return table, outcome


def signal_scenario(rho: float, nsv: int, mean_diff: float, kappa: float, seed: int, p: int = 100, n_per_group: int = 30) -> SimScenario:
    """First ``nsv`` features: mean 10 in group 1, 10 - mean_diff in group 2;
    every other feature has mean 1 in both groups."""
    if not 0 <= nsv <= p:
        raise DomainError("nsv must lie in [0, p]")
    m1 = (10.0,) * nsv + (1.0,) * (p - nsv)
    m2 = (10.0 - mean_diff,) * nsv + (1.0,) * (p - nsv)
    blocks = (
        SimBlock("D1", n_per_group, 1, m1, float(kappa)),
        SimBlock("D2", n_per_group, 2, m2, float(kappa)),
    )
    return SimScenario(blocks, rho, p, nsv, seed, label=f"signal(rho={rho}, nsv={nsv}, mdiff={mean_diff}, kappa={kappa})")


def build_signal_dataset(rho: float, nsv: int, mean_diff: float, kappa: float, seed: int) -> tuple[FeatureTable, OutcomeVector]:
    return generate(signal_scenario(rho, nsv, mean_diff, kappa, seed))


SIGNAL_GRID = [
    (rho, nsv, mdiff, kappa)
    for rho in (0.5, 0.8)
    for nsv in (30, 90)
    for mdiff in (9, 4, 0)
    for kappa in (24, 1)
]


def _seq(*pairs) -> tuple[float, ...]:
    out: list[float] = []
    for value, count in pairs:
        out += [float(value)] * count
    return tuple(out)


def _random_means(rng: np.random.Generator, mu: float, var: float, count: int) -> tuple[float, ...]:
    draws = rng.normal(mu, math.sqrt(var), size=count)
    return tuple(float(v) for v in np.maximum(draws, MEAN_FLOOR))


def simdata_scenario(which: int, seed: int) -> SimScenario:
    """The three heterogeneity presets: n1 = n2 = 30, p = 100, rho = 0.5."""
    rho, p = 0.5, 100
    if which == 1:
        blocks = (
            SimBlock("D11", 8, 1, _seq((6, 30), (4, 30), (1, 40)), 2.0),
            SimBlock("D12", 22, 1, _seq((4, 30), (6, 30), (1, 40)), 36.0),
            SimBlock("D2", 30, 2, _seq((15, 30), (0.5, 30), (1, 40)), 36.0),
        )
        return SimScenario(blocks, rho, p, 60, seed, label="simdata1")
    # RN(mu, var) means get their own stream so they do not shift block draws
    rng = np.random.default_rng([int(seed), 1_000_003])
    if which == 2:
        rn = _random_means(rng, 5, 1.2, 60) + _random_means(rng, 1, 0.1, 40)
        blocks = (
            SimBlock("D11", 16, 1, _seq((8, 30), (2, 30), (1, 40)), 25.0),
            SimBlock("D12", 14, 1, _seq((2, 30), (8, 30), (1, 40)), 24.0),
            SimBlock("D21", 20, 2, _seq((15, 30), (0.5, 30), (1, 40)), 26.0),
            SimBlock("D22", 10, 2, rn, 24.0),
        )
    elif which == 3:
        rn = _random_means(rng, 5, 1.6, 60) + _random_means(rng, 1, 0.3, 40)
        blocks = (
            SimBlock("D11", 24, 1, _seq((8, 30), (2, 30), (1, 40)), 14.0),
            SimBlock("D12", 6, 1, _seq((1, 30), (10, 30), (1, 40)), 14.0),
            SimBlock("D21", 20, 2, _seq((15, 30), (0.5, 30), (1, 40)), 14.0),
            SimBlock("D22", 10, 2, rn, 12.0),
        )
    else:
        raise DomainError("which must be 1, 2 or 3")
    notes = {"random_means": f"RN(mu, var) drawn per feature with sd = sqrt(var), floored at {MEAN_FLOOR}"}
    return SimScenario(blocks, rho, p, 60, seed, label=f"simdata{which}", notes=notes)


def build_simdata(which: int, seed: int) -> tuple[FeatureTable, OutcomeVector]:
    return generate(simdata_scenario(which, seed))
