"""Progressive permutation scenarios: swap draws, draw budgets, RNG streams.

Scenario ``k`` exchanges the labels of ``k`` group-1 samples with ``k``
group-2 samples. Every draw gets its own random stream derived from
``(master_seed, k, draw_id)``, so a draw's content never depends on which
worker produced it or in what order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


def full_mixing_index(n1: int, n2: int) -> int:
    """ceil((n1*n2 - 1) / (n1 + n2 + 2)) in exact integer arithmetic."""
    if n1 < 1 or n2 < 1:
        raise DomainError("group sizes must be positive")
    num = n1 * n2 - 1
    den = n1 + n2 + 2
    return -(-num // den)


def log_choose(n: int, k: int) -> float:
    """Natural log of C(n, k) via log-gamma."""
    if k < 0 or n < 0 or k > n:
        raise DomainError(f"log_choose needs 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


@dataclass(frozen=True)
class DrawBudget:
    """Number of draws evaluated in one scenario.

    ``total`` is the exact count of distinct draws. When the sampling budget
    reaches it, ``exhaustive`` is set and every draw is enumerated once
    instead of sampled.
    """

    k: int
    nu: int
    total_log: float
    total: int
    exhaustive: bool
    raw_nu: int


def _budget(k: int, n_total: int, total: int, total_log: float, draw_scale: float) -> DrawBudget:
    if draw_scale <= 0:
        raise DomainError("draw_scale must be positive")
    if k == 0:
        return DrawBudget(0, 1, 0.0, 1, True, 1)
    raw = max(1, math.ceil(draw_scale * n_total * total_log))
    if raw >= total:
        return DrawBudget(k, total, total_log, total, True, raw)
    return DrawBudget(k, raw, total_log, total, False, raw)


def scenario_draw_count(n1: int, n2: int, k: int, draw_scale: float = 1.0) -> DrawBudget:
    """Draw budget for a binary swap scenario: ceil(scale * N * (lnC(n1,k) + lnC(n2,k)))."""
    if k < 0 or k > min(n1, n2):
        raise DomainError(f"scenario k={k} outside [0, {min(n1, n2)}]")
    total_log = log_choose(n1, k) + log_choose(n2, k)
    return _budget(k, n1 + n2, math.comb(n1, k) * math.comb(n2, k), total_log, draw_scale)


def continuous_draw_count(n: int, k: int, draw_scale: float = 1.0) -> DrawBudget:
    """Draw budget for a continuous-outcome scenario.

    A draw picks ``k`` positions and shuffles the outcome among them, giving
    n!/(n-k)! distinct (subset, arrangement) pairs; the budget is
    ceil(scale * n * ln(n!/(n-k)!)).
    """
    if k < 0 or k > n:
        raise DomainError(f"scenario k={k} outside [0, {n}]")
    total_log = float(gammaln(n + 1) - gammaln(n - k + 1))
    return _budget(k, n, math.perm(n, k), total_log, draw_scale)


def draw_stream(master_seed: int, k: int, draw_id: int) -> np.random.Generator:
    """Independent generator for one (scenario, draw) pair."""
    return np.random.default_rng([int(master_seed), int(k), int(draw_id)])


@dataclass(frozen=True)
class SwapDraw:
    """Positions *within* each group whose labels are exchanged."""

    from_group1: tuple[int, ...]
    from_group2: tuple[int, ...]
    draw_id: int = 0

    @property
    def k(self) -> int:
        return len(self.from_group1)


def generate_swap_draw(rng: np.random.Generator, n1: int, n2: int, k: int, draw_id: int = 0) -> SwapDraw:
    if k < 0 or k > min(n1, n2):
        raise DomainError(f"scenario k={k} outside [0, {min(n1, n2)}]")
    a = np.sort(rng.choice(n1, size=k, replace=False))
    b = np.sort(rng.choice(n2, size=k, replace=False))
    return SwapDraw(tuple(int(i) for i in a), tuple(int(j) for j in b), draw_id)


def enumerate_swap_draws(n1: int, n2: int, k: int):
    """Every distinct swap draw of scenario k, in lexicographic order."""
    pairs = itertools.product(itertools.combinations(range(n1), k), itertools.combinations(range(n2), k))
    for d, (a, b) in enumerate(pairs):
        yield SwapDraw(a, b, d)


def scenario_swap_draws(n1: int, n2: int, budget: DrawBudget, master_seed: int, start: int = 0, stop: int | None = None):
    """Draws ``start..stop`` of a scenario (sampled or enumerated per the budget)."""
    stop = budget.nu if stop is None else min(stop, budget.nu)
    if budget.exhaustive:
        yield from itertools.islice(enumerate_swap_draws(n1, n2, budget.k), start, stop)
        return
    for d in range(start, stop):
        yield generate_swap_draw(draw_stream(master_seed, budget.k, d), n1, n2, budget.k, d)


def _partition(labels: np.ndarray):
    return np.flatnonzero(labels == 1), np.flatnonzero(labels == 2)


def apply_swap(labels, draw: SwapDraw, partition=None) -> np.ndarray:
    """Exchange labels of the drawn samples.

    Within-group indices are resolved against ``partition`` (positions of
    group 1 and group 2), which defaults to the partition of ``labels``
    itself. Pass the original partition to compose swaps.
    """
    labels = np.asarray(labels)
    g1, g2 = _partition(labels) if partition is None else partition
    try:
        pos = np.concatenate([np.asarray(g1)[list(draw.from_group1)], np.asarray(g2)[list(draw.from_group2)]]).astype(int)
    except IndexError:
        raise IndexError("swap draw index outside its group") from None
    out = labels.copy()
    out[pos] = 3 - labels[pos]
    return out


def swap_mask(n1: int, n2: int, draw: SwapDraw) -> np.ndarray:
    """Group-1 indicator after the swap, for samples ordered group 1 first."""
    mask = np.zeros(n1 + n2)
    mask[:n1] = 1.0
    mask[list(draw.from_group1)] = 0.0
    mask[[n1 + j for j in draw.from_group2]] = 1.0
    return mask


def continuous_permutation_draw(rng: np.random.Generator, outcome, k: int) -> np.ndarray:
    """Shuffle the outcome values at ``k`` uniformly chosen positions."""
    outcome = np.asarray(outcome)
    return outcome[continuous_order(rng, outcome.size, k)]


def continuous_order(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Index vector realising one continuous draw: permuted = outcome[order]."""
    if k < 0 or k > n:
        raise DomainError(f"k={k} outside [0, {n}]")
    order = np.arange(n)
    if k:
        pos = rng.choice(n, size=k, replace=False)
        order[pos] = pos[rng.permutation(k)]
    return order


def _enumerate_orders(n: int, k: int):
    for subset in itertools.combinations(range(n), k):
        subset = np.array(subset, dtype=int)
        for arrangement in itertools.permutations(range(k)):
            order = np.arange(n)
            order[subset] = subset[list(arrangement)]
            yield order


def scenario_orders(n: int, budget: DrawBudget, master_seed: int, start: int = 0, stop: int | None = None):
    stop = budget.nu if stop is None else min(stop, budget.nu)
    if budget.exhaustive:
        yield from itertools.islice(_enumerate_orders(n, budget.k), start, stop)
        return
    for d in range(start, stop):
        yield continuous_order(draw_stream(master_seed, budget.k, d), n, budget.k)
