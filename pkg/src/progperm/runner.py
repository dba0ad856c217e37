"""Scenario loop, parallel draw evaluation and aggregation.

Draws of a scenario are cut into fixed-size chunks whose boundaries depend
only on the data, never on the worker count. Each chunk is a pure function
of ``(master_seed, k, chunk)``, and results are reassembled in draw order,
so any number of workers gives a bitwise-identical report.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .data import AnalysisConfig, FeatureTable, OutcomeKind, OutcomeVector, TestKind, align
from .errors import ValidationError
from .permutation import (
    DrawBudget,
    continuous_draw_count,
    full_mixing_index,
    scenario_draw_count,
    scenario_orders,
    scenario_swap_draws,
    swap_mask,
)
from .stats import KendallKernel, KruskalKernel, RankSumKernel, SpearmanKernel, ZKernel
from .summarize import AnalysisReport, ScenarioSummary, aggregate_scenario, summarize_run

CHUNK = 256

CONVENTIONS = {
    "draw_budget": "nu = ceil(draw_scale * N * ln(number of distinct draws)); natural log",
    "draw_sampling": "with replacement; exhaustive enumeration when nu >= number of distinct draws",
    "observed_scenario": "k = 0 evaluated exactly once",
    "rng": "numpy PCG64 seeded by SeedSequence([master_seed, k, draw_id])",
    "quantiles": "linear interpolation between order statistics (2.5%, 50%, 97.5%)",
    "rank_sum": "normal approximation, tie-corrected variance, continuity correction 0.5",
    "kruskal_wallis": "tie-corrected H, chi-square with g-1 df",
    "kendall": "tau-b, tie-adjusted normal approximation of S",
    "spearman": "Pearson correlation of midranks, t approximation with n-2 df",
    "degenerate_features": "zero rank variance gives p = 1",
    "p_floor_for_log": "p floored at the smallest positive normal double before -log10",
    "aumc": "trapezoid area under prop(k/K) divided by covered mixing width, signed by the "
    "integral of prop(0) - prop(k/K) (zero counts as positive)",
    "aoi": "prop(0) with the same sign as AUMC; 0 when prop(0) = 0",
    "slopes": "in proportion per unit mixing; slope1 averages steps over k = 0..K_f",
    "fragility": "first k with median p > alpha; K_f when never crossed",
    "identification": "observed p <= alpha and observed p < 2.5% quantile of p at k = K_f (per feature)",
    "significance_order": "ascending observed p, ties by feature name",
    "binary_label_mapping": "two observed values sorted lexicographically -> labels 1, 2",
    "continuous_scenarios": "K = K_f = N; a draw shuffles the outcome among k random positions",
    "effect_size": "Cliff's delta (binary); observed rank correlation (continuous)",
}


@dataclass
class RunPlan:
    scenarios: list[DrawBudget]
    test: TestKind
    K: int
    K_f: int
    worker_count: int | None = None
    checkpoint: str | None = None

    @property
    def ks(self) -> list[int]:
        return [b.k for b in self.scenarios]

    @property
    def total_draws(self) -> int:
        return sum(b.nu for b in self.scenarios)


def scenario_range(outcome: OutcomeVector) -> tuple[int, int]:
    """(K, K_f) for an outcome."""
    if outcome.kind is OutcomeKind.BINARY:
        return min(outcome.n1, outcome.n2), full_mixing_index(outcome.n1, outcome.n2)
    return outcome.n_samples, outcome.n_samples


def plan(config: AnalysisConfig, outcome: OutcomeVector, worker_count: int | None = None, checkpoint=None) -> RunPlan:
    """Scenario list: k = 0, every k up to K_f, then every ``stride``-th k.

    A stride larger than K requests the observed scenario only.
    """
    K, K_f = scenario_range(outcome)
    stride = int(config.scenario_stride)
    if stride > K:
        ks = [0]
    else:
        ks = [0, *range(1, K_f + 1), *range(K_f + stride, K + 1, stride)]
    if outcome.kind is OutcomeKind.BINARY:
        budgets = [scenario_draw_count(outcome.n1, outcome.n2, k, config.draw_scale) for k in ks]
    else:
        budgets = [continuous_draw_count(outcome.n_samples, k, config.draw_scale) for k in ks]
    return RunPlan(budgets, config.test, K, K_f, worker_count, None if checkpoint is None else str(checkpoint))


def make_kernel(config: AnalysisConfig, table: FeatureTable, outcome: OutcomeVector):
    x = table.values
    if config.test is TestKind.WILCOXON:
        return RankSumKernel(x, outcome.n1)
    if config.test is TestKind.KRUSKAL:
        return KruskalKernel(x, outcome.n1)
    if config.test is TestKind.Z:
        return ZKernel(x, outcome.n1, config.z_sigma)
    if config.test is TestKind.SPEARMAN:
        return SpearmanKernel(x, outcome.continuous_values)
    return KendallKernel(x, outcome.continuous_values)


def resolve_workers(worker_count: int | None) -> int:
    if worker_count is None:
        env = os.environ.get("PROGPERM_THREADS")
        if env:
            try:
                worker_count = int(env)
            except ValueError:
                raise ValidationError(f"PROGPERM_THREADS={env!r} is not an integer") from None
        else:
            worker_count = os.cpu_count() or 1
    if worker_count < 1:
        raise ValidationError("worker count must be positive")
    return worker_count


def _fingerprint(table: FeatureTable, outcome: OutcomeVector, config: AnalysisConfig) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(config_dict(config), sort_keys=True).encode())
    h.update("\x1f".join(table.sample_ids).encode())
    h.update("\x1f".join(table.feature_names).encode())
    h.update(np.ascontiguousarray(table.values).tobytes())
    if outcome.kind is OutcomeKind.BINARY:
        h.update(np.ascontiguousarray(outcome.binary_labels).tobytes())
    else:
        h.update(np.ascontiguousarray(outcome.continuous_values).tobytes())
    return h.hexdigest()


def config_dict(config: AnalysisConfig) -> dict:
    d = asdict(config)
    d["test"] = config.test.value
    d["master_seed"] = int(config.master_seed)
    return d


def summary_to_json(s: ScenarioSummary) -> dict:
    return {
        "k": s.k,
        "draws_used": s.draws_used,
        "nsig_median": s.nsig_median,
        "nsig_q025": s.nsig_q025,
        "nsig_q975": s.nsig_q975,
        "sig_fraction": s.sig_fraction,
        "median_p": s.median_p.tolist(),
        "q025_p": s.q025_p.tolist(),
        "q975_p": s.q975_p.tolist(),
    }


def summary_from_json(d: dict) -> ScenarioSummary:
    return ScenarioSummary(
        k=int(d["k"]),
        median_p=np.array(d["median_p"], dtype=float),
        q025_p=np.array(d["q025_p"], dtype=float),
        q975_p=np.array(d["q975_p"], dtype=float),
        nsig_median=float(d["nsig_median"]),
        nsig_q025=float(d["nsig_q025"]),
        nsig_q975=float(d["nsig_q975"]),
        draws_used=int(d["draws_used"]),
        sig_fraction=float(d["sig_fraction"]),
    )


class _Checkpoint:
    """One JSON file per finished scenario plus a fingerprint of the inputs."""

    def __init__(self, root, fingerprint: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        stamp = self.root / "fingerprint.txt"
        if stamp.exists():
            if stamp.read_text().strip() != fingerprint:
                raise ValidationError(f"checkpoint {self.root} belongs to a different run")
        else:
            stamp.write_text(fingerprint + "\n")

    def _path(self, k: int) -> Path:
        return self.root / f"scenario_{k:06d}.json"

    def load(self, k: int) -> ScenarioSummary | None:
        p = self._path(k)
        if not p.exists():
            return None
        return summary_from_json(json.loads(p.read_text()))

    def save(self, summary: ScenarioSummary) -> None:
        tmp = self._path(summary.k).with_suffix(".tmp")
        tmp.write_text(json.dumps(summary_to_json(summary)))
        tmp.replace(self._path(summary.k))


@dataclass
class ScenarioProgress:
    k: int
    draws: int
    elapsed: float
    resumed: bool = False


@dataclass
class _Counter:
    invocations: int = 0
    per_scenario: dict = field(default_factory=dict)


def run(
    plan: RunPlan,
    table: FeatureTable,
    outcome: OutcomeVector,
    config: AnalysisConfig,
    progress: Callable[[ScenarioProgress], None] | None = None,
) -> AnalysisReport:
    """Evaluate every planned scenario and summarize into a report."""
    table, outcome = align(table, outcome)
    config.check_compatible(table, outcome)
    kernel = make_kernel(config, table, outcome)
    workers = resolve_workers(plan.worker_count)
    binary = outcome.kind is OutcomeKind.BINARY
    n = table.n_samples
    n1, n2 = (outcome.n1, outcome.n2) if binary else (None, None)
    chunk = getattr(kernel, "preferred_chunk", CHUNK)
    ckpt = _Checkpoint(plan.checkpoint, _fingerprint(table, outcome, config)) if plan.checkpoint else None

    def block(budget: DrawBudget, start: int) -> np.ndarray:
        stop = min(start + chunk, budget.nu)
        if binary:
            draws = scenario_swap_draws(n1, n2, budget, config.master_seed, start, stop)
            design = np.stack([swap_mask(n1, n2, d) for d in draws])
        else:
            design = np.stack(list(scenario_orders(n, budget, config.master_seed, start, stop)))
        return kernel.pvalues(design)

    counter = _Counter()
    summaries: list[ScenarioSummary] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for budget in plan.scenarios:
            t0 = time.perf_counter()
            summary = ckpt.load(budget.k) if ckpt else None
            resumed = summary is not None
            if summary is None:
                starts = range(0, budget.nu, chunk)
                if pool is None:
                    parts = [block(budget, s) for s in starts]
                else:
                    parts = list(pool.map(lambda s: block(budget, s), starts))
                summary = aggregate_scenario(np.vstack(parts), config.alpha, budget.k)
                if ckpt:
                    ckpt.save(summary)
            counter.invocations += summary.draws_used * table.n_features
            counter.per_scenario[budget.k] = summary.draws_used
            summaries.append(summary)
            if progress:
                progress(ScenarioProgress(budget.k, summary.draws_used, time.perf_counter() - t0, resumed))
    finally:
        if pool is not None:
            pool.shutdown()

    if binary:
        obs_mask = np.concatenate([np.ones(n1), np.zeros(n2)])[None, :]
        observed_stat = kernel.statistic(obs_mask)[0]
        u1 = RankSumKernel(table.values, n1).statistic(obs_mask)[0]
        effects = 2.0 * u1 / (n1 * n2) - 1.0
    else:
        observed_stat = kernel.statistic(np.arange(n)[None, :])[0]
        effects = observed_stat

    metadata = {
        "schema": "progperm-report/1",
        "version": __version__,
        "conventions": CONVENTIONS,
        "levels": list(outcome.levels) if outcome.levels else None,
        "budgets": [
            {"k": b.k, "nu": b.nu, "raw_nu": b.raw_nu, "total_log": b.total_log, "exhaustive": b.exhaustive}
            for b in plan.scenarios
        ],
        "sample_order": list(table.sample_ids),
    }
    return summarize_run(
        scenarios=summaries,
        feature_names=table.feature_names,
        alpha=config.alpha,
        K=plan.K,
        K_f=plan.K_f,
        top_m=config.effective_top_m(table.n_features),
        observed_statistic=observed_stat,
        effect_sizes=effects,
        outcome_kind=outcome.kind.value,
        n_samples=n,
        n1=n1,
        n2=n2,
        config=config_dict(config),
        test_invocations=counter.invocations,
        metadata=metadata,
    )


def analyze(
    table: FeatureTable,
    outcome: OutcomeVector,
    config: AnalysisConfig,
    worker_count: int | None = 1,
    checkpoint=None,
    progress=None,
) -> AnalysisReport:
    """plan + run in one call."""
    return run(plan(config, outcome, worker_count, checkpoint), table, outcome, config, progress)
