"""Scenario summaries and the headline metrics derived from them.

The U-curve is the median proportion of significant features against the
proportion of mixing k/K. From it:

* AUMC: area under the curve (trapezoid rule over the evaluated mixing
  points, divided by the mixing width covered), signed by the gap
  integral of (prop(0) - prop(m)): negative when the permuted curve sits
  above the observed level on balance.
* AOI: the enclosing rectangle prop(0) x 1, with the same sign (zero when
  prop(0) is zero).
* slope0 / slope1: first step, and mean step over k = 0..K_f, both in
  proportion per unit of mixing (steps are 1/K wide).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import MissingObservedScenario, StrideError, TooFewPoints
from .stats import cliffs_delta, neg_log10

QUANTILES = (0.025, 0.5, 0.975)


@dataclass(frozen=True, eq=False)
class ScenarioSummary:
    k: int
    median_p: np.ndarray
    q025_p: np.ndarray
    q975_p: np.ndarray
    nsig_median: float
    nsig_q025: float
    nsig_q975: float
    draws_used: int
    # mean over draws and features of 1{p <= alpha}
    sig_fraction: float

    def __eq__(self, other):
        if not isinstance(other, ScenarioSummary):
            return NotImplemented
        return (
            self.k == other.k
            and self.draws_used == other.draws_used
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("median_p", "q025_p", "q975_p")
            )
            and (self.nsig_median, self.nsig_q025, self.nsig_q975, self.sig_fraction)
            == (other.nsig_median, other.nsig_q025, other.nsig_q975, other.sig_fraction)
        )


def aggregate_scenario(pvals, alpha: float, k: int = 0) -> ScenarioSummary:
    """Summarize a draws x features p-value matrix.

    Quantiles use linear interpolation between order statistics. nsig is
    counted per draw and then summarized with the same quantiles.
    """
    p = np.atleast_2d(np.asarray(pvals, dtype=float))
    if p.shape[0] < 1:
        raise ValueError("need at least one draw")
    q025, med, q975 = np.quantile(p, QUANTILES, axis=0, method="linear")
    sig = p <= alpha
    nsig = sig.sum(axis=1).astype(float)
    n025, nmed, n975 = np.quantile(nsig, QUANTILES, method="linear")
    return ScenarioSummary(
        k=int(k),
        median_p=med,
        q025_p=q025,
        q975_p=q975,
        nsig_median=float(nmed),
        nsig_q025=float(n025),
        nsig_q975=float(n975),
        draws_used=p.shape[0],
        sig_fraction=float(sig.mean()),
    )


@dataclass(frozen=True, eq=False)
class UCurve:
    k: np.ndarray
    mixing: np.ndarray
    prop: np.ndarray
    prop_q025: np.ndarray
    prop_q975: np.ndarray


def nsig_curve(summaries: Sequence[ScenarioSummary], K: int, n_features: int) -> UCurve:
    """Proportion of significant features against mixing k/K, ordered by k."""
    ss = sorted(summaries, key=lambda s: s.k)
    if not ss or ss[0].k != 0:
        raise MissingObservedScenario("the observed scenario k=0 is missing")
    k = np.array([s.k for s in ss])
    return UCurve(
        k=k,
        mixing=k / K if K > 0 else np.zeros(len(ss)),
        prop=np.array([s.nsig_median for s in ss]) / n_features,
        prop_q025=np.array([s.nsig_q025 for s in ss]) / n_features,
        prop_q975=np.array([s.nsig_q975 for s in ss]) / n_features,
    )


def _width(curve: UCurve) -> float:
    if curve.prop.size < 2:
        raise TooFewPoints("need at least two scenarios")
    width = float(curve.mixing[-1] - curve.mixing[0])
    if width <= 0:
        raise TooFewPoints("need a nonzero mixing range")
    return width


def curve_gap(curve: UCurve) -> float:
    """Mean of prop(0) - prop(m) over the covered mixing range."""
    return float(trapezoid(curve.prop[0] - curve.prop, curve.mixing) / _width(curve))


def curve_sign(curve: UCurve) -> float:
    return -1.0 if curve_gap(curve) < 0 else 1.0


def compute_aumc(curve: UCurve) -> float:
    area = float(trapezoid(curve.prop, curve.mixing) / _width(curve))
    return curve_sign(curve) * area


def compute_aoi(curve: UCurve) -> float:
    prop0 = float(curve.prop[0])
    if prop0 == 0:
        _width(curve)
        return 0.0
    return curve_sign(curve) * prop0


def _early_props(curve: UCurve, K_f: int) -> np.ndarray:
    want = np.arange(K_f + 1)
    if curve.k.size < K_f + 1 or not np.array_equal(curve.k[: K_f + 1], want):
        raise StrideError(f"scenarios 0..{K_f} must all be evaluated")
    return curve.prop[: K_f + 1]


def compute_slopes(curve: UCurve, K_f: int, K: int) -> tuple[float, float]:
    """(slope0, slope1) over the stride-1 range k = 0..K_f."""
    if K_f < 1:
        raise TooFewPoints("slopes need K_f >= 1")
    props = _early_props(curve, K_f)
    steps = np.diff(props) * K
    return float(steps[0]), float(np.mean(steps))


@dataclass(frozen=True)
class UCurveMetrics:
    aoi: float
    aumc: float
    slope0: float
    slope1: float
    prop_sig_observed: float


def ucurve_metrics(curve: UCurve, K_f: int, K: int) -> UCurveMetrics:
    slope0, slope1 = compute_slopes(curve, K_f, K)
    return UCurveMetrics(
        aoi=compute_aoi(curve),
        aumc=compute_aumc(curve),
        slope0=slope0,
        slope1=slope1,
        prop_sig_observed=float(curve.prop[0]),
    )


@dataclass(frozen=True)
class FragilityRecord:
    feature: str
    fi: int
    sfi: float
    observed_p: float


def fragility_index(trace, alpha: float, K_f: int, feature: str = "", observed_p: float | None = None) -> FragilityRecord:
    """First k at which the median p rises above alpha; capped at K_f.

    ``trace`` holds median p-values for k = 0..K_f (stride 1).
    """
    trace = np.asarray(trace, dtype=float)
    if trace.size < K_f + 1:
        raise StrideError(f"trace must cover k = 0..{K_f}")
    above = np.flatnonzero(trace[: K_f + 1] > alpha)
    fi = int(above[0]) if above.size else K_f
    sfi = fi / K_f if K_f > 0 else 0.0
    obs = float(trace[0]) if observed_p is None else float(observed_p)
    return FragilityRecord(feature, fi, sfi, obs)


def identify_robust_features(observed_p, full_mix: ScenarioSummary, alpha: float) -> np.ndarray:
    """Boolean mask of features significant at k=0 whose -log10 p clears
    the upper end of their own 95% band at full mixing."""
    obs = np.asarray(observed_p, dtype=float)
    return (obs <= alpha) & (neg_log10(obs) > neg_log10(full_mix.q025_p))


def effect_size(group1, group2) -> float:
    """Cliff's delta of group 1 against group 2."""
    return cliffs_delta(group1, group2)


def significance_order(observed_p, feature_names: Sequence[str]) -> list[int]:
    """Feature indices by ascending observed p, ties by name."""
    return sorted(range(len(feature_names)), key=lambda j: (observed_p[j], feature_names[j]))


def rank_trace_matrix(summaries: Sequence[ScenarioSummary], feature_names: Sequence[str]):
    """(order, matrix): median -log10 p per feature (rows, by observed
    significance) and scenario (columns, ascending k)."""
    ss = sorted(summaries, key=lambda s: s.k)
    if not ss or ss[0].k != 0:
        raise MissingObservedScenario("the observed scenario k=0 is missing")
    order = significance_order(ss[0].median_p, feature_names)
    mat = np.stack([neg_log10(s.median_p) for s in ss], axis=1)
    return order, mat[order]


@dataclass(frozen=True)
class IdentifiedFeature:
    feature: str
    observed_p: float
    effect_size: float
    fi: int | None


@dataclass
class AnalysisReport:
    """Everything a run produces. Serialized by :mod:`progperm.report`."""

    feature_names: list[str]
    outcome_kind: str
    n_samples: int
    n1: int | None
    n2: int | None
    K: int
    K_f: int
    config: dict
    scenarios: list[ScenarioSummary]
    observed_statistic: np.ndarray
    effect_sizes: np.ndarray
    metrics: UCurveMetrics | None = None
    fragility: list[FragilityRecord] = field(default_factory=list)
    identified: list[IdentifiedFeature] = field(default_factory=list)
    select0: int = 0
    mean_fi_top: float | None = None
    mean_sfi_top: float | None = None
    test_invocations: int = 0
    metadata: dict = field(default_factory=dict)
    unavailable: list[str] = field(default_factory=list)

    @property
    def observed(self) -> ScenarioSummary:
        return self.scenarios[0]

    @property
    def observed_p(self) -> np.ndarray:
        return self.scenarios[0].median_p

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def scenario(self, k: int) -> ScenarioSummary | None:
        for s in self.scenarios:
            if s.k == k:
                return s
        return None

    @property
    def full_mix(self) -> ScenarioSummary | None:
        return self.scenario(self.K_f)

    @property
    def curve(self) -> UCurve:
        return nsig_curve(self.scenarios, self.K, self.n_features)

    @property
    def select1(self) -> int:
        return len(self.identified)


def summarize_run(
    *,
    scenarios: Sequence[ScenarioSummary],
    feature_names: Sequence[str],
    alpha: float,
    K: int,
    K_f: int,
    top_m: int,
    observed_statistic,
    effect_sizes,
    outcome_kind: str,
    n_samples: int,
    n1: int | None,
    n2: int | None,
    config: dict,
    test_invocations: int = 0,
    metadata: dict | None = None,
) -> AnalysisReport:
    """Assemble the report and every metric the evaluated scenarios allow."""
    scenarios = sorted(scenarios, key=lambda s: s.k)
    names = list(feature_names)
    report = AnalysisReport(
        feature_names=names,
        outcome_kind=outcome_kind,
        n_samples=n_samples,
        n1=n1,
        n2=n2,
        K=K,
        K_f=K_f,
        config=dict(config),
        scenarios=list(scenarios),
        observed_statistic=np.asarray(observed_statistic, dtype=float),
        effect_sizes=np.asarray(effect_sizes, dtype=float),
        test_invocations=test_invocations,
        metadata=dict(metadata or {}),
    )
    obs = report.observed_p
    report.select0 = int(np.sum(obs <= alpha))
    curve = report.curve

    try:
        report.metrics = ucurve_metrics(curve, K_f, K)
    except (TooFewPoints, StrideError) as exc:
        report.unavailable.append(f"metrics: {exc}")

    have_early = curve.k.size >= K_f + 1 and np.array_equal(curve.k[: K_f + 1], np.arange(K_f + 1))
    fi_by_feature: dict[str, int] = {}
    if have_early and len(scenarios) > 1:
        traces = np.stack([s.median_p for s in scenarios[: K_f + 1]], axis=1)
        recs = [fragility_index(traces[j], alpha, K_f, names[j], obs[j]) for j in range(len(names))]
        order = significance_order(obs, names)
        report.fragility = [recs[j] for j in order]
        top = report.fragility[:top_m]
        report.mean_fi_top = float(np.mean([r.fi for r in top]))
        report.mean_sfi_top = float(np.mean([r.sfi for r in top]))
        fi_by_feature = {r.feature: r.fi for r in recs}
    else:
        report.unavailable.append("fragility: scenarios 0..K_f not all evaluated")

    full = report.full_mix
    if full is not None and K_f > 0:
        mask = identify_robust_features(obs, full, alpha)
        report.identified = [
            IdentifiedFeature(names[j], float(obs[j]), float(report.effect_sizes[j]), fi_by_feature.get(names[j]))
            for j in significance_order(obs, names)
            if mask[j]
        ]
    else:
        report.unavailable.append("identification: full-mixing scenario not evaluated")
    return report
