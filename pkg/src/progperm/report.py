"""JSON and CSV serialization of analysis reports.

Floats are written with ``repr`` (shortest round-trip decimal), so parsing
any output reproduces the in-memory value exactly. Nothing time- or
machine-dependent is written, which keeps report.json byte-stable across
worker counts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import ParseError
from .runner import summary_from_json, summary_to_json
from .summarize import AnalysisReport, FragilityRecord, IdentifiedFeature, UCurveMetrics, rank_trace_matrix

SCHEMA = "progperm-report/1"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "schema": SCHEMA,
        "config": report.config,
        "metadata": report.metadata,
        "outcome_kind": report.outcome_kind,
        "n_samples": report.n_samples,
        "n1": report.n1,
        "n2": report.n2,
        "K": report.K,
        "K_f": report.K_f,
        "feature_names": list(report.feature_names),
        "metrics": None if report.metrics is None else asdict(report.metrics),
        "select0": report.select0,
        "select1": report.select1,
        "mean_fi_top": report.mean_fi_top,
        "mean_sfi_top": report.mean_sfi_top,
        "test_invocations": report.test_invocations,
        "observed_statistic": report.observed_statistic.tolist(),
        "effect_sizes": report.effect_sizes.tolist(),
        "fragility": [asdict(r) for r in report.fragility],
        "identified": [asdict(r) for r in report.identified],
        "scenarios": [summary_to_json(s) for s in report.scenarios],
        "unavailable": list(report.unavailable),
    }


def report_from_dict(d: dict) -> AnalysisReport:
    if d.get("schema") != SCHEMA:
        raise ParseError(f"unsupported report schema {d.get('schema')!r}")
    return AnalysisReport(
        feature_names=list(d["feature_names"]),
        outcome_kind=d["outcome_kind"],
        n_samples=d["n_samples"],
        n1=d["n1"],
        n2=d["n2"],
        K=d["K"],
        K_f=d["K_f"],
        config=d["config"],
        scenarios=[summary_from_json(s) for s in d["scenarios"]],
        observed_statistic=np.array(d["observed_statistic"], dtype=float),
        effect_sizes=np.array(d["effect_sizes"], dtype=float),
        metrics=None if d["metrics"] is None else UCurveMetrics(**d["metrics"]),
        fragility=[FragilityRecord(**r) for r in d["fragility"]],
        identified=[IdentifiedFeature(**r) for r in d["identified"]],
        select0=d["select0"],
        mean_fi_top=d["mean_fi_top"],
        mean_sfi_top=d["mean_sfi_top"],
        test_invocations=d["test_invocations"],
        metadata=d["metadata"],
        unavailable=list(d["unavailable"]),
    )


def dumps_report(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=1, sort_keys=True) + "\n"


def write_report_json(report: AnalysisReport, path) -> Path:
    path = Path(path)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def load_report(path) -> AnalysisReport:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    return report_from_dict(d)


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_ucurve_csv(report: AnalysisReport, path) -> Path:
    c = report.curve
    by_k = {s.k: s for s in report.scenarios}
    rows = [
        [int(k), _num(m), _num(p), _num(lo), _num(hi), _num(by_k[int(k)].nsig_median), by_k[int(k)].draws_used]
        for k, m, p, lo, hi in zip(c.k, c.mixing, c.prop, c.prop_q025, c.prop_q975)
    ]
    header = ["k", "mixing", "prop_sig", "prop_q025", "prop_q975", "nsig_median", "draws"]
    return _write_csv(Path(path), header, rows)


def write_fragility_csv(report: AnalysisReport, path) -> Path:
    rows = [[r.feature, r.fi, _num(r.sfi), _num(r.observed_p)] for r in report.fragility]
    return _write_csv(Path(path), ["feature", "fi", "sfi", "observed_p"], rows)


def write_identified_csv(report: AnalysisReport, path) -> Path:
    rows = [[r.feature, _num(r.observed_p), _num(r.effect_size), _num(r.fi)] for r in report.identified]
    return _write_csv(Path(path), ["feature", "observed_p", "effect_size", "fi"], rows)


def write_traces_csv(report: AnalysisReport, path) -> Path:
    """Median -log10 p per feature (rows by observed significance) and k."""
    order, mat = rank_trace_matrix(report.scenarios, report.feature_names)
    ks = [s.k for s in sorted(report.scenarios, key=lambda s: s.k)]
    rows = [[report.feature_names[j], *(_num(v) for v in row)] for j, row in zip(order, mat)]
    return _write_csv(Path(path), ["feature", *(f"k{k}" for k in ks)], rows)


def write_csvs(report: AnalysisReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    return [
        write_ucurve_csv(report, out / "ucurve.csv"),
        write_fragility_csv(report, out / "fragility.csv"),
        write_identified_csv(report, out / "identified.csv"),
        write_traces_csv(report, out / "traces.csv"),
    ]


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]

