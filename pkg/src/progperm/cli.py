"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import AnalyticSpec, analytic_curve, analytic_p
from .data import (
    AnalysisConfig,
    Orientation,
    OutcomeKind,
    TestKind,
    load_feature_table,
    load_outcome,
    write_feature_table,
    write_outcome,
)
from .errors import ValidationError
from .plots import emit_abundance_plot, emit_analytic_plot, report_figures
from .report import load_report, write_csvs, write_report_json
from .runner import analyze
from .simulate import generate, simdata_scenario, signal_scenario
from .summarize import significance_order

# abundance dot plots emitted per run
ABUNDANCE_FEATURES = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _emit_figures(report, out: Path, top_m: int) -> list[Path]:
    paths = []
    for name, svg in report_figures(report, top_m).items():
        _write_text(out / name, svg)
        paths.append(out / name)
    return paths


def cmd_run(args) -> int:
    test = TestKind(args.test) if args.test else (
        TestKind.WILCOXON if args.outcome_type == "binary" else TestKind.SPEARMAN
    )
    config = AnalysisConfig(
        alpha=args.alpha,
        master_seed=args.seed,
        draw_scale=args.draw_scale,
        scenario_stride=args.stride,
        top_m=args.top_m,
        test=test,
        z_sigma=args.z_sigma,
    )
    table = load_feature_table(args.table, args.orientation, args.id_column)
    outcome = load_outcome(args.metadata, args.outcome, args.outcome_type, args.id_column)

    def progress(p):
        if args.progress_json:
            print(json.dumps({"k": p.k, "draws": p.draws, "elapsed": round(p.elapsed, 3), "resumed": p.resumed}),
                  file=sys.stderr, flush=True)

    report = analyze(table, outcome, config, worker_count=args.threads, checkpoint=args.checkpoint, progress=progress)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = args.format
    # report.json is always written so figures can be re-rendered later
    write_report_json(report, out / "report.json")
    if fmt in ("csv", "all"):
        write_csvs(report, out)
    if fmt in ("svg", "all"):
        m = config.effective_top_m(len(report.feature_names))
        _emit_figures(report, out, m)
        if outcome.kind is OutcomeKind.BINARY:
            for j in significance_order(report.observed_p, report.feature_names)[:ABUNDANCE_FEATURES]:
                name = report.feature_names[j]
                svg = emit_abundance_plot(table, outcome, name, seed=config.master_seed)
                _write_text(out / f"abundance_{_safe(name)}.svg", svg)
    for note in report.unavailable:
        print(f"note: {note}", file=sys.stderr)
    if report.metrics is not None:
        m = report.metrics
        print(f"AOI={m.aoi:.4f} AUMC={m.aumc:.4f} slope0={m.slope0:.4f} slope1={m.slope1:.4f} "
              f"select0={report.select0} select1={report.select1}")
    return 0


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def cmd_simulate(args) -> int:
    if args.preset == "signal":
        scenario = signal_scenario(args.rho, args.nsv, args.mean_diff, args.kappa, args.seed)
    else:
        scenario = simdata_scenario(int(args.preset[-1]), args.seed)
    table, outcome = generate(scenario)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_table(table, out / "table.csv")
    write_outcome(outcome, out / "metadata.csv", column="group")
    manifest = scenario.manifest()
    manifest["files"] = {"table": "table.csv", "metadata": "metadata.csv", "outcome_column": "group"}
    _write_text(out / "manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"wrote {table.n_samples} x {table.n_features} table to {out}")
    return 0


def cmd_oracle(args) -> int:
    specs = [AnalyticSpec(args.n1, args.n2, d, args.sigma) for d in args.delta]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ks = np.arange(min(args.n1, args.n2) + 1)
    rows = ["delta,k,mixing,p,neg_log10_p"]
    curves = []
    for s in specs:
        mixing, y = analytic_curve(s, ks, textbook=args.textbook)
        p = analytic_p(s, ks, textbook=args.textbook)
        rows += [f"{s.delta!r},{int(k)},{float(m)!r},{float(pp)!r},{float(yy)!r}" for k, m, pp, yy in zip(ks, mixing, p, y)]
        curves.append((mixing, y))
    _write_text(out / "oracle.csv", "\n".join(rows) + "\n")
    svg = emit_analytic_plot(curves, [f"delta = {s.delta:g}" for s in specs],
                             title=f"analytic curves, n1={args.n1}, n2={args.n2}")
    _write_text(out / "oracle.svg", svg)
    return 0


def cmd_plot(args) -> int:
    report = load_report(args.report)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    top_m = args.top_m if args.top_m is not None else min(int(report.config.get("top_m", 50)), len(report.feature_names))
    paths = _emit_figures(report, out, top_m)
    if args.table and args.metadata and args.outcome:
        table = load_feature_table(args.table, args.orientation, args.id_column)
        outcome = load_outcome(args.metadata, args.outcome, "binary", args.id_column)
        for name in args.feature or []:
            svg = emit_abundance_plot(table, outcome, name, seed=int(report.config.get("master_seed", 0)))
            _write_text(out / f"abundance_{_safe(name)}.svg", svg)
    print(f"wrote {len(paths)} figures to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="progperm", description="Progressive permutation analysis of feature tables.")
    p.add_argument("--version", action="version", version=f"progperm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="full analysis of a table and an outcome")
    r.add_argument("--table", required=True)
    r.add_argument("--metadata", required=True)
    r.add_argument("--outcome", required=True, help="outcome column in the metadata file")
    r.add_argument("--outcome-type", choices=["binary", "continuous"], default="binary")
    r.add_argument("--test", choices=[t.value for t in TestKind])
    r.add_argument("--alpha", type=float, default=0.05)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--draw-scale", type=float, default=1.0)
    r.add_argument("--stride", type=int, default=1)
    r.add_argument("--top-m", type=int, default=50)
    r.add_argument("--threads", type=int, default=None)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--format", choices=["csv", "json", "svg", "all"], default="all")
    r.add_argument("--id-column", default=None)
    r.add_argument("--orientation", choices=[o.value for o in Orientation], default="samples")
    r.add_argument("--checkpoint", default=None, help="directory for per-scenario checkpoints")
    r.add_argument("--progress-json", action="store_true", help="JSON progress lines on stderr")
    r.add_argument("--z-sigma", type=float, default=None, help=argparse.SUPPRESS)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("simulate", help="generate a synthetic dataset")
    s.add_argument("--preset", choices=["simdata1", "simdata2", "simdata3", "signal"], required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--nsv", type=int, default=30)
    s.add_argument("--mean-diff", type=float, default=9.0)
    s.add_argument("--kappa", type=float, default=24.0)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="closed-form Z-test curves")
    o.add_argument("--n1", type=int, default=20)
    o.add_argument("--n2", type=int, default=20)
    o.add_argument("--delta", type=float, nargs="+", default=[0.5, 1.0])
    o.add_argument("--sigma", type=float, default=1.0)
    o.add_argument("--textbook", action="store_true", help="drop the factor 2 in the z scale")
    o.add_argument("--out-dir", default=".")
    o.set_defaults(func=cmd_oracle)

    pl = sub.add_parser("plot", help="re-render figures from report.json")
    pl.add_argument("--report", required=True)
    pl.add_argument("--out-dir", default=".")
    pl.add_argument("--top-m", type=int, default=None)
    pl.add_argument("--table")
    pl.add_argument("--metadata")
    pl.add_argument("--outcome")
    pl.add_argument("--feature", nargs="*")
    pl.add_argument("--id-column", default=None)
    pl.add_argument("--orientation", choices=[o.value for o in Orientation], default="samples")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"progperm: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime error
        print(f"progperm: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
