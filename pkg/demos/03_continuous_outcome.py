"""Progressive permutation with a continuous outcome.

For a continuous outcome the k-th scenario permutes the outcome values of k
samples, and association is measured by Spearman (or Kendall) correlation.
Here 5 of 40 features track the outcome through a monotone link.

    python demos/03_continuous_outcome.py
"""

import numpy as np

from progperm import AnalysisConfig, FeatureTable, OutcomeVector, analyze

rng = np.random.default_rng(3)
n, p = 24, 40
y = rng.normal(size=n)
x = rng.gamma(2.0, 1.0, size=(n, p))
x[:, :5] += 2.0 * np.exp(0.8 * y)[:, None]

ids = [f"S{i:02d}" for i in range(n)]
table = FeatureTable(ids, [f"F{j:02d}" for j in range(p)], x)
outcome = OutcomeVector("continuous", ids, continuous_values=y)

for test in ("spearman", "kendall"):
    report = analyze(table, outcome, AnalysisConfig(test=test, draw_scale=0.02, scenario_stride=2))
    m = report.metrics
    curve = report.curve
    print(f"{test}: {len(report.scenarios)} scenarios, AOI={m.aoi:.3f} AUMC={m.aumc:.3f}")
    print("  proportion significant:", " ".join(f"{v:.2f}" for v in curve.prop[::3]))
