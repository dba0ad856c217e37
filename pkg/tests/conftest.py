import numpy as np
import pytest

from progperm import FeatureTable, OutcomeVector

# one PASS/FAIL line per acceptance criterion, filled by test_acceptance
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_binary(values, n1, prefix="S"):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    ids = [f"{prefix}{i:03d}" for i in range(n)]
    names = [f"F{j:03d}" for j in range(values.shape[1])]
    labels = [1] * n1 + [2] * (n - n1)
    return FeatureTable(ids, names, values), OutcomeVector("binary", ids, binary_labels=labels, levels=("A", "B"))


@pytest.fixture
def small_binary():
    rng = np.random.default_rng(5)
    x = rng.gamma(2.0, 1.0, size=(16, 12))
    x[:8, :3] += 3.0
    return make_binary(x, 8)


@pytest.fixture
def small_continuous():
    rng = np.random.default_rng(6)
    n = 9
    y = rng.normal(size=n)
    x = np.abs(rng.normal(size=(n, 6)))
    x[:, 0] += np.exp(y)
    ids = [f"S{i}" for i in range(n)]
    return (
        FeatureTable(ids, [f"F{j}" for j in range(6)], x),
        OutcomeVector("continuous", ids, continuous_values=y),
    )
