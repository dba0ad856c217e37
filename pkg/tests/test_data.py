import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from progperm import AnalysisConfig, FeatureTable, OutcomeVector, align, load_feature_table, load_outcome
from progperm.data import TestKind, write_feature_table, write_outcome
from progperm.errors import (
    CardinalityError,
    DuplicateId,
    MissingColumn,
    NegativeValue,
    ParseError,
    UnknownFeature,
    UnmatchedSamples,
    ValidationError,
)


def write(path, text):
    path.write_text(text)
    return path


def test_load_samples_as_rows(tmp_path):
    p = write(tmp_path / "t.csv", "id,a,b\ns1,1,2\ns2,3,4\ns3,0,5\n")
    t = load_feature_table(p)
    assert t.sample_ids == ("s1", "s2", "s3")
    assert t.feature_names == ("a", "b")
    assert t.values.shape == (3, 2)
    assert t.values[1, 0] == 3


def test_load_features_as_rows_transposes(tmp_path):
    p = write(tmp_path / "t.tsv", "taxon\ts1\ts2\ns_a\t1\t2\ns_b\t3\t4\n")
    t = load_feature_table(p, orientation="features")
    assert t.sample_ids == ("s1", "s2")
    assert t.feature_names == ("s_a", "s_b")
    np.testing.assert_array_equal(t.values, [[1, 3], [2, 4]])


def test_named_id_column(tmp_path):
    p = write(tmp_path / "t.csv", "a,sample,b\n1,x,2\n3,y,4\n")
    t = load_feature_table(p, id_column="sample")
    assert t.sample_ids == ("x", "y")
    assert t.feature_names == ("a", "b")
    with pytest.raises(MissingColumn):
        load_feature_table(p, id_column="nope")


@pytest.mark.parametrize(
    "text, err",
    [
        ("id,a\ns1,1\ns1,2\n", DuplicateId),
        ("id,a\ns1,-1\ns2,2\n", NegativeValue),
        ("id,a\ns1,x\ns2,2\n", ParseError),
        ("id,a\ns1,1,3\n", ParseError),
        ("id,a\ns1,nan\n", ValidationError),
    ],
)
def test_table_validation(tmp_path, text, err):
    with pytest.raises(err):
        load_feature_table(write(tmp_path / "t.csv", text))


def test_binary_outcome_levels_sorted(tmp_path):
    p = write(tmp_path / "m.csv", "id,season\na,wet\nb,dry\nc,wet\nd,dry\n")
    o = load_outcome(p, "season", "binary")
    assert o.levels == ("dry", "wet")
    assert list(o.binary_labels) == [2, 1, 2, 1]


def test_outcome_errors(tmp_path):
    p = write(tmp_path / "m.csv", "id,g,y\na,x,1\nb,y,2\nc,z,2\nd,x,2\n")
    with pytest.raises(CardinalityError):
        load_outcome(p, "g", "binary")
    with pytest.raises(MissingColumn):
        load_outcome(p, "missing", "binary")
    with pytest.raises(ValidationError):
        load_outcome(p, "y", "continuous")  # only two distinct values


def test_small_group_rejected():
    with pytest.raises(ValidationError):
        OutcomeVector("binary", ["a", "b", "c"], binary_labels=[1, 2, 2])


def test_align_orders_group1_first():
    t = FeatureTable(["a", "b", "c", "d"], ["f"], [[1], [2], [3], [4]])
    o = OutcomeVector("binary", ["d", "c", "b", "a"], binary_labels=[2, 1, 2, 1])
    t2, o2 = align(t, o)
    assert o2.sample_ids == ("c", "a", "d", "b")
    assert list(o2.binary_labels) == [1, 1, 2, 2]
    np.testing.assert_array_equal(t2.values[:, 0], [3, 1, 4, 2])
    t3, o3 = align(t2, o2)
    assert t3 == t2 and o3 == o2


def test_align_unmatched():
    t = FeatureTable(["a", "b", "c", "d"], ["f"], np.ones((4, 1)))
    o = OutcomeVector("binary", ["a", "b", "c", "e"], binary_labels=[1, 1, 2, 2])
    with pytest.raises(UnmatchedSamples):
        align(t, o)


def test_arrays_are_read_only():
    t = FeatureTable(["a"], ["f"], [[1.0]])
    with pytest.raises(ValueError):
        t.values[0, 0] = 2.0


def test_feature_index():
    t = FeatureTable(["a"], ["f", "g"], [[1.0, 2.0]])
    assert t.feature_index("g") == 1
    with pytest.raises(UnknownFeature):
        t.feature_index("h")


def test_config_validation_and_compatibility(small_binary, small_continuous):
    with pytest.raises(ValidationError):
        AnalysisConfig(alpha=1.5)
    with pytest.raises(ValidationError):
        AnalysisConfig(draw_scale=0)
    with pytest.raises(ValidationError):
        AnalysisConfig(test="z")
    with pytest.raises(ValidationError):
        AnalysisConfig(test=TestKind.SPEARMAN).check_compatible(*small_binary)
    AnalysisConfig(test=TestKind.KENDALL).check_compatible(*small_continuous)
    assert AnalysisConfig(top_m=50).effective_top_m(12) == 12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=3, max_size=3), min_size=2, max_size=6))
def test_table_roundtrip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    ids = [f"s{i}" for i in range(len(rows))]
    t = FeatureTable(ids, ["a", "b", "c"], rows)
    write_feature_table(t, path)
    assert load_feature_table(path) == t


def test_outcome_roundtrip(tmp_path):
    o = OutcomeVector("binary", ["a", "b", "c", "d"], binary_labels=[1, 2, 1, 2], levels=("hi", "lo"))
    write_outcome(o, tmp_path / "m.csv")
    assert load_outcome(tmp_path / "m.csv", "group", "binary") == o
    c = OutcomeVector("continuous", ["a", "b", "c"], continuous_values=[0.1, 0.2, 1 / 3])
    write_outcome(c, tmp_path / "c.csv", column="y")
    assert load_outcome(tmp_path / "c.csv", "y", "continuous") == c
