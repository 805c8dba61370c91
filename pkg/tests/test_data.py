"""Schema-driven CSV loading, signed encodings, splits, synthetic data."""

import json

import numpy as np
import pytest

from softlogic.data import (
    ColumnSchema,
    DataError,
    Dataset,
    generate_synthetic,
    load_csv,
    load_schema,
    numeric_schema,
    relabel,
    save_csv,
    split_dataset,
)
from softlogic.expressions import Gate, Leaf
from softlogic.operators import OperatorKind


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def schema_file(tmp_path, columns, missing="?"):
    return write(tmp_path, "schema.json",
                 json.dumps({"missing_token": missing, "columns": columns}))


# -------------------------------------------------------------- schema


def test_load_schema_reads_columns(tmp_path):
    path = schema_file(tmp_path, [
        {"name": "age", "kind": "numeric"},
        {"name": "vote", "kind": "binary_categorical"},
        {"name": "party", "kind": "label"},
    ])
    cols = load_schema(path)
    assert [(c.name, c.kind) for c in cols] == [
        ("age", "numeric"), ("vote", "binary_categorical"), ("party", "label")]
    assert all(c.missing_token == "?" for c in cols)


def test_load_schema_per_column_missing_token(tmp_path):
    path = schema_file(tmp_path, [
        {"name": "a", "kind": "numeric", "missing_token": "NA"},
        {"name": "y", "kind": "label"},
    ], missing="-")
    cols = load_schema(path)
    assert cols[0].missing_token == "NA"
    assert cols[1].missing_token == "-"


def test_load_schema_requires_exactly_one_label(tmp_path):
    path = schema_file(tmp_path, [{"name": "a", "kind": "numeric"}])
    with pytest.raises(DataError):
        load_schema(path)
    path = schema_file(tmp_path, [
        {"name": "a", "kind": "label"}, {"name": "b", "kind": "label"}])
    with pytest.raises(DataError):
        load_schema(path)


def test_load_schema_rejects_bad_json_and_kinds(tmp_path):
    with pytest.raises(DataError):
        load_schema(write(tmp_path, "broken.json", "{not json"))
    path = schema_file(tmp_path, [
        {"name": "a", "kind": "floatingpoint"},
        {"name": "y", "kind": "label"}])
    with pytest.raises(DataError):
        load_schema(path)


# ------------------------------------------------------------ encoding


def vote_schema():
    return [
        ColumnSchema("vote", "binary_categorical"),
        ColumnSchema("party", "label"),
    ]


def test_binary_encoding_sorted_pair(tmp_path):
    # Lexicographically smaller category takes -1, larger +1, missing 0.
    path = write(tmp_path, "v.csv", "y,dem\nn,rep\n?,dem\nn,dem\n")
    ds = load_csv(path, vote_schema())
    assert ds.features[:, 0].tolist() == [1.0, -1.0, 0.0, -1.0]
    assert ds.labels.tolist() == [0, 1, 0, 0]
    assert ds.label_names == ["dem", "rep"]
    assert ds.class_count == 2


def test_binary_encoding_extra_category_warns_and_zeroes(tmp_path):
    # Two most frequent categories survive; stragglers map to neutral 0.
    path = write(tmp_path, "v.csv", "y,a\nn,a\ny,a\nn,b\nmaybe,b\n")
    with pytest.warns(UserWarning, match="maybe"):
        ds = load_csv(path, vote_schema())
    assert ds.features[:, 0].tolist() == [1.0, -1.0, 1.0, -1.0, 0.0]


def test_one_hot_encoding_signed(tmp_path):
    path = write(tmp_path, "m.csv", "red,0\ngreen,1\nblue,0\n?,1\n")
    schema = [ColumnSchema("color", "multi_categorical"),
              ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    # Categories sorted: blue, green, red; one +1 each row, missing all -1.
    assert ds.feature_names == ["color=blue", "color=green", "color=red"]
    assert ds.features.tolist() == [
        [-1.0, -1.0, 1.0],
        [-1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0],
        [-1.0, -1.0, -1.0],
    ]
    assert np.all(ds.features.sum(axis=1) == np.array([-1, -1, -1, -3]))


def test_categorical_kind_resolves_by_cardinality(tmp_path):
    path = write(tmp_path, "c.csv", "a,x,0\nb,y,1\na,z,0\n")
    schema = [ColumnSchema("two", "categorical"),
              ColumnSchema("three", "categorical"),
              ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    assert ds.feature_names == ["two", "three=x", "three=y", "three=z"]
    assert ds.features[:, 0].tolist() == [-1.0, 1.0, -1.0]


def test_numeric_encoding_and_missing(tmp_path):
    path = write(tmp_path, "n.csv", "1.5,0\n?,1\n-2,0\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    assert ds.features[:, 0].tolist() == [1.5, 0.0, -2.0]
    assert any("missing" in note for note in ds.encoding_report)


def test_numeric_encoding_rejects_garbage(tmp_path):
    path = write(tmp_path, "n.csv", "1.5,0\npotato,1\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    with pytest.raises(DataError, match="potato"):
        load_csv(path, schema)


def test_ignore_column_dropped(tmp_path):
    path = write(tmp_path, "i.csv", "id1,3.0,0\nid2,4.0,1\n")
    schema = [ColumnSchema("id", "ignore"), ColumnSchema("v", "numeric"),
              ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    assert ds.feature_names == ["v"]
    assert ds.feature_count == 1


def test_label_classes_numbered_by_first_occurrence(tmp_path):
    path = write(tmp_path, "l.csv", "1,zebra\n2,ant\n3,zebra\n4,mole\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    assert ds.label_names == ["zebra", "ant", "mole"]
    assert ds.labels.tolist() == [0, 1, 0, 2]
    assert ds.class_count == 3


def test_missing_label_rejected(tmp_path):
    path = write(tmp_path, "l.csv", "1,a\n2,?\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    with pytest.raises(DataError, match="label"):
        load_csv(path, schema)


def test_malformed_row_reports_line_number(tmp_path):
    path = write(tmp_path, "bad.csv", "1,0\n2,0,extra\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    with pytest.raises(DataError, match="line 2"):
        load_csv(path, schema)


def test_blank_lines_skipped(tmp_path):
    path = write(tmp_path, "b.csv", "1,0\n\n2,1\n\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    assert load_csv(path, schema).row_count == 2


def test_empty_file_rejected(tmp_path):
    path = write(tmp_path, "e.csv", "\n\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    with pytest.raises(DataError, match="no data rows"):
        load_csv(path, schema)


def test_loading_is_deterministic(tmp_path):
    path = write(tmp_path, "d.csv", "y,1.25,a\nn,-0.5,b\n?,0.125,a\n")
    schema = [ColumnSchema("vote", "binary_categorical"),
              ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    a = load_csv(path, schema)
    b = load_csv(path, schema)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert a.encoding_report == b.encoding_report


# ------------------------------------------------------ dataset object


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(features=np.zeros(3), labels=np.zeros(3, dtype=int),
                feature_names=["a"], class_count=2)
    with pytest.raises(DataError):
        Dataset(features=np.zeros((3, 1)), labels=np.zeros(2, dtype=int),
                feature_names=["a"], class_count=2)


def test_take_subsets_rows():
    ds = Dataset(features=np.arange(8.0).reshape(4, 2),
                 labels=np.array([0, 1, 0, 1]),
                 feature_names=["a", "b"], class_count=2)
    sub = ds.take([2, 0])
    assert sub.features.tolist() == [[4.0, 5.0], [0.0, 1.0]]
    assert sub.labels.tolist() == [0, 0]


# ------------------------------------------------------- save round trip


def test_save_csv_round_trip_is_exact(tmp_path):
    ds = generate_synthetic(Gate(OperatorKind.CONJUNCTION, 1.0,
                                 Leaf(0), Leaf(1)),
                            feature_count=3, rows=20, seed=5)
    path = tmp_path / "out.csv"
    save_csv(ds, path)
    schema_path = tmp_path / "out.schema.json"
    schema_path.write_text(json.dumps(numeric_schema(ds.feature_names)))
    back = load_csv(path, load_schema(schema_path))
    assert np.array_equal(back.features, ds.features)   # repr() floats
    # Classes renumber by first occurrence; the partition survives exactly.
    recovered = [int(back.label_names[k]) for k in back.labels]
    assert recovered == ds.labels.tolist()


# --------------------------------------------------------------- split


def balanced_dataset(rows=100, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(features=rng.normal(size=(rows, 3)),
                   labels=np.arange(rows) % 2,
                   feature_names=["a", "b", "c"], class_count=2)


def test_split_sizes_and_disjointness():
    ds = balanced_dataset(100)
    train, test = split_dataset(ds, 0.3, seed=1)
    assert test.row_count == 30
    assert train.row_count == 70


def test_split_stratification_holds_per_class():
    rng = np.random.default_rng(3)
    labels = np.array([0] * 80 + [1] * 20)
    ds = Dataset(features=rng.normal(size=(100, 2)), labels=labels,
                 feature_names=["a", "b"], class_count=2)
    train, test = split_dataset(ds, 0.25, seed=2)
    assert int(np.sum(test.labels == 0)) == 20
    assert int(np.sum(test.labels == 1)) == 5


def test_split_deterministic_per_seed():
    ds = balanced_dataset(60)
    a_train, a_test = split_dataset(ds, 0.3, seed=9)
    b_train, b_test = split_dataset(ds, 0.3, seed=9)
    c_train, c_test = split_dataset(ds, 0.3, seed=10)
    assert np.array_equal(a_test.features, b_test.features)
    assert not np.array_equal(a_test.features, c_test.features)


def test_split_single_member_class_stays_in_training():
    ds = Dataset(features=np.zeros((5, 2)),
                 labels=np.array([0, 0, 0, 0, 1]),
                 feature_names=["a", "b"], class_count=2)
    with pytest.warns(UserWarning, match="single instance"):
        train, test = split_dataset(ds, 0.5, seed=0)
    assert 1 in train.labels.tolist()
    assert 1 not in test.labels.tolist()


def test_split_unstratified_counts():
    ds = balanced_dataset(40)
    train, test = split_dataset(ds, 0.25, seed=4, stratified=False)
    assert test.row_count == 10


def test_split_rejects_degenerate_fraction():
    ds = balanced_dataset(10)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            split_dataset(ds, bad)


# ------------------------------------------------------------- relabel


def test_relabel_renumbers_to_reference_order(tmp_path):
    path = write(tmp_path, "l.csv", "1,ant\n2,zebra\n3,ant\n")
    schema = [ColumnSchema("v", "numeric"), ColumnSchema("y", "label")]
    ds = load_csv(path, schema)
    assert ds.labels.tolist() == [0, 1, 0]
    aligned = relabel(ds, ["zebra", "ant"])
    assert aligned.labels.tolist() == [1, 0, 1]
    assert aligned.label_names == ["zebra", "ant"]
    assert np.array_equal(aligned.features, ds.features)


def test_relabel_noop_when_order_already_matches():
    ds = generate_synthetic(Gate(OperatorKind.CONJUNCTION, 1.0,
                                 Leaf(0), Leaf(1)),
                            feature_count=2, rows=50, seed=3)
    aligned = relabel(ds, ds.label_names)
    assert np.array_equal(aligned.labels, ds.labels)


def test_relabel_allows_reference_superset():
    ds = Dataset(features=np.zeros((3, 2)), labels=np.array([0, 1, 0]),
                 feature_names=["a", "b"], class_count=2,
                 label_names=["no", "yes"])
    aligned = relabel(ds, ["yes", "no", "maybe"])
    assert aligned.labels.tolist() == [1, 0, 1]
    assert aligned.class_count == 3


def test_relabel_rejects_unknown_and_absent_names():
    ds = Dataset(features=np.zeros((2, 2)), labels=np.array([0, 1]),
                 feature_names=["a", "b"], class_count=2,
                 label_names=["no", "yes"])
    with pytest.raises(DataError, match="'no'"):
        relabel(ds, ["yes", "maybe"])
    bare = Dataset(features=np.zeros((2, 2)), labels=np.array([0, 1]),
                   feature_names=["a", "b"], class_count=2)
    with pytest.raises(DataError, match="no label names"):
        relabel(bare, ["yes", "no"])


# ----------------------------------------------------------- synthetic


def test_synthetic_labels_match_expression():
    expr = Gate(OperatorKind.CONJUNCTION, 1.0, Leaf(0), Leaf(2))
    ds = generate_synthetic(expr, feature_count=3, rows=200, seed=11)
    unit = (ds.features + 1.0) / 2.0
    want = (unit[:, 0] + unit[:, 2] - 1.0 >= 0.5).astype(int)
    assert ds.labels.tolist() == want.tolist()


def test_synthetic_features_live_on_signed_interval():
    ds = generate_synthetic(Leaf(0), feature_count=2, rows=500, seed=0)
    assert ds.features.min() >= -1.0
    assert ds.features.max() <= 1.0
    assert ds.features.min() < -0.9      # actually fills the range
    assert ds.features.max() > 0.9


def test_synthetic_noise_flips_labels():
    expr = Leaf(0)
    clean = generate_synthetic(expr, feature_count=2, rows=1000, seed=3)
    noisy = generate_synthetic(expr, feature_count=2, rows=1000, seed=3,
                               noise=0.2)
    assert np.array_equal(clean.features, noisy.features)
    flips = np.mean(clean.labels != noisy.labels)
    assert 0.1 < flips < 0.3


def test_synthetic_seeded_determinism():
    a = generate_synthetic(Leaf(0), feature_count=2, rows=50, seed=8)
    b = generate_synthetic(Leaf(0), feature_count=2, rows=50, seed=8)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_synthetic_validation():
    with pytest.raises(ValueError):
        generate_synthetic(Leaf(0), feature_count=2, rows=10, noise=0.5)
    with pytest.raises(ValueError):
        generate_synthetic(Leaf(0), feature_count=0, rows=10)
    with pytest.raises(ValueError):
        generate_synthetic(Leaf(5), feature_count=2, rows=10)   # slot range
