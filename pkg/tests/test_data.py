import numpy as np
import pytest

from fedcrit.data import (
    Dataset,
    load_csv,
    minmax_normalize,
    relabel_binary,
    stratified_split,
    synth_imbalanced,
    write_csv,
)
from fedcrit.errors import ConfigError, IngestionError
from fedcrit.partition import kmeans


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_small_file(tmp_path):
    ds = load_csv(_write(tmp_path, "a,b,label\n1,2,0\n3,4,0\n5,6,0\n7,8,1\n"))
    assert (ds.n, ds.d) == (4, 2)
    assert ds.y.tolist() == [0, 0, 0, 1]
    assert ds.outlier_pct == 25.0
    assert ds.feature_names == ("a", "b")
    assert ds.name == "d"


def test_majority_label_becomes_zero(tmp_path):
    ds = load_csv(_write(tmp_path, "x,y\n0,7\n0,7\n0,3\n0,9\n0,7\n"))
    assert ds.y.tolist() == [0, 0, 1, 1, 0]
    assert relabel_binary([1, 1, 0]).tolist() == [0, 0, 1]


@pytest.mark.parametrize("text, row, column", [
    ("a,b,label\n1,x,0\n", 2, "b"),
    ("a,b,label\n1,2,0\n1,nan,1\n", 3, "b"),
    ("a,b,label\n1,2\n", 2, None),
    ("a,b,label\n1,2,0.5\n", 2, "label"),
])
def test_ingestion_errors(tmp_path, text, row, column):
    with pytest.raises(IngestionError) as info:
        load_csv(_write(tmp_path, text))
    assert info.value.row == row
    assert info.value.column == column
    assert f"row {row}" in str(info.value)


@pytest.mark.parametrize("text", ["", "1,2,0\n3,4,1\n", "a,label\n"])
def test_bad_files(tmp_path, text):
    with pytest.raises(IngestionError):
        load_csv(_write(tmp_path, text))


def test_round_trip(tmp_path):
    ds = synth_imbalanced(300, d=3, seed=5)
    path = tmp_path / "s.csv"
    write_csv(ds, path)
    back = load_csv(path)
    np.testing.assert_allclose(back.X, ds.X, rtol=1e-11, atol=0)
    np.testing.assert_array_equal(back.y, ds.y)


def test_minmax_examples():
    ds = Dataset(np.array([[2.0, 5.0, 0.3], [4.0, 5.0, 0.0], [6.0, 5.0, 1.0]]), np.array([0, 0, 1]))
    out = minmax_normalize(ds)
    np.testing.assert_allclose(out.X[:, 0], [0, 0.5, 1])
    np.testing.assert_array_equal(out.X[:, 1], [0, 0, 0])
    np.testing.assert_allclose(out.X[:, 2], ds.X[:, 2], atol=1e-12)
    np.testing.assert_allclose(minmax_normalize(out).X, out.X, atol=1e-12)


def test_minmax_with_foreign_bounds():
    train = Dataset(np.array([[0.0], [10.0]]), np.array([0, 1]))
    test = Dataset(np.array([[5.0], [20.0]]), np.array([0, 1]))
    out = minmax_normalize(test, (train.X.min(axis=0), train.X.max(axis=0)))
    np.testing.assert_allclose(out.X[:, 0], [0.5, 2.0])


def test_stratified_split_counts():
    ds = Dataset(np.arange(100.0)[:, None], np.repeat([0, 1], [90, 10]))
    train, test = stratified_split(ds, 0.3, seed=1)
    assert test.counts().tolist() == [27, 3]
    assert train.counts().tolist() == [63, 7]
    rows = np.sort(np.concatenate([train.X[:, 0], test.X[:, 0]]))
    np.testing.assert_array_equal(rows, ds.X[:, 0])
    again = stratified_split(ds, 0.3, seed=1)[1]
    np.testing.assert_array_equal(again.X, test.X)


def test_stratified_split_needs_two_per_class():
    ds = Dataset(np.zeros((5, 1)), np.array([0, 0, 0, 0, 1]))
    with pytest.raises(ConfigError):
        stratified_split(ds, 0.3)
    with pytest.raises(ConfigError):
        stratified_split(ds, 1.0)


def test_dataset_is_read_only():
    ds = synth_imbalanced(100, seed=0)
    with pytest.raises(ValueError):
        ds.X[0, 0] = 1.0


def test_synth_counts_and_determinism():
    ds = synth_imbalanced(2000, minority_fraction=0.05, seed=3)
    assert ds.counts().tolist() == [1900, 100]
    assert (ds.n, ds.d) == (2000, 2)
    np.testing.assert_array_equal(ds.X, synth_imbalanced(2000, minority_fraction=0.05, seed=3).X)
    assert not np.array_equal(ds.X, synth_imbalanced(2000, minority_fraction=0.05, seed=4).X)


def test_synth_one_dimensional():
    ds = synth_imbalanced(200, d=1, n_clusters=3, seed=0)
    assert ds.counts().tolist() == [190, 10]
    assert np.all(np.isfinite(ds.X))


def test_synth_blobs_recoverable():
    ds = synth_imbalanced(800, n_clusters=4, separation=30.0, stretch=1.0, seed=2)
    assign = kmeans(ds.X, 4, seed=0)
    assert sorted(np.bincount(assign).tolist()) == [200] * 4


def test_synth_rejects_oversized_minority():
    with pytest.raises(ConfigError):
        synth_imbalanced(100, n_clusters=10, minority_fraction=0.2)
