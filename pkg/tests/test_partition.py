import math

import numpy as np
import pytest
from sklearn.metrics import homogeneity_score

from fedcrit.data import Dataset, synth_imbalanced
from fedcrit.errors import ConfigError, ContractError
from fedcrit.partition import (
    PartitionSet,
    homogeneity,
    kmeans,
    kmeans_partition,
    partition_stats,
    verify_theorem1,
    write_manifest,
)

# partitions {4 x class 0} and {2 x class 0, 2 x class 1}: 1 - 0.5 ln 2 / H(3/4, 1/4)
HOMOGENEITY_EXAMPLE = 0.3836885465963443


def test_kmeans_separated_blobs():
    rng = np.random.default_rng(0)
    centers = np.array([[0, 0], [10, 0], [0, 10]])
    X = np.vstack([c + rng.normal(0, 0.3, (30, 2)) for c in centers])
    truth = np.repeat([0, 1, 2], 30)
    assign = kmeans(X, 3, seed=1)
    # same grouping up to a relabelling of the clusters
    for c in range(3):
        assert len(set(assign[truth == c])) == 1
    assert len(set(assign)) == 3


def test_kmeans_deterministic_and_no_empty_clusters():
    X = np.random.default_rng(1).normal(size=(200, 3))
    for k in (1, 5, 40, 200):
        a = kmeans(X, k, seed=3)
        np.testing.assert_array_equal(a, kmeans(X, k, seed=3))
        assert np.all(np.bincount(a, minlength=k) > 0)


def test_kmeans_duplicate_points_still_fills_clusters():
    X = np.vstack([np.zeros((10, 2)), np.ones((10, 2))])
    a = kmeans(X, 4, seed=0)
    assert np.all(np.bincount(a, minlength=4) > 0)


def test_kmeans_rejects_large_k():
    with pytest.raises(ConfigError):
        kmeans(np.zeros((3, 2)), 4)


def test_k1_single_partition():
    ds = synth_imbalanced(200, seed=2)
    parts = kmeans_partition(ds, 1)
    assert parts.sizes.tolist() == [200]
    assert homogeneity(parts) == pytest.approx(0.0, abs=1e-12)
    assert verify_theorem1(parts)


def test_homogeneity_example():
    parts = PartitionSet([0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 0, 0, 0, 0, 1, 1], 2)
    h_ck = 0.5 * math.log(2)
    h_c = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert homogeneity(parts) == pytest.approx(1 - h_ck / h_c, abs=1e-12)
    assert homogeneity(parts) == pytest.approx(HOMOGENEITY_EXAMPLE, abs=1e-12)


def test_homogeneity_edge_cases():
    assert homogeneity(PartitionSet([0, 0, 1, 1], [0, 0, 1, 1], 2)) == 1.0
    assert homogeneity(PartitionSet([0, 1, 2], [0, 0, 0], 3)) == 1.0
    assert homogeneity(PartitionSet([0, 0, 0, 0], [0, 1, 0, 1], 1)) == pytest.approx(0.0, abs=1e-12)


def test_homogeneity_matches_sklearn():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(2, 80))
        k = int(rng.integers(1, 10))
        y = rng.integers(0, 2, n)
        a = rng.integers(0, k, n)
        expected = homogeneity_score(y, a)
        assert homogeneity(PartitionSet(a, y, k)) == pytest.approx(expected, abs=1e-9)


def test_theorem1_randomized():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 300))
        k = int(rng.integers(1, 40))
        y = (rng.uniform(size=n) < rng.uniform(0, 0.5)).astype(int)
        a = rng.integers(0, k, n)
        parts = PartitionSet(a, y, k)
        assert verify_theorem1(parts)
        r = parts.global_ratio
        nonempty = parts.sizes > 0
        assert parts.outlier_ratios[nonempty].max() >= r - 1e-12


def test_theorem1_on_kmeans_partitions():
    ds = synth_imbalanced(400, seed=0)
    for k in (2, 4, 8, 16, 32):
        assert verify_theorem1(kmeans_partition(ds, k, seed=k))


def test_partition_stats_example():
    parts = PartitionSet([0, 0, 1, 1, 2, 2], [1, 0, 0, 0, 1, 1], 3)
    stats = partition_stats(parts)
    assert stats.ratios == [0.5, 0.0, 1.0]
    assert stats.minority_free == 1
    assert stats.below_global == 1


def test_no_minority_anywhere():
    parts = PartitionSet([0, 1, 1], [0, 0, 0], 2)
    stats = partition_stats(parts)
    assert stats.minority_free == 2
    assert stats.below_global == 0
    assert verify_theorem1(parts)


def test_labels_do_not_influence_partition():
    ds = synth_imbalanced(300, seed=4)
    flipped = Dataset(ds.X, 1 - ds.y)
    np.testing.assert_array_equal(kmeans_partition(ds, 6, 1).assignments,
                                  kmeans_partition(flipped, 6, 1).assignments)


def test_bad_assignments():
    with pytest.raises(ContractError):
        PartitionSet([0, 3], [0, 1], 2)
    with pytest.raises(ContractError):
        PartitionSet([0], [0, 1], 2)


def test_manifest(tmp_path):
    parts = PartitionSet([1, 0, 1], [0, 0, 1], 2)
    path = tmp_path / "m.csv"
    write_manifest(parts, path)
    assert path.read_text() == "row_index,partition_id\n0,1\n1,0\n2,1\n"
