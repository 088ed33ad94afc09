import numpy as np
import pytest

from hyperpipe.validation import (
    CvStrategy,
    kfold_splits,
    shuffle_splits,
    stratified_kfold_splits,
)


def assert_valid_cover(splits, n):
    all_test = np.concatenate([s.test_indices for s in splits])
    assert np.array_equal(np.sort(all_test), np.arange(n))
    for s in splits:
        assert np.intersect1d(s.train_indices, s.test_indices).size == 0
        assert np.array_equal(
            np.sort(np.concatenate([s.train_indices, s.test_indices])), np.arange(n)
        )


def test_kfold_contiguous_blocks():
    splits = kfold_splits(6, 3, shuffle=False)
    assert [s.test_indices.tolist() for s in splits] == [[0, 1], [2, 3], [4, 5]]
    assert_valid_cover(splits, 6)


def test_kfold_uneven_sizes():
    splits = kfold_splits(7, 3, shuffle=False)
    assert [s.test_indices.size for s in splits] == [3, 2, 2]
    assert_valid_cover(splits, 7)


def test_kfold_shuffle_deterministic():
    a = kfold_splits(20, 4, shuffle=True, seed=99)
    b = kfold_splits(20, 4, shuffle=True, seed=99)
    for s, t in zip(a, b):
        assert np.array_equal(s.test_indices, t.test_indices)
        assert np.array_equal(s.train_indices, t.train_indices)
    c = kfold_splits(20, 4, shuffle=True, seed=100)
    assert any(
        not np.array_equal(s.test_indices, t.test_indices) for s, t in zip(a, c)
    )
    assert_valid_cover(a, 20)


def test_kfold_errors():
    with pytest.raises(ValueError):
        kfold_splits(3, 4)
    with pytest.raises(ValueError):
        kfold_splits(5, 1)


def test_stratified_balanced_classes():
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1], dtype=float)
    splits = stratified_kfold_splits(y, 2)
    for s in splits:
        labels = y[s.test_indices]
        assert np.sum(labels == 0) == 2
        assert np.sum(labels == 1) == 2
    assert_valid_cover(splits, 8)


def test_stratified_proportions_within_one():
    rng = np.random.default_rng(5)
    y = (rng.random(97) < 0.3).astype(float)
    k = 5
    splits = stratified_kfold_splits(y, k, shuffle=True, seed=11)
    for label in (0.0, 1.0):
        share = np.sum(y == label) / k
        for s in splits:
            count = np.sum(y[s.test_indices] == label)
            assert abs(count - share) <= 1
    assert_valid_cover(splits, 97)


def test_stratified_errors():
    with pytest.raises(ValueError, match="fewer than k"):
        stratified_kfold_splits(np.array([0.0, 0.0, 1.0]), 2)
    with pytest.raises(ValueError, match="classification"):
        stratified_kfold_splits(np.array([0.5, 1.5, 2.5]), 2)


def test_shuffle_split_sizes():
    splits = shuffle_splits(10, 8, 0.2, seed=1)
    assert len(splits) == 8
    for s in splits:
        assert s.test_indices.size == 2
        assert s.train_indices.size == 8


def test_shuffle_split_count_matches_requested():
    splits = shuffle_splits(50, 100, 0.2, seed=3)
    assert len(splits) == 100
    for s in splits:
        assert s.test_indices.size == 10
        assert np.intersect1d(s.train_indices, s.test_indices).size == 0


def test_shuffle_split_deterministic():
    a = shuffle_splits(30, 5, 0.25, seed=42)
    b = shuffle_splits(30, 5, 0.25, seed=42)
    for s, t in zip(a, b):
        assert np.array_equal(s.test_indices, t.test_indices)


def test_shuffle_split_minimum_test_size():
    splits = shuffle_splits(9, 2, 0.05, seed=0)
    for s in splits:
        assert s.test_indices.size == 1


def test_shuffle_split_errors():
    with pytest.raises(ValueError):
        shuffle_splits(10, 3, 0.0, seed=0)
    with pytest.raises(ValueError):
        shuffle_splits(1, 3, 0.5, seed=0)


def test_disjointness_over_random_parameters():
    rng = np.random.default_rng(17)
    for _ in range(25):
        n = int(rng.integers(6, 80))
        k = int(rng.integers(2, min(6, n) + 1))
        splits = kfold_splits(n, k, shuffle=bool(rng.integers(2)), seed=int(rng.integers(1000)))
        assert_valid_cover(splits, n)


def test_cv_strategy_dispatch():
    strat = CvStrategy(variant="kfold", n_splits=3, shuffle=False)
    assert len(strat.make_splits(9)) == 3
    strat = CvStrategy(variant="shuffle_split", n_splits=4, test_fraction=0.25)
    assert len(strat.make_splits(8)) == 4
    with pytest.raises(ValueError):
        CvStrategy(variant="bogus", n_splits=3)
    with pytest.raises(ValueError):
        CvStrategy(variant="shuffle_split", n_splits=3)
