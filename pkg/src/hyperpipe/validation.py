"""Cross-validation split generation for the outer and inner loops.

All strategies are pure functions of their parameters (including the seed),
so identical calls give identical splits regardless of thread count or call
order.  Shuffling uses the SplitMix64 + Fisher-Yates scheme from ``rng``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64


@dataclass(frozen=True)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        tr = np.asarray(self.train_indices, dtype=np.int64)
        te = np.asarray(self.test_indices, dtype=np.int64)
        tr.setflags(write=False)
        te.setflags(write=False)
        object.__setattr__(self, "train_indices", tr)
        object.__setattr__(self, "test_indices", te)
        if tr.size == 0 or te.size == 0:
            raise ValueError("train and test partitions must both be non-empty")
        if np.intersect1d(tr, te).size:
            raise ValueError("train and test partitions overlap")


def kfold_splits(n: int, k: int, shuffle: bool = False, seed: int = 0) -> list[Split]:
    """k folds over [0, n); the first ``n mod k`` folds get the extra sample.

    Without shuffle, test folds are contiguous ascending index blocks; with
    shuffle, the same blocks are taken from a seeded permutation.
    """
    if k < 2:
        raise ValueError("kfold requires k >= 2")
    if k > n:
        raise ValueError(f"kfold requires k <= n (got k={k}, n={n})")
    order = np.arange(n)
    if shuffle:
        order = order.copy()
        SplitMix64(seed).shuffle(order)
    sizes = [n // k + (1 if f < n % k else 0) for f in range(k)]
    splits = []
    start = 0
    for size in sizes:
        test = np.sort(order[start : start + size])
        train = np.sort(np.concatenate([order[:start], order[start + size :]]))
        splits.append(Split(train, test))
        start += size
    return splits


def stratified_kfold_splits(y, k: int, shuffle: bool = False, seed: int = 0) -> list[Split]:
    """Class-proportional k folds; every class must have at least k members.

    Each class's members are dealt into folds with the same largest-first
    chunking as plain kfold, so per-class test counts deviate from the
    proportional share by at most one.
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.array_equal(y, np.floor(y)):
        raise ValueError("stratified kfold requires classification targets")
    if k < 2:
        raise ValueError("kfold requires k >= 2")
    n = y.shape[0]
    if k > n:
        raise ValueError(f"kfold requires k <= n (got k={k}, n={n})")
    rng = SplitMix64(seed)
    fold_members: list[list] = [[] for _ in range(k)]
    for label in np.unique(y):
        members = np.flatnonzero(y == label)
        if members.size < k:
            raise ValueError(
                f"class {label} has {members.size} members, fewer than k={k}"
            )
        if shuffle:
            members = members.copy()
            rng.shuffle(members)
        m = members.size
        start = 0
        for f in range(k):
            size = m // k + (1 if f < m % k else 0)
            fold_members[f].extend(members[start : start + size])
            start += size
    splits = []
    for f in range(k):
        test = np.sort(np.asarray(fold_members[f], dtype=np.int64))
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        splits.append(Split(np.flatnonzero(mask), test))
    return splits


def shuffle_splits(n: int, n_splits: int, test_fraction: float, seed: int = 0) -> list[Split]:
    """Repeated random splits; test size = max(1, floor(n * test_fraction))."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    if n_splits < 1:
        raise ValueError("n_splits must be >= 1")
    test_size = max(1, int(n * test_fraction))
    if test_size >= n:
        raise ValueError(f"degenerate test size {test_size} for n={n}")
    rng = SplitMix64(seed)
    splits = []
    for _ in range(n_splits):
        order = rng.permutation(n)
        test = np.sort(np.asarray(order[:test_size], dtype=np.int64))
        train = np.sort(np.asarray(order[test_size:], dtype=np.int64))
        splits.append(Split(train, test))
    return splits


@dataclass(frozen=True)
class CvStrategy:
    """Declarative CV choice: kfold | stratified_kfold | shuffle_split.

    ``seed=None`` lets the engine derive a scoped seed from its master seed.
    """

    variant: str
    n_splits: int
    test_fraction: float | None = None
    shuffle: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.variant not in ("kfold", "stratified_kfold", "shuffle_split"):
            raise ValueError(f"unknown cv variant {self.variant!r}")
        if self.n_splits < 1:
            raise ValueError("n_splits must be >= 1")
        if self.variant == "shuffle_split":
            if self.test_fraction is None or not 0.0 < self.test_fraction < 1.0:
                raise ValueError("shuffle_split requires test_fraction in (0, 1)")

    def make_splits(self, n: int, y=None, fallback_seed: int = 0) -> list[Split]:
        seed = self.seed if self.seed is not None else fallback_seed
        if self.variant == "kfold":
            return kfold_splits(n, self.n_splits, self.shuffle, seed)
        if self.variant == "stratified_kfold":
            if y is None:
                raise ValueError("stratified_kfold needs targets")
            return stratified_kfold_splits(y, self.n_splits, self.shuffle, seed)
        return shuffle_splits(n, self.n_splits, self.test_fraction, seed)

    def describe(self) -> dict:
        out = {"strategy": self.variant, "n_splits": self.n_splits, "shuffle": self.shuffle}
        if self.test_fraction is not None:
            out["test_fraction"] = self.test_fraction
        if self.seed is not None:
            out["seed"] = self.seed
        return out

