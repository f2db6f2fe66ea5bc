"""Baseline classifiers: Gaussian Naive Bayes, KNN (k=3), Random Forest (100).

Written against plain numpy arrays: X is (n, d), y is an integer class
vector. Every predictor returns (label, probabilities over the sorted class
set) and probabilities sum to 1.
"""

from __future__ import annotations

import numpy as np

from neopain.errors import ContractError
from neopain.seeding import rng_for

VAR_FLOOR = 1e-9


def _check_dataset(x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(x) != len(y):
        raise ContractError(f"bad dataset shapes: X {x.shape}, y {y.shape}")
    if len(x) == 0:
        raise ContractError("empty training set")
    if not np.all(np.isfinite(x)):
        raise ContractError("features contain non-finite values")
    return x, y


class GaussianNB:
    """Per-class independent Gaussians with a variance floor."""

    def fit(self, x: np.ndarray, y: np.ndarray) -> "GaussianNB":
        x, y = _check_dataset(x, y)
        self.classes_ = np.unique(y)
        self.means_ = np.stack([x[y == c].mean(axis=0) for c in self.classes_])
        self.vars_ = np.stack([
            np.maximum(x[y == c].var(axis=0), VAR_FLOOR) for c in self.classes_
        ])
        self.log_priors_ = np.log(
            np.array([(y == c).sum() for c in self.classes_]) / len(y)
        )
        return self

    def _log_posterior(self, x: np.ndarray) -> np.ndarray:
        diff = x[:, None, :] - self.means_[None, :, :]
        ll = -0.5 * np.sum(
            np.log(2.0 * np.pi * self.vars_) + diff**2 / self.vars_, axis=2
        )
        return ll + self.log_priors_

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        logp = self._log_posterior(x)
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(x), axis=1)]


class KNearestNeighbors:
    """Euclidean k-NN with vote-fraction probabilities.

    A vote tie goes to the tied class whose neighbors sit at the smaller mean
    distance.
    """

    def __init__(self, k: int = 3):
        if k < 1:
            raise ContractError(f"k must be >= 1, got {k}")
        self.k = k

    def fit(self, x: np.ndarray, y: np.ndarray) -> "KNearestNeighbors":
        self.x_, self.y_ = _check_dataset(x, y)
        if self.k > len(self.x_):
            raise ContractError(f"k={self.k} exceeds {len(self.x_)} training points")
        self.classes_ = np.unique(self.y_)
        return self

    def _vote(self, q: np.ndarray):
        dists = np.sqrt(np.sum((self.x_ - q) ** 2, axis=1))
        nearest = np.argsort(dists, kind="stable")[: self.k]
        labels = self.y_[nearest]
        probs = np.array([(labels == c).mean() for c in self.classes_])
        top = probs.max()
        tied = [c for c, p in zip(self.classes_, probs) if p == top]
        if len(tied) == 1:
            winner = tied[0]
        else:
            winner = min(
                tied, key=lambda c: dists[nearest][labels == c].mean()
            )
        return winner, probs

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.stack([self._vote(q)[1] for q in x])

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.array([self._vote(q)[0] for q in x])


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float(np.sum(p * p))


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "probs")

    def __init__(self, feature=None, threshold=None, left=None, right=None,
                 probs=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.probs = probs


class DecisionTree:
    """CART with Gini impurity, grown to purity, random feature subsets."""

    def __init__(self, max_features: int | None = None, seed: int = 0):
        self.max_features = max_features
        self.seed = seed

    def fit(self, x: np.ndarray, y_idx: np.ndarray, n_classes: int) -> "DecisionTree":
        self.n_classes = n_classes
        self._rng = np.random.default_rng(self.seed)
        self.root = self._grow(x, y_idx)
        return self

    def _leaf(self, y_idx: np.ndarray) -> _TreeNode:
        counts = np.bincount(y_idx, minlength=self.n_classes)
        return _TreeNode(probs=counts / counts.sum())

    def _best_split_on(self, xs_sorted: np.ndarray, onehot_sorted: np.ndarray):
        """Vectorized Gini scan over the midpoints of one sorted feature."""
        n = len(xs_sorted)
        cum = np.cumsum(onehot_sorted, axis=0)  # left counts if cut after row i
        valid = np.nonzero(xs_sorted[:-1] < xs_sorted[1:])[0]
        if len(valid) == 0:
            return None
        lc = cum[valid]
        nl = (valid + 1).astype(np.float64)
        rc = cum[-1] - lc
        nr = n - nl
        gini_l = 1.0 - np.sum((lc / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((rc / nr[:, None]) ** 2, axis=1)
        score = (nl * gini_l + nr * gini_r) / n
        i = int(np.argmin(score))
        cut = valid[i]
        thr = (xs_sorted[cut] + xs_sorted[cut + 1]) / 2.0
        return float(score[i]), float(thr)

    def _grow(self, x: np.ndarray, y_idx: np.ndarray) -> _TreeNode:
        if len(np.unique(y_idx)) == 1 or len(y_idx) == 1:
            return self._leaf(y_idx)
        d = x.shape[1]
        k = self.max_features or d
        feats = self._rng.choice(d, size=min(k, d), replace=False)
        onehot = np.eye(self.n_classes)[y_idx]
        best = None  # (gini, feature, threshold)
        for f in feats:
            order = np.argsort(x[:, f], kind="stable")
            found = self._best_split_on(x[order, f], onehot[order])
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(f), found[1])
        if best is None:  # all candidate features constant
            return self._leaf(y_idx)
        _, f, thr = best
        mask = x[:, f] <= thr
        return _TreeNode(
            feature=f, threshold=thr,
            left=self._grow(x[mask], y_idx[mask]),
            right=self._grow(x[~mask], y_idx[~mask]),
        )

    def predict_proba_one(self, q: np.ndarray) -> np.ndarray:
        node = self.root
        while node.probs is None:
            node = node.left if q[node.feature] <= node.threshold else node.right
        return node.probs


class RandomForest:
    """Bootstrap ensemble of Gini trees, sqrt(d) features per split."""

    def __init__(self, n_trees: int = 100, seed: int = 0):
        if n_trees < 1:
            raise ContractError(f"n_trees must be >= 1, got {n_trees}")
        self.n_trees = n_trees
        self.seed = seed

    def fit(self, x: np.ndarray, y: np.ndarray) -> "RandomForest":
        x, y = _check_dataset(x, y)
        self.classes_ = np.unique(y)
        y_idx = np.searchsorted(self.classes_, y)
        n, d = x.shape
        max_features = max(1, int(np.sqrt(d)))
        self.trees_ = []
        for i in range(self.n_trees):
            rng = rng_for(self.seed, "tree", i)
            boot = rng.integers(0, n, size=n)
            tree = DecisionTree(max_features=max_features,
                                seed=int(rng.integers(0, 2**31)))
            tree.fit(x[boot], y_idx[boot], len(self.classes_))
            self.trees_.append(tree)
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.zeros((len(x), len(self.classes_)))
        for tree in self.trees_:
            for i, q in enumerate(x):
                out[i] += tree.predict_proba_one(q)
        return out / self.n_trees

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(x), axis=1)]


def gnb_fit_predict(x, y, query):
    """One-shot helper: fit on (x, y), classify a single query vector."""
    model = GaussianNB().fit(x, y)
    probs = model.predict_proba(np.atleast_2d(query))[0]
    return model.classes_[np.argmax(probs)], probs


def knn_predict(x, y, query, k: int = 3):
    model = KNearestNeighbors(k=k).fit(x, y)
    label = model.predict(np.atleast_2d(query))[0]
    probs = model.predict_proba(np.atleast_2d(query))[0]
    return label, probs


def rf_fit_predict(x, y, query, n_trees: int = 100, seed: int = 0):
    model = RandomForest(n_trees=n_trees, seed=seed).fit(x, y)
    probs = model.predict_proba(np.atleast_2d(query))[0]
    return model.classes_[np.argmax(probs)], probs
