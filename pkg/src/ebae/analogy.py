"""Inter-project distance and k-nearest-analogy retrieval.

Distance is the un-weighted Euclidean distance over feature columns:
continuous terms are squared differences (callers pass min-max normalized
values for retrieval), categorical terms contribute 1 on mismatch and 0
otherwise. Identifier and effort columns never enter the distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import normalize_minmax


@dataclass(frozen=True)
class Analogy:
    index: int          # row position within the pool dataset
    project_id: str
    distance: float
    similarity: float


@dataclass(frozen=True)
class Neighborhood:
    """The k nearest pool projects for one target, nearest first."""

    target_id: str
    analogies: tuple

    @property
    def indices(self):
        return np.array([a.index for a in self.analogies], dtype=int)

    @property
    def distances(self):
        return np.array([a.distance for a in self.analogies])

    @property
    def similarities(self):
        return np.array([a.similarity for a in self.analogies])

    def __len__(self):
        return len(self.analogies)


def similarity_from_distance(d):
    """Monotone map to (0, 1]; equals 1 exactly when the distance is 0."""
    return 1.0 / (1.0 + d)


def distance(x, y, schema):
    """Euclidean distance between two projects' feature tuples under ``schema``."""
    if len(x.features) != len(schema) or len(y.features) != len(schema):
        raise ValueError("project feature count does not match schema")
    total = 0.0
    for a, b, col in zip(x.features, y.features, schema):
        if col.kind == "categorical":
            total += 0.0 if a == b else 1.0
        else:
            diff = float(a) - float(b)
            total += diff * diff
    return float(np.sqrt(total))


def _squared_distances(target_cont, target_cat, pool_cont, pool_cat):
    d2 = np.zeros(len(pool_cont))
    if pool_cont.shape[1]:
        diff = pool_cont - target_cont
        d2 += (diff * diff).sum(axis=1)
    if pool_cat.shape[1]:
        d2 += (pool_cat != target_cat).sum(axis=1).astype(float)
    return d2


def pool_distances(target, pool):
    """Distances from ``target`` to every row of ``pool`` (pool-bounds normalization).

    The target's continuous values are scaled with the pool's min-max bounds
    and clamped into [0, 1], so a query outside the training range cannot
    leave the normalized cube.
    """
    target_cont = np.array([target.features[i] for i in pool.cont_index], dtype=float)
    target_cat = np.array([target.features[i] for i in pool.cat_index], dtype=object)
    target01 = normalize_minmax(target_cont, pool.bounds, clamp=True)
    return np.sqrt(_squared_distances(target01, target_cat, pool.normalized(), pool.cat))


def retrieve(target, pool, k):
    """The k nearest pool projects, ties broken by smaller row index.

    ``pool`` must not contain the target itself (the caller guarantees this;
    in LOOCV the pool is the training fold).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if pool.n < k:
        raise ValueError(f"pool has {pool.n} projects, cannot retrieve k={k}")
    d = pool_distances(target, pool)
    order = np.lexsort((np.arange(pool.n), d))[:k]
    analogies = tuple(
        Analogy(int(i), pool.projects[i].id, float(d[i]), similarity_from_distance(float(d[i])))
        for i in order
    )
    return Neighborhood(target_id=target.id, analogies=analogies)


def knn_within(dataset, k):
    """For every row, the k nearest other rows (dataset-bounds normalization).

    Returns an (n, k) index array; used to pair training projects with their
    in-training analogies when fitting the trainable adjusters.
    """
    n = dataset.n
    if n - 1 < k:
        raise ValueError(f"need at least {k + 1} projects, got {n}")
    cont01 = dataset.normalized()
    cat = dataset.cat
    neighbors = np.empty((n, k), dtype=int)
    for i in range(n):
        d2 = _squared_distances(cont01[i], cat[i], cont01, cat)
        d2[i] = np.inf
        order = np.lexsort((np.arange(n), d2))
        neighbors[i] = order[:k]
    return neighbors


def nearest_within(dataset):
    """Index of each row's single nearest other row."""
    return knn_within(dataset, 1)[:, 0]
