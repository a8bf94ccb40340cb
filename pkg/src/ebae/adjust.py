"""The eight analogy-adjustment methods and the (method, k) variant grid.

Every adjuster maps (target project, retrieved neighborhood, training fold)
to a predicted effort. Adjustment always consumes raw feature values; only
retrieval works on the normalized view. When a method cannot produce a
prediction for a target (zero denominators, unfittable learner), it raises
Inapplicable and the validation harness falls back to the plain analogy mean
for the same k, counting the fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analogy import nearest_within
from .learners import diff_vector, predict_model_tree, predict_network, project_parts

METHODS = ("EBA", "LSE", "MLFE", "RTM", "AQUA", "MT", "GA", "NN")
LEARNER_METHODS = ("MT", "GA", "NN")


class Inapplicable(Exception):
    """The method cannot predict this target; callers fall back to EBA."""


@dataclass(frozen=True, order=True)
class VariantId:
    method: str
    k: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def label(self):
        return f"{self.method}{self.k}"


def enumerate_variants(k_max=5):
    """All (method, k) variants: method order as in METHODS, k ascending."""
    return tuple(VariantId(m, k) for m in METHODS for k in range(1, k_max + 1))


def variant_from_label(label):
    for method in sorted(METHODS, key=len, reverse=True):
        if label.startswith(method) and label[len(method):].isdigit():
            return VariantId(method, int(label[len(method):]))
    raise ValueError(f"not a variant label: {label!r}")


def _weighted_mean(values, weights):
    return float(np.sum(weights * values) / np.sum(weights))


def _analogy_efforts(nbh, train):
    return train.efforts[nbh.indices]


def adjust_eba(target, nbh, train):
    """Plain analogy mean: the unadjusted baseline the other methods extend."""
    efforts = _analogy_efforts(nbh, train)
    return _weighted_mean(efforts, np.ones_like(efforts))


def _ratio_adjust(target_values, analogy_values, efforts):
    # Mean feature-extrapolation ratio per analogy; zero denominators are
    # excluded from that analogy's average.
    predictions = np.empty(len(efforts))
    for i in range(len(efforts)):
        usable = analogy_values[i] != 0
        if not np.any(usable):
            raise Inapplicable("all extrapolation features are zero for an analogy")
        predictions[i] = np.mean(target_values[usable] / analogy_values[i, usable]) * efforts[i]
    return float(np.mean(predictions))


def _size_values(dataset, rows, feature_index):
    column = dataset.cont_index.index(feature_index)
    return dataset.cont[rows, column]


def adjust_lse(target, nbh, train):
    """Size extrapolation: analogy efforts scaled by target size over analogy size."""
    ps = train.primary_size_index
    if ps is None:
        raise Inapplicable("no primary size feature in schema")
    size_t = float(target.features[ps])
    sizes = _size_values(train, nbh.indices, ps)
    if size_t <= 0 or np.any(sizes <= 0):
        raise Inapplicable("non-positive size value")
    return _ratio_adjust(np.array([size_t]), sizes[:, None], _analogy_efforts(nbh, train))


def adjust_mlfe(target, nbh, train):
    """Multi-feature extrapolation over every size-flagged feature."""
    if not train.size_feature_index:
        raise Inapplicable("no size-related features in schema")
    cols = [train.cont_index.index(i) for i in train.size_feature_index]
    target_values = np.array([float(target.features[i]) for i in train.size_feature_index])
    analogy_values = train.cont[np.ix_(nbh.indices, cols)]
    return _ratio_adjust(target_values, analogy_values, _analogy_efforts(nbh, train))


def productivity_correlation(train):
    """Correlation between nearest-analogy productivity and actual productivity.

    Fitted once per training fold; clamped into [0, 1] so (1 - c) stays a
    shrinkage factor. Projects without a positive size are left out; a
    degenerate correlation (fewer than 2 usable pairs, or zero variance)
    yields 0, i.e. full regression toward the local mean.
    """
    ps = train.primary_size_index
    if ps is None:
        raise Inapplicable("no primary size feature in schema")
    sizes = _size_values(train, np.arange(train.n), ps)
    valid = sizes > 0
    if valid.sum() < 2:
        return 0.0
    nearest = nearest_within(train)
    pr = np.where(valid, train.efforts / np.where(valid, sizes, 1.0), np.nan)
    own = pr[valid]
    neighbor = pr[nearest][valid]
    pairs = ~np.isnan(neighbor)
    if pairs.sum() < 2:
        return 0.0
    x, y = neighbor[pairs], own[pairs]
    if np.std(x) == 0 or np.std(y) == 0:
        return 0.0
    return float(np.clip(np.corrcoef(x, y)[0, 1], 0.0, 1.0))


def mean_productivity(train):
    """Mean effort-per-size over the training projects with a positive size.

    Shrinking analogy productivities toward the mean of the analogies
    themselves would cancel out of the outer average exactly, so the
    regression target must be this broader historical mean.
    """
    ps = train.primary_size_index
    if ps is None:
        raise Inapplicable("no primary size feature in schema")
    sizes = _size_values(train, np.arange(train.n), ps)
    valid = sizes > 0
    if not np.any(valid):
        raise Inapplicable("no training project has a positive size")
    return float(np.mean(train.efforts[valid] / sizes[valid]))


def adjust_rtm(target, nbh, train, correlation, historical_mean=None):
    """Regression toward the mean: analogy productivities shrunk toward the
    historical mean productivity by (1 - c), then scaled by the target size."""
    ps = train.primary_size_index
    if ps is None:
        raise Inapplicable("no primary size feature in schema")
    size_t = float(target.features[ps])
    sizes = _size_values(train, nbh.indices, ps)
    if size_t <= 0 or np.any(sizes <= 0):
        raise Inapplicable("non-positive size value")
    pr = _analogy_efforts(nbh, train) / sizes
    h = mean_productivity(train) if historical_mean is None else historical_mean
    adjusted = pr + (h - pr) * (1.0 - correlation)
    return float(size_t * np.mean(adjusted))


def adjust_aqua(target, nbh, train):
    """Similarity-weighted mean of the analogy efforts."""
    sims = nbh.similarities
    return _weighted_mean(_analogy_efforts(nbh, train), sims / sims.max())


def _target_diffs(target, nbh, train):
    t_cont, t_cat = project_parts(target, train)
    return np.array([
        diff_vector(t_cont, t_cat, train.cont[i], train.cat[i]) for i in nbh.indices
    ])


def adjust_mt(target, nbh, train, tree):
    """Analogy efforts corrected by a model tree over feature differences."""
    corrections = np.array([predict_model_tree(tree, d) for d in _target_diffs(target, nbh, train)])
    return float(np.mean(_analogy_efforts(nbh, train) + corrections))


def adjust_ga(target, nbh, train, alpha):
    """Analogy efforts corrected by a learned linear form of feature differences."""
    corrections = _target_diffs(target, nbh, train) @ np.asarray(alpha, dtype=float)
    return float(np.mean(_analogy_efforts(nbh, train) + corrections))


def adjust_nn(target, nbh, train, net):
    """Analogy efforts corrected by a trained network over feature differences."""
    corrections = np.array([predict_network(net, d) for d in _target_diffs(target, nbh, train)])
    return float(np.mean(_analogy_efforts(nbh, train) + corrections))
