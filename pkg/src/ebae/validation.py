"""Leave-one-out cross validation of estimator variants.

Each fold trains on the other n-1 projects: normalization bounds, learner
fits, and analogy retrieval see training rows only, and the target's effort
is never consulted. Folds carry seeds derived from (global seed, fold index,
variant), so results are identical no matter how many workers run them.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

from . import adjust
from .analogy import retrieve
from .learners import FitError, build_diff_pairs, fit_ga_weights, fit_model_tree, fit_network
from .metrics import baseline, build_table, log_floor, summarize


def derive_seed(seed, *parts):
    """Stable 64-bit child seed from the global seed and context labels."""
    digest = hashlib.blake2b(repr((seed, *parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def predict_variant(variant, target, train, config, seed):
    """One prediction: retrieve analogies, fit whatever the method needs, adjust.

    Returns (prediction, fell_back): when the method is inapplicable for this
    target or its learner cannot be fitted on this fold, the prediction falls
    back to the plain analogy mean for the same k.
    """
    nbh = retrieve(target, train, variant.k)
    try:
        method = variant.method
        if method == "EBA":
            return adjust.adjust_eba(target, nbh, train), False
        if method == "LSE":
            return adjust.adjust_lse(target, nbh, train), False
        if method == "MLFE":
            return adjust.adjust_mlfe(target, nbh, train), False
        if method == "RTM":
            c = adjust.productivity_correlation(train)
            return adjust.adjust_rtm(target, nbh, train, c), False
        if method == "AQUA":
            return adjust.adjust_aqua(target, nbh, train), False
        if method == "MT":
            tree = fit_model_tree(build_diff_pairs(train), config)
            return adjust.adjust_mt(target, nbh, train, tree), False
        if method == "GA":
            weights = fit_ga_weights(train, variant.k, config, seed)
            return adjust.adjust_ga(target, nbh, train, weights.alpha), False
        if method == "NN":
            net = fit_network(build_diff_pairs(train), config, seed)
            return adjust.adjust_nn(target, nbh, train, net), False
        raise ValueError(f"unknown method {method!r}")
    except (adjust.Inapplicable, FitError):
        return adjust.adjust_eba(target, nbh, train), True


def loocv(dataset, variant, config, seed=None):
    """Leave-one-out predictions of one variant over a dataset."""
    if seed is None:
        seed = config.seed
    k = variant.k
    if dataset.n < k + 2:
        raise ValueError(f"dataset too small for k={k}: need at least {k + 2} projects, have {dataset.n}")
    floor = log_floor(dataset.efforts)

    def fold(t):
        train = dataset.without(t)
        target = dataset.projects[t]
        fold_seed = derive_seed(seed, t, variant.label)
        return predict_variant(variant, target, train, config, fold_seed)

    indices = range(dataset.n)
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(fold, indices))
    else:
        outcomes = [fold(t) for t in indices]

    predictions = [p for p, _ in outcomes]
    fallbacks = sum(fb for _, fb in outcomes)
    ids = [p.id for p in dataset.projects]
    return build_table(variant.label, ids, dataset.efforts, predictions, floor, fallbacks)


def dataset_baseline(dataset, config, seed=None):
    """Random-guessing baseline over the dataset's full effort column."""
    if seed is None:
        seed = config.seed
    return baseline(dataset.efforts, config.runs, derive_seed(seed, "baseline"))


def evaluate_variant(dataset, variant, config, seed=None, base=None, table=None):
    """LOOCV one variant and summarize it against the dataset baseline."""
    if base is None:
        base = dataset_baseline(dataset, config, seed)
    if table is None:
        table = loocv(dataset, variant, config, seed)
    return summarize(table, base)
