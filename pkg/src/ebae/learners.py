"""Trainable components behind the model-tree, network, and GA adjusters.

All three learn from difference pairs: for every training project, the
feature-difference vector to its nearest in-training analogy (continuous:
target minus analogy, categorical: 0/1 mismatch) and the matching effort
difference. Every fit is a deterministic function of its inputs and seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analogy import knn_within, nearest_within


class FitError(Exception):
    """A learner cannot be fitted on the given training fold."""


@dataclass(frozen=True)
class DiffPair:
    feature_diff: np.ndarray
    effort_diff: float


def diff_vector(cont_a, cat_a, cont_b, cat_b):
    """a-minus-b over continuous features, 0/1 mismatch over categorical ones."""
    cont = np.asarray(cont_a, dtype=float) - np.asarray(cont_b, dtype=float)
    cat = (np.asarray(cat_a, dtype=object) != np.asarray(cat_b, dtype=object)).astype(float)
    return np.concatenate([cont, cat])


def project_parts(project, dataset):
    """(continuous values, categorical values) of a project under a dataset's schema."""
    cont = np.array([project.features[i] for i in dataset.cont_index], dtype=float)
    cat = np.array([project.features[i] for i in dataset.cat_index], dtype=object)
    return cont, cat


def build_diff_pairs(train):
    """One pair per training project against its nearest other training project."""
    if train.n < 2:
        raise FitError("need at least 2 projects to build difference pairs")
    nearest = nearest_within(train)
    pairs = []
    for i, j in enumerate(nearest):
        diff = diff_vector(train.cont[i], train.cat[i], train.cont[j], train.cat[j])
        pairs.append(DiffPair(feature_diff=diff, effort_diff=float(train.efforts[i] - train.efforts[j])))
    return pairs


# ---------------------------------------------------------------------------
# Model tree: greedy variance-reduction splits, least-squares leaves.

@dataclass(frozen=True)
class TreeLeaf:
    intercept: float
    coef: np.ndarray | None    # None -> constant-mean leaf


@dataclass(frozen=True)
class TreeNode:
    feature: int
    threshold: float
    left: object
    right: object


@dataclass(frozen=True)
class ModelTree:
    root: object
    n_features: int


def _fit_leaf(X, y):
    A = np.hstack([X, np.ones((len(y), 1))])
    solution, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        return TreeLeaf(intercept=float(np.mean(y)), coef=None)
    return TreeLeaf(intercept=float(solution[-1]), coef=solution[:-1])


def _best_split(X, y, min_leaf):
    n, m = X.shape
    parent_sse = float(np.sum((y - y.mean()) ** 2))
    best = None
    best_sse = parent_sse - 1e-12 * max(parent_sse, 1.0)
    for j in range(m):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum = csum[-1]
        total_sq = csq[-1]
        for cut in range(min_leaf, n - min_leaf + 1):
            if xs[cut - 1] == xs[cut]:
                continue
            left_sse = csq[cut - 1] - csum[cut - 1] ** 2 / cut
            r_sum = total_sum - csum[cut - 1]
            right_sse = (total_sq - csq[cut - 1]) - r_sum**2 / (n - cut)
            sse = left_sse + right_sse
            if sse < best_sse:
                best_sse = sse
                best = (j, float((xs[cut - 1] + xs[cut]) / 2.0))
    return best


def _grow(X, y, min_leaf, depth, max_depth):
    if depth >= max_depth or len(y) < 2 * min_leaf:
        return _fit_leaf(X, y)
    split = _best_split(X, y, min_leaf)
    if split is None:
        return _fit_leaf(X, y)
    j, threshold = split
    mask = X[:, j] <= threshold
    return TreeNode(
        feature=j,
        threshold=threshold,
        left=_grow(X[mask], y[mask], min_leaf, depth + 1, max_depth),
        right=_grow(X[~mask], y[~mask], min_leaf, depth + 1, max_depth),
    )


def fit_model_tree(pairs, config):
    if len(pairs) < 2 * config.mt_min_leaf:
        raise FitError(f"model tree needs at least {2 * config.mt_min_leaf} pairs, got {len(pairs)}")
    X = np.array([p.feature_diff for p in pairs])
    y = np.array([p.effort_diff for p in pairs])
    root = _grow(X, y, config.mt_min_leaf, 0, config.mt_max_depth)
    return ModelTree(root=root, n_features=X.shape[1])


def predict_model_tree(tree, x):
    """Route a difference vector to its leaf (boundary values go left)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tree.n_features,):
        raise ValueError(f"expected {tree.n_features} features, got {x.shape}")
    node = tree.root
    while isinstance(node, TreeNode):
        node = node.left if x[node.feature] <= node.threshold else node.right
    if node.coef is None:
        return node.intercept
    return float(node.intercept + node.coef @ x)


# ---------------------------------------------------------------------------
# Feed-forward network: one tanh hidden layer, linear output, full-batch GD
# on mean squared error over z-standardized pairs.

@dataclass(frozen=True)
class FeedForwardNet:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float


def network_loss_and_grads(w1, b1, w2, b2, X, y):
    """MSE loss and its analytic gradients for the 1-hidden-layer network."""
    hidden = np.tanh(X @ w1.T + b1)
    pred = hidden @ w2 + b2
    err = pred - y
    n = len(y)
    loss = float(np.mean(err**2))
    d_pred = 2.0 * err / n
    g_w2 = hidden.T @ d_pred
    g_b2 = float(np.sum(d_pred))
    d_hidden = np.outer(d_pred, w2) * (1.0 - hidden**2)
    g_w1 = d_hidden.T @ X
    g_b1 = d_hidden.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def fit_network(pairs, config, seed):
    if len(pairs) < 4:
        raise FitError(f"network needs at least 4 pairs, got {len(pairs)}")
    X = np.array([p.feature_diff for p in pairs])
    y = np.array([p.effort_diff for p in pairs])
    x_mean = X.mean(axis=0)
    x_std = X.std(axis=0)
    x_std = np.where(x_std > 0, x_std, 1.0)
    y_mean = float(y.mean())
    y_std = float(y.std())
    if y_std == 0:
        y_mean, y_std = 0.0, 1.0
    Xs = (X - x_mean) / x_std
    ys = (y - y_mean) / y_std

    rng = np.random.default_rng(seed)
    m = X.shape[1]
    h = config.nn_hidden
    w1 = rng.standard_normal((h, m)) / np.sqrt(m)
    b1 = np.zeros(h)
    # small output init keeps the untrained net near zero output; the hidden
    # layer already breaks symmetry
    w2 = 0.1 * rng.standard_normal(h) / np.sqrt(h)
    b2 = 0.0
    lr = config.nn_lr
    for _ in range(config.nn_epochs):
        loss, (g_w1, g_b1, g_w2, g_b2) = network_loss_and_grads(w1, b1, w2, b2, Xs, ys)
        if not np.isfinite(loss):
            raise FitError("network training diverged (non-finite loss)")
        w1 = w1 - lr * g_w1
        b1 = b1 - lr * g_b1
        w2 = w2 - lr * g_w2
        b2 = b2 - lr * g_b2
    return FeedForwardNet(w1=w1, b1=b1, w2=w2, b2=b2,
                          x_mean=x_mean, x_std=x_std, y_mean=y_mean, y_std=y_std)


def predict_network(net, x):
    xs = (np.asarray(x, dtype=float) - net.x_mean) / net.x_std
    hidden = np.tanh(net.w1 @ xs + net.b1)
    return float((hidden @ net.w2 + net.b2) * net.y_std + net.y_mean)


# ---------------------------------------------------------------------------
# GA weight optimizer for the linear difference-correction adjuster.

@dataclass(frozen=True)
class GaWeights:
    alpha: np.ndarray
    fitness: float
    history: tuple        # best fitness per generation; nonincreasing


def ga_design(train, k):
    """Precompute the in-training leave-one-out design for the GA objective.

    With mean aggregation the corrected prediction for project t is
    base(t) + mean_diff(t) . alpha, so the objective reduces to an L1 fit:
    returns (residuals e - base, mean difference matrix D).
    """
    n = train.n
    if n < k + 2:
        raise FitError(f"GA needs at least {k + 2} projects for k={k}, got {n}")
    neighbors = knn_within(train, k)
    base = train.efforts[neighbors].mean(axis=1)
    m = len(train.cont_index) + len(train.cat_index)
    D = np.zeros((n, m))
    for i in range(n):
        diffs = [
            diff_vector(train.cont[i], train.cat[i], train.cont[j], train.cat[j])
            for j in neighbors[i]
        ]
        D[i] = np.mean(diffs, axis=0)
    return train.efforts - base, D


def ga_fitness(residuals, D, alphas):
    """Mean absolute error of the corrected predictions for candidate rows."""
    alphas = np.atleast_2d(alphas)
    return np.mean(np.abs(residuals[:, None] - D @ alphas.T), axis=0)


def fit_ga_weights(train, k, config, seed):
    """Tournament GA with arithmetic crossover, Gaussian mutation, elitism 1.

    The zero vector is planted in the initial population, so the returned
    weights never score worse than no correction at all.
    """
    residuals, D = ga_design(train, k)
    m = D.shape[1]
    r = config.ga_range
    rng = np.random.default_rng(seed)
    pop = rng.uniform(-r, r, size=(config.ga_pop, m))
    pop[0] = 0.0
    fitness = ga_fitness(residuals, D, pop)
    history = [float(fitness.min())]
    sigma = 0.1 * r
    for _ in range(config.ga_gens):
        elite = int(np.argmin(fitness))
        children = np.empty_like(pop)
        children[0] = pop[elite]
        for c in range(1, config.ga_pop):
            contenders = rng.integers(0, config.ga_pop, size=3)
            p1 = pop[contenders[np.argmin(fitness[contenders])]]
            contenders = rng.integers(0, config.ga_pop, size=3)
            p2 = pop[contenders[np.argmin(fitness[contenders])]]
            if rng.random() < config.ga_cx:
                u = rng.random()
                child = u * p1 + (1.0 - u) * p2
            else:
                child = p1.copy()
            mutate = rng.random(m) < config.ga_mut
            child = np.where(mutate, child + rng.normal(0.0, sigma, size=m), child)
            children[c] = np.clip(child, -r, r)
        pop = children
        fitness = ga_fitness(residuals, D, pop)
        history.append(float(fitness.min()))
    best = int(np.argmin(fitness))
    return GaWeights(alpha=pop[best].copy(), fitness=float(fitness[best]), history=tuple(history))
