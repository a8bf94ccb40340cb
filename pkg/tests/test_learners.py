import numpy as np
import pytest

from ebae.config import Config
from ebae.learners import (
    DiffPair,
    FitError,
    build_diff_pairs,
    diff_vector,
    fit_ga_weights,
    fit_model_tree,
    fit_network,
    ga_design,
    ga_fitness,
    network_loss_and_grads,
    predict_model_tree,
    predict_network,
)

from .conftest import make_dataset, size_only_schema


def pairs_from(xs, ys):
    return [DiffPair(np.atleast_1d(np.asarray(x, float)), float(y)) for x, y in zip(xs, ys)]


def test_diff_vector_mixed():
    d = diff_vector([5.0, 2.0], ["a"], [3.0, 2.0], ["b"])
    assert list(d) == [2.0, 0.0, 1.0]


def test_build_diff_pairs_two_projects():
    ds = make_dataset("two", size_only_schema(), [(2,), (4,), (6,)], [4, 8, 12])
    pairs = build_diff_pairs(ds)
    assert len(pairs) == 3
    # each project pairs with its nearest other project
    assert pairs[0].feature_diff[0] == -2.0 and pairs[0].effort_diff == -4.0
    assert pairs[2].feature_diff[0] == 2.0 and pairs[2].effort_diff == 4.0


def test_build_diff_pairs_identical_projects_zero_diff():
    ds = make_dataset("same", size_only_schema(), [(3,), (3,), (9,)], [5, 5, 20])
    pairs = build_diff_pairs(ds)
    assert pairs[0].feature_diff[0] == 0.0 and pairs[0].effort_diff == 0.0


def test_build_diff_pairs_matches_bruteforce(toy):
    pairs = build_diff_pairs(toy)
    norm = toy.normalized()
    for i, pair in enumerate(pairs):
        distances = [
            (abs(norm[i, 0] - norm[j, 0]), j) for j in range(toy.n) if j != i
        ]
        _, nearest = min(distances)
        assert pair.feature_diff[0] == toy.cont[i, 0] - toy.cont[nearest, 0]


# --- model tree ---


def test_constant_pairs_single_leaf():
    pairs = pairs_from([[x] for x in range(10)], [7.0] * 10)
    tree = fit_model_tree(pairs, Config())
    assert predict_model_tree(tree, [123.0]) == pytest.approx(7.0)
    assert predict_model_tree(tree, [-5.0]) == pytest.approx(7.0)


def test_linear_recovery_at_training_points():
    xs = [[float(i)] for i in range(20)]
    pairs = pairs_from(xs, [3.0 * x[0] for x in xs])
    tree = fit_model_tree(pairs, Config())
    for x in xs:
        assert predict_model_tree(tree, x) == pytest.approx(3.0 * x[0], abs=1e-6)
    assert predict_model_tree(tree, [2.0]) == pytest.approx(6.0, abs=1e-6)


def test_too_few_pairs_fit_failure():
    with pytest.raises(FitError):
        fit_model_tree(pairs_from([[1.0], [2.0]], [1.0, 2.0]), Config())


def test_boundary_routes_left():
    from ebae.learners import TreeLeaf, TreeNode, ModelTree

    tree = ModelTree(
        root=TreeNode(
            feature=0,
            threshold=1.5,
            left=TreeLeaf(intercept=-1.0, coef=None),
            right=TreeLeaf(intercept=+1.0, coef=None),
        ),
        n_features=1,
    )
    assert predict_model_tree(tree, [1.5]) == -1.0
    assert predict_model_tree(tree, [1.5000001]) == 1.0


def test_training_error_bounded_by_variance():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    pairs = pairs_from(X, y)
    tree = fit_model_tree(pairs, Config())
    predictions = np.array([predict_model_tree(tree, x) for x in X])
    assert np.mean((y - predictions) ** 2) <= np.var(y) + 1e-12


# --- network ---


def test_network_deterministic():
    rng = np.random.default_rng(1)
    pairs = pairs_from(rng.normal(size=(12, 2)), rng.normal(size=12))
    a = fit_network(pairs, Config(), seed=99)
    b = fit_network(pairs, Config(), seed=99)
    assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)
    assert a.b2 == b.b2


def test_network_zero_targets_give_near_zero_output():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 2))
    pairs = pairs_from(X, np.zeros(20))
    net = fit_network(pairs, Config(), seed=3)
    outputs = [abs(predict_network(net, x)) for x in X]
    assert max(outputs) < 0.05 * X.std()


def test_network_needs_four_pairs():
    with pytest.raises(FitError):
        fit_network(pairs_from([[1.0]] * 3, [1.0] * 3), Config(), seed=0)


@pytest.mark.parametrize("hidden", [2, 4, 8])
def test_gradient_check_against_finite_differences(hidden):
    rng = np.random.default_rng(hidden)
    m, n = 3, 12
    X = rng.normal(size=(n, m))
    y = rng.normal(size=n)
    w1 = rng.normal(size=(hidden, m)) * 0.5
    b1 = rng.normal(size=hidden) * 0.1
    w2 = rng.normal(size=hidden) * 0.5
    b2 = 0.3
    _, (g_w1, g_b1, g_w2, g_b2) = network_loss_and_grads(w1, b1, w2, b2, X, y)

    def loss_at(w1v, b1v, w2v, b2v):
        return network_loss_and_grads(w1v, b1v, w2v, b2v, X, y)[0]

    eps = 1e-6
    checks = []
    for _ in range(5):
        i, j = rng.integers(0, hidden), rng.integers(0, m)
        up, down = w1.copy(), w1.copy()
        up[i, j] += eps
        down[i, j] -= eps
        numeric = (loss_at(up, b1, w2, b2) - loss_at(down, b1, w2, b2)) / (2 * eps)
        checks.append((numeric, g_w1[i, j]))
    i = rng.integers(0, hidden)
    up, down = w2.copy(), w2.copy()
    up[i] += eps
    down[i] -= eps
    checks.append(((loss_at(w1, b1, up, b2) - loss_at(w1, b1, down, b2)) / (2 * eps), g_w2[i]))
    checks.append(((loss_at(w1, b1, w2, b2 + eps) - loss_at(w1, b1, w2, b2 - eps)) / (2 * eps), g_b2))
    for numeric, analytic in checks:
        assert abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-12) < 1e-4


# --- GA ---


def planted_alpha_dataset():
    # effort = 10 + 2 * size exactly: effort differences are 2x feature differences
    sizes = np.arange(1.0, 13.0)
    return make_dataset(
        "planted", size_only_schema(), [(s,) for s in sizes], [10.0 + 2.0 * s for s in sizes]
    )


def test_ga_beats_zero_vector():
    ds = planted_alpha_dataset()
    cfg = Config()
    result = fit_ga_weights(ds, 1, cfg, seed=5)
    residuals, D = ga_design(ds, 1)
    zero_fitness = float(ga_fitness(residuals, D, np.zeros(D.shape[1]))[0])
    assert result.fitness <= zero_fitness


def test_ga_recovers_planted_slope_and_matches_grid_oracle():
    ds = planted_alpha_dataset()
    result = fit_ga_weights(ds, 1, Config(), seed=5)
    assert 1.5 <= result.alpha[0] <= 2.5
    # independent grid oracle over the search interval
    sizes = np.array([p.features[0] for p in ds.projects])
    efforts = ds.efforts
    nearest = [
        min((abs(sizes[j] - sizes[i]), j) for j in range(ds.n) if j != i)[1]
        for i in range(ds.n)
    ]

    def objective(alpha):
        preds = [efforts[j] + alpha * (sizes[i] - sizes[j]) for i, j in enumerate(nearest)]
        return float(np.mean(np.abs(efforts - preds)))

    grid = np.linspace(-5, 5, 1001)
    best = grid[int(np.argmin([objective(a) for a in grid]))]
    assert abs(best - 2.0) < 0.02
    assert objective(float(result.alpha[0])) <= objective(0.0)


def test_ga_deterministic():
    ds = planted_alpha_dataset()
    a = fit_ga_weights(ds, 2, Config(), seed=123)
    b = fit_ga_weights(ds, 2, Config(), seed=123)
    assert np.array_equal(a.alpha, b.alpha)
    assert a.fitness == b.fitness


def test_ga_history_nonincreasing():
    ds = planted_alpha_dataset()
    result = fit_ga_weights(ds, 1, Config(ga_gens=40), seed=9)
    history = result.history
    assert len(history) == 41
    assert all(later <= earlier for earlier, later in zip(history, history[1:]))
    assert result.fitness == history[-1]


def test_ga_needs_enough_projects():
    ds = make_dataset("tiny", size_only_schema(), [(1,), (2,), (3,)], [1, 2, 3])
    with pytest.raises(FitError):
        ga_design(ds, 2)
