"""Normality tooling and Scott-Knott multiple-comparison clustering.

Scott-Knott sorts group means and recursively splits the ordering at the
contiguous cut maximizing the between-group sum of squares B0. A cut is kept
when lambda* = pi / (2*(pi-2)) * B0 / sigma2 exceeds the chi-square critical
value at ``alpha`` with g/(pi-2) degrees of freedom, where sigma2 is the
maximum-likelihood variance estimate of the g current means pooled with the
residual mean square: sigma2 = (sum((mean_i - mean)^2) + nu * mse) / (g + nu).
The split search at each level is exhaustive over all contiguous binary
partitions, so the recursion is exact, not heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2

_PI_FACTOR = math.pi / (2.0 * (math.pi - 2.0))


@dataclass(frozen=True)
class TransformSpec:
    """A fitted Box-Cox transform: shift applied first, then the power map."""

    box_cox_lambda: float
    shift: float = 0.0


@dataclass(frozen=True)
class Cluster:
    members: tuple       # group names, best (smallest mean) first within cluster
    means: tuple         # matching mean transformed values


@dataclass(frozen=True)
class ScottKnottResult:
    clusters: tuple      # best cluster first; contiguous in mean order
    alpha: float
    transform: TransformSpec | None = None

    def cluster_of(self, name):
        for i, cluster in enumerate(self.clusters):
            if name in cluster.members:
                return i
        raise KeyError(name)

    @property
    def member_order(self):
        return tuple(name for c in self.clusters for name in c.members)


def box_cox_transform(values, lam):
    x = np.asarray(values, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Box-Cox requires strictly positive values")
    if lam == 0.0:
        return np.log(x)
    return (x**lam - 1.0) / lam


def _log_likelihood(x, lam, log_sum):
    y = box_cox_transform(x, lam)
    var = np.var(y)
    if var <= 0:
        return -np.inf
    return -0.5 * x.size * np.log(var) + (lam - 1.0) * log_sum


def box_cox(values, step=0.01, lam_min=-2.0, lam_max=2.0):
    """Fit lambda by maximum log-likelihood over a grid and transform.

    Non-positive inputs are shifted up by 1e-3 of the maximum value first
    (exact predictions produce zero absolute errors). Returns the transformed
    array and the fitted TransformSpec.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("empty input")
    shift = 0.0
    if np.min(x) <= 0:
        shift = 1e-3 * float(np.max(x)) if np.max(x) > 0 else 1e-3
        if np.min(x) + shift <= 0:
            raise ValueError("shift did not make values positive")
    shifted = x + shift
    if np.all(shifted == shifted[0]):
        # Degenerate constant input: any lambda is as good; use the affine branch.
        spec = TransformSpec(box_cox_lambda=1.0, shift=shift)
        return box_cox_transform(shifted, 1.0), spec
    grid = np.round(np.arange(round(lam_min / step), round(lam_max / step) + 1)) * step
    log_sum = float(np.sum(np.log(shifted)))
    lls = [_log_likelihood(shifted, float(lam), log_sum) for lam in grid]
    best = float(grid[int(np.argmax(lls))])
    spec = TransformSpec(box_cox_lambda=best, shift=shift)
    return box_cox_transform(shifted, best), spec


def apply_transform(values, spec):
    return box_cox_transform(np.asarray(values, dtype=float) + spec.shift, spec.box_cox_lambda)


# Critical points for the normality KS statistic with estimated mean/std,
# after the Stephens small-sample modification D * (sqrt(n) - 0.01 + 0.85/sqrt(n)).
_LILLIEFORS_TABLE = ((0.01, 1.035), (0.025, 0.955), (0.05, 0.895), (0.10, 0.819), (0.15, 0.775))


def _lilliefors_critical(alpha):
    levels = [a for a, _ in _LILLIEFORS_TABLE]
    crits = [c for _, c in _LILLIEFORS_TABLE]
    if not levels[0] <= alpha <= levels[-1]:
        raise ValueError(f"alpha must be within [{levels[0]}, {levels[-1]}]")
    return float(np.interp(alpha, levels, crits))


def ks_normality(values, alpha=0.05):
    """One-sample KS test of normality with estimated parameters.

    Returns (statistic, reject). The critical value uses the Lilliefors
    correction, since mean and standard deviation are estimated from the
    sample itself.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 5:
        raise ValueError("normality test needs at least 5 observations")
    std = x.std(ddof=1)
    if std == 0:
        raise ValueError("normality test undefined for zero-variance input")
    cdf = ndtr((x - x.mean()) / std)
    i = np.arange(1, n + 1)
    statistic = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    modified = statistic * (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n))
    return statistic, bool(modified > _lilliefors_critical(alpha))


def _best_cut(means):
    """Cut position maximizing B0 over contiguous binary partitions of ordered means."""
    g = means.size
    total = means.sum()
    best_b0 = -np.inf
    best_cut = 1
    left = 0.0
    for cut in range(1, g):
        left += means[cut - 1]
        right = total - left
        b0 = left * left / cut + right * right / (g - cut) - total * total / g
        if b0 > best_b0:
            best_b0 = b0
            best_cut = cut
    return best_cut, best_b0


def _split(names, means, mse, nu, alpha, out):
    g = means.size
    if g == 1:
        out.append((names, means))
        return
    cut, b0 = _best_cut(means)
    sigma2 = (np.sum((means - means.mean()) ** 2) + nu * mse) / (g + nu)
    lam_star = _PI_FACTOR * b0 / sigma2 if sigma2 > 0 else np.inf
    nu0 = g / (math.pi - 2.0)
    if sigma2 > 0 and lam_star > chi2.ppf(1.0 - alpha, nu0):
        _split(names[:cut], means[:cut], mse, nu, alpha, out)
        _split(names[cut:], means[cut:], mse, nu, alpha, out)
    else:
        out.append((names, means))


def _cluster_means(names, means, mse, nu, alpha):
    order = np.argsort(means, kind="stable")
    ordered_names = [names[i] for i in order]
    ordered_means = means[order]
    pieces = []
    _split(ordered_names, ordered_means, mse, nu, alpha, pieces)
    return ScottKnottResult(
        clusters=tuple(
            Cluster(members=tuple(ns), means=tuple(float(m) for m in ms)) for ns, ms in pieces
        ),
        alpha=alpha,
    )


def scott_knott(groups, alpha=0.05):
    """Cluster named observation groups into homogeneous, non-overlapping bands.

    ``groups`` maps a name to its (transformed) error observations. The
    residual mean square is the pooled within-group variance of all groups.
    """
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    names = list(groups)
    arrays = [np.asarray(groups[name], dtype=float) for name in names]
    if any(a.size < 2 for a in arrays):
        raise ValueError("every group needs at least 2 observations")
    means = np.array([a.mean() for a in arrays])
    total = sum(a.size for a in arrays)
    nu = total - len(arrays)
    sse = sum(float(np.sum((a - a.mean()) ** 2)) for a in arrays)
    mse = sse / nu
    return _cluster_means(names, means, mse, nu, alpha)


def scott_knott_two_way(cells, alpha=0.05):
    """Scott-Knott over treatment means with a two-way ANOVA error term.

    ``cells`` maps (treatment, group) -> observations, e.g. (adjustment
    method, k) -> absolute errors. The residual mean square comes from the
    additive two-way decomposition (interaction pooled into the residual),
    and the clustering runs over the treatment means.
    """
    treatments = sorted({t for t, _ in cells}, key=str)
    levels = sorted({g for _, g in cells}, key=str)
    if len(treatments) < 2:
        raise ValueError("need at least 2 treatments")
    for t in treatments:
        if not any((t, g) in cells for g in levels):
            raise ValueError(f"missing treatment {t!r}")
    values = {key: np.asarray(obs, dtype=float) for key, obs in cells.items()}
    if any(v.size == 0 for v in values.values()):
        raise ValueError("empty cell")

    grand = np.concatenate(list(values.values()))
    n_total = grand.size
    grand_mean = grand.mean()
    ss_total = float(np.sum((grand - grand_mean) ** 2))

    def _ss_factor(keys_of):
        ss = 0.0
        for _, pooled in keys_of.items():
            ss += pooled.size * (pooled.mean() - grand_mean) ** 2
        return float(ss)

    by_treatment = {
        t: np.concatenate([values[(t, g)] for g in levels if (t, g) in values]) for t in treatments
    }
    by_level = {
        g: np.concatenate([values[(t, g)] for t in treatments if (t, g) in values]) for g in levels
    }
    ss_treat = _ss_factor(by_treatment)
    ss_level = _ss_factor(by_level)
    nu = n_total - len(treatments) - len(levels) + 1
    if nu <= 0:
        raise ValueError("not enough observations for a two-way residual")
    mse = max(ss_total - ss_treat - ss_level, 0.0) / nu
    means = np.array([by_treatment[t].mean() for t in treatments])
    return _cluster_means(list(treatments), means, mse, nu, alpha)
