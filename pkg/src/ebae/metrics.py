"""Error measures and the random-guessing baseline.

Absolute error and MRE are computed from raw predictions. Log residuals (and
the balanced relative errors, which divide by predictions) clamp predictions
to a small positive floor so a degenerate estimate cannot produce infinities.
MMRE and Pred(0.25) are reported for benchmarking only and never drive
selection or ranking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PredictionRow:
    project_id: str
    actual: float
    predicted: float
    ae: float
    mre: float
    log_residual: float


@dataclass(frozen=True)
class PredictionTable:
    """Per-project outcomes of one leave-one-out run of a variant or ensemble."""

    variant: str
    rows: tuple
    floor: float
    fallback_count: int = 0

    @property
    def actuals(self):
        return np.array([r.actual for r in self.rows])

    @property
    def predictions(self):
        return np.array([r.predicted for r in self.rows])

    @property
    def aes(self):
        return np.array([r.ae for r in self.rows])

    @property
    def mres(self):
        return np.array([r.mre for r in self.rows])

    @property
    def log_residuals(self):
        return np.array([r.log_residual for r in self.rows])

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class BaselineStats:
    """Random-guessing reference for one dataset.

    ``mae_p0`` is the exact expectation of guessing each project's effort by
    sampling uniformly from the other projects' efforts; ``sp0`` and ``sa5``
    come from a seeded Monte-Carlo simulation of that guessing strategy.
    """

    mae_p0: float
    sp0: float
    sa5: float
    runs: int
    seed: int

    @property
    def degenerate(self):
        return self.mae_p0 == 0.0


@dataclass(frozen=True)
class EvalSummary:
    variant: str
    mae: float
    mmre: float
    pred25: float
    lsd: float
    s2: float
    mbre: float
    mibre: float
    sa: float
    delta: float
    fallback_count: int
    baseline: BaselineStats


def log_floor(efforts):
    """Positive floor for log-based measures: 1e-6 of the median effort."""
    return 1e-6 * float(np.median(np.asarray(efforts, dtype=float)))


def pointwise_errors(actual, predicted, floor):
    """(AE, MRE, log residual) for one project; the floor applies to the log only."""
    if actual <= 0:
        raise ValueError(f"actual effort must be positive, got {actual}")
    ae = abs(actual - predicted)
    mre = ae / actual
    lam = np.log(actual) - np.log(max(predicted, floor))
    return float(ae), float(mre), float(lam)


def build_table(variant, ids, actuals, predictions, floor, fallback_count=0):
    rows = tuple(
        PredictionRow(pid, float(e), float(p), *pointwise_errors(float(e), float(p), floor))
        for pid, e, p in zip(ids, actuals, predictions)
    )
    return PredictionTable(variant=variant, rows=rows, floor=floor, fallback_count=fallback_count)


def mae(table):
    return float(np.mean(table.aes))


def mmre(table):
    return float(np.mean(table.mres))


def pred25(table):
    """Percentage of projects with MRE <= 0.25 (the boundary counts as within)."""
    return float(100.0 * np.mean(table.mres <= 0.25))


def lsd(table):
    """Logarithmic standard deviation of the prediction residuals.

    sqrt(sum((lam_i + s^2/2)^2) / (n - 1)) with s^2 the sample variance of
    the log residuals.
    """
    lams = table.log_residuals
    if lams.size < 2:
        raise ValueError("LSD needs at least 2 rows")
    s2 = float(np.var(lams, ddof=1))
    return float(np.sqrt(np.sum((lams + s2 / 2.0) ** 2) / (lams.size - 1)))


def log_residual_variance(table):
    lams = table.log_residuals
    if lams.size < 2:
        raise ValueError("variance needs at least 2 rows")
    return float(np.var(lams, ddof=1))


def mbre_mibre(table):
    """Mean balanced and mean inverted balanced relative error."""
    e = table.actuals
    p = np.maximum(table.predictions, table.floor)
    ae = np.abs(e - p)
    return float(np.mean(ae / np.minimum(e, p))), float(np.mean(ae / np.maximum(e, p)))


def exact_random_mae(efforts):
    """Closed-form expected MAE of uniform random guessing: the double mean of
    |e_t - e_r| over every target t and every other project r."""
    e = np.asarray(efforts, dtype=float)
    diffs = np.abs(e[:, None] - e[None, :])
    n = e.size
    per_target = (diffs.sum(axis=1)) / (n - 1)   # diagonal terms are zero
    return float(per_target.mean())


def baseline(efforts, runs, seed):
    """Random-guessing baseline statistics for one effort column.

    The expectation is computed exactly; the run-to-run spread (``sp0``) and
    the 5%-quantile accuracy gate (``sa5``) are estimated by simulating
    ``runs`` guessing rounds, each predicting every project by one uniformly
    drawn other project.
    """
    e = np.asarray(efforts, dtype=float)
    n = e.size
    if n < 3:
        raise ValueError("baseline needs at least 3 efforts")
    if runs < 100:
        raise ValueError("baseline needs at least 100 runs")
    mae_p0 = exact_random_mae(e)
    if mae_p0 == 0.0:
        return BaselineStats(mae_p0=0.0, sp0=0.0, sa5=float("nan"), runs=runs, seed=seed)
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, n - 1, size=(runs, n))
    targets = np.arange(n)
    others = draws + (draws >= targets)          # uniform over the n-1 indices != t
    run_maes = np.mean(np.abs(e[targets] - e[others]), axis=1)
    sp0 = float(np.std(run_maes, ddof=1))
    sa5 = 1.0 - float(np.percentile(run_maes, 5.0)) / mae_p0
    return BaselineStats(mae_p0=mae_p0, sp0=sp0, sa5=sa5, runs=runs, seed=seed)


def standardized_accuracy(mae_value, base):
    """SA = 1 - MAE / MAE_p0; the fraction of random-guessing error removed."""
    if base.degenerate:
        raise ValueError("standardized accuracy undefined: constant efforts (MAE_p0 = 0)")
    return 1.0 - mae_value / base.mae_p0


def effect_size(mae_value, base):
    """Improvement over random guessing in units of its run-to-run deviation.

    Positive when the model beats random guessing; 0.2 / 0.5 / 0.8 mark
    small / medium / large effects.
    """
    if base.sp0 <= 0:
        raise ValueError("effect size undefined: zero baseline deviation")
    return (base.mae_p0 - mae_value) / base.sp0


def summarize(table, base):
    """Full evaluation summary of one prediction table against a baseline."""
    mae_value = mae(table)
    mbre_value, mibre_value = mbre_mibre(table)
    return EvalSummary(
        variant=table.variant,
        mae=mae_value,
        mmre=mmre(table),
        pred25=pred25(table),
        lsd=lsd(table),
        s2=log_residual_variance(table),
        mbre=mbre_value,
        mibre=mibre_value,
        sa=standardized_accuracy(mae_value, base),
        delta=effect_size(mae_value, base),
        fallback_count=table.fallback_count,
        baseline=base,
    )
