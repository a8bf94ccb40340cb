"""Run configuration shared by the estimators, the LOOCV harness, and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Config:
    seed: int = 42
    runs: int = 1000          # Monte-Carlo runs for the random-guessing baseline
    alpha: float = 0.05       # significance level for Scott-Knott clustering
    k_max: int = 5            # analogies grid is k = 1..k_max per method
    jobs: int = 1             # LOOCV fold workers; results are identical for any value
    mt_min_leaf: int = 4
    mt_max_depth: int = 6
    nn_hidden: int = 4
    nn_epochs: int = 500
    nn_lr: float = 0.01
    ga_pop: int = 50
    ga_gens: int = 100
    ga_cx: float = 0.8
    ga_mut: float = 0.1
    ga_range: float = 5.0     # weights are searched in [-ga_range, ga_range]


# Flat override keys accepted by the CLI (--set key=value) and config files.
_KEYS = {
    "seed": ("seed", int),
    "runs": ("runs", int),
    "alpha": ("alpha", float),
    "k_max": ("k_max", int),
    "jobs": ("jobs", int),
    "mt.min_leaf": ("mt_min_leaf", int),
    "mt.max_depth": ("mt_max_depth", int),
    "nn.hidden": ("nn_hidden", int),
    "nn.epochs": ("nn_epochs", int),
    "nn.lr": ("nn_lr", float),
    "ga.pop": ("ga_pop", int),
    "ga.gens": ("ga_gens", int),
    "ga.cx": ("ga_cx", float),
    "ga.mut": ("ga_mut", float),
    "ga.range": ("ga_range", float),
}


def with_overrides(config: Config, pairs: dict[str, str]) -> Config:
    """Apply flat ``key=value`` overrides; unknown keys raise ValueError."""
    updates = {}
    for key, raw in pairs.items():
        if key not in _KEYS:
            raise ValueError(f"unknown config key {key!r} (known: {', '.join(sorted(_KEYS))})")
        field, cast = _KEYS[key]
        try:
            updates[field] = cast(raw)
        except ValueError as exc:
            raise ValueError(f"bad value for {key}: {raw!r}") from exc
    return replace(config, **updates)
