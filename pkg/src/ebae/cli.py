"""Command-line front end: dataset description, variant evaluation, pipeline runs.

Exit codes: 0 success, 1 evaluation failure, 2 dataset/schema problems.
All outputs are deterministic functions of (input files, flags, seed); the
report directory is assembled in a temporary location and atomically moved
into place.
"""

from __future__ import annotations

import argparse
import csv
import os
import shutil
import sys
import tempfile
from pathlib import Path

from .config import Config, with_overrides
from .data import DatasetError, describe, load_dataset
from .ensemble import run_pipeline
from .metrics import summarize
from .validation import dataset_baseline, loocv

VARIANT_COLUMNS = (
    "variant", "MAE", "MMRE", "Pred25", "LSD", "MBRE", "MIBRE",
    "SA", "Delta", "SA5", "fallback_count", "kept",
)


def _write_csv(path, header, rows):
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _variant_rows(summaries, verdicts, base, errors):
    kept = {v.variant: v.kept for v in verdicts}
    rows = []
    for label, s in summaries.items():
        rows.append([
            label, _fmt(s.mae), _fmt(s.mmre), _fmt(s.pred25), _fmt(s.lsd),
            _fmt(s.mbre), _fmt(s.mibre), _fmt(s.sa), _fmt(s.delta),
            _fmt(base.sa5), s.fallback_count, kept.get(label, False),
        ])
    for label, message in errors.items():
        rows.append([label, "", "", "", "", "", "", "", "", _fmt(base.sa5), "", f"error: {message}"])
    return rows


def _pct(x):
    return f"{100.0 * x:.1f}"


def _md_table(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _summary_markdown(report, stats):
    cfg = report.config
    base = report.baseline
    out = [f"# Pipeline report: {report.dataset_name}", ""]
    out.append(
        f"Projects: {report.n}, features: {report.m}, seed: {cfg.seed}, "
        f"baseline runs: {cfg.runs}, alpha: {cfg.alpha}."
    )
    out.append("")
    out.append("## Dataset")
    out.append(_md_table(
        ("n", "m", "min", "max", "mean", "median", "skew"),
        [(stats.n, stats.m, f"{stats.minimum:g}", f"{stats.maximum:g}",
          f"{stats.mean:.2f}", f"{stats.median:.2f}", f"{stats.skewness:.2f}")],
    ))
    out.append("## Random-guessing baseline")
    out.append(_md_table(
        ("MAE_p0", "SP0", "SA at 5% quantile"),
        [(f"{base.mae_p0:.4f}", f"{base.sp0:.4f}", _pct(base.sa5) + "%")],
    ))
    if report.ks_statistic is not None:
        verdict = "rejected" if report.ks_reject else "not rejected"
        out.append(
            f"Normality of pooled survivor absolute errors: KS statistic "
            f"{report.ks_statistic:.4f}, normality {verdict} at alpha {cfg.alpha}."
        )
        out.append("")

    out.append("## Variant accuracy (SA% / effect size)")
    rows = [
        (label, _pct(s.sa), f"{s.delta:.2f}", f"{s.mae:.2f}", "yes" if label in report.survivors else "no")
        for label, s in report.summaries.items()
    ]
    out.append(_md_table(("variant", "SA", "effect size", "MAE", "kept"), rows))

    if report.sk_singles is not None:
        out.append("## Error clusters of surviving variants (best first)")
        t = report.sk_singles.transform
        out.append(
            f"Box-Cox lambda {t.box_cox_lambda:.2f}, shift {t.shift:g}; "
            f"alpha {report.sk_singles.alpha}."
        )
        rows = []
        for ci, cluster in enumerate(report.sk_singles.clusters, start=1):
            for name, mean in zip(cluster.members, cluster.means):
                rows.append((ci, name, f"{mean:.4f}", f"{report.summaries[name].mae:.2f}"))
        out.append(_md_table(("cluster", "variant", "mean transformed AE", "MAE"), rows))

    if report.borda_singles is not None:
        out.append("## Borda ranking of the best cluster")
        rows = [
            (report.borda_singles.ranks[c], c, report.borda_singles.scores[c],
             f"{report.borda_singles.xi.get(c, float('nan')):.2f}")
            for c in report.best_ranking
        ]
        out.append(_md_table(("rank", "method", "score", "rank change"), rows))

    if report.ensembles:
        out.append("## Ensembles (mean aggregation over ranking prefixes)")
        rows = [
            (e.label, " ".join(e.members), _pct(report.ensemble_summaries[e.label].sa),
             f"{report.ensemble_summaries[e.label].delta:.2f}",
             f"{report.ensemble_summaries[e.label].mae:.2f}")
            for e in report.ensembles
        ]
        out.append(_md_table(("ensemble", "members", "SA", "effect size", "MAE"), rows))

    if report.borda_joint is not None:
        out.append("## Joint ranking: best singles and ensembles")
        order = sorted(report.borda_joint.candidates,
                       key=lambda c: (report.borda_joint.ranks[c], str(c)))
        rows = [
            (report.borda_joint.ranks[c], c, report.borda_joint.scores[c],
             f"{report.borda_joint.xi.get(c, float('nan')):.2f}")
            for c in order
        ]
        out.append(_md_table(("rank", "method", "score", "rank change"), rows))

    if report.mean_rank_ensembles is not None or report.mean_rank_singles is not None:
        out.append("## Mean joint rank")
        fmt = lambda v: "-" if v is None else f"{v:.2f}"
        out.append(_md_table(
            ("ensemble methods", "single methods"),
            [(fmt(report.mean_rank_ensembles), fmt(report.mean_rank_singles))],
        ))

    if report.best_k:
        out.append("## Best k per adjustment method (by mean transformed AE)")
        rows = [(m, report.best_k[m][0]) for m in sorted(report.best_k)]
        out.append(_md_table(("method", "best k"), rows))

    if report.two_way is not None:
        out.append("## Adjustment-type clusters (two-way decomposition over k)")
        rows = []
        for ci, cluster in enumerate(report.two_way.clusters, start=1):
            for name, mean in zip(cluster.members, cluster.means):
                rows.append((ci, name, f"{mean:.4f}"))
        out.append(_md_table(("cluster", "type", "mean transformed AE"), rows))

    if report.notes:
        out.append("## Notes")
        out.extend(f"- {note}" for note in report.notes)
        out.append("")
    return "\n".join(out)


def write_report(report, stats, out_dir):
    """Write the report directory atomically (build in a temp dir, then rename)."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=out_dir.name + ".", dir=out_dir.parent))
    try:
        base = report.baseline
        _write_csv(
            staging / "variants.csv", VARIANT_COLUMNS,
            _variant_rows(report.summaries, report.verdicts, base, report.variant_errors),
        )
        _write_csv(
            staging / "filter.csv",
            ("variant", "SA", "Delta", "SA5", "kept", "reason"),
            [(v.variant, _fmt(v.sa), _fmt(v.delta), _fmt(base.sa5), v.kept, v.reason)
             for v in report.verdicts],
        )
        sk_rows = []
        if report.sk_singles is not None:
            for ci, cluster in enumerate(report.sk_singles.clusters, start=1):
                for name, mean in zip(cluster.members, cluster.means):
                    sk_rows.append((ci, name, _fmt(mean), _fmt(report.summaries[name].mae)))
        _write_csv(staging / "scott_knott.csv",
                   ("cluster", "variant", "mean_transformed_ae", "mae"), sk_rows)
        borda_rows = []
        if report.borda_singles is not None:
            borda_rows = [
                (report.borda_singles.ranks[c], c, report.borda_singles.scores[c],
                 _fmt(report.borda_singles.xi.get(c, float("nan"))))
                for c in report.best_ranking
            ]
        _write_csv(staging / "borda.csv", ("rank", "variant", "score", "xi"), borda_rows)
        _write_csv(
            staging / "ensembles.csv",
            ("ensemble", "members", "MAE", "MMRE", "Pred25", "LSD", "MBRE", "MIBRE", "SA", "Delta"),
            [(e.label, "|".join(e.members), _fmt(s.mae), _fmt(s.mmre), _fmt(s.pred25),
              _fmt(s.lsd), _fmt(s.mbre), _fmt(s.mibre), _fmt(s.sa), _fmt(s.delta))
             for e in report.ensembles
             for s in [report.ensemble_summaries[e.label]]],
        )
        joint_rows = []
        if report.borda_joint is not None:
            order = sorted(report.borda_joint.candidates,
                           key=lambda c: (report.borda_joint.ranks[c], str(c)))
            joint_rows = [
                (report.borda_joint.ranks[c], c, report.borda_joint.scores[c],
                 _fmt(report.borda_joint.xi.get(c, float("nan"))))
                for c in order
            ]
        _write_csv(staging / "joint_ranking.csv", ("rank", "method", "score", "xi"), joint_rows)

        plotdata = staging / "plotdata"
        plotdata.mkdir()
        for name, result, tables in (
            ("transformed_ae_singles.csv", report.sk_singles, report.tables),
            ("transformed_ae_joint.csv", report.sk_joint,
             {**report.tables, **report.ensemble_tables}),
        ):
            rows = []
            if result is not None:
                from .stats import apply_transform

                for ci, cluster in enumerate(result.clusters, start=1):
                    for member in cluster.members:
                        values = apply_transform(tables[member].aes, result.transform)
                        rows += [(ci, member, _fmt(float(v))) for v in values]
            _write_csv(plotdata / name, ("cluster", "method", "transformed_ae"), rows)
        two_rows = []
        if report.two_way is not None:
            for ci, cluster in enumerate(report.two_way.clusters, start=1):
                two_rows += [
                    (ci, name, _fmt(mean)) for name, mean in zip(cluster.members, cluster.means)
                ]
        _write_csv(plotdata / "two_way_types.csv", ("cluster", "type", "mean_transformed_ae"), two_rows)

        (staging / "summary.md").write_text(_summary_markdown(report, stats), encoding="utf-8")

        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.rename(staging, out_dir)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise


def _build_config(args):
    overrides = dict(pair.split("=", 1) for pair in args.set or [])
    config = with_overrides(Config(), overrides)
    env_seed = os.environ.get("EBAE_SEED")
    updates = {}
    if env_seed is not None and args.seed is None and "seed" not in overrides:
        updates["seed"] = env_seed
    for flag in ("seed", "runs", "alpha", "k_max"):
        value = getattr(args, flag)
        if value is not None:
            updates[flag] = str(value)
    return with_overrides(config, updates)


def _add_common(parser, with_out):
    parser.add_argument("--data", required=True, help="dataset CSV path")
    parser.add_argument("--schema", required=True, help="schema sidecar path")
    parser.add_argument("--seed", type=int, default=None,
                        help="global seed (default 42; EBAE_SEED overrides the default)")
    parser.add_argument("--runs", type=int, default=None, help="baseline Monte-Carlo runs (default 1000)")
    parser.add_argument("--alpha", type=float, default=None, help="Scott-Knott significance level (default 0.05)")
    parser.add_argument("--k-max", dest="k_max", type=int, default=None, help="largest analogy count (default 5)")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="config override, e.g. --set ga.pop=30 (repeatable)")
    if with_out:
        parser.add_argument("--out", default="./report", help="report directory (default ./report)")


def cmd_describe(args):
    dataset = load_dataset(args.data, args.schema)
    stats = describe(dataset)
    print(f"dataset: {dataset.name}")
    print(f"projects (n): {stats.n}")
    print(f"features (m): {stats.m}")
    print(f"effort min: {stats.minimum:g}")
    print(f"effort max: {stats.maximum:g}")
    print(f"effort mean: {stats.mean:.4f}")
    print(f"effort median: {stats.median:.4f}")
    print(f"effort skewness: {stats.skewness:.4f}")
    if dataset.dropped_rows:
        print(f"rows dropped for missing values: {dataset.dropped_rows}")
    return 0


def cmd_evaluate(args):
    from .adjust import enumerate_variants

    dataset = load_dataset(args.data, args.schema)
    config = _build_config(args)
    base = dataset_baseline(dataset, config)
    summaries = {}
    errors = {}
    for variant in enumerate_variants(config.k_max):
        try:
            table = loocv(dataset, variant, config)
            summaries[variant.label] = summarize(table, base)
        except (ValueError, ArithmeticError) as exc:
            errors[variant.label] = str(exc)
    from .ensemble import filter_actual_predictors

    _, verdicts = filter_actual_predictors(summaries, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "variants.csv", VARIANT_COLUMNS,
               _variant_rows(summaries, verdicts, base, errors))
    print(f"wrote {out / 'variants.csv'} ({len(summaries)} variants evaluated)")
    return 0


def cmd_pipeline(args):
    dataset = load_dataset(args.data, args.schema)
    config = _build_config(args)
    report = run_pipeline(dataset, config)
    write_report(report, describe(dataset), args.out)
    print(f"wrote report to {args.out}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ebae",
        description="Analogy-based effort estimation: adjustment variants, "
                    "random-guessing baselines, clustering/ranking, ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_desc = sub.add_parser("describe", help="print effort-column statistics")
    _add_common(p_desc, with_out=False)
    p_desc.set_defaults(func=cmd_describe)
    p_eval = sub.add_parser("evaluate", help="LOOCV-evaluate every variant, write variants.csv")
    _add_common(p_eval, with_out=True)
    p_eval.set_defaults(func=cmd_evaluate)
    p_pipe = sub.add_parser("pipeline", help="run the full selection/ensembling pipeline")
    _add_common(p_pipe, with_out=True)
    p_pipe.set_defaults(func=cmd_pipeline)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
