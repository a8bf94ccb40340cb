#!/usr/bin/env python3
"""Regenerate the toy fixtures in datasets/: the 5-project hand fixture and a
20-project linear benchmark (effort = 10 x size)."""

import argparse
from pathlib import Path

from ebae.data import ColumnSpec, Dataset, Project, write_dataset

ROOT = Path(__file__).resolve().parent.parent


def toy():
    columns = [
        ColumnSpec("id", "identifier", "categorical", "none"),
        ColumnSpec("size", "feature", "continuous", "primary_size"),
        ColumnSpec("effort", "effort", "continuous", "none"),
    ]
    projects = [
        Project(f"p{i + 1}", (float(s),), float(e))
        for i, (s, e) in enumerate(zip([2, 4, 6, 8, 10], [4, 8, 12, 20, 30]))
    ]
    return Dataset("toy", columns, projects)


def linear(n=20):
    columns = [
        ColumnSpec("id", "identifier", "categorical", "none"),
        ColumnSpec("size", "feature", "continuous", "primary_size"),
        ColumnSpec("effort", "effort", "continuous", "none"),
    ]
    projects = [Project(f"l{i + 1}", (float(i + 1),), 10.0 * (i + 1)) for i in range(n)]
    return Dataset("linear", columns, projects)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(ROOT / "datasets"))
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for ds in (toy(), linear()):
        write_dataset(ds, out / f"{ds.name}.csv", out / f"{ds.name}.schema")
        print(f"wrote {out / ds.name}.csv (+.schema), n={ds.n}")


if __name__ == "__main__":
    raise SystemExit(main())
