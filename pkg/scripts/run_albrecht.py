#!/usr/bin/env python3
"""Run the full pipeline on the bundled Albrecht dataset and print headlines."""

import argparse
from pathlib import Path

from ebae.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default=str(ROOT / "reports" / "albrecht"))
    args = parser.parse_args()

    code = cli_main([
        "pipeline",
        "--data", str(ROOT / "datasets" / "albrecht.csv"),
        "--schema", str(ROOT / "datasets" / "albrecht.schema"),
        "--seed", str(args.seed),
        "--out", args.out,
    ])
    if code == 0:
        summary = Path(args.out) / "summary.md"
        print()
        print(summary.read_text().split("## Variant accuracy")[0])
        print(f"full report: {args.out}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
