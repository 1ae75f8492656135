#!/usr/bin/env python3
"""Run the three Monte-Carlo rank checks and write their report CSVs."""

import argparse

from ttnets.cli import main as cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="results/verify")
    args = parser.parse_args()

    jobs = [
        ["verify", "theorem1", "--d", "6", "--n", "3", "--r", "3",
         "--samples", "100"],
        ["verify", "hypothesis1", "--d", "6", "--n-range", "2,3,4",
         "--r-range", "2,3,4", "--samples", "50"],
        ["verify", "ht-bounds", "--direction", "tt2ht", "--d", "4", "--n", "3",
         "--r", "2", "--samples", "20"],
        ["verify", "ht-bounds", "--direction", "ht2tt", "--d", "4", "--n", "3",
         "--r", "2", "--samples", "20"],
    ]
    failed = 0
    for job in jobs:
        print("==", " ".join(job[1:3]))
        failed |= cli(job + ["--seed", str(args.seed), "--out-dir", args.out_dir])
    raise SystemExit(failed)


if __name__ == "__main__":
    main()
