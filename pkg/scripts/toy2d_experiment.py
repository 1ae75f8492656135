#!/usr/bin/env python3
"""Train chain networks on the 2-D toy datasets and render their
decision boundaries (history CSV, grid CSV and SVG per dataset)."""

import argparse

from ttnets.cli import main as cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--epochs", type=int, default=300)
    parser.add_argument("--rank", type=int, default=8)
    parser.add_argument("--out-dir", default="results/toy2d")
    args = parser.parse_args()

    for dataset in ("moons", "circles"):
        out = f"{args.out_dir}/{dataset}"
        print(f"== {dataset} ==")
        code = cli(["train", "--dataset", dataset, "--rank", str(args.rank),
                    "--epochs", str(args.epochs), "--seed", str(args.seed),
                    "--out-dir", out])
        if code:
            raise SystemExit(code)
        for emit in ("csv", "svg"):
            code = cli(["boundary", "--checkpoint", f"{out}/checkpoint.txt",
                        "--resolution", "120", "--emit", emit, "--out-dir", out])
            if code:
                raise SystemExit(code)
        print(f"artifacts in {out}/")


if __name__ == "__main__":
    main()
