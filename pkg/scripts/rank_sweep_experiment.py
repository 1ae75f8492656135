#!/usr/bin/env python3
"""Accuracy versus rank and parameter count for chain and shallow
networks on the digit corpus (one sweep CSV per format)."""

import argparse
from pathlib import Path

from ttnets.cli import main as cli
from ttnets.mnist import save_idx_images, save_idx_labels, synthetic_digits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--num", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--ranks", default="4,8,16")
    parser.add_argument("--out-dir", default="results/rank_sweep")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images_path, labels_path = out / "digits-images.idx", out / "digits-labels.idx"
    if not images_path.exists():
        images, labels = synthetic_digits(args.num, seed=args.seed)
        save_idx_images(images_path, images)
        save_idx_labels(labels_path, labels)

    for network in ("tt", "cp"):
        print(f"== {network} sweep ==")
        code = cli(["sweep", "--dataset", "mnist",
                    "--images", str(images_path), "--labels", str(labels_path),
                    "--network", network, "--ranks", args.ranks,
                    "--epochs", str(args.epochs), "--seed", str(args.seed),
                    "--out-dir", str(out / network)])
        if code:
            raise SystemExit(code)
        print(f"wrote {out / network}/sweep.csv")


if __name__ == "__main__":
    main()
