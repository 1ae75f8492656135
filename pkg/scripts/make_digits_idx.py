#!/usr/bin/env python3
"""Write the synthetic digit corpus as an IDX image/label file pair."""

import argparse
from pathlib import Path

from ttnets.mnist import save_idx_images, save_idx_labels, synthetic_digits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--num", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="data")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images, labels = synthetic_digits(args.num, seed=args.seed)
    save_idx_images(out / "digits-images.idx", images)
    save_idx_labels(out / "digits-labels.idx", labels)
    print(f"wrote {args.num} samples to {out}/digits-{{images,labels}}.idx")


if __name__ == "__main__":
    main()
