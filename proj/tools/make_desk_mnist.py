#!/usr/bin/env python3
"""Builds the desk-scale MNIST IDX files from the `mnist` npm package.

The package ships 10,000 MNIST digits as per-class JSON arrays of pixel
intensities in [0, 1] (three decimals). They are mapped back to bytes,
shuffled with a fixed seed, and split per class into train and test sets.

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python3 tools/make_desk_mnist.py package/src/digits data/mnist
"""

import argparse
import json
import random
import struct
from pathlib import Path


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=Path)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--test-fraction", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=20210601)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    train, test = [], []
    for digit in range(10):
        flat = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        samples = [
            [min(255, max(0, round(v * 255))) for v in flat[i : i + 784]]
            for i in range(0, len(flat), 784)
        ]
        rng.shuffle(samples)
        n_test = round(len(samples) * args.test_fraction)
        test += [(s, digit) for s in samples[:n_test]]
        train += [(s, digit) for s in samples[n_test:]]
    rng.shuffle(train)
    rng.shuffle(test)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in (("train", train), ("t10k", test)):
        write_idx_images(args.out_dir / f"{name}-images-idx3-ubyte", [r[0] for r in rows])
        write_idx_labels(args.out_dir / f"{name}-labels-idx1-ubyte", [r[1] for r in rows])
        print(f"{name}: {len(rows)} samples")


if __name__ == "__main__":
    main()
