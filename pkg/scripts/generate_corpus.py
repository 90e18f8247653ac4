#!/usr/bin/env python3
"""Materialize the deterministic synthetic HDR corpus as .hdr files.

Usage: python scripts/generate_corpus.py OUT_DIR [-n 10] [--width 256] [--height 192]
"""

import argparse
from pathlib import Path

from binotm import synthetic, write_hdr


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("-n", type=int, default=10, help="number of scenes")
    ap.add_argument("--width", type=int, default=256)
    ap.add_argument("--height", type=int, default=192)
    ap.add_argument("--seed", type=int, default=100, help="base seed")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, img in synthetic.corpus(args.n, args.width, args.height, args.seed):
        path = out / f"{name}.hdr"
        write_hdr(img, path)
        print(path)


if __name__ == "__main__":
    main()
