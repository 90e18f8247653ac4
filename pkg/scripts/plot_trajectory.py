#!/usr/bin/env python3
"""Plot an optimizer trajectory.jsonl: energy terms per iteration and the
(beta_left, beta_right) path through the search box.

Usage: python scripts/plot_trajectory.py OUT_DIR/trajectory.jsonl [-o plot.png]
"""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("trajectory", help="trajectory.jsonl from binotm optimize")
    ap.add_argument("-o", "--out", default="trajectory.png")
    args = ap.parse_args()

    points = [json.loads(line) for line in open(args.trajectory)]
    iters = [p["iteration"] for p in points]

    fig, (ax_e, ax_b) = plt.subplots(1, 2, figsize=(11, 4.5))
    for key, label in [("e_c", "contrast"), ("e_d", "detail"),
                       ("e_f", "fusibility"), ("e_total", "total")]:
        ax_e.plot(iters, [p[key] for p in points], label=label,
                  lw=2 if key == "e_total" else 1)
    stage2 = next((p["iteration"] for p in points if p["stage"] == 2), None)
    if stage2 is not None:
        ax_e.axvline(stage2, color="gray", ls="--", lw=0.8, label="stage 2 start")
    ax_e.set_xlabel("iteration")
    ax_e.set_ylabel("energy")
    ax_e.legend(fontsize=8)
    ax_e.set_title("energy terms")

    bl = [p["beta_left"] for p in points]
    br = [p["beta_right"] for p in points]
    ax_b.plot(bl, br, "o-", ms=3, lw=1)
    ax_b.plot(bl[0], br[0], "s", color="green", label="init")
    ax_b.plot(bl[-1], br[-1], "*", color="red", ms=12, label="final")
    ax_b.set_xlim(1.4, 6.1)
    ax_b.set_ylim(1.4, 6.1)
    ax_b.set_xlabel("beta_left")
    ax_b.set_ylabel("beta_right")
    ax_b.legend(fontsize=8)
    ax_b.set_title("parameter path")

    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(args.out)


if __name__ == "__main__":
    main()
