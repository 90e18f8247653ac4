#!/usr/bin/env python3
"""Time one optimizer iteration unit (tone-map both views + full energy) at 800x600.

Reference statistics and the edge set are computed once per image, as in the
optimizer, and are excluded from the per-iteration cost.
"""

import argparse
import time

from binotm import OptimizerConfig, build_evaluator, synthetic, tonemap


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=800)
    ap.add_argument("--height", type=int, default=600)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--kind", default="window", choices=synthetic.SCENE_KINDS)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    img = synthetic.hdr_scene(args.kind, args.width, args.height, args.seed)
    config = OptimizerConfig()
    evaluator, _, _, _ = build_evaluator(img, config)

    times = []
    for rep in range(args.repeats):
        beta_l, beta_r = 2.0 + 0.1 * rep, 5.0 - 0.1 * rep  # defeat any caching
        t0 = time.perf_counter()
        left = tonemap(img, config.tonemap.with_beta(beta_l))
        right = tonemap(img, config.tonemap.with_beta(beta_r))
        evaluator.evaluate(left, right)
        times.append(time.perf_counter() - t0)
        print(f"iteration {rep}: {times[-1]:.3f} s")
    times.sort()
    print(f"median over {args.repeats} at {args.width}x{args.height}: "
          f"{times[len(times) // 2]:.3f} s")


if __name__ == "__main__":
    main()
