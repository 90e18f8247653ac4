"""Command-line front end.

Subcommands: optimize | refs | baseline | evaluate | batch.
Exit codes: 0 success, 1 input error, 2 numerical abort.

optimize writes left.png, right.png, side_by_side.png, anaglyph.png,
report.json, trajectory.jsonl (all deterministic) plus a timing.json sidecar
(wall-clock numbers, excluded from report.json so consecutive runs are
byte-identical).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .edges import CannyParams
from .energy import EnergyBreakdown, NonFiniteEnergyError
from .fusibility import FusibilityThresholds
from .image_io import (
    HdrImage,
    ImageFormatError,
    compose_stereo,
    load_hdr,
    load_ldr,
    quantized,
    write_ldr,
)
from .optimizer import OptimizerConfig, build_evaluator, optimize, order_views
from .perception import FusionParams
from .tonemap import ToneMapParams, make_references, tonemap

log = logging.getLogger("binotm")

SCHEMA_VERSION = 1

BATCH_COLUMNS = [
    "schema_version", "file", "beta_left", "beta_right",
    "e_c", "e_d", "e_f", "e_total",
    "baseline_e_c", "baseline_e_d", "baseline_e_total",
    "iterations", "sec_per_iter",
]


@dataclass(frozen=True)
class RunReport:
    input_path: str
    beta_left: float
    beta_right: float
    pair_energy: EnergyBreakdown
    baseline_beta: float
    baseline_energy: EnergyBreakdown
    iterations: int
    converged: bool
    detail_swap_delta: float
    seconds_per_iteration: float
    outputs: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "input": self.input_path,
            "beta_left": self.beta_left,
            "beta_right": self.beta_right,
            "pair_energy": self.pair_energy.to_dict(),
            "baseline_beta": self.baseline_beta,
            "baseline_energy": self.baseline_energy.to_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "detail_swap_delta": self.detail_swap_delta,
            "seconds_per_iteration": self.seconds_per_iteration,
            "outputs": dict(self.outputs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            input_path=d["input"],
            beta_left=d["beta_left"],
            beta_right=d["beta_right"],
            pair_energy=EnergyBreakdown.from_dict(d["pair_energy"]),
            baseline_beta=d["baseline_beta"],
            baseline_energy=EnergyBreakdown.from_dict(d["baseline_energy"]),
            iterations=d["iterations"],
            converged=d["converged"],
            detail_swap_delta=d["detail_swap_delta"],
            seconds_per_iteration=d["seconds_per_iteration"],
            outputs=d["outputs"],
        )


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Flag plumbing
# ---------------------------------------------------------------------------

def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda1", type=float, default=1.25, help="detail-term weight")
    p.add_argument("--lambda2", type=float, default=10.0, help="fusibility-term weight")
    p.add_argument("--fusion-radius", type=int, default=16, help="fusion disc radius, px")
    p.add_argument("--alpha", type=float, default=120.0, help="brightness-fusion phase, degrees")
    p.add_argument("--beta-min", type=float, default=1.5)
    p.add_argument("--beta-max", type=float, default=6.0)
    p.add_argument("--theta-cf", type=float, default=0.8, help="contour comfort threshold")
    p.add_argument("--theta-rf", type=float, default=0.6, help="region-brightness comfort threshold")
    p.add_argument("--canny-sigma", type=float, default=1.4)
    p.add_argument("--canny-low", type=float, default=0.1)
    p.add_argument("--canny-high", type=float, default=0.2)
    p.add_argument("--sigma-space", type=float, default=None,
                   help="bilateral spatial sigma, px (default 2%% of min dimension)")
    p.add_argument("--sigma-range", type=float, default=0.4,
                   help="bilateral range sigma, log10 units")
    p.add_argument("--gamma", type=float, default=2.2, help="display encoding exponent")
    p.add_argument("--threads", type=int, default=0,
                   help="batch worker threads (0 = auto)")
    p.add_argument("--exact-bilateral", action="store_true",
                   help="test mode: use the brute-force bilateral filter")


def _config_from_args(args) -> OptimizerConfig:
    mid = 0.5 * (args.beta_min + args.beta_max)
    return OptimizerConfig(
        beta_bounds=(args.beta_min, args.beta_max),
        init=(mid, mid),
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        tonemap=ToneMapParams(
            beta=mid,
            sigma_space=args.sigma_space,
            sigma_range=args.sigma_range,
            gamma=args.gamma,
            exact=args.exact_bilateral,
        ),
        fusion=FusionParams(alpha_degrees=args.alpha, fusion_radius=args.fusion_radius),
        thresholds=FusibilityThresholds(theta_cf=args.theta_cf, theta_rf=args.theta_rf),
        canny=CannyParams(sigma=args.canny_sigma, low_frac=args.canny_low,
                          high_frac=args.canny_high),
        # evaluate compares 8-bit files, so its references go through the same
        # 8-bit round trip (identity rows then compare exactly). optimize and
        # batch flip this off and stay on the float pipeline.
        display_quantize=True,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _optimize_one(img: HdrImage, config: OptimizerConfig):
    """Optimize plus the numbers the reports need. Returns
    (ordered pair, report fields dict, result, evaluator).

    The descent runs on the float pipeline (quantization noise makes the
    comfort ratios spiky). Reported energies are then measured for the 8-bit
    views actually written to disk, so recomputing the total energy on the
    emitted PNGs reproduces the report.
    """
    config = replace(config, display_quantize=False)
    evaluator, _, _, _ = build_evaluator(img, config)
    result = optimize(img, config, evaluator=evaluator)
    ordered = order_views(result.best_pair)

    left_stats = evaluator.view_stats(quantized(ordered.left))
    right_stats = evaluator.view_stats(quantized(ordered.right))
    pair_energy = evaluator.evaluate_stats(left_stats, right_stats)
    swapped = evaluator.evaluate_stats(right_stats, left_stats)
    swap_delta = abs(pair_energy.e_d - swapped.e_d)

    baseline_beta = 0.5 * (ordered.beta_left + ordered.beta_right)
    baseline_view = quantized(tonemap(img, config.tonemap.with_beta(baseline_beta)))
    baseline_energy = evaluator.evaluate(baseline_view, baseline_view)
    return ordered, {
        "pair_energy": pair_energy,
        "baseline_beta": baseline_beta,
        "baseline_energy": baseline_energy,
        "swap_delta": swap_delta,
    }, result, evaluator


def cmd_optimize(args) -> int:
    config = _config_from_args(args)
    img = load_hdr(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ordered, numbers, result, _ = _optimize_one(img, config)

    outputs = {}
    for name, image in [
        ("left", ordered.left),
        ("right", ordered.right),
        ("side_by_side", compose_stereo(ordered, "side_by_side")),
        ("anaglyph", compose_stereo(ordered, "anaglyph")),
    ]:
        path = out_dir / f"{name}.png"
        write_ldr(image, path)
        outputs[name] = path.name

    report = RunReport(
        input_path=str(args.input),
        beta_left=ordered.beta_left,
        beta_right=ordered.beta_right,
        pair_energy=numbers["pair_energy"],
        baseline_beta=numbers["baseline_beta"],
        baseline_energy=numbers["baseline_energy"],
        iterations=result.iterations_used,
        converged=result.converged,
        detail_swap_delta=numbers["swap_delta"],
        seconds_per_iteration=result.wall_time_per_iteration,
        outputs={**outputs, "report": "report.json", "trajectory": "trajectory.jsonl"},
    )
    payload = report.to_dict()
    # Wall-clock numbers go to the sidecar so report.json is run-to-run identical.
    seconds = payload.pop("seconds_per_iteration")
    _dump_json(payload, out_dir / "report.json")
    _dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "seconds_per_iteration": seconds,
            "iterations": result.iterations_used,
            "iterations_stage1": result.iterations_stage1,
            "iterations_stage2": result.iterations_stage2,
        },
        out_dir / "timing.json",
    )

    with open(out_dir / "trajectory.jsonl", "w") as fh:
        for point in result.trajectory:
            fh.write(json.dumps({
                "iteration": point.iteration,
                "stage": point.stage,
                "beta_left": point.beta_left,
                "beta_right": point.beta_right,
                "objective": point.objective,
                "e_c": point.energy.e_c,
                "e_d": point.energy.e_d,
                "e_f": point.energy.e_f,
                "e_total": point.energy.e_total,
            }, sort_keys=True) + "\n")

    log.info("optimized %s: beta=(%.4f, %.4f), E=%.4f vs baseline %.4f, %d iterations",
             args.input, ordered.beta_left, ordered.beta_right,
             numbers["pair_energy"].e_total, numbers["baseline_energy"].e_total,
             result.iterations_used)
    return 0


def cmd_refs(args) -> int:
    config = _config_from_args(args)
    img = load_hdr(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    contrast_ref, detail_ref = make_references(img, config.tonemap)
    write_ldr(contrast_ref, out_dir / "contrast_ref.png")
    write_ldr(detail_ref, out_dir / "detail_ref.png")
    log.info("wrote contrast_ref.png and detail_ref.png to %s", out_dir)
    return 0


def cmd_baseline(args) -> int:
    config = _config_from_args(args)
    lo, hi = config.beta_bounds
    for name, beta in (("beta-l", args.beta_l), ("beta-r", args.beta_r)):
        if not (lo <= beta <= hi):
            raise ValueError(f"--{name} {beta} outside bounds [{lo}, {hi}]")
    img = load_hdr(args.input)
    mid = 0.5 * (args.beta_l + args.beta_r)
    write_ldr(tonemap(img, config.tonemap.with_beta(mid)), args.out)
    log.info("wrote midpoint (beta=%.4f) image to %s", mid, args.out)
    return 0


def cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    img = load_hdr(args.input)
    left = load_ldr(args.left)
    right = load_ldr(args.right)
    if left.pixels.shape != (img.height, img.width, 3) or left.pixels.shape != right.pixels.shape:
        raise ValueError(
            f"pair dimensions {left.pixels.shape[:2]}/{right.pixels.shape[:2]} "
            f"do not match HDR input {(img.height, img.width)}"
        )
    evaluator, _, _, _ = build_evaluator(img, config)
    left_stats = evaluator.view_stats(left)
    right_stats = evaluator.view_stats(right)
    breakdown = evaluator.evaluate_stats(left_stats, right_stats)
    swapped = evaluator.evaluate_stats(right_stats, left_stats)
    payload = breakdown.to_dict()
    payload["detail_swap_delta"] = abs(breakdown.e_d - swapped.e_d)
    payload["schema_version"] = SCHEMA_VERSION
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _batch_row(path: Path, config: OptimizerConfig) -> dict | None:
    try:
        img = load_hdr(path)
    except ImageFormatError as exc:
        log.warning("skipping %s: %s", path.name, exc)
        return None
    t0 = time.perf_counter()
    ordered, numbers, result, _ = _optimize_one(img, config)
    elapsed = time.perf_counter() - t0
    pair_energy = numbers["pair_energy"]
    base = numbers["baseline_energy"]
    return {
        "schema_version": SCHEMA_VERSION,
        "file": path.name,
        "beta_left": ordered.beta_left,
        "beta_right": ordered.beta_right,
        "e_c": pair_energy.e_c,
        "e_d": pair_energy.e_d,
        "e_f": pair_energy.e_f,
        "e_total": pair_energy.e_total,
        "baseline_e_c": base.e_c,
        "baseline_e_d": base.e_d,
        "baseline_e_total": base.e_total,
        "iterations": result.iterations_used,
        "sec_per_iter": elapsed / max(1, result.iterations_used),
    }


def cmd_batch(args) -> int:
    config = _config_from_args(args)
    in_dir = Path(args.input_dir)
    if not in_dir.is_dir():
        raise ImageFormatError(f"not a directory: {in_dir}")
    files = sorted(p for p in in_dir.iterdir()
                   if p.suffix.lower() in (".hdr", ".pfm") and p.is_file())
    if not files:
        raise ImageFormatError(f"no .hdr or .pfm files in {in_dir}")

    workers = args.threads if args.threads > 0 else min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda p: _batch_row(p, config), files))
    rows = [r for r in rows if r is not None]
    if not rows:
        raise ImageFormatError("all input files failed to process")

    numeric = [c for c in BATCH_COLUMNS if c not in ("schema_version", "file")]
    mean_row = {"schema_version": SCHEMA_VERSION, "file": "mean"}
    for col in numeric:
        mean_row[col] = sum(r[col] for r in rows) / len(rows)

    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BATCH_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        writer.writerow(mean_row)
    log.info("wrote %d rows (+mean) to %s", len(rows), args.out)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binotm",
        description="Optimal binocular LDR pairs from one HDR image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimize a stereo pair for one HDR image")
    p.add_argument("input")
    p.add_argument("--out-dir", "-o", required=True)
    _add_metric_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("refs", help="emit the contrast/detail reference images")
    p.add_argument("input")
    p.add_argument("--out-dir", "-o", required=True)
    _add_metric_flags(p)
    p.set_defaults(func=cmd_refs)

    p = sub.add_parser("baseline", help="emit the monocular midpoint image")
    p.add_argument("input")
    p.add_argument("--beta-l", type=float, required=True)
    p.add_argument("--beta-r", type=float, required=True)
    p.add_argument("--out", required=True)
    _add_metric_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("evaluate", help="score an existing LDR pair against an HDR input")
    p.add_argument("input")
    p.add_argument("left")
    p.add_argument("right")
    _add_metric_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("batch", help="optimize every HDR image in a directory into a CSV")
    p.add_argument("input_dir")
    p.add_argument("--out", required=True)
    _add_metric_flags(p)
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteEnergyError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2
    except (ImageFormatError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
