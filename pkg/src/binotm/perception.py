"""Psychophysical fusion models: local brightness, contour contrast, and the
binocular combination of each.

Brightness fuses like a vector sum with a fixed 120-degree phase, so equal views
fuse to themselves and the result stays inside [min, max] of the two inputs.
Contour contrast fuses through a Legge-type nonlinearity whose constants were
fitted in percent-contrast units, hence contrast maps are scaled to [0, 100].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image_io import LdrImage, luminance


@dataclass(frozen=True)
class FusionParams:
    alpha_degrees: float = 120.0  # brightness-fusion phase
    fusion_radius: int = 16       # disc radius of the fusion area, pixels
    s: float = 3.47               # Legge-model exponents and saturation constant
    t: float = 3.03
    z: float = 4.76


def _box_sum_1d(arr: np.ndarray, half_width: int, axis: int) -> np.ndarray:
    """In-bounds sliding-window sum of width 2*half_width+1 along one axis."""
    arr = np.moveaxis(arr, axis, -1)
    n = arr.shape[-1]
    csum = np.zeros(arr.shape[:-1] + (n + 1,))
    np.cumsum(arr, axis=-1, out=csum[..., 1:])
    hi = np.minimum(np.arange(n) + half_width + 1, n)
    lo = np.maximum(np.arange(n) - half_width, 0)
    out = csum[..., hi] - csum[..., lo]
    return np.moveaxis(out, -1, axis)


def disc_mean(values: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a disc of the given pixel radius, averaging in-bounds pixels only."""
    if radius <= 0:
        return values.copy()
    h = values.shape[0]
    num = np.zeros_like(values)
    cnt = np.zeros_like(values)
    ones = np.ones_like(values)
    for dy in range(-radius, radius + 1):
        if abs(dy) >= h:  # row offset has no in-bounds overlap
            continue
        half = int(np.sqrt(radius * radius - dy * dy))
        row_sum = _box_sum_1d(values, half, axis=1)
        row_cnt = _box_sum_1d(ones, half, axis=1)
        d0, d1 = max(0, -dy), h - max(0, dy)  # destination rows
        s0, s1 = max(0, dy), h - max(0, -dy)  # source rows
        num[d0:d1] += row_sum[s0:s1]
        cnt[d0:d1] += row_cnt[s0:s1]
    return num / cnt


def local_brightness(view: LdrImage, fusion_radius: int = 16) -> np.ndarray:
    """Per-pixel mean luminance over the fusion disc, shape (H, W), values in [0,1]."""
    return disc_mean(luminance(view), fusion_radius)


def _cos_degrees(alpha: float) -> float:
    # libm cos(2*pi/3) is one ulp off -0.5, which would break the exact
    # fuse(b, b) = b identity at the model's 120-degree phase.
    if alpha % 360.0 == 120.0:
        return -0.5
    return float(np.cos(np.deg2rad(alpha)))


def fuse_brightness(b_left, b_right, alpha_degrees: float = 120.0):
    """Fused binocular brightness: sqrt(bL^2 + bR^2 + 2 bL bR cos(alpha)).

    Evaluated on inputs rescaled by their max so squaring cannot underflow;
    fuse(b, b) = b and fuse(b, 0) = b stay exact at the 120-degree default.
    """
    cos_a = _cos_degrees(alpha_degrees)
    peak = np.maximum(b_left, b_right)
    safe = np.where(peak > 0.0, peak, 1.0)
    rl = b_left / safe
    rr = b_right / safe
    radicand = rl * rl + rr * rr + 2.0 * rl * rr * cos_a
    return peak * np.sqrt(np.maximum(radicand, 0.0))


def contour_contrast(view: LdrImage) -> np.ndarray:
    """Local contour contrast in percent: 100 * (max - min) of luminance over the
    3x3 neighborhood, clipped to in-bounds pixels at the borders."""
    lum = luminance(view)
    # mode="nearest" replicates border pixels, which leaves max/min equal to the
    # in-bounds window extrema.
    hi = ndimage.maximum_filter(lum, size=3, mode="nearest")
    lo = ndimage.minimum_filter(lum, size=3, mode="nearest")
    return 100.0 * (hi - lo)


def fuse_contrast(c_left, c_right, params: FusionParams = FusionParams()):
    """Fused binocular contrast response: (cL^s + cR^t)^(s/t) / (z + cL^s + cR^t).

    Asymmetric in (cL, cR) because s != t; callers that care report the swap
    difference rather than averaging it away.
    """
    pooled = np.power(c_left, params.s) + np.power(c_right, params.t)
    return np.power(pooled, params.s / params.t) / (params.z + pooled)
