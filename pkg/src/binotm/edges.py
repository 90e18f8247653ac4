"""Canny edge detection on view luminance.

Produces the fixed edge-pixel set the detail term averages over. Thresholds are
fractions of the maximum gradient magnitude, so the mask is invariant under
global brightness scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image_io import LdrImage, luminance


@dataclass(frozen=True)
class CannyParams:
    sigma: float = 1.4      # Gaussian smoothing std, pixels
    low_frac: float = 0.1   # hysteresis thresholds as fractions of max |gradient|
    high_frac: float = 0.2

    def __post_init__(self):
        if not (0.0 < self.low_frac < self.high_frac <= 1.0):
            raise ValueError("need 0 < low_frac < high_frac <= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def smoothed_gradient(lum: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian-smoothed Sobel gradients: (magnitude, gx, gy)."""
    smooth = ndimage.gaussian_filter(lum, sigma, mode="nearest")
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    return np.hypot(gx, gy), gx, gy


def _shift(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Array shifted so out[y, x] = arr[y+dy, x+dx], zero-padded at the borders."""
    h, w = arr.shape
    out = np.zeros_like(arr)
    ys = slice(max(0, dy), h + min(0, dy))
    xs = slice(max(0, dx), w + min(0, dx))
    yd = slice(max(0, -dy), h + min(0, -dy))
    xd = slice(max(0, -dx), w + min(0, -dx))
    out[yd, xd] = arr[ys, xs]
    return out


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin ridges to 1 px across the gradient. Direction is quantized to the four
    axes; ties on a two-pixel plateau break toward the +gradient side (strict >
    against the forward neighbor, >= against the backward one)."""
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    bins = [
        ((angle < 22.5) | (angle >= 157.5), (0, 1)),    # horizontal gradient
        ((22.5 <= angle) & (angle < 67.5), (1, 1)),     # diagonal
        ((67.5 <= angle) & (angle < 112.5), (1, 0)),    # vertical
        ((112.5 <= angle) & (angle < 157.5), (1, -1)),  # anti-diagonal
    ]
    keep = np.zeros(mag.shape, dtype=bool)
    for mask, (dy, dx) in bins:
        fwd = _shift(mag, dy, dx)
        bwd = _shift(mag, -dy, -dx)
        keep |= mask & (mag > fwd) & (mag >= bwd)
    return np.where(keep, mag, 0.0)


def canny(view: LdrImage, params: CannyParams = CannyParams()) -> np.ndarray:
    """Boolean edge mask: smooth, Sobel, NMS, double threshold, 8-connected hysteresis."""
    mag, gx, gy = smoothed_gradient(luminance(view), params.sigma)
    peak = mag.max()
    if peak <= 0.0:
        return np.zeros(mag.shape, dtype=bool)
    thinned = _non_maximum_suppression(mag, gx, gy)
    high = params.high_frac * peak
    low = params.low_frac * peak
    strong = thinned >= high
    weak = thinned >= low
    if not strong.any():
        return np.zeros(mag.shape, dtype=bool)
    # Hysteresis: keep weak components that touch a strong pixel.
    labels, n = ndimage.label(weak, structure=_EIGHT_CONNECTED)
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels]
