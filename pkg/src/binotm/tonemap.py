"""Bilateral base/detail tone mapping and the two reference images.

The operator decomposes log10 luminance into a base layer (edge-aware smooth) and
a detail layer (residual), rescales the base so its range equals log10(beta), and
re-applies color by luminance ratio. beta in [1.5, 6.0] spans the detail reference
(flat base, maximal local detail) to the contrast reference (maximal overall
contrast).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .image_io import HdrImage, LdrImage, luminance

BETA_MIN = 1.5
BETA_MAX = 6.0
BETA_DETAIL = 1.5
BETA_CONTRAST = 6.0

# Luminance floor before log10, so black pixels stay finite.
EPS_LUM = 1e-6

# Base ranges below this are treated as degenerate (compression factor 1).
_FLAT_BASE = 1e-12


@dataclass(frozen=True)
class ToneMapParams:
    """Operator parameters. sigma_space None means 2% of min(width, height).

    grid_downsample / slice_spacing control the fast approximation only and
    default to sigma_space/2 and sigma_range/2.
    """

    beta: float = 3.75
    sigma_space: float | None = None
    sigma_range: float = 0.4
    gamma: float = 2.2
    grid_downsample: float | None = None
    slice_spacing: float | None = None
    exact: bool = False

    def __post_init__(self):
        if not (BETA_MIN <= self.beta <= BETA_MAX):
            raise ValueError(f"beta {self.beta} outside [{BETA_MIN}, {BETA_MAX}]")
        if self.sigma_space is not None and self.sigma_space <= 0:
            raise ValueError("sigma_space must be positive")
        if self.sigma_range <= 0 or self.gamma <= 0:
            raise ValueError("sigma_range and gamma must be positive")

    def resolved_sigma_space(self, height: int, width: int) -> float:
        if self.sigma_space is not None:
            return self.sigma_space
        return 0.02 * min(height, width)

    def with_beta(self, beta: float) -> "ToneMapParams":
        return replace(self, beta=beta)


class BaseDetail(NamedTuple):
    base: np.ndarray
    detail: np.ndarray


def bilateral_exact(log_lum: np.ndarray, sigma_space: float, sigma_range: float) -> np.ndarray:
    """Brute-force bilateral filter: Gaussian spatial weights truncated at 3 sigma
    (square window), Gaussian range weights, per-pixel normalization over the
    in-bounds neighborhood."""
    img = np.asarray(log_lum, dtype=np.float64)
    if img.max() - img.min() < _FLAT_BASE:  # degenerate all-equal input
        return img.copy()
    h, w = img.shape
    r = int(np.ceil(3.0 * sigma_space))
    inv2ss = 0.5 / (sigma_space * sigma_space)
    inv2sr = 0.5 / (sigma_range * sigma_range)
    num = np.zeros_like(img)
    den = np.zeros_like(img)
    for dy in range(-r, r + 1):
        ys0, ys1 = max(0, dy), h + min(0, dy)  # destination rows
        yn0, yn1 = max(0, -dy), h + min(0, -dy)  # source rows (shifted by -dy)
        if ys0 >= ys1:
            continue
        for dx in range(-r, r + 1):
            xs0, xs1 = max(0, dx), w + min(0, dx)
            xn0, xn1 = max(0, -dx), w + min(0, -dx)
            if xs0 >= xs1:
                continue
            ws = np.exp(-(dx * dx + dy * dy) * inv2ss)
            center = img[ys0:ys1, xs0:xs1]
            neigh = img[yn0:yn1, xn0:xn1]
            wgt = ws * np.exp(-((center - neigh) ** 2) * inv2sr)
            num[ys0:ys1, xs0:xs1] += wgt * neigh
            den[ys0:ys1, xs0:xs1] += wgt
    return num / den


def _box_down_sum(img: np.ndarray, factor: int) -> np.ndarray:
    """Zero-padded block sums; trailing partial blocks just carry less mass."""
    h, w = img.shape
    hs, ws = -(-h // factor), -(-w // factor)
    padded = np.pad(img, ((0, hs * factor - h), (0, ws * factor - w)), mode="constant")
    return padded.reshape(hs, factor, ws, factor).sum(axis=(1, 3))


def bilateral_fast(
    log_lum: np.ndarray,
    sigma_space: float,
    sigma_range: float,
    downsample: float | None = None,
    slice_spacing: float | None = None,
) -> np.ndarray:
    """Grid-accelerated bilateral filter.

    Piecewise-linear intensity slices: per level, range weights are computed at
    full resolution, splatted to a coarse grid by block sums, Gaussian-blurred,
    and normalized (weighted sum over weight mass). Zero padding everywhere
    makes the normalization renormalize over in-bounds pixels, matching the
    exact filter's border behavior. Output is trilinear slicing of the level
    stack at each pixel's own intensity.
    """
    img = np.asarray(log_lum, dtype=np.float64)
    lo = float(img.min())
    hi = float(img.max())
    if hi - lo < _FLAT_BASE:
        return img.copy()

    if downsample is None:
        downsample = sigma_space / 2.0
    if slice_spacing is None:
        # Half the range sigma: piecewise-linear slicing at full sigma spacing
        # leaves ~0.06 log10 outliers at multi-population junctions.
        slice_spacing = sigma_range / 2.0
    d = max(1, int(round(downsample)))
    sigma_small = sigma_space / d

    n_seg = max(1, int(np.ceil((hi - lo) / slice_spacing)))
    seg = (hi - lo) / n_seg
    levels = lo + seg * np.arange(n_seg + 1)

    inv2sr = 0.5 / (sigma_range * sigma_range)
    h, w = img.shape
    hs, ws = -(-h // d), -(-w // d)
    grid = np.empty((n_seg + 1, hs, ws))
    for j, level in enumerate(levels):
        wgt = np.exp(-((img - level) ** 2) * inv2sr)
        # truncate=3 matches the exact filter's 3-sigma window.
        mass = ndimage.gaussian_filter(
            _box_down_sum(wgt, d), sigma_small, mode="constant", truncate=3.0)
        wsum = ndimage.gaussian_filter(
            _box_down_sum(wgt * img, d), sigma_small, mode="constant", truncate=3.0)
        grid[j] = wsum / np.maximum(mass, 1e-300)

    # Full-res pixel centers in small-grid coordinates: block i is centered at
    # full-res row i*d + (d-1)/2.
    ys = (np.arange(h) - (d - 1) / 2.0) / d
    xs = (np.arange(w) - (d - 1) / 2.0) / d
    t = np.clip((img - lo) / seg, 0.0, n_seg)
    coords = np.stack([
        t.ravel(),
        np.broadcast_to(ys[:, None], (h, w)).ravel(),
        np.broadcast_to(xs[None, :], (h, w)).ravel(),
    ])
    return ndimage.map_coordinates(grid, coords, order=1, mode="nearest").reshape(h, w)


def decompose(log_lum: np.ndarray, sigma_space: float, sigma_range: float,
              exact: bool = False,
              downsample: float | None = None,
              slice_spacing: float | None = None) -> BaseDetail:
    """Split log10 luminance into base (bilateral-filtered) and detail (residual)."""
    if exact:
        base = bilateral_exact(log_lum, sigma_space, sigma_range)
    else:
        base = bilateral_fast(log_lum, sigma_space, sigma_range, downsample, slice_spacing)
    return BaseDetail(base=base, detail=log_lum - base)


def compress_base(base: np.ndarray, beta: float) -> np.ndarray:
    """Rescale the base layer to range log10(beta), anchored so max(base) maps to 0
    (display white). Degenerate flat base passes through with factor 1."""
    top = base.max()
    spread = top - base.min()
    if spread < _FLAT_BASE:
        return base - top
    # Dividing by spread before scaling makes the output range exactly log10(beta).
    return (base - top) / spread * np.log10(beta)


def tonemap(img: HdrImage, params: ToneMapParams) -> LdrImage:
    """Apply the bilateral tone-map operator at params.beta."""
    y = np.maximum(luminance(img), EPS_LUM)
    log_y = np.log10(y)
    sigma_space = params.resolved_sigma_space(img.height, img.width)
    base, detail = decompose(
        log_y, sigma_space, params.sigma_range,
        exact=params.exact,
        downsample=params.grid_downsample,
        slice_spacing=params.slice_spacing,
    )
    log_out = compress_base(base, params.beta) + detail
    y_out = 10.0 ** log_out
    ratio = img.pixels / y[..., None]
    out = np.clip(ratio * y_out[..., None], 0.0, 1.0) ** (1.0 / params.gamma)
    return LdrImage(out)


def make_references(img: HdrImage, params: ToneMapParams = ToneMapParams()) -> tuple[LdrImage, LdrImage]:
    """The contrast reference (beta 6.0) and detail reference (beta 1.5) pair."""
    contrast_ref = tonemap(img, params.with_beta(BETA_CONTRAST))
    detail_ref = tonemap(img, params.with_beta(BETA_DETAIL))
    return contrast_ref, detail_ref
