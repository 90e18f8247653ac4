"""Deterministic synthetic HDR scenes for tests, benchmarks, and demos.

Scenes mimic the statistics the metric cares about: smooth illumination spanning
four to five decades, band-limited reflectance texture, crisp geometric edges,
and small bright emitters. Radiance is strictly positive everywhere so log
luminance stays finite without leaning on the guard floor.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image_io import HdrImage

SCENE_KINDS = ("window", "sunset", "blobs")


def _smooth_noise(rng, shape, sigma) -> np.ndarray:
    """Band-limited noise, rescaled to [0, 1]."""
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode="nearest")
    lo, hi = field.min(), field.max()
    return (field - lo) / (hi - lo + 1e-12)


def _disc_mask(shape, cy, cx, radius) -> np.ndarray:
    yy, xx = np.ogrid[: shape[0], : shape[1]]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius


def _tint(rng) -> np.ndarray:
    return rng.uniform(0.75, 1.25, size=3)


def _reflectance(rng, shape) -> np.ndarray:
    """Textured albedo in [0.15, 0.95] with geometric patches for hard edges."""
    h, w = shape
    albedo = 0.3 + 0.5 * _smooth_noise(rng, shape, sigma=max(2, min(h, w) // 24))
    albedo += 0.12 * (_smooth_noise(rng, shape, sigma=1.2) - 0.5)
    for _ in range(rng.integers(6, 11)):
        value = rng.uniform(0.15, 0.95)
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, h), rng.integers(0, w)
            y1 = min(h, y0 + int(rng.integers(h // 10, h // 3)))
            x1 = min(w, x0 + int(rng.integers(w // 10, w // 3)))
            albedo[y0:y1, x0:x1] = value
        else:
            r = int(rng.integers(min(h, w) // 16, min(h, w) // 5))
            albedo[_disc_mask(shape, rng.integers(0, h), rng.integers(0, w), r)] = value
    return np.clip(albedo, 0.15, 0.95)


def _colorize(lum_field: np.ndarray, rng, n_bands: int = 3) -> np.ndarray:
    """Expand a luminance field to RGB with smoothly varying tint."""
    h, w = lum_field.shape
    rgb = np.empty((h, w, 3))
    mix = _smooth_noise(rng, (h, w), sigma=max(2, min(h, w) // 8))
    tints = [_tint(rng) for _ in range(n_bands)]
    for c in range(3):
        levels = np.array([t[c] for t in tints])
        rgb[..., c] = lum_field * np.interp(mix, np.linspace(0, 1, n_bands), levels)
    return rgb


def _window_scene(rng, height, width) -> np.ndarray:
    shape = (height, width)
    # Dim interior lit from one side, plus a bright window patch.
    side = _smooth_noise(rng, shape, sigma=min(height, width) // 3)
    illum = 0.03 + 0.6 * side
    y0 = int(height * rng.uniform(0.12, 0.3))
    x0 = int(width * rng.uniform(0.5, 0.65))
    y1 = y0 + int(height * rng.uniform(0.3, 0.45))
    x1 = x0 + int(width * rng.uniform(0.2, 0.3))
    window = np.zeros(shape, dtype=bool)
    window[y0:y1, x0:x1] = True
    # Light spills smoothly from the window into the room.
    spill = ndimage.gaussian_filter(window.astype(float), min(height, width) / 6, mode="nearest")
    illum = illum * (1.0 + 25.0 * spill)
    radiance = illum * _reflectance(rng, shape)
    # The window itself shows a bright textured exterior.
    exterior = 150.0 + 700.0 * _smooth_noise(rng, shape, sigma=min(height, width) // 12)
    radiance[window] = exterior[window]
    return radiance


def _sunset_scene(rng, height, width) -> np.ndarray:
    shape = (height, width)
    horizon = int(height * rng.uniform(0.45, 0.6))
    rows = np.arange(height, dtype=float)[:, None]
    sky = 4.0 + 60.0 * np.exp(-((rows - horizon) / (0.5 * height)) ** 2)
    sky = np.broadcast_to(sky, shape).copy()
    sky *= 0.7 + 0.6 * _smooth_noise(rng, shape, sigma=min(height, width) // 6)  # clouds
    ground = (0.02 + 1.5 * _smooth_noise(rng, shape, sigma=min(height, width) // 10))
    ground = ground * _reflectance(rng, shape)
    radiance = np.where(rows < horizon, sky, ground)
    sun_r = max(2, int(min(height, width) * rng.uniform(0.03, 0.05)))
    sun = _disc_mask(shape, int(horizon * rng.uniform(0.4, 0.8)),
                     rng.integers(width // 4, 3 * width // 4), sun_r)
    radiance[sun] = rng.uniform(1200.0, 2500.0)
    # Silhouetted shapes poking above the horizon.
    for _ in range(rng.integers(2, 5)):
        x0 = int(rng.integers(0, max(1, width - width // 8)))
        x1 = min(width, x0 + int(rng.integers(width // 20, width // 8)))
        top = int(rng.integers(max(0, horizon - height // 4), horizon))
        radiance[top:horizon, x0:x1] = rng.uniform(0.01, 0.05)
    return radiance


def _blob_scene(rng, height, width) -> np.ndarray:
    shape = (height, width)
    # Illumination spanning ~4.5 decades, log-uniform.
    log_illum = -1.5 + 3.0 * _smooth_noise(rng, shape, sigma=min(height, width) // 4)
    illum = 10.0 ** log_illum
    radiance = illum * _reflectance(rng, shape)
    for _ in range(rng.integers(2, 5)):
        r = max(2, int(min(height, width) * rng.uniform(0.02, 0.05)))
        mask = _disc_mask(shape, rng.integers(0, height), rng.integers(0, width), r)
        radiance[mask] = rng.uniform(300.0, 1500.0)
    return radiance


_BUILDERS = {"window": _window_scene, "sunset": _sunset_scene, "blobs": _blob_scene}


def hdr_scene(kind: str = "blobs", width: int = 256, height: int = 192,
              seed: int = 0) -> HdrImage:
    """One synthetic HDR scene; identical (kind, size, seed) gives identical pixels."""
    if kind not in _BUILDERS:
        raise ValueError(f"unknown scene kind {kind!r}; pick one of {SCENE_KINDS}")
    rng = np.random.default_rng(seed)
    lum = np.maximum(_BUILDERS[kind](rng, height, width), 1e-3)
    return HdrImage(np.maximum(_colorize(lum, rng), 1e-4))


def corpus(n: int = 10, width: int = 256, height: int = 192,
           base_seed: int = 100) -> list[tuple[str, HdrImage]]:
    """A deterministic list of (name, scene) pairs cycling through all kinds."""
    out = []
    for i in range(n):
        kind = SCENE_KINDS[i % len(SCENE_KINDS)]
        seed = base_seed + i
        out.append((f"{kind}_{seed:03d}", hdr_scene(kind, width, height, seed)))
    return out
