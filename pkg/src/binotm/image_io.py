"""HDR/LDR raster types, Radiance RGBE and PFM codecs, LDR writers, stereo composites.

Images are immutable once constructed (the backing arrays are marked read-only),
so they are safe to share across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

# Rec. 709 luma weights; the RGB->luminance convention used everywhere in this package.
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported, or corrupt image files."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class HdrImage:
    """Linear-radiance RGB raster, shape (height, width, 3), non-negative finite values."""

    pixels: np.ndarray

    def __post_init__(self):
        px = _freeze(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"HdrImage needs (H, W, 3) pixels, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("HdrImage pixels must be finite")
        if px.min() < 0:
            raise ValueError("HdrImage pixels must be non-negative")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class LdrImage:
    """Display-referred RGB raster, shape (height, width, 3), values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = _freeze(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"LdrImage needs (H, W, 3) pixels, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("LdrImage pixels must be finite")
        if px.min() < 0 or px.max() > 1:
            raise ValueError("LdrImage pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinocularPair:
    """A left/right LDR view pair plus the tone-map parameters that generated it."""

    left: LdrImage
    right: LdrImage
    beta_left: float
    beta_right: float

    def __post_init__(self):
        if self.left.pixels.shape != self.right.pixels.shape:
            raise ValueError(
                f"view dimensions differ: {self.left.pixels.shape} vs {self.right.pixels.shape}"
            )


def luminance(img: HdrImage | LdrImage) -> np.ndarray:
    """Per-pixel Rec. 709 luminance of an image, shape (H, W)."""
    return img.pixels @ LUMA_WEIGHTS


# ---------------------------------------------------------------------------
# Radiance RGBE (.hdr)
# ---------------------------------------------------------------------------

def _read_line(fh) -> bytes:
    line = fh.readline()
    if not line:
        raise ImageFormatError("corrupt header: unexpected end of file")
    return line


def _read_rgbe_header(fh) -> tuple[int, int]:
    magic = _read_line(fh)
    if not magic.startswith(b"#?"):
        raise ImageFormatError("corrupt header: missing #? magic")
    while True:
        line = _read_line(fh).strip()
        if line == b"":
            break
        if line.startswith(b"FORMAT=") and line != b"FORMAT=32-bit_rle_rgbe":
            raise ImageFormatError(f"unsupported format: {line.decode(errors='replace')}")
    res = _read_line(fh).split()
    if len(res) != 4 or res[0] != b"-Y" or res[2] != b"+X":
        raise ImageFormatError("unsupported format: only '-Y h +X w' orientation is handled")
    try:
        height, width = int(res[1]), int(res[3])
    except ValueError as exc:
        raise ImageFormatError("corrupt header: bad resolution line") from exc
    if not (1 <= width <= 0xFFFF and 1 <= height <= 0xFFFF):
        raise ImageFormatError(f"dimension overflow: {width}x{height}")
    return height, width


def _read_rle_components(fh, width: int) -> np.ndarray:
    out = np.empty((width, 4), np.uint8)
    for c in range(4):
        x = 0
        while x < width:
            head = fh.read(1)
            if len(head) < 1:
                raise ImageFormatError("corrupt scanline: truncated RLE data")
            n = head[0]
            if n > 128:  # run of a repeated byte
                count = n - 128
                val = fh.read(1)
                if len(val) < 1:
                    raise ImageFormatError("corrupt scanline: truncated RLE run")
                if x + count > width:
                    raise ImageFormatError("corrupt scanline: RLE run overflow")
                out[x : x + count, c] = val[0]
            else:  # dump of n literal bytes
                if n == 0:
                    raise ImageFormatError("corrupt scanline: zero-length RLE dump")
                data = fh.read(n)
                if len(data) < n or x + n > width:
                    raise ImageFormatError("corrupt scanline: RLE dump overflow")
                out[x : x + n, c] = np.frombuffer(data, np.uint8)
                count = n
            x += count
    return out


def _read_flat_scanline(fh, width: int, first: bytes) -> np.ndarray:
    out = np.empty((width, 4), np.uint8)
    x = 0
    shift = 0
    pending = first
    while x < width:
        if pending is None:
            pending = fh.read(4)
            if len(pending) < 4:
                raise ImageFormatError("corrupt scanline: truncated pixel data")
        r, g, b, e = pending
        pending = None
        if r == 1 and g == 1 and b == 1:  # old-style run: repeat previous pixel
            if x == 0:
                raise ImageFormatError("corrupt scanline: repeat before first pixel")
            count = e << shift
            if x + count > width:
                raise ImageFormatError("corrupt scanline: repeat overflow")
            out[x : x + count] = out[x - 1]
            x += count
            shift += 8
        else:
            out[x] = (r, g, b, e)
            x += 1
            shift = 0
    return out


def _read_rgbe_scanline(fh, width: int) -> np.ndarray:
    first = fh.read(4)
    if len(first) < 4:
        raise ImageFormatError("corrupt scanline: truncated pixel data")
    if (
        8 <= width <= 0x7FFF
        and first[0] == 2
        and first[1] == 2
        and ((first[2] << 8) | first[3]) == width
    ):
        return _read_rle_components(fh, width)
    return _read_flat_scanline(fh, width, first)


def _decode_rgbe(rgbe: np.ndarray) -> np.ndarray:
    # v = (mantissa + 0.5) * 2^(e - 136); exponent byte 0 marks a zero pixel.
    e = rgbe[..., 3].astype(np.int64)
    scale = np.ldexp(1.0, e - 136)
    rgb = (rgbe[..., :3].astype(np.float64) + 0.5) * scale[..., None]
    rgb[e == 0] = 0.0
    return rgb


def load_radiance(path) -> HdrImage:
    """Decode a Radiance RGBE (.hdr) file, flat or RLE scanlines."""
    with open(path, "rb") as fh:
        height, width = _read_rgbe_header(fh)
        rgbe = np.empty((height, width, 4), np.uint8)
        for y in range(height):
            rgbe[y] = _read_rgbe_scanline(fh, width)
    return HdrImage(_decode_rgbe(rgbe))


def write_hdr(img: HdrImage, path) -> None:
    """Write a Radiance RGBE (.hdr) file with flat (non-RLE) scanlines."""
    rgb = img.pixels
    v = rgb.max(axis=-1)
    _, expo = np.frexp(v)
    expo = np.clip(expo, -127, 127)
    scale = np.ldexp(256.0, -expo)
    mant = np.clip(np.floor(rgb * scale[..., None]), 0, 255).astype(np.uint8)
    ebyte = np.where(v >= 1e-38, expo + 128, 0).astype(np.uint8)
    mant[ebyte == 0] = 0
    rgbe = np.concatenate([mant, ebyte[..., None]], axis=-1)
    with open(path, "wb") as fh:
        fh.write(b"#?RADIANCE\n")
        fh.write(b"FORMAT=32-bit_rle_rgbe\n\n")
        fh.write(f"-Y {img.height} +X {img.width}\n".encode())
        fh.write(rgbe.tobytes())


# ---------------------------------------------------------------------------
# PFM
# ---------------------------------------------------------------------------

def load_pfm(path) -> HdrImage:
    """Decode a PFM file; rows are stored bottom-to-top, scale sign is endianness."""
    with open(path, "rb") as fh:
        magic = _read_line(fh).strip()
        if magic not in (b"PF", b"Pf"):
            raise ImageFormatError(f"unsupported format: PFM magic {magic!r}")
        channels = 3 if magic == b"PF" else 1
        dims = _read_line(fh).split()
        if len(dims) != 2:
            raise ImageFormatError("corrupt header: bad PFM dimensions line")
        try:
            width, height = int(dims[0]), int(dims[1])
            scale = float(_read_line(fh).strip())
        except ValueError as exc:
            raise ImageFormatError("corrupt header: bad PFM header value") from exc
        if not (1 <= width <= 0xFFFF and 1 <= height <= 0xFFFF):
            raise ImageFormatError(f"dimension overflow: {width}x{height}")
        if scale == 0:
            raise ImageFormatError("corrupt header: zero PFM scale")
        count = width * height * channels
        raw = fh.read(4 * count)
        if len(raw) < 4 * count:
            raise ImageFormatError("corrupt header: truncated PFM pixel data")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(raw, dtype=dtype, count=count).astype(np.float64)
    data = data.reshape(height, width, channels)[::-1]  # bottom-to-top storage
    if channels == 1:
        data = np.repeat(data, 3, axis=2)
    data = data * abs(scale)
    if not np.all(np.isfinite(data)) or data.min() < 0:
        raise ImageFormatError("PFM contains non-finite or negative radiance")
    return HdrImage(data)


def write_pfm(img: HdrImage, path) -> None:
    """Write a little-endian color PFM (scale -1.0, rows bottom-to-top)."""
    data = img.pixels.astype("<f4")[::-1]
    with open(path, "wb") as fh:
        fh.write(f"PF\n{img.width} {img.height}\n-1.0\n".encode())
        fh.write(data.tobytes())


def load_hdr(path) -> HdrImage:
    """Load an HDR radiance map from a Radiance RGBE (.hdr) or PFM (.pfm) file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(2)
    except OSError as exc:
        raise ImageFormatError(f"unreadable file: {path}: {exc}") from exc
    if head == b"#?":
        return load_radiance(path)
    if head in (b"PF", b"Pf"):
        return load_pfm(path)
    raise ImageFormatError(f"unsupported format: {path} (expected Radiance RGBE or PFM)")


# ---------------------------------------------------------------------------
# LDR output
# ---------------------------------------------------------------------------

def quantize_to_bytes(pixels: np.ndarray) -> np.ndarray:
    """Map [0,1] floats to uint8 by round-half-up: byte = floor(clamp(v)*255 + 0.5)."""
    return np.floor(np.clip(pixels, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def quantized(img: LdrImage) -> LdrImage:
    """The image after an 8-bit round trip, i.e. what a PNG/PPM reader will see."""
    return LdrImage(quantize_to_bytes(img.pixels) / 255.0)


def write_ldr(img: LdrImage, path, format: str | None = None) -> None:
    """Write an 8-bit LDR image as PNG or binary PPM (P6)."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    data = quantize_to_bytes(img.pixels)
    if fmt == "png":
        Image.fromarray(data, mode="RGB").save(path, format="PNG")
    elif fmt == "ppm":
        with open(path, "wb") as fh:
            fh.write(f"P6\n{img.width} {img.height}\n255\n".encode())
            fh.write(data.tobytes())
    else:
        raise ValueError(f"unsupported LDR format: {fmt!r} (use png or ppm)")


def load_ldr(path) -> LdrImage:
    """Read an 8-bit PNG/PPM back into a [0,1] LdrImage."""
    try:
        with Image.open(path) as im:
            data = np.asarray(im.convert("RGB"), dtype=np.float64)
    except OSError as exc:
        raise ImageFormatError(f"unreadable file: {path}: {exc}") from exc
    return LdrImage(data / 255.0)


# ---------------------------------------------------------------------------
# Stereo composites
# ---------------------------------------------------------------------------

def compose_stereo(pair: BinocularPair, mode: str = "side_by_side") -> LdrImage:
    """Flatten a view pair for mono display: side_by_side or red/cyan anaglyph."""
    left, right = pair.left.pixels, pair.right.pixels
    if mode == "side_by_side":
        return LdrImage(np.concatenate([left, right], axis=1))
    if mode == "anaglyph":
        out = right.copy()
        out[..., 0] = luminance(pair.left)
        return LdrImage(out)
    raise ValueError(f"unsupported stereo mode: {mode!r}")
