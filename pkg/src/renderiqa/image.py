"""Grayscale image loading and the windowed-statistics primitives.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]`` with
nominal intensities in ``[0, 255]``.  Every windowed operation pads with
symmetric reflection (the edge pixel is repeated), so constant images stay
exactly constant up to the border.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "ImageError",
    "ImageFormatError",
    "DimensionMismatchError",
    "Kernel",
    "as_gray",
    "load_image",
    "save_image",
    "to_grayscale",
    "gaussian_kernel",
    "convolve_same",
    "local_moments",
    "local_moments_pair",
    "downsample2x",
    "validate_pair",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageError(ValueError):
    """Invalid image contents or arguments to an image primitive."""


class ImageFormatError(ImageError):
    """A file could not be decoded as a supported 8-bit image."""

    def __init__(self, path, cause):
        self.path = str(path)
        self.cause = str(cause)
        super().__init__(f"{self.path}: {self.cause}")


class DimensionMismatchError(ImageError):
    def __init__(self, shape_a, shape_b):
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        (ha, wa), (hb, wb) = self.shape_a, self.shape_b
        super().__init__(f"image dimensions differ: {wa}x{ha} vs {wb}x{hb}")


@dataclass(frozen=True)
class Kernel:
    """Square, odd-sized, normalized weight grid."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] % 2 == 0:
            raise ImageError(f"kernel must be square with odd size, got shape {w.shape}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ImageError(f"kernel weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def radius(self) -> int:
        return self.size // 2


def as_gray(data) -> np.ndarray:
    """Validate and convert ``data`` into an immutable 2-D float64 image."""
    img = np.array(data, dtype=np.float64)
    if img.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale array, got {img.ndim} dimensions")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ImageError("image must be at least 1x1")
    if not np.all(np.isfinite(img)):
        raise ImageError("image contains non-finite values")
    img.setflags(write=False)
    return img


def to_grayscale(r, g, b):
    """BT.601 luma; works on scalars or arrays and is not rounded."""
    wr, wg, wb = LUMA_WEIGHTS
    return wr * np.asarray(r, dtype=np.float64) + wg * np.asarray(g, dtype=np.float64) \
        + wb * np.asarray(b, dtype=np.float64)


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG or binary PGM/PPM as a grayscale float image.

    RGB (and palette) images go through :func:`to_grayscale`.  Any decoding
    problem, unsupported mode or bit depth raises :class:`ImageFormatError`
    carrying the path and the cause.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "PPM"):
                raise ImageFormatError(path, f"unsupported format {im.format!r}")
            im.load()
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.float64)
            elif im.mode == "RGB":
                rgb = np.asarray(im, dtype=np.float64)
                arr = to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
            else:
                raise ImageFormatError(path, f"unsupported mode {im.mode!r} (need 8-bit gray or RGB)")
    except ImageFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(path, exc) from exc
    return as_gray(arr)


def save_image(img, path) -> None:
    """Write an image rounded to 8 bits; format follows the suffix (.png/.pgm)."""
    path = Path(path)
    suffix = path.suffix.lower()
    fmt = {".png": "PNG", ".pgm": "PPM"}.get(suffix)
    if fmt is None:
        raise ImageError(f"cannot write {path}: use a .png or .pgm suffix")
    data = np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format=fmt)


def gaussian_kernel(size: int, sigma: float) -> Kernel:
    if size < 1 or size % 2 == 0:
        raise ImageError(f"kernel size must be odd and >= 1, got {size}")
    if not sigma > 0:
        raise ImageError(f"sigma must be positive, got {sigma}")
    r = size // 2
    with np.errstate(over="ignore"):  # tiny sigma: off-centre taps -> 0
        z = np.arange(-r, r + 1, dtype=np.float64) / sigma
        g = np.exp(-0.5 * z * z)
    w = np.outer(g, g)
    return Kernel(w / w.sum())


def _padded(img: np.ndarray, k: Kernel) -> np.ndarray:
    h, w = img.shape
    if k.size > min(h, w):
        raise ImageError(f"kernel size {k.size} exceeds image size {w}x{h}")
    return np.pad(img, k.radius, mode="symmetric")


def _shifts(img: np.ndarray, k: Kernel):
    """Yield (weight, shifted view) for every kernel tap."""
    h, w = img.shape
    padded = _padded(img, k)
    for du in range(k.size):
        for dv in range(k.size):
            yield k.weights[du, dv], padded[du:du + h, dv:dv + w]


def convolve_same(img, k: Kernel) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    out = np.zeros_like(img)
    for wt, view in _shifts(img, k):
        out += wt * view
    return out


def local_moments(img, k: Kernel):
    """Kernel-weighted local mean and (population) variance at every pixel.

    Works on deviations from the centre pixel, so flat neighbourhoods give
    exactly ``mean == img`` and ``var == 0``.
    """
    img = np.asarray(img, dtype=np.float64)
    offset = np.zeros_like(img)
    for wt, view in _shifts(img, k):
        offset += wt * (view - img)
    var = np.zeros_like(img)
    for wt, view in _shifts(img, k):
        e = (view - img) - offset
        var += wt * e * e
    return img + offset, var


def local_moments_pair(x, y, k: Kernel):
    """Local means, variances and covariance of two images (population form).

    Symmetric in ``x`` and ``y`` bit for bit, and ``x is y`` yields
    ``vx == vy == cxy`` exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ox = np.zeros_like(x)
    oy = np.zeros_like(y)
    for (wt, a), (_, b) in zip(_shifts(x, k), _shifts(y, k)):
        ox += wt * (a - x)
        oy += wt * (b - y)
    vx = np.zeros_like(x)
    vy = np.zeros_like(y)
    cxy = np.zeros_like(x)
    for (wt, a), (_, b) in zip(_shifts(x, k), _shifts(y, k)):
        ea = (a - x) - ox
        eb = (b - y) - oy
        vx += wt * ea * ea
        vy += wt * eb * eb
        cxy += wt * ea * eb
    return x + ox, y + oy, vx, vy, cxy


def downsample2x(img) -> np.ndarray:
    """Average non-overlapping 2x2 blocks; an odd last row/column is dropped."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if h < 2 or w < 2:
        raise ImageError(f"image {w}x{h} is too small to downsample")
    c = img[: h - h % 2, : w - w % 2]
    return ((c[0::2, 0::2] + c[0::2, 1::2]) + (c[1::2, 0::2] + c[1::2, 1::2])) / 4.0


def validate_pair(a, b) -> None:
    sa, sb = np.shape(a), np.shape(b)
    if sa != sb:
        raise DimensionMismatchError(sa, sb)
