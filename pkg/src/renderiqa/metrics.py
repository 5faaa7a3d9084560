"""Full-reference metrics: MSE, PSNR and SSIM with its three components."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .image import ImageError, gaussian_kernel, local_moments_pair, validate_pair

__all__ = ["Flag", "SsimParams", "SsimResult", "mse", "psnr", "ssim"]


class Flag(str, enum.Enum):
    """Non-numeric outcome of a metric."""

    IDENTICAL = "identical"  # zero MSE, PSNR unbounded
    ERROR = "error"


def mse(r, f) -> float:
    """Mean squared error, normalized by the pixel count."""
    validate_pair(r, f)
    d = np.asarray(r, dtype=np.float64) - np.asarray(f, dtype=np.float64)
    return float(np.mean(d * d))


def psnr(r, f, max_p: float = 255.0) -> float | Flag:
    """Peak signal-to-noise ratio in dB, or ``Flag.IDENTICAL`` when MSE is 0."""
    if not max_p > 0:
        raise ValueError(f"max_p must be positive, got {max_p}")
    err = mse(r, f)
    if err == 0.0:
        return Flag.IDENTICAL
    return 20.0 * math.log10(max_p) - 10.0 * math.log10(err)


@dataclass(frozen=True)
class SsimParams:
    dynamic_range: float = 255.0
    k1: float = 0.01
    k2: float = 0.03
    mode: str = "global"
    window_size: int = 11
    window_sigma: float = 1.5

    def __post_init__(self):
        if not self.dynamic_range > 0:
            raise ValueError("dynamic_range must be positive")
        if not (0 < self.k1 < 1 and 0 < self.k2 < 1):
            raise ValueError("k1 and k2 must lie in (0, 1)")
        if self.mode not in ("global", "windowed"):
            raise ValueError(f"unknown SSIM mode {self.mode!r}")
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 1")
        if not self.window_sigma > 0:
            raise ValueError("window_sigma must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    @property
    def c3(self) -> float:
        return self.c2 / 2.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SsimResult:
    ssim: float
    luminance: float
    contrast: float
    structure: float


def _components(mx, my, vx, vy, cxy, p: SsimParams):
    c1, c2, c3 = p.c1, p.c2, p.c3
    sx = np.sqrt(vx)
    sy = np.sqrt(vy)
    lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1)
    con = (2.0 * sx * sy + c2) / (vx + vy + c2)
    stru = (cxy + c3) / (sx * sy + c3)
    # with c3 = c2/2, con*stru collapses to this; computing it directly
    # keeps ssim(x, x) == 1 exactly
    cs = (2.0 * cxy + c2) / (vx + vy + c2)
    # bounded by AM-GM / Cauchy-Schwarz; clip the last-ulp rounding overshoot
    lum = np.minimum(lum, 1.0)
    con = np.minimum(con, 1.0)
    stru = np.clip(stru, -1.0, 1.0)
    cs = np.clip(cs, -1.0, 1.0)
    return lum, con, stru, lum * cs


def ssim(x, y, params: SsimParams | None = None) -> SsimResult:
    """Structural similarity of two same-size grayscale images.

    In ``global`` mode the moments are taken once over the whole image.  In
    ``windowed`` mode they come from a Gaussian window around every pixel and
    the returned values are the means of the per-pixel maps.
    """
    p = params or SsimParams()
    validate_pair(x, y)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.mode == "global":
        mx, my = x.mean(), y.mean()
        dx, dy = x - mx, y - my
        vx = np.mean(dx * dx)
        vy = np.mean(dy * dy)
        cxy = np.mean(dx * dy)
        lum, con, stru, val = _components(mx, my, vx, vy, cxy, p)
        return SsimResult(float(val), float(lum), float(con), float(stru))

    if p.window_size > min(x.shape):
        raise ImageError(
            f"windowed SSIM needs images of at least {p.window_size}x{p.window_size}, got "
            f"{x.shape[1]}x{x.shape[0]}"
        )
    k = gaussian_kernel(p.window_size, p.window_sigma)
    mx, my, vx, vy, cxy = local_moments_pair(x, y, k)
    lum, con, stru, val = _components(mx, my, vx, vy, cxy, p)
    return SsimResult(float(val.mean()), float(lum.mean()), float(con.mean()), float(stru.mean()))
