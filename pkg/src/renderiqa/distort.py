"""Deterministic synthetic degradations and pristine test scenes.

Random numbers come from numpy's PCG64 bit generator (uniform doubles only)
and normal variates are produced here with the Box-Muller transform, so a
seed reproduces the same pixels on any platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import as_gray, convolve_same, gaussian_kernel

__all__ = ["DistortionSpec", "KINDS", "apply", "normal_variates", "dead_leaves"]

KINDS = ("gaussian_noise", "gaussian_blur", "quantize")
_ALIASES = {"noise": "gaussian_noise", "blur": "gaussian_blur"}


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    strength: float
    seed: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not math.isfinite(self.strength):
            raise ValueError("strength must be finite")
        if kind == "quantize":
            if self.strength != int(self.strength) or not 2 <= self.strength <= 256:
                raise ValueError(f"quantize levels must be an integer in [2, 256], got {self.strength}")
        elif self.strength < 0:
            raise ValueError(f"{kind} strength must be >= 0, got {self.strength}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def normal_variates(n: int, seed: int) -> np.ndarray:
    """``n`` standard normal draws via Box-Muller on PCG64 uniforms."""
    m = (n + 1) // 2
    u = np.random.Generator(np.random.PCG64(seed)).random(2 * m)
    u1 = 1.0 - u[:m]  # (0, 1], keeps log finite
    u2 = u[m:]
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = rad * np.cos(2.0 * np.pi * u2)
    z[1::2] = rad * np.sin(2.0 * np.pi * u2)
    return z[:n]


def apply(img, spec: DistortionSpec) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if spec.kind == "gaussian_noise":
        if spec.strength == 0:
            return as_gray(img)
        noise = normal_variates(img.size, spec.seed).reshape(img.shape)
        return as_gray(np.clip(img + spec.strength * noise, 0.0, 255.0))
    if spec.kind == "gaussian_blur":
        if spec.strength == 0:
            return as_gray(img)
        sigma = spec.strength
        return as_gray(convolve_same(img, gaussian_kernel(2 * math.ceil(3 * sigma) + 1, sigma)))
    steps = int(spec.strength) - 1
    # round half up, not numpy's half-to-even
    q = np.floor(img * steps / 255.0 + 0.5)
    return as_gray(np.clip(np.floor(q * 255.0 / steps + 0.5), 0.0, 255.0))


def dead_leaves(size: int = 288, seed: int = 0, n_shapes: int = 3000) -> np.ndarray:
    """Occluding-disc scene with power-law radii, mild shading and texture.

    Used as a stand-in for undistorted photographs: it has sharp edges,
    smooth regions and scale-invariant structure, all of which keep its
    MSCN statistics close to those of natural images.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), rng.uniform(40, 215))
    rmin, rmax = 2.0, size / 4.0
    # radii ~ r^-3 by inverse CDF
    u = rng.random(n_shapes)
    radii = 1.0 / np.sqrt(u * (rmax ** -2) + (1 - u) * (rmin ** -2))
    cx = rng.uniform(-rmax, size + rmax, n_shapes)
    cy = rng.uniform(-rmax, size + rmax, n_shapes)
    tone = rng.uniform(20, 235, n_shapes)
    gx = rng.normal(0, 0.6, n_shapes)
    gy = rng.normal(0, 0.6, n_shapes)
    for r, x0, y0, t, ax, ay in zip(radii, cx, cy, tone, gx, gy):
        r0, r1 = max(int(y0 - r), 0), min(int(y0 + r) + 2, size)
        c0, c1 = max(int(x0 - r), 0), min(int(x0 + r) + 2, size)
        if r0 >= r1 or c0 >= c1:
            continue
        bx, by, patch = xx[r0:r1, c0:c1], yy[r0:r1, c0:c1], img[r0:r1, c0:c1]
        mask = (bx - x0) ** 2 + (by - y0) ** 2 <= r * r
        patch[mask] = t + ax * (bx[mask] - x0) + ay * (by[mask] - y0)

    # 1/f texture, a few grey levels in amplitude
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    f = np.hypot(fx, fy)
    f[0, 0] = 1.0
    spectrum = (rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))) / f
    spectrum[0, 0] = 0.0
    tex = np.real(np.fft.ifft2(spectrum))
    img = img + 4.0 * tex / tex.std()

    img = convolve_same(img, gaussian_kernel(3, 0.6))
    return as_gray(np.clip(np.floor(img + 0.5), 0.0, 255.0))
