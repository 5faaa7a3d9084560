"""Moment-matching fits of (asymmetric) generalized Gaussian distributions.

Shape parameters are found by nearest-neighbour lookup in a table of the
generalized Gaussian ratio ``Gamma(2/a)**2 / (Gamma(1/a) * Gamma(3/a))``,
which equals ``E|x|**2 / E[x**2]`` and increases monotonically with ``a``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

__all__ = ["DegenerateSamplesError", "SHAPE_GRID", "fit_ggd", "fit_aggd"]

SHAPE_MIN, SHAPE_MAX, SHAPE_STEP = 0.2, 10.0, 0.001
SHAPE_GRID = np.linspace(SHAPE_MIN, SHAPE_MAX, int(round((SHAPE_MAX - SHAPE_MIN) / SHAPE_STEP)) + 1)
_RATIO_TABLE = np.exp(2.0 * gammaln(2.0 / SHAPE_GRID) - gammaln(1.0 / SHAPE_GRID) - gammaln(3.0 / SHAPE_GRID))


class DegenerateSamplesError(ValueError):
    """Samples carry no spread to fit a shape to."""


def _check(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise DegenerateSamplesError(f"need at least 2 samples, got {x.size}")
    if x.min() == x.max():
        raise DegenerateSamplesError(f"all {x.size} samples equal {x[0]!r}")
    return x


def _shape_from_ratio(rho: float) -> float:
    return float(SHAPE_GRID[np.argmin(np.abs(_RATIO_TABLE - rho))])


def fit_ggd(samples) -> tuple[float, float]:
    """Return ``(shape, variance)`` of a zero-mean generalized Gaussian fit."""
    x = _check(samples)
    second = float(np.mean(x * x))
    rho = float(np.mean(np.abs(x))) ** 2 / second
    return _shape_from_ratio(rho), second


def fit_aggd(samples) -> tuple[float, float, float, float]:
    """Return ``(shape, mean, var_left, var_right)`` of an asymmetric GGD fit.

    ``var_left``/``var_right`` are the one-sided second moments of the
    negative and positive samples (0 when a side is empty).
    """
    x = _check(samples)
    neg = x[x < 0]
    pos = x[x > 0]
    var_left = float(np.mean(neg * neg)) if neg.size else 0.0
    var_right = float(np.mean(pos * pos)) if pos.size else 0.0
    sd_left, sd_right = np.sqrt(var_left), np.sqrt(var_right)

    # the ratio correction is symmetric under gamma -> 1/gamma, so use the
    # smaller-over-larger form to stay finite when one side is empty
    g = min(sd_left, sd_right) / max(sd_left, sd_right)
    second = float(np.mean(x * x))
    rho = float(np.mean(np.abs(x))) ** 2 / second
    rho_norm = rho * (g ** 3 + 1.0) * (g + 1.0) / (g ** 2 + 1.0) ** 2
    shape = _shape_from_ratio(rho_norm)

    scale = np.exp(0.5 * (gammaln(1.0 / shape) - gammaln(3.0 / shape)))
    beta_left, beta_right = sd_left * scale, sd_right * scale
    mean = float((beta_right - beta_left) * np.exp(gammaln(2.0 / shape) - gammaln(1.0 / shape)))
    return shape, mean, var_left, var_right
