"""No-reference NIQE: MSCN features, pristine Gaussian model, quality score.

Typical use::

    model = train_model([load_image(p) for p in pristine_paths])
    save_model(model, "pristine.json")
    score = niqe_score(load_image("render.png"), load_model("pristine.json"))
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import ImageError, downsample2x, gaussian_kernel, local_moments
from .nss import SHAPE_MAX, DegenerateSamplesError, fit_aggd, fit_ggd

__all__ = [
    "NiqeError",
    "ParameterMismatchError",
    "NiqeParams",
    "MscnField",
    "NiqeModel",
    "FEATURE_DIM",
    "mscn",
    "block_features",
    "extract_features",
    "select_sharp",
    "train_model",
    "model_from_vectors",
    "score_features",
    "niqe_score",
    "save_model",
    "load_model",
    "METRICS",
    "normalize_metric",
]

MODEL_VERSION = 1
FEATURES_PER_SCALE = 18
FEATURE_DIM = 2 * FEATURES_PER_SCALE
REGULARIZATION_EPS = 1e-6
METRICS = ("paper_eq7", "canonical")


class NiqeError(ValueError):
    pass


class ParameterMismatchError(NiqeError):
    pass


@dataclass(frozen=True)
class NiqeParams:
    patch_size: int = 96
    sharpness_fraction: float = 0.75
    stabilizer: float = 1.0
    window_size: int = 7
    window_sigma: float = 7.0 / 6.0
    scales: int = 2

    def __post_init__(self):
        if self.scales != 2:
            raise NiqeError(f"only 2 feature scales are supported, got {self.scales}")
        if self.patch_size < 2 or self.patch_size % 2:
            raise NiqeError(f"patch_size must be even and >= 2, got {self.patch_size}")
        if self.patch_size // 2 < 2:
            raise NiqeError("half-scale patch must be at least 2x2")
        if not 0 < self.sharpness_fraction <= 1:
            raise NiqeError("sharpness_fraction must lie in (0, 1]")
        if not self.stabilizer > 0:
            raise NiqeError("stabilizer must be positive")
        if self.window_size < 1 or self.window_size % 2 == 0 or not self.window_sigma > 0:
            raise NiqeError("window needs an odd size and positive sigma")

    def to_dict(self) -> dict:
        return {
            "patch_size": self.patch_size,
            "sharpness_fraction": self.sharpness_fraction,
            "stabilizer": self.stabilizer,
            "window": {"size": self.window_size, "sigma": self.window_sigma},
            "scales": self.scales,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NiqeParams":
        try:
            return cls(
                patch_size=int(d["patch_size"]),
                sharpness_fraction=float(d["sharpness_fraction"]),
                stabilizer=float(d["stabilizer"]),
                window_size=int(d["window"]["size"]),
                window_sigma=float(d["window"]["sigma"]),
                scales=int(d["scales"]),
            )
        except (KeyError, TypeError) as exc:
            raise NiqeError(f"malformed NIQE params: missing or invalid {exc}") from exc


@dataclass(frozen=True)
class MscnField:
    coefficients: np.ndarray
    local_sigma: np.ndarray


def mscn(img, params: NiqeParams | None = None) -> MscnField:
    """Mean-subtracted, contrast-normalized coefficients of ``img``."""
    p = params or NiqeParams()
    img = np.asarray(img, dtype=np.float64)
    if min(img.shape) < p.window_size:
        raise ImageError(
            f"image {img.shape[1]}x{img.shape[0]} is smaller than the "
            f"{p.window_size}x{p.window_size} MSCN window"
        )
    mu, var = local_moments(img, gaussian_kernel(p.window_size, p.window_sigma))
    sigma = np.sqrt(var)
    return MscnField((img - mu) / (sigma + p.stabilizer), sigma)


def _orientation_products(c: np.ndarray):
    # horizontal, vertical, main diagonal, anti-diagonal neighbours
    return (
        c[:, :-1] * c[:, 1:],
        c[:-1, :] * c[1:, :],
        c[:-1, :-1] * c[1:, 1:],
        c[:-1, 1:] * c[1:, :-1],
    )


def block_features(coeffs: np.ndarray) -> list[float]:
    """The 18 per-scale features of one block of MSCN coefficients.

    Degenerate (flat) inputs fall back to the grid's maximum shape and zero
    spread instead of failing.
    """
    try:
        feats = list(fit_ggd(coeffs))
    except DegenerateSamplesError:
        feats = [SHAPE_MAX, 0.0]
    for prod in _orientation_products(coeffs):
        try:
            feats.extend(fit_aggd(prod))
        except DegenerateSamplesError:
            feats.extend([SHAPE_MAX, 0.0, 0.0, 0.0])
    return feats


def extract_features(img, params: NiqeParams | None = None) -> list[tuple[np.ndarray, float]]:
    """Split ``img`` into non-overlapping patches; return (features, sharpness) per patch.

    Patches are taken in row-major order; leftover rows/columns that do not
    fill a whole patch are ignored.
    """
    p = params or NiqeParams()
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    ps = p.patch_size
    if h < ps or w < ps:
        raise NiqeError(f"image {w}x{h} is smaller than one {ps}x{ps} patch")

    full = mscn(img, p)
    half = mscn(downsample2x(img), p)
    hs = ps // 2
    out = []
    for bi in range(h // ps):
        for bj in range(w // ps):
            c1 = full.coefficients[bi * ps:(bi + 1) * ps, bj * ps:(bj + 1) * ps]
            c2 = half.coefficients[bi * hs:(bi + 1) * hs, bj * hs:(bj + 1) * hs]
            sharp = float(full.local_sigma[bi * ps:(bi + 1) * ps, bj * ps:(bj + 1) * ps].mean())
            vec = np.array(block_features(c1) + block_features(c2))
            out.append((vec, sharp))
    return out


def select_sharp(blocks, fraction: float = 0.75) -> list[np.ndarray]:
    """Keep blocks sharper than ``fraction`` of the sharpest one.

    Blocks tied with the maximum are always kept, so the result is never
    empty.
    """
    if not blocks:
        raise NiqeError("no blocks to select from")
    top = max(s for _, s in blocks)
    return [v for v, s in blocks if s > fraction * top or s == top]


@dataclass(frozen=True)
class NiqeModel:
    mean: np.ndarray
    covariance: np.ndarray
    params: NiqeParams = field(default_factory=NiqeParams)

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mu.shape != (FEATURE_DIM,) or cov.shape != (FEATURE_DIM, FEATURE_DIM):
            raise NiqeError(f"model must have a {FEATURE_DIM}-vector mean and square covariance")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-10):
            raise NiqeError("model covariance is not symmetric")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)


def _regularized_cov(vectors: np.ndarray) -> np.ndarray:
    cov = np.cov(vectors, rowvar=False, ddof=1)
    cov = (cov + cov.T) / 2.0
    trace = float(np.trace(cov))
    if trace <= 0:
        raise NiqeError("feature vectors have zero spread (degenerate corpus)")
    floor = REGULARIZATION_EPS * trace / cov.shape[0]
    if np.linalg.eigvalsh(cov)[0] < floor:
        cov = cov + floor * np.eye(cov.shape[0])
    return cov


def train_model(corpus, params: NiqeParams | None = None) -> NiqeModel:
    """Fit the pristine multivariate Gaussian to the sharp patches of ``corpus``."""
    p = params or NiqeParams()
    selected = []
    for img in corpus:
        selected.extend(select_sharp(extract_features(img, p), p.sharpness_fraction))
    return model_from_vectors(selected, p)


def model_from_vectors(vectors, params: NiqeParams | None = None) -> NiqeModel:
    vecs = np.asarray(vectors, dtype=np.float64)
    if vecs.ndim != 2 or vecs.shape[0] < 2:
        raise NiqeError(f"need at least 2 feature vectors to train, got {len(vecs)}")
    if np.all(vecs == vecs[0]):
        raise NiqeError("all feature vectors are identical (degenerate corpus)")
    return NiqeModel(vecs.mean(axis=0), _regularized_cov(vecs), params or NiqeParams())


def normalize_metric(metric: str) -> str:
    aliases = {"paper": "paper_eq7", "paper_eq7": "paper_eq7", "canonical": "canonical"}
    try:
        return aliases[metric]
    except KeyError:
        raise NiqeError(f"unknown NIQE metric {metric!r}; use one of {sorted(aliases)}") from None


def score_features(vectors, model: NiqeModel, metric: str = "paper_eq7") -> float:
    """Distance of test feature vectors from the pristine model.

    ``paper_eq7`` averages, over blocks, the squared distance to the model
    mean with each dimension scaled by its model variance.  ``canonical``
    fits a Gaussian to the test vectors and returns the Mahalanobis distance
    between the two means under the pooled covariance.
    """
    metric = normalize_metric(metric)
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise NiqeError("no feature vectors to score")
    if metric == "paper_eq7":
        var = np.diag(model.covariance)
        d = x - model.mean
        return float(np.mean(np.sum(d * d / var, axis=1)))

    if x.shape[0] < 2:
        raise NiqeError("canonical NIQE needs at least 2 test blocks")
    test_cov = np.cov(x, rowvar=False, ddof=1)
    pooled = (model.covariance + test_cov) / 2.0
    diff = model.mean - x.mean(axis=0)
    try:
        chol = np.linalg.cholesky(pooled)
    except np.linalg.LinAlgError as exc:
        raise NiqeError("pooled covariance is singular") from exc
    z = np.linalg.solve(chol, diff)
    return float(np.sqrt(z @ z))


def niqe_score(img, model: NiqeModel, metric: str = "paper_eq7",
               params: NiqeParams | None = None) -> float:
    if params is not None and params != model.params:
        raise ParameterMismatchError(
            f"requested params {params.to_dict()} differ from model params {model.params.to_dict()}"
        )
    p = model.params
    return score_features(select_sharp(extract_features(img, p), p.sharpness_fraction), model, metric)


def save_model(model: NiqeModel, path) -> None:
    doc = {
        "version": MODEL_VERSION,
        "params": model.params.to_dict(),
        "mean": model.mean.tolist(),
        "covariance": model.covariance.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path, expected_params: NiqeParams | None = None) -> NiqeModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise NiqeError(f"cannot read NIQE model {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MODEL_VERSION:
        raise NiqeError(f"{path}: unsupported model version {doc.get('version') if isinstance(doc, dict) else None!r}")
    params = NiqeParams.from_dict(doc.get("params", {}))
    if expected_params is not None and params != expected_params:
        raise ParameterMismatchError(f"{path}: model params {params.to_dict()} do not match {expected_params.to_dict()}")
    try:
        return NiqeModel(np.array(doc["mean"], dtype=np.float64), np.array(doc["covariance"], dtype=np.float64), params)
    except (KeyError, ValueError, TypeError) as exc:
        raise NiqeError(f"{path}: malformed model: {exc}") from exc
