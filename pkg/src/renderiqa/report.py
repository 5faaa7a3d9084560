"""Paired-image comparison reports driven by a JSON manifest.

Manifest layout (paths are relative to the manifest file)::

    {"pairs": [{"label": "set 1", "ref": "near_rt.png", "test": "near_off.png"}],
     "metrics": ["psnr", "ssim", "niqe"],
     "ssim": {"mode": "global"},
     "niqe": {"model": "pristine.json", "metric": "paper_eq7"}}
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .image import load_image
from .metrics import Flag, SsimParams, mse, psnr, ssim
from .niqe import NiqeModel, load_model, niqe_score, normalize_metric

__all__ = [
    "ManifestError",
    "METRIC_NAMES",
    "CompareConfig",
    "PairManifest",
    "PairRow",
    "MetricReport",
    "load_manifest",
    "compare_pair",
    "run_manifest",
    "emit",
    "parse_json_report",
]

METRIC_NAMES = ("mse", "psnr", "ssim", "niqe")


class ManifestError(ValueError):
    """Bad manifest or configuration; maps to exit status 2."""


@dataclass(frozen=True)
class CompareConfig:
    metrics: tuple[str, ...] = ("mse", "psnr", "ssim")
    ssim: SsimParams = field(default_factory=SsimParams)
    niqe_model: NiqeModel | None = None
    niqe_model_path: str | None = None
    niqe_metric: str = "paper_eq7"
    niqe_test_only: bool = False
    ref_mode: str = "RealTime"
    test_mode: str = "Offline"

    def __post_init__(self):
        unknown = [m for m in self.metrics if m not in METRIC_NAMES]
        if unknown or not self.metrics:
            raise ManifestError(f"metrics must be a nonempty subset of {METRIC_NAMES}, got {list(self.metrics)}")
        if "niqe" in self.metrics and self.niqe_model is None:
            raise ManifestError("niqe requested but no NIQE model given")
        try:
            object.__setattr__(self, "niqe_metric", normalize_metric(self.niqe_metric))
        except ValueError as exc:
            raise ManifestError(str(exc)) from exc

    @property
    def columns(self) -> list[str]:
        cols = [m for m in METRIC_NAMES[:3] if m in self.metrics]
        if "niqe" in self.metrics:
            cols += ["niqe_test"] if self.niqe_test_only else ["niqe_ref", "niqe_test"]
        return cols

    def echo(self) -> dict:
        out = {"metrics": list(self.metrics), "columns": self.columns}
        if "ssim" in self.metrics:
            out["ssim"] = self.ssim.to_dict()
        if "niqe" in self.metrics:
            out["niqe"] = {
                "model": self.niqe_model_path,
                "metric": self.niqe_metric,
                "test_only": self.niqe_test_only,
                "params": self.niqe_model.params.to_dict(),
            }
        out["render_modes"] = {"ref": self.ref_mode, "test": self.test_mode}
        return out


@dataclass(frozen=True)
class PairManifest:
    pairs: tuple[tuple[str, Path, Path], ...]
    config: CompareConfig


@dataclass
class PairRow:
    label: str
    values: dict  # column -> float | Flag
    errors: dict = field(default_factory=dict)  # column or "pair" -> message

    @property
    def failed(self) -> bool:
        return bool(self.errors)


@dataclass
class MetricReport:
    columns: list[str]
    rows: list[PairRow]
    config: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(r.failed for r in self.rows)

    def aggregates(self) -> dict:
        out = {}
        for col in self.columns:
            nums = [r.values[col] for r in self.rows if not isinstance(r.values.get(col), Flag)]
            out[col] = {
                "mean": math.fsum(nums) / len(nums) if nums else None,
                "count": len(nums),
                "flagged": len(self.rows) - len(nums),
            }
        return out

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "rows": [
                {
                    "label": r.label,
                    "values": {c: _encode_value(r.values[c]) for c in self.columns},
                    "errors": dict(r.errors),
                }
                for r in self.rows
            ],
            "aggregate": self.aggregates(),
            "config": self.config,
        }


def _encode_value(v):
    return {"flag": v.value} if isinstance(v, Flag) else v


def _decode_value(v):
    return Flag(v["flag"]) if isinstance(v, dict) else float(v)


def parse_json_report(text: str) -> MetricReport:
    doc = json.loads(text)
    rows = [PairRow(r["label"], {c: _decode_value(v) for c, v in r["values"].items()}, dict(r["errors"]))
            for r in doc["rows"]]
    return MetricReport(list(doc["columns"]), rows, doc.get("config", {}))


def _niqe(img, cfg: CompareConfig) -> float:
    return niqe_score(img, cfg.niqe_model, cfg.niqe_metric)


def compare_pair(ref, test, config: CompareConfig, label: str = "") -> PairRow:
    """Evaluate every configured metric on one pair; failures become flags."""
    values, errors = {}, {}

    def run(col, fn):
        try:
            values[col] = fn()
        except (ValueError, ArithmeticError) as exc:
            values[col] = Flag.ERROR
            errors[col] = str(exc)

    if "mse" in config.metrics:
        run("mse", lambda: mse(ref, test))
    if "psnr" in config.metrics:
        run("psnr", lambda: psnr(ref, test))
    if "ssim" in config.metrics:
        run("ssim", lambda: ssim(ref, test, config.ssim).ssim)
    if "niqe" in config.metrics:
        if not config.niqe_test_only:
            run("niqe_ref", lambda: _niqe(ref, config))
        run("niqe_test", lambda: _niqe(test, config))
    return PairRow(label, values, errors)


def _ssim_params(d) -> SsimParams:
    if d is None:
        return SsimParams()
    if not isinstance(d, dict):
        raise ManifestError("'ssim' must be an object")
    allowed = {"dynamic_range", "k1", "k2", "mode", "window_size", "window_sigma"}
    extra = set(d) - allowed
    if extra:
        raise ManifestError(f"unknown ssim settings {sorted(extra)}")
    try:
        return SsimParams(**d)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"bad ssim settings: {exc}") from exc


def load_manifest(path) -> PairManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    base = path.parent
    raw_pairs = doc.get("pairs")
    if not isinstance(raw_pairs, list) or not raw_pairs:
        raise ManifestError(f"{path}: 'pairs' must be a nonempty list")
    pairs = []
    for i, p in enumerate(raw_pairs):
        if not isinstance(p, dict) or not {"ref", "test"} <= set(p):
            raise ManifestError(f"{path}: pair {i} needs 'ref' and 'test'")
        pairs.append((str(p.get("label", f"pair{i + 1}")), base / p["ref"], base / p["test"]))

    metrics = tuple(doc.get("metrics", ["mse", "psnr", "ssim"]))
    niqe = doc.get("niqe") or {}
    model = model_path = None
    if "niqe" in metrics:
        if "model" not in niqe:
            raise ManifestError(f"{path}: niqe selected but niqe.model is missing")
        model_path = base / niqe["model"]
        try:
            model = load_model(model_path)
        except ValueError as exc:
            raise ManifestError(str(exc)) from exc
    modes = doc.get("render_modes") or {}
    config = CompareConfig(
        metrics=metrics,
        ssim=_ssim_params(doc.get("ssim")),
        niqe_model=model,
        niqe_model_path=str(niqe.get("model")) if model_path else None,
        niqe_metric=niqe.get("metric", "paper_eq7"),
        niqe_test_only=bool(niqe.get("test_only", False)),
        ref_mode=modes.get("ref", "RealTime"),
        test_mode=modes.get("test", "Offline"),
    )
    return PairManifest(tuple(pairs), config)


def _run_one(label, ref_path, test_path, config: CompareConfig) -> PairRow:
    try:
        ref = load_image(ref_path)
        test = load_image(test_path)
    except (OSError, ValueError) as exc:
        cols = config.columns
        return PairRow(label, {c: Flag.ERROR for c in cols}, {"pair": str(exc)})
    return compare_pair(ref, test, config, label)


def run_manifest(manifest: PairManifest, jobs: int = 1) -> MetricReport:
    """Evaluate all pairs; rows keep manifest order whatever ``jobs`` is."""
    cfg = manifest.config
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: _run_one(*p, cfg), manifest.pairs))
    else:
        rows = [_run_one(*p, cfg) for p in manifest.pairs]
    return MetricReport(cfg.columns, rows, cfg.echo())


def _csv_cell(v) -> str:
    if v is Flag.IDENTICAL:
        return "inf"
    if isinstance(v, Flag):
        return "n/a"
    return repr(float(v))


def _text_cell(v) -> str:
    if v is Flag.IDENTICAL:
        return "inf"
    if isinstance(v, Flag):
        return "n/a"
    return f"{v:.4f}"


def _table(title: str, header: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    line = lambda cells: " | ".join(c.ljust(w) for c, w in zip(cells, widths))  # noqa: E731
    return [title, line(header), "-+-".join("-" * w for w in widths), *map(line, body), ""]


def _text(report: MetricReport) -> str:
    labels = [r.label for r in report.rows]
    out = []
    titles = {"mse": "The results in MSE.", "psnr": "The results in PSNR.", "ssim": "The results in SSIM."}
    for col in ("mse", "psnr", "ssim"):
        if col in report.columns:
            body = [[col.upper()] + [_text_cell(r.values[col]) for r in report.rows]]
            out += _table(titles[col], [""] + labels, body)
    if any(c.startswith("niqe") for c in report.columns):
        modes = report.config.get("render_modes", {"ref": "RealTime", "test": "Offline"})
        body = []
        for col, mode in (("niqe_ref", modes["ref"]), ("niqe_test", modes["test"])):
            if col in report.columns:
                body.append([mode] + [_text_cell(r.values[col]) for r in report.rows])
        out += _table("The results in NIQE.", ["NIQE"] + labels, body)
    errs = [(r.label, k, v) for r in report.rows for k, v in r.errors.items()]
    if errs:
        out.append("Errors:")
        out += [f"  {lab} [{k}]: {msg}" for lab, k, msg in errs]
        out.append("")
    return "\n".join(out)


def emit(report: MetricReport, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", *report.columns])
        for r in report.rows:
            w.writerow([r.label, *(_csv_cell(r.values[c]) for c in report.columns)])
        return buf.getvalue()
    if fmt == "text":
        return _text(report)
    raise ValueError(f"unknown report format {fmt!r}")
