"""Confidence comparison of externally produced detections across render modes.

Detection files are JSON::

    {"detector": "yolov8n", "perspective": "close_up", "render_mode": "real_time",
     "detections": [{"class": "person", "confidence": 0.71},
                    {"class": "car", "below_threshold": 0.25}]}

A ``below_threshold`` record means the detector only reported the object
under the given cut-off; it is kept as a bound and never turned into a number.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "DetectionError",
    "Detection",
    "DetectionSet",
    "Cell",
    "DeltaRow",
    "load_detections",
    "parse_detections",
    "confidence_delta_table",
    "table_csv",
    "table_text",
]

PERSPECTIVES = ("close_up", "long_distance")
RENDER_MODES = ("real_time", "offline")


class DetectionError(ValueError):
    pass


@dataclass(frozen=True)
class Detection:
    label: str
    confidence: float | None = None
    below_threshold: float | None = None

    def __post_init__(self):
        if (self.confidence is None) == (self.below_threshold is None):
            raise DetectionError(f"{self.label!r}: give exactly one of confidence or below_threshold")
        value = self.confidence if self.confidence is not None else self.below_threshold
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise DetectionError(f"{self.label!r}: confidence {value!r} outside [0, 1]")


@dataclass(frozen=True)
class DetectionSet:
    detector: str
    perspective: str
    render_mode: str
    records: tuple[Detection, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.perspective not in PERSPECTIVES:
            raise DetectionError(f"perspective must be one of {PERSPECTIVES}, got {self.perspective!r}")
        if self.render_mode not in RENDER_MODES:
            raise DetectionError(f"render_mode must be one of {RENDER_MODES}, got {self.render_mode!r}")

    def per_class(self) -> dict[str, "Cell"]:
        """One cell per class: the highest confidence, else the loosest bound."""
        cells: dict[str, Cell] = {}
        for label in dict.fromkeys(r.label for r in self.records):
            recs = [r for r in self.records if r.label == label]
            scores = [r.confidence for r in recs if r.confidence is not None]
            if scores:
                cells[label] = Cell(value=max(scores))
            else:
                cells[label] = Cell(bound=max(r.below_threshold for r in recs))
        return cells

    def to_dict(self) -> dict:
        dets = []
        for r in self.records:
            if r.confidence is not None:
                dets.append({"class": r.label, "confidence": r.confidence})
            else:
                dets.append({"class": r.label, "below_threshold": r.below_threshold})
        return {"detector": self.detector, "perspective": self.perspective,
                "render_mode": self.render_mode, "detections": dets}


def parse_detections(doc, source: str = "<data>") -> DetectionSet:
    if not isinstance(doc, dict):
        raise DetectionError(f"{source}: top level must be an object")
    try:
        dets = doc["detections"]
        if not isinstance(dets, list):
            raise DetectionError(f"{source}: 'detections' must be a list")
        records = []
        for d in dets:
            if not isinstance(d, dict) or "class" not in d:
                raise DetectionError(f"{source}: each detection needs a 'class'")
            records.append(Detection(str(d["class"]), d.get("confidence"), d.get("below_threshold")))
        return DetectionSet(str(doc["detector"]), doc["perspective"], doc["render_mode"], tuple(records))
    except KeyError as exc:
        raise DetectionError(f"{source}: missing field {exc}") from exc
    except DetectionError as exc:
        if str(exc).startswith(source):
            raise
        raise DetectionError(f"{source}: {exc}") from exc


def load_detections(path) -> DetectionSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DetectionError(f"{path}: {exc}") from exc
    return parse_detections(doc, str(path))


@dataclass(frozen=True)
class Cell:
    """A per-class confidence: a value, a ``< bound`` marker, or missing."""

    value: float | None = None
    bound: float | None = None

    @property
    def missing(self) -> bool:
        return self.value is None and self.bound is None

    def render(self) -> str:
        if self.value is not None:
            return _pct(self.value)
        if self.bound is not None:
            return "<" + _pct(self.bound)
        return "missing"


def _pct(x: float) -> str:
    return f"{round(100.0 * x, 9):.1f}"


@dataclass(frozen=True)
class DeltaRow:
    label: str
    real_time: Cell
    offline: Cell
    delta: float | None  # offline minus real-time, percentage points
    note: str = ""  # bound such as ">+17.0" when only a bound is known

    def render_delta(self) -> str:
        if self.delta is not None:
            return f"{self.delta:+.1f}"
        return self.note or "n/a"


def _delta(rt: Cell, off: Cell) -> tuple[float | None, str]:
    if rt.value is not None and off.value is not None:
        return round(100.0 * off.value - 100.0 * rt.value, 9), ""
    if rt.missing or off.missing:
        return None, "n/a"
    if rt.bound is not None and off.value is not None:
        # real-time < bound, so the gain is at least off - bound
        return None, f">{round(100.0 * off.value - 100.0 * rt.bound, 9):+.1f}"
    if rt.value is not None and off.bound is not None:
        return None, f"<{round(100.0 * off.bound - 100.0 * rt.value, 9):+.1f}"
    return None, "n/a"


def confidence_delta_table(rt: DetectionSet, off: DetectionSet) -> list[DeltaRow]:
    """Per-class confidence change from the real-time to the offline render."""
    if rt.detector != off.detector:
        raise DetectionError(f"detector mismatch: {rt.detector!r} vs {off.detector!r}")
    if rt.perspective != off.perspective:
        raise DetectionError(f"perspective mismatch: {rt.perspective!r} vs {off.perspective!r}")
    a, b = rt.per_class(), off.per_class()
    rows = []
    for label in dict.fromkeys(list(a) + list(b)):
        ca, cb = a.get(label, Cell()), b.get(label, Cell())
        delta, note = _delta(ca, cb)
        rows.append(DeltaRow(label, ca, cb, delta, note))
    return rows


def table_csv(rows: list[DeltaRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "rt", "off", "delta"])
    for r in rows:
        w.writerow([r.label, r.real_time.render(), r.offline.render(), r.render_delta()])
    return buf.getvalue()


def table_text(rows: list[DeltaRow], title: str = "") -> str:
    header = ("class", "real-time %", "offline %", "delta pp")
    body = [(r.label, r.real_time.render(), r.offline.render(), r.render_delta()) for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = [title] if title else []
    fmt = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)  # noqa: E731
                                  for i, (c, w) in enumerate(zip(cells, widths)))
    lines.append(fmt(header))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend(fmt(b) for b in body)
    return "\n".join(lines) + "\n"
