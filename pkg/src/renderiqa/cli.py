"""Command line entry point: ``iqa <subcommand>``.

Exit status: 0 on success, 1 when any pair failed, 2 for usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .detections import DetectionError, confidence_delta_table, load_detections, table_csv, table_text
from .distort import DistortionSpec, apply
from .image import ImageError, load_image, save_image
from .metrics import SsimParams
from .niqe import NiqeError, load_model, save_model, train_model
from .report import CompareConfig, ManifestError, MetricReport, compare_pair, emit, load_manifest, run_manifest

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
IMAGE_SUFFIXES = {".png", ".pgm", ".ppm"}


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _metric_list(s: str) -> tuple[str, ...]:
    return tuple(m.strip() for m in s.split(",") if m.strip())


def cmd_compare(args) -> int:
    model = load_model(args.niqe_model) if args.niqe_model else None
    config = CompareConfig(
        metrics=_metric_list(args.metrics),
        ssim=SsimParams(mode=args.ssim_mode),
        niqe_model=model,
        niqe_model_path=args.niqe_model,
        niqe_metric=args.niqe_metric,
        niqe_test_only=args.niqe_test_only,
    )
    try:
        ref, test = load_image(args.ref), load_image(args.test)
    except ImageError as exc:
        print(f"iqa: {exc}", file=sys.stderr)
        return EXIT_FAILED
    row = compare_pair(ref, test, config, label=args.label)
    report = MetricReport(config.columns, [row], config.echo())
    _write(emit(report, args.format), args.out)
    return EXIT_FAILED if report.failed else EXIT_OK


def cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    report = run_manifest(manifest, jobs=args.jobs)
    _write(emit(report, args.format), args.out)
    for r in report.rows:
        for key, msg in r.errors.items():
            print(f"iqa: {r.label} [{key}]: {msg}", file=sys.stderr)
    return EXIT_FAILED if report.failed else EXIT_OK


def cmd_train_niqe(args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise ManifestError(f"corpus directory {corpus_dir} does not exist")
    paths = sorted(p for p in corpus_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise ManifestError(f"no PNG/PGM/PPM images in {corpus_dir}")
    model = train_model([load_image(p) for p in paths])
    save_model(model, args.out)
    print(f"trained NIQE model on {len(paths)} images -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_distort(args) -> int:
    try:
        spec = DistortionSpec(args.kind, args.strength, args.seed)
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc
    save_image(apply(load_image(args.input), spec), args.out)
    return EXIT_OK


def cmd_detections(args) -> int:
    rt, off = load_detections(args.rt), load_detections(args.off)
    rows = confidence_delta_table(rt, off)
    if args.format == "csv":
        text = table_csv(rows)
    else:
        text = table_text(rows, f"{rt.detector} ({rt.perspective})")
    _write(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iqa", description="Image quality metrics for paired renders.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="compare one reference/test pair")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label", default="pair")
    p.add_argument("--metrics", default="mse,psnr,ssim")
    p.add_argument("--ssim-mode", choices=("global", "windowed"), default="global")
    p.add_argument("--niqe-model")
    p.add_argument("--niqe-metric", choices=("paper", "paper_eq7", "canonical"), default="paper")
    p.add_argument("--niqe-test-only", action="store_true", help="score only the test image with NIQE")
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("run", help="evaluate every pair in a JSON manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train-niqe", help="fit a pristine NIQE model to a directory of images")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_niqe)

    p = sub.add_parser("distort", help="write a synthetically degraded copy of an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("noise", "blur", "quantize"), required=True)
    p.add_argument("--strength", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("detections", help="confidence delta table for real-time vs offline detections")
    p.add_argument("--rt", required=True)
    p.add_argument("--off", required=True)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_detections)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, NiqeError, DetectionError) as exc:
        print(f"iqa: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageError, ValueError, OSError) as exc:
        print(f"iqa: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
