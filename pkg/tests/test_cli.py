import json
import shutil
import subprocess
import sys

import pytest

from renderiqa.cli import main
from renderiqa.distort import dead_leaves
from renderiqa.image import load_image, save_image

from conftest import PRISTINE


@pytest.fixture
def pair(tmp_path):
    save_image(dead_leaves(192, seed=1), tmp_path / "ref.png")
    assert main(["distort", "--in", str(tmp_path / "ref.png"), "--out", str(tmp_path / "test.png"),
                 "--kind", "noise", "--strength", "10", "--seed", "7"]) == 0
    return tmp_path / "ref.png", tmp_path / "test.png"


def test_compare_csv(pair, capsys):
    ref, test = pair
    assert main(["compare", "--ref", str(ref), "--test", str(test), "--metrics", "psnr,ssim",
                 "--ssim-mode", "windowed"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "label,psnr,ssim"
    assert len(lines) == 2


def test_compare_identical_json(pair, capsys):
    ref, _ = pair
    assert main(["compare", "--ref", str(ref), "--test", str(ref), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rows"][0]["values"]["psnr"] == {"flag": "identical"}


def test_compare_mismatched_sizes(tmp_path, pair, capsys):
    ref, _ = pair
    save_image(dead_leaves(64, seed=1), tmp_path / "small.png")
    assert main(["compare", "--ref", str(ref), "--test", str(tmp_path / "small.png")]) == 1
    assert "n/a" in capsys.readouterr().out


def test_unknown_flag_is_usage_error(pair):
    ref, test = pair
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--ref", str(ref), "--test", str(test), "--fast"])
    assert exc.value.code == 2


def test_niqe_without_model_is_usage_error(pair):
    ref, test = pair
    assert main(["compare", "--ref", str(ref), "--test", str(test), "--metrics", "niqe"]) == 2


def test_train_score_and_run(tmp_path, pair, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for p in PRISTINE[:4]:
        shutil.copy(p, corpus / p.name)
    model = tmp_path / "model.json"
    assert main(["train-niqe", "--corpus", str(corpus), "--out", str(model)]) == 0
    assert json.loads(model.read_text())["version"] == 1

    ref, test = pair
    assert main(["compare", "--ref", str(ref), "--test", str(test), "--metrics", "niqe",
                 "--niqe-model", str(model), "--niqe-metric", "canonical", "--format", "text"]) == 0
    assert "The results in NIQE." in capsys.readouterr().out

    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({
        "pairs": [{"label": "set 1", "ref": "ref.png", "test": "test.png"},
                  {"label": "set 2", "ref": "ref.png", "test": "absent.png"}],
        "metrics": ["psnr", "niqe"], "niqe": {"model": "model.json", "metric": "paper"}}))
    out = tmp_path / "report.csv"
    assert main(["run", "--manifest", str(manifest), "--out", str(out)]) == 1
    rows = out.read_text().splitlines()
    assert rows[0] == "label,psnr,niqe_ref,niqe_test"
    assert rows[2] == "set 2,n/a,n/a,n/a"
    assert "absent.png" in capsys.readouterr().err


def test_run_bad_manifest(tmp_path):
    (tmp_path / "m.json").write_text("[]")
    assert main(["run", "--manifest", str(tmp_path / "m.json")]) == 2


def test_train_empty_corpus(tmp_path):
    assert main(["train-niqe", "--corpus", str(tmp_path), "--out", str(tmp_path / "m.json")]) == 2


def test_distort_kinds(tmp_path, pair):
    ref, _ = pair
    for kind, strength in (("blur", "1.5"), ("quantize", "8")):
        out = tmp_path / f"{kind}.pgm"
        assert main(["distort", "--in", str(ref), "--out", str(out), "--kind", kind, "--strength", strength]) == 0
        assert load_image(out).shape == (192, 192)
    assert main(["distort", "--in", str(ref), "--out", str(tmp_path / "q.png"),
                 "--kind", "quantize", "--strength", "1"]) == 2


def test_detections(tmp_path, capsys):
    def write(name, mode, dets):
        (tmp_path / name).write_text(json.dumps(
            {"detector": "yolov8n", "perspective": "close_up", "render_mode": mode, "detections": dets}))
    write("rt.json", "real_time", [{"class": "Person", "confidence": 0.71}, {"class": "Car", "confidence": 0.82}])
    write("off.json", "offline", [{"class": "Person", "confidence": 0.885}, {"class": "Car", "confidence": 0.72}])
    assert main(["detections", "--rt", str(tmp_path / "rt.json"), "--off", str(tmp_path / "off.json"),
                 "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1:] == ["Person,71.0,88.5,+17.5", "Car,82.0,72.0,-10.0"]
    write("bad.json", "offline", [{"class": "Car", "confidence": 2}])
    assert main(["detections", "--rt", str(tmp_path / "rt.json"), "--off", str(tmp_path / "bad.json")]) == 2


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "renderiqa.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
