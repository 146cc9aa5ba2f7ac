import json
import math
import os

import numpy as np
import pytest

from topodenoise import PointCloud, write_csv
from topodenoise.cli import main, run_from_manifest


def run(*args):
    return main([str(a) for a in args])


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def circle_csv(tmp_path):
    out = tmp_path / "synth"
    assert run("synth", "circle", "--n", 150, "--sigma", 0.7,
               "--seed", 1, "--out", out) == 0
    return out / "points.csv"


def test_synth_outputs(tmp_path):
    out = tmp_path / "s"
    assert run("synth", "circle", "--n", 80, "--sigma", 0.7,
               "--seed", 3, "--out", out) == 0
    manifest = read_json(out / "run.json")
    assert manifest["subcommand"] == "synth"
    assert 0 < manifest["computed"]["acceptance_rate"] <= 1
    sidecar = read_json(out / "points.json")
    assert sidecar["count"] == 80 and sidecar["dim"] == 2
    from topodenoise import read_csv
    assert len(read_csv(out / "points.csv")) == 80


def test_synth_point_dim(tmp_path):
    out = tmp_path / "p"
    assert run("synth", "point", "--n", 40, "--sigma", 0.6, "--dim", 3,
               "--seed", 2, "--out", out) == 0
    from topodenoise import read_csv
    assert read_csv(out / "points.csv").dim == 3


def test_denoise_snapshots_and_manifest(tmp_path, circle_csv):
    out = tmp_path / "d"
    assert run("denoise", "--in", circle_csv, "--subset", 30, "--sigma", 0.6,
               "--omega", 0.1, "--c", 0.05, "--iters", 10,
               "--snapshot-every", 5, "--seed", 7, "--out", out) == 0
    for it in (0, 5, 10):
        assert (out / f"s_{it}.csv").exists()
    manifest = read_json(out / "run.json")
    assert manifest["computed"]["m_norm"] > 0
    assert manifest["computed"]["omega_defaulted"] is False
    assert manifest["computed"]["snapshots"] == [0, 5, 10]


def test_denoise_omega_default_flagged(tmp_path, circle_csv):
    out = tmp_path / "d2"
    assert run("denoise", "--in", circle_csv, "--subset", 20, "--sigma", 0.6,
               "--iters", 2, "--seed", 7, "--out", out) == 0
    manifest = read_json(out / "run.json")
    assert manifest["computed"]["omega_defaulted"] is True
    assert manifest["params"]["omega"] is None


def test_threshold_output(tmp_path, circle_csv):
    out = tmp_path / "t"
    assert run("threshold", "--in", circle_csv, "--k", 10, "--fraction", 0.1,
               "--out", out) == 0
    from topodenoise import read_csv
    assert len(read_csv(out / "points.csv")) == 15  # ceil(0.1 * 150)


def test_barcode_formats(tmp_path):
    square = tmp_path / "square.csv"
    write_csv(PointCloud(np.array([[0.0, 0], [1, 0], [0, 1], [1, 1]])), square)
    out = tmp_path / "b"
    assert run("barcode", "--in", square, "--complex", "rips", "--max-dim", 2,
               "--max-eps", 2.0, "--out", out) == 0
    intervals = read_json(out / "barcode.json")
    assert isinstance(intervals, list)
    assert all(set(iv) == {"dim", "birth", "death"} for iv in intervals)
    loops = [iv for iv in intervals if iv["dim"] == 1]
    assert len(loops) == 1
    assert loops[0]["birth"] == pytest.approx(1.0)
    assert loops[0]["death"] == pytest.approx(math.sqrt(2))
    essential = [iv for iv in intervals if iv["dim"] == 0 and iv["death"] is None]
    assert len(essential) == 1
    stats = read_json(out / "barcode_stats.json")
    assert stats["dims"]["1"]["prominence"] == "inf"
    svg = (out / "barcode.svg").read_text()
    assert svg.startswith("<svg") and "polygon" in svg  # arrowhead present
    assert (out / "barcode.txt").read_text().startswith("degree 0")


def test_barcode_lazy_witness(tmp_path, circle_csv):
    out = tmp_path / "w"
    assert run("barcode", "--in", circle_csv, "--complex", "lazy-witness",
               "--landmarks", 40, "--nu", 1, "--max-dim", 2, "--max-eps", 1.0,
               "--seed", 5, "--out", out) == 0
    assert read_json(out / "run.json")["computed"]["simplices_by_dim"][0] == 40


def test_compare_report(tmp_path, circle_csv):
    out = tmp_path / "c"
    assert run("compare", "--in", circle_csv, "--subset", 30, "--sigma", 0.6,
               "--omega", 0.1, "--iters", 40, "--seed", 2, "--k", 10,
               "--fraction", 0.2, "--complex", "rips", "--max-dim", 1,
               "--max-eps", 1.2, "--out", out) == 0
    report = read_json(out / "report.json")
    assert set(report["dims"]) == {"0", "1"}
    entry = report["dims"]["1"]
    assert {"denoise", "threshold", "verdict"} <= set(entry)
    assert entry["verdict"] in ("denoise", "threshold", "tie", "none")
    assert (out / "denoised.csv").exists()
    assert (out / "thresholded.csv").exists()
    assert (out / "barcode_denoise.json").exists()
    assert (out / "barcode_threshold.json").exists()


def test_render_scatter(tmp_path, circle_csv):
    out = tmp_path / "r"
    assert run("render-scatter", "--in", circle_csv, "--out", out) == 0
    svg = (out / "scatter.svg").read_text()
    assert svg.count("<circle") == 150


def test_rerun_is_byte_identical(tmp_path, circle_csv):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["denoise", "--in", circle_csv, "--subset", 25, "--sigma", 0.5,
            "--omega", 0.1, "--iters", 15, "--seed", 4]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b) == 0
    for name in os.listdir(a):
        if name == "run.json":
            continue
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_from_manifest_roundtrip(tmp_path, circle_csv):
    a = tmp_path / "a"
    assert run("threshold", "--in", circle_csv, "--k", 12, "--fraction", 0.3,
               "--out", a) == 0
    b = tmp_path / "b"
    assert run("from-manifest", a / "run.json", "--out", b) == 0
    assert (a / "points.csv").read_bytes() == (b / "points.csv").read_bytes()
    # the new manifest differs only in wall time
    ma, mb = read_json(a / "run.json"), read_json(b / "run.json")
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    assert ma == mb


def test_from_manifest_api(tmp_path, circle_csv):
    a = tmp_path / "a"
    assert run("synth", "sphere", "--n", 50, "--sigma", 0.3, "--seed", 9,
               "--out", a) == 0
    b = run_from_manifest(a / "run.json", tmp_path / "b")
    assert (a / "points.csv").read_bytes() == (b / "points.csv").read_bytes()


def test_exit_code_validation_error(tmp_path, circle_csv):
    # subset larger than the cloud
    assert run("denoise", "--in", circle_csv, "--subset", 9999, "--sigma", 0.6,
               "--iters", 1, "--seed", 1, "--out", tmp_path / "x") == 2


def test_exit_code_degenerate_field(tmp_path):
    single = tmp_path / "one.csv"
    write_csv(PointCloud(np.array([[1.0, 2.0]])), single)
    assert run("denoise", "--in", single, "--subset", 1, "--sigma", 0.5,
               "--iters", 1, "--seed", 1, "--out", tmp_path / "y") == 3


def test_exit_code_resource_cap(tmp_path, circle_csv):
    assert run("barcode", "--in", circle_csv, "--complex", "rips",
               "--max-dim", 3, "--max-eps", 99.0, "--cap", 50,
               "--out", tmp_path / "z") == 4


def test_exit_code_missing_file(tmp_path):
    assert run("threshold", "--in", tmp_path / "nope.csv", "--k", 3,
               "--fraction", 0.5, "--out", tmp_path / "q") == 2
