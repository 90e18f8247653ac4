import csv
import json

import numpy as np
import pytest

from binotm import synthetic
from binotm.cli import RunReport, main
from binotm.image_io import HdrImage, load_ldr, write_hdr
from binotm.tonemap import ToneMapParams, tonemap

SIX_FILES = ["left.png", "right.png", "side_by_side.png", "anaglyph.png",
             "report.json", "trajectory.jsonl"]


@pytest.fixture(scope="module")
def scene_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenes") / "scene.hdr"
    write_hdr(synthetic.hdr_scene("window", 96, 72, seed=1), path)
    return path


@pytest.fixture(scope="module")
def optimize_out(scene_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("optimized")
    assert main(["optimize", str(scene_file), "-o", str(out)]) == 0
    return out


def test_optimize_writes_contracted_files(optimize_out):
    for name in SIX_FILES:
        assert (optimize_out / name).exists(), name


def test_optimize_missing_input_fails(tmp_path, capsys):
    code = main(["optimize", str(tmp_path / "missing.hdr"), "-o", str(tmp_path)])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_report_round_trips(optimize_out):
    payload = json.loads((optimize_out / "report.json").read_text())
    timing = json.loads((optimize_out / "timing.json").read_text())
    payload["seconds_per_iteration"] = timing["seconds_per_iteration"]
    report = RunReport.from_dict(payload)
    assert report.to_dict() == payload
    assert report.beta_left <= report.beta_right  # order_views contract


def test_report_beats_baseline(optimize_out):
    payload = json.loads((optimize_out / "report.json").read_text())
    assert payload["pair_energy"]["e_total"] < payload["baseline_energy"]["e_total"]


def test_trajectory_is_valid_jsonl(optimize_out):
    lines = (optimize_out / "trajectory.jsonl").read_text().splitlines()
    assert len(lines) >= 2
    for line in lines:
        record = json.loads(line)
        assert {"iteration", "stage", "beta_left", "beta_right", "e_total"} <= set(record)


def test_report_energy_matches_png_reevaluation(scene_file, optimize_out):
    # Re-evaluation oracle: recompute the total energy on the decoded output
    # files; the 0.01 tolerance absorbs their 8-bit quantization.
    from binotm.edges import canny
    from binotm.energy import total_energy
    from binotm.image_io import load_hdr
    from binotm.tonemap import make_references

    img = load_hdr(scene_file)
    contrast_ref, detail_ref = make_references(img)
    edges = canny(detail_ref)
    left = load_ldr(optimize_out / "left.png")
    right = load_ldr(optimize_out / "right.png")
    recomputed = total_energy(left, right, contrast_ref, detail_ref, edges)
    reported = json.loads((optimize_out / "report.json").read_text())
    assert abs(recomputed.e_total - reported["pair_energy"]["e_total"]) <= 0.01


# ---------------------------------------------------------------------------
# refs
# ---------------------------------------------------------------------------

def test_refs_outputs_match_input_dimensions(scene_file, tmp_path):
    assert main(["refs", str(scene_file), "-o", str(tmp_path)]) == 0
    for name in ("contrast_ref.png", "detail_ref.png"):
        img = load_ldr(tmp_path / name)
        assert (img.width, img.height) == (96, 72)


def test_refs_constant_input_gives_identical_files(tmp_path):
    src = tmp_path / "flat.hdr"
    write_hdr(HdrImage(np.full((16, 16, 3), 2.0)), src)
    assert main(["refs", str(src), "-o", str(tmp_path)]) == 0
    a = (tmp_path / "contrast_ref.png").read_bytes()
    b = (tmp_path / "detail_ref.png").read_bytes()
    assert a == b


def test_refs_contrast_has_wider_spread(scene_file, tmp_path):
    from binotm.image_io import luminance

    assert main(["refs", str(scene_file), "-o", str(tmp_path)]) == 0
    contrast_ref = load_ldr(tmp_path / "contrast_ref.png")
    detail_ref = load_ldr(tmp_path / "detail_ref.png")
    assert luminance(contrast_ref).std() > luminance(detail_ref).std()


# ---------------------------------------------------------------------------
# baseline
# ---------------------------------------------------------------------------

def test_baseline_midpoint_image(scene_file, tmp_path):
    from binotm.image_io import load_hdr

    out = tmp_path / "mid.png"
    assert main(["baseline", str(scene_file),
                 "--beta-l", "1.5", "--beta-r", "6.0", "--out", str(out)]) == 0
    expected = tonemap(load_hdr(scene_file), ToneMapParams(beta=3.75))
    got = load_ldr(out)
    np.testing.assert_allclose(got.pixels, expected.pixels, atol=0.5 / 255 + 1e-9)


def test_baseline_equal_betas_is_that_beta(scene_file, tmp_path):
    from binotm.image_io import load_hdr, write_ldr

    out_a = tmp_path / "a.png"
    out_b = tmp_path / "b.png"
    assert main(["baseline", str(scene_file),
                 "--beta-l", "2.5", "--beta-r", "2.5", "--out", str(out_a)]) == 0
    write_ldr(tonemap(load_hdr(scene_file), ToneMapParams(beta=2.5)), out_b)
    assert out_a.read_bytes() == out_b.read_bytes()


def test_baseline_rejects_out_of_bounds_beta(scene_file, tmp_path, capsys):
    code = main(["baseline", str(scene_file),
                 "--beta-l", "0.5", "--beta-r", "2.0",
                 "--out", str(tmp_path / "x.png")])
    assert code == 1
    assert "beta" in capsys.readouterr().err.lower()


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def refs_out(scene_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("refs")
    assert main(["refs", str(scene_file), "-o", str(out)]) == 0
    return out


def _evaluate(scene_file, left, right, capsys):
    assert main(["evaluate", str(scene_file), str(left), str(right)]) == 0
    return json.loads(capsys.readouterr().out)


def test_evaluate_detail_identity_row(scene_file, refs_out, capsys):
    got = _evaluate(scene_file, refs_out / "detail_ref.png",
                    refs_out / "detail_ref.png", capsys)
    assert 0.98 <= got["e_c"] <= 1.0
    assert got["e_d"] == 0.0
    assert 0.98 <= got["e_total"] <= 1.0


def test_evaluate_contrast_identity_row(scene_file, refs_out, capsys):
    got = _evaluate(scene_file, refs_out / "contrast_ref.png",
                    refs_out / "contrast_ref.png", capsys)
    assert got["e_c"] <= 1e-3
    assert 0.98 <= got["e_d"] <= 1.0
    assert 1.225 <= got["e_total"] <= 1.25


def test_evaluate_swap_keeps_ec_ef_and_reports_delta(scene_file, refs_out, capsys):
    fwd = _evaluate(scene_file, refs_out / "detail_ref.png",
                    refs_out / "contrast_ref.png", capsys)
    rev = _evaluate(scene_file, refs_out / "contrast_ref.png",
                    refs_out / "detail_ref.png", capsys)
    assert fwd["e_c"] == rev["e_c"]
    assert fwd["e_f"] == rev["e_f"]
    assert fwd["detail_swap_delta"] == rev["detail_swap_delta"]
    assert abs(fwd["e_d"] - rev["e_d"]) == pytest.approx(fwd["detail_swap_delta"])


def test_evaluate_dimension_mismatch_fails(scene_file, tmp_path, capsys):
    from binotm.image_io import LdrImage, write_ldr

    small = tmp_path / "small.png"
    write_ldr(LdrImage(np.zeros((10, 10, 3))), small)
    code = main(["evaluate", str(scene_file), str(small), str(small)])
    assert code == 1
    assert "dimensions" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# batch
# ---------------------------------------------------------------------------

def test_batch_csv_with_corrupt_file(tmp_path, caplog):
    in_dir = tmp_path / "imgs"
    in_dir.mkdir()
    for i in range(3):
        write_hdr(synthetic.hdr_scene("blobs", 64, 48, seed=30 + i),
                  in_dir / f"scene_{i}.hdr")
    (in_dir / "broken.hdr").write_bytes(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 4 +X 4\n123")
    out_csv = tmp_path / "stats.csv"
    assert main(["batch", str(in_dir), "--out", str(out_csv), "--threads", "2"]) == 0

    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4  # 3 data rows + mean
    assert rows[-1]["file"] == "mean"
    data = rows[:-1]
    assert [r["file"] for r in data] == sorted(r["file"] for r in data)
    for col in ("e_total", "baseline_e_total", "iterations"):
        expected = sum(float(r[col]) for r in data) / len(data)
        assert float(rows[-1][col]) == pytest.approx(expected, rel=1e-12)
    for r in data:
        assert float(r["e_total"]) <= float(r["baseline_e_total"])


def test_numerical_abort_maps_to_exit_code_2(scene_file, tmp_path, monkeypatch, capsys):
    from binotm import cli
    from binotm.energy import NonFiniteEnergyError

    def blow_up(*args, **kwargs):
        raise NonFiniteEnergyError("e_total is nan")

    monkeypatch.setattr(cli, "optimize", blow_up)
    code = main(["optimize", str(scene_file), "-o", str(tmp_path)])
    assert code == 2
    assert "numerical abort" in capsys.readouterr().err


def test_batch_all_corrupt_fails(tmp_path, capsys):
    in_dir = tmp_path / "bad"
    in_dir.mkdir()
    (in_dir / "one.hdr").write_bytes(b"nonsense")
    assert main(["batch", str(in_dir), "--out", str(tmp_path / "x.csv")]) == 1
    assert "error" in capsys.readouterr().err
