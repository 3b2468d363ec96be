import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from panoheat.cli import dispatch
from panoheat.hdrio import read_float_map, write_float_map
from panoheat.thermography import read_tlinear


@pytest.fixture
def sample(data_dir):
    return {
        "layout": str(data_dir / "cuboid_layout.json"),
        "pano": str(data_dir / "sample.hdr"),
        "config": str(data_dir / "sample_sim.json"),
        "patches": str(data_dir / "patches.json"),
        "cal": str(data_dir / "synthetic_flir_cal.json"),
        "frame": str(data_dir / "frame.bin"),
    }


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _heat_sim(sample, out, *extra):
    return dispatch(["heat-sim", "--layout", sample["layout"], "--pano", sample["pano"],
                     "--config", sample["config"], "--out", str(out), *extra])


def test_layout_check(sample, capsys):
    assert dispatch(["layout-check", "--layout", sample["layout"]]) == 0
    assert "6 surfaces" in capsys.readouterr().out


def test_unknown_command_and_missing_flag(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert dispatch(["layout-check"]) == 1
    assert dispatch([]) == 1


def test_missing_file_is_io_error(tmp_path, sample):
    assert dispatch(["light-map", "--pano", str(tmp_path / "nope.hdr"), "--out", str(tmp_path)]) == 3


def test_bad_config_is_input_error(tmp_path, sample):
    (tmp_path / "c.json").write_text(json.dumps({"sim": {"duraton": 5}}))
    assert dispatch(["layout-check", "--layout", sample["layout"], "--config", str(tmp_path / "c.json")]) == 1


def test_unstable_dt_exits_2_with_bound(sample, tmp_path, capsys):
    assert _heat_sim(sample, tmp_path, "--dt", "100") == 2
    err = capsys.readouterr().err
    assert "stability bound" in err and "35.28" in err


def test_end_to_end_golden(sample, tmp_path, data_dir):
    assert _heat_sim(sample, tmp_path) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    for path, digest in man["inputs"].items():
        assert _sha(__import__("pathlib").Path(path)) == digest
    for rel, digest in man["outputs"].items():
        assert _sha(tmp_path / rel) == digest
    assert man["step_count"] == 4 and man["dt"] == 30.0
    assert man["toggles"] == {"conduction": True, "radiation": True, "convection": True, "exchange": False}
    assert set(man["materials"].values()) == {"plaster_dense"}
    assert (tmp_path / "heat_final.png").exists()
    assert sorted(p.name for p in (tmp_path / "fields").iterdir() if p.is_dir()) == [
        "final", "t000000000ms", "t000060000ms", "t000120000ms"]
    got = list(csv.DictReader(open(tmp_path / "surfaces.csv")))
    want = list(csv.DictReader(open(data_dir / "golden" / "surfaces.csv")))
    assert [r["surface"] for r in got] == [r["surface"] for r in want]
    for g, w in zip(got, want):
        for key in ("area_m2", "mean_flux_w_m2", "final_mean_c"):
            assert float(g[key]) == pytest.approx(float(w[key]), rel=1e-7)


def test_heat_sim_is_byte_deterministic(sample, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _heat_sim(sample, a) == 0 and _heat_sim(sample, b) == 0
    fields = sorted((a / "fields").rglob("*.bin"))
    assert fields
    for f in fields:
        assert f.read_bytes() == (b / f.relative_to(a)).read_bytes()


def test_bake_pano_reproduces_heat_sim(sample, tmp_path):
    assert _heat_sim(sample, tmp_path / "run") == 0
    assert dispatch(["bake-pano", "--layout", sample["layout"], "--fields", str(tmp_path / "run" / "fields" / "final"),
                     "--width", "256", "--height", "128", "--celsius", "--config", sample["config"],
                     "--out", str(tmp_path / "bake")]) == 0
    assert np.array_equal(read_float_map(tmp_path / "bake" / "heat.bin"), read_float_map(tmp_path / "run" / "heat_final.bin"))


def test_light_illum_flux_chain(sample, tmp_path):
    assert dispatch(["light-map", "--pano", sample["pano"], "--out", str(tmp_path / "l")]) == 0
    assert dispatch(["illum-map", "--pano", sample["pano"], "--reflectance", "0.5", "--out", str(tmp_path / "e")]) == 0
    assert dispatch(["flux-map", "--pano", sample["pano"], "--layout", sample["layout"], "--out", str(tmp_path / "f")]) == 0
    lum = read_float_map(tmp_path / "l" / "luminance.bin")
    ill = read_float_map(tmp_path / "e" / "illuminance.bin")
    flux = read_float_map(tmp_path / "f" / "flux.bin")
    assert np.allclose(ill, lum * np.pi / 0.5, rtol=1e-12)
    assert np.allclose(flux, ill / 120, rtol=1e-12)  # sample layout uses R = 0.5 everywhere


def test_patch_stats(sample, tmp_path, capsys):
    write_float_map(tmp_path / "m.bin", np.full((128, 256), 4.5))
    assert dispatch(["patch-stats", "--map", str(tmp_path / "m.bin"), "--patches", sample["patches"],
                     "--out", str(tmp_path / "p.csv")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "p.csv")))
    assert len(rows) == 3 and all(float(r["mean"]) == 4.5 for r in rows)


def test_crop(sample, tmp_path):
    assert dispatch(["crop", "--pano", sample["pano"], "--yaw", "20", "--hfov", "60", "--width", "64",
                     "--height", "48", "--out", str(tmp_path)]) == 0
    assert read_float_map(tmp_path / "crop.bin").shape == (48, 64, 3)
    assert dispatch(["crop", "--out", str(tmp_path)]) == 1


def test_flir_correct(sample, tmp_path):
    assert dispatch(["flir-correct", "--frame", sample["frame"], "--cal", sample["cal"], "--emissivity", "0.95",
                     "--out", str(tmp_path / "same.bin")]) == 0
    orig = read_tlinear(sample["frame"]).values
    assert np.array_equal(read_tlinear(tmp_path / "same.bin").values, orig)
    assert dispatch(["flir-correct", "--frame", sample["frame"], "--cal", sample["cal"], "--emissivity", "0.8",
                     "--float", "--out", str(tmp_path / "low.bin")]) == 0
    low = read_float_map(tmp_path / "low.bin")
    # lower emissivity reads warmer above the background temperature, cooler below it
    assert np.all(low[orig > 295.16] > orig[orig > 295.16])
    assert np.all(low[orig < 295.14] < orig[orig < 295.14])
    assert dispatch(["flir-correct", "--frame", sample["frame"], "--cal", sample["cal"], "--emissivity", "0",
                     "--out", str(tmp_path / "x.bin")]) == 1


def test_compare_against_own_crop(sample, tmp_path, capsys):
    assert _heat_sim(sample, tmp_path / "run") == 0
    heat = tmp_path / "run" / "heat_final.bin"
    assert dispatch(["crop", "--map", str(heat), "--hfov", "60", "--width", "80", "--height", "64",
                     "--out", str(tmp_path / "c")]) == 0
    crop_c = read_float_map(tmp_path / "c" / "crop.bin")
    from panoheat.thermography import write_tlinear

    write_tlinear(tmp_path / "t.bin", crop_c + 273.15, factor=0.0001, offset=290.0)
    (tmp_path / "pp.json").write_text(json.dumps([{"u": 40, "v": 50, "radius": 5}, {"u": 40, "v": 20, "radius": 5}]))
    capsys.readouterr()
    assert dispatch(["compare", "--heat-map", str(heat), "--celsius-map", "--thermal", str(tmp_path / "t.bin"),
                     "--patches", str(tmp_path / "pp.json"), "--hfov", "60", "--out", str(tmp_path / "cmp")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "cmp" / "compare.csv")))
    assert all(abs(float(r["delta_c"])) <= 1e-4 for r in rows)


def test_sweep_and_toggle_matrix(sample, tmp_path):
    spec = {"parameter": "thickness", "values": [0.001, 0.005], "baseline": 0.001,
            "patches": json.loads(open(sample["patches"]).read())}
    (tmp_path / "s.json").write_text(json.dumps(spec))
    args = ["--layout", sample["layout"], "--pano", sample["pano"], "--config", sample["config"]]
    assert dispatch(["sweep", "--spec", str(tmp_path / "s.json"), *args, "--out", str(tmp_path / "sw")]) == 0
    assert len((tmp_path / "sw" / "sweep.csv").read_text().splitlines()) == 7
    assert dispatch(["toggle-matrix", *args, "--out", str(tmp_path / "tm")]) == 0
    assert (tmp_path / "tm" / "manifest.json").exists()


def test_console_script_entry_point(sample):
    out = subprocess.run([sys.executable, "-m", "panoheat.cli", "layout-check", "--layout", sample["layout"]],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("6 surfaces")
