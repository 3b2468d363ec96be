import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from panoheat.errors import InputError
from panoheat.synth import SYNTHETIC_FLIR_CAL
from panoheat.thermography import (
    FlirCalibration,
    ThermalFrame,
    correct_emissivity,
    counts_from_temp,
    detector_flux,
    load_calibration,
    read_tlinear,
    reemit,
    temp_from_counts,
    write_tlinear,
)

CAL = FlirCalibration.from_dict(SYNTHETIC_FLIR_CAL)

calibrations = st.builds(
    lambda R, B, F, O, e: FlirCalibration(R, B, F, O, e, 295.15),
    st.floats(1e3, 1e7), st.floats(500, 3000), st.floats(0.0, 1.0), st.floats(-1e3, 1e3), st.floats(0.5, 1.0),
)


def _scalar_w(t, c):
    return c.R / (math.exp(c.B / t) - c.F) + c.O


def test_spot_values_match_scalar_formula():
    for t in (250.0, 273.15, 300.0, 350.0, 400.0):
        assert counts_from_temp(t, CAL) == pytest.approx(_scalar_w(t, CAL), rel=1e-14)


@given(calibrations)
@settings(max_examples=50)
def test_roundtrip_any_constants(cal):
    t = np.linspace(250.0, 400.0, 301)
    assert np.abs(temp_from_counts(counts_from_temp(t, cal), cal) - t).max() <= 1e-6


def test_counts_monotone():
    w = counts_from_temp(np.linspace(250, 400, 200), CAL)
    assert np.all(np.diff(w) > 0)


def test_detector_flux_cases():
    w = counts_from_temp(310.0, CAL)
    wb = _scalar_w(295.15, CAL)
    one = FlirCalibration(CAL.R, CAL.B, CAL.F, CAL.O, 1.0, CAL.t_back)
    zero = FlirCalibration(CAL.R, CAL.B, CAL.F, CAL.O, 0.0, CAL.t_back)
    half = FlirCalibration(CAL.R, CAL.B, CAL.F, CAL.O, 0.5, CAL.t_back)
    assert detector_flux(w, one) == w
    assert detector_flux(w, zero) == pytest.approx(wb, rel=1e-14)
    assert detector_flux(w, half) == pytest.approx((w + wb) / 2, rel=1e-14)


def test_correct_emissivity_cases():
    w = counts_from_temp(np.array([300.0, 320.0]), CAL)
    assert np.allclose(correct_emissivity(detector_flux(w, CAL), CAL.eps_hat, CAL), w, rtol=1e-14)
    s = detector_flux(w, CAL)
    assert np.array_equal(correct_emissivity(s, 1.0, CAL), s)
    assert np.all(correct_emissivity(s, 0.8, CAL) > correct_emissivity(s, 0.9, CAL))
    with pytest.raises(InputError):
        correct_emissivity(s, 0.0, CAL)


def test_output_temperature_decreases_with_emissivity():
    t = reemit(np.full(5, 315.0), 0.5, CAL)
    eps = np.linspace(0.3, 1.0, 15)
    temps = [float(reemit(315.0, e, CAL)) for e in eps]
    assert all(b < a for a, b in zip(temps, temps[1:]))
    assert np.all(t > 315.0)


def test_identity_pipeline_on_full_frame():
    rng = np.random.default_rng(8)
    frame = 290.0 + 20.0 * rng.random((512, 640))
    assert np.abs(reemit(frame, CAL.eps_hat, CAL) - frame).max() <= 1e-6


def test_pipeline_matches_scalar_oracle():
    rng = np.random.default_rng(9)
    frame = 290.0 + 20.0 * rng.random((8, 10))
    out = reemit(frame, 0.8, CAL)
    wb = _scalar_w(CAL.t_back, CAL)
    for i in range(8):
        for j in range(10):
            s = CAL.eps_hat * _scalar_w(frame[i, j], CAL) + (1 - CAL.eps_hat) * wb
            w = (s - 0.2 * wb) / 0.8
            assert out[i, j] == pytest.approx(CAL.B / math.log(CAL.R / (w - CAL.O) + CAL.F), abs=1e-9)


def test_domain_errors():
    with pytest.raises(InputError):
        counts_from_temp(-1.0, CAL)
    with pytest.raises(InputError):
        temp_from_counts(CAL.O - 1, CAL)
    with pytest.raises(InputError):
        FlirCalibration(0.0, 1.0, 1.0, 0.0, 0.9, 295.0)
    with pytest.raises(InputError):
        FlirCalibration(1.0, 1.0, 10.0, 0.0, 0.9, 295.0)  # exp(B/T) < F
    with pytest.raises(InputError):
        FlirCalibration.from_dict({"R": 1})


def test_calibration_file(data_dir, tmp_path):
    assert load_calibration(data_dir / "synthetic_flir_cal.json") == CAL
    (tmp_path / "c.json").write_text(json.dumps(CAL.to_dict()))
    assert load_calibration(tmp_path / "c.json") == CAL


def test_tlinear_roundtrip(tmp_path):
    vals = np.linspace(290.0, 300.0, 640 * 512).reshape(512, 640)
    write_tlinear(tmp_path / "f.bin", ThermalFrame(vals))
    back = read_tlinear(tmp_path / "f.bin")
    assert back.width == 640 and back.height == 512
    assert np.abs(back.values - vals).max() <= 0.005 + 1e-9
    assert (tmp_path / "f.bin").stat().st_size == 2 * 640 * 512


def test_tlinear_errors(tmp_path, data_dir):
    frame = read_tlinear(data_dir / "frame.bin")
    assert frame.values.shape == (512, 640)
    with pytest.raises(InputError):
        write_tlinear(tmp_path / "x.bin", np.full((2, 2), 1000.0))
    (tmp_path / "y.bin").write_bytes(b"\x00\x01" * 5)
    (tmp_path / "y.bin.json").write_text(json.dumps({"width": 4, "height": 4, "factor": 0.01}))
    with pytest.raises(InputError):
        read_tlinear(tmp_path / "y.bin")
    with pytest.raises(InputError):
        ThermalFrame(np.zeros((2, 2)))
