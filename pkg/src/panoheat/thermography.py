"""Radiometric emissivity correction for TLinear thermal frames.

A TLinear frame stores temperatures computed under a default emissivity.
Re-expressing them for the true surface emissivity goes through detector
counts:

    W(T)  = R / (exp(B/T) - F) + O
    S     = eps_hat*W(T_obj) + (1 - eps_hat)*W(T_back)
    W_obj = (S - (1 - eps)*W(T_back)) / eps
    T     = B / ln(R/(W_obj - O) + F)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

FRAME_WIDTH = 640
FRAME_HEIGHT = 512


@dataclass(frozen=True)
class FlirCalibration:
    R: float
    B: float
    F: float
    O: float
    eps_hat: float
    t_back: float

    def __post_init__(self):
        if not self.R > 0 or not self.B > 0 or self.F < 0:
            raise InputError("calibration needs R > 0, B > 0, F >= 0")
        if not (0.0 <= self.eps_hat <= 1.0):
            raise InputError(f"default emissivity must lie in [0, 1], got {self.eps_hat}")
        if not self.t_back > 0:
            raise InputError("background temperature must be positive kelvin")
        if not math.exp(self.B / self.t_back) > self.F:
            raise InputError("calibration denominator exp(B/T_back) - F is not positive")

    @property
    def w_back(self) -> float:
        return float(counts_from_temp(self.t_back, self))

    @classmethod
    def from_dict(cls, d: dict) -> "FlirCalibration":
        try:
            return cls(float(d["R"]), float(d["B"]), float(d["F"]), float(d["O"]),
                       float(d["eps_hat"]), float(d["T_back_K"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed calibration: {exc}") from exc

    def to_dict(self) -> dict:
        return {"R": self.R, "B": self.B, "F": self.F, "O": self.O,
                "eps_hat": self.eps_hat, "T_back_K": self.t_back}


def load_calibration(path) -> FlirCalibration:
    try:
        return FlirCalibration.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def counts_from_temp(t_k, cal: FlirCalibration):
    t_k = np.asarray(t_k, dtype=np.float64)
    if np.any(t_k <= 0):
        raise InputError("temperatures must be positive kelvin")
    denom = np.exp(cal.B / t_k) - cal.F
    if np.any(denom <= 0):
        raise InputError("exp(B/T) - F must be positive")
    return cal.R / denom + cal.O


def detector_flux(w_obj, cal: FlirCalibration):
    return cal.eps_hat * np.asarray(w_obj, dtype=np.float64) + (1.0 - cal.eps_hat) * cal.w_back


def correct_emissivity(s, eps: float, cal: FlirCalibration):
    if not (0.0 < eps <= 1.0):
        raise InputError(f"emissivity must lie in (0, 1], got {eps}")
    return (np.asarray(s, dtype=np.float64) - (1.0 - eps) * cal.w_back) / eps


def temp_from_counts(w_obj, cal: FlirCalibration):
    w_obj = np.asarray(w_obj, dtype=np.float64)
    excess = w_obj - cal.O
    if np.any(excess <= 0):
        raise InputError("counts must exceed the offset O")
    arg = cal.R / excess + cal.F
    if np.any(arg <= 1.0):
        raise InputError("log argument R/(W - O) + F must exceed 1")
    return cal.B / np.log(arg)


def reemit(t_k, eps: float, cal: FlirCalibration):
    """Re-express TLinear temperatures for the true emissivity ``eps``."""
    s = detector_flux(counts_from_temp(t_k, cal), cal)
    return temp_from_counts(correct_emissivity(s, eps, cal), cal)


# -- frame files -------------------------------------------------------------


@dataclass
class ThermalFrame:
    values: np.ndarray  # kelvin, (height, width)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InputError(f"thermal frame must be 2D, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InputError("thermal frame values must be finite positive kelvin")
        self.values = v

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def read_tlinear(path, sidecar=None) -> ThermalFrame:
    """Raw little-endian uint16 TLinear frame plus a JSON sidecar.

    Sidecar keys: ``width``, ``height``, ``factor`` (K per count) and
    ``offset`` (K).  Defaults to ``<path>.json``.
    """
    path = Path(path)
    meta_path = Path(sidecar) if sidecar else path.with_name(path.name + ".json")
    try:
        meta = json.loads(meta_path.read_text())
        w = int(meta.get("width", FRAME_WIDTH))
        h = int(meta.get("height", FRAME_HEIGHT))
        factor = float(meta["factor"])
        offset = float(meta.get("offset", 0.0))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{meta_path}: malformed frame sidecar: {exc}") from exc
    raw = np.frombuffer(path.read_bytes(), dtype="<u2")
    if raw.size != w * h:
        raise InputError(f"{path}: expected {w * h} pixels, found {raw.size}")
    return ThermalFrame(raw.reshape(h, w).astype(np.float64) * factor + offset)


def write_tlinear(path, frame: ThermalFrame | np.ndarray, factor: float = 0.01, offset: float = 0.0) -> None:
    """Quantize kelvin values to uint16 counts and write frame + sidecar."""
    vals = frame.values if isinstance(frame, ThermalFrame) else np.asarray(frame, dtype=np.float64)
    q = np.rint((vals - offset) / factor)
    if np.any(q < 0) or np.any(q > 65535):
        raise InputError("temperatures out of range for the chosen factor/offset")
    path = Path(path)
    path.write_bytes(q.astype("<u2").tobytes())
    meta = {"width": vals.shape[1], "height": vals.shape[0], "factor": factor, "offset": offset}
    path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2))
