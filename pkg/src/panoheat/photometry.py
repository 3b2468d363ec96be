"""Per-pixel photometry: luminance, illuminance, energy influx, patch statistics.

All maps are plain ``(h, w)`` float64 arrays; the unit follows the
function name (cd/m^2, lux, W/m^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .pano_core import HdrPanorama

# Rec. 709 luminance weights and the Radiance white efficacy
DEFAULT_WEIGHTS = (0.2126, 0.7152, 0.0722)
DEFAULT_EFFICACY = 179.0
# sunlight: roughly 120 lx per W/m^2
DEFAULT_LUX_PER_WATT = 120.0


@dataclass(frozen=True)
class PatchSpec:
    u: float
    v: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError(f"patch radius must be positive, got {self.radius}")


def luminance_from_hdr(p: HdrPanorama, efficacy: float = DEFAULT_EFFICACY, weights=DEFAULT_WEIGHTS) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,) or np.any(w < 0):
        raise InputError(f"luminance weights must be three non-negative numbers, got {weights}")
    return efficacy * (p.pixels @ w) * p.scale


def _check_reflectance(reflectance):
    r = np.asarray(reflectance, dtype=np.float64)
    if np.any(~np.isfinite(r)) or np.any(r <= 0.0) or np.any(r > 1.0):
        raise InputError("reflectance must lie in (0, 1]")
    return r


def illuminance_from_luminance(lum, reflectance) -> np.ndarray:
    """Lambertian conversion E = L*pi/R; ``reflectance`` is a scalar or a map."""
    r = _check_reflectance(reflectance)
    return np.asarray(lum, dtype=np.float64) * math.pi / r


def flux_from_illuminance(illum, lux_per_watt: float = DEFAULT_LUX_PER_WATT) -> np.ndarray:
    if not lux_per_watt > 0:
        raise ConfigError(f"lux_per_watt must be positive, got {lux_per_watt}")
    return np.asarray(illum, dtype=np.float64) / lux_per_watt


def patch_mask(shape, patch: PatchSpec) -> np.ndarray:
    """Pixels whose centers lie inside the circle (boundary included)."""
    h, w = shape[:2]
    dv = (np.arange(h, dtype=np.float64) - patch.v)[:, None]
    du = (np.arange(w, dtype=np.float64) - patch.u)[None, :]
    return du * du + dv * dv <= patch.radius * patch.radius


def patch_mean(data, patch: PatchSpec) -> tuple[float, int]:
    """Mean over pixel centers inside the patch, summed in row-major order."""
    data = np.asarray(data, dtype=np.float64)
    mask = patch_mask(data.shape, patch)
    count = int(mask.sum())
    if count == 0:
        raise InputError(f"patch {patch} covers no pixel centers")
    vals = data[mask]
    if not np.all(np.isfinite(vals)):
        raise InputError(f"patch {patch} covers non-finite values")
    total = 0.0
    for x in vals.tolist():
        total += x
    return total / count, count


def load_patches(items) -> list[PatchSpec]:
    """Parse a JSON array of ``{u, v, radius}`` objects."""
    try:
        return [PatchSpec(float(it["u"]), float(it["v"]), float(it["radius"])) for it in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed patch list: {exc}") from exc
