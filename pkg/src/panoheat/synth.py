"""Synthetic scenes for tests and demos.

The panorama is rendered by ray casting the layout itself, so its pixels
line up with the simulated surfaces exactly.  Lighting is a diffuse
ambient level plus soft-edged sun patches on the floor and one wall, given
as target illuminance in lux and converted back to radiance through the
same photometric constants the pipeline uses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .layout import RoomLayout, SurfaceProps, build_surfaces, pixel_rays, raycast_planes
from .pano_core import HdrPanorama
from .photometry import DEFAULT_EFFICACY, DEFAULT_WEIGHTS

SYNTHETIC_FLIR_CAL = {
    "_note": "NON-PHYSICAL synthetic calibration for tests; not device constants.",
    "R": 400000.0,
    "B": 1430.0,
    "F": 1.0,
    "O": -200.0,
    "eps_hat": 0.95,
    "T_back_K": 295.15,
}


def cuboid_layout(width=4.0, depth=3.0, height=2.5, camera=(2.0, 1.5, 1.2), material="plaster_dense",
                  reflectance=0.5) -> RoomLayout:
    """Axis-aligned box room, footprint corner at the origin."""
    fp = [(0.0, 0.0), (width, 0.0), (width, depth), (0.0, depth)]
    surfaces = {sid: SurfaceProps(material, reflectance) for sid in ("floor", "ceiling", "wall_0", "wall_1", "wall_2", "wall_3")}
    return RoomLayout(fp, 0.0, height, np.array(camera, dtype=np.float64), surfaces)


@dataclass(frozen=True)
class SunPatch:
    """Axis-aligned rectangle of extra illuminance on one plane, in plane (s, t) meters."""

    surface: str
    s0: float
    t0: float
    s1: float
    t1: float
    lux: float
    soft: float = 0.15


def _soft_box(s, t, p: SunPatch):
    def ramp(x, a, b):
        if p.soft <= 0:
            return ((x >= a) & (x <= b)).astype(np.float64)
        lo = np.clip((x - a) / p.soft + 0.5, 0.0, 1.0)
        hi = np.clip((b - x) / p.soft + 0.5, 0.0, 1.0)
        lo = lo * lo * (3 - 2 * lo)
        hi = hi * hi * (3 - 2 * hi)
        return lo * hi

    return ramp(s, p.s0, p.s1) * ramp(t, p.t0, p.t1)


DEFAULT_PATCHES = (
    SunPatch("floor", 2.4, 0.6, 3.6, 1.8, 12000.0),
    SunPatch("wall_2", 1.0, 0.8, 2.2, 1.8, 6000.0),
)


def render_panorama(layout: RoomLayout, w: int, h: int, ambient_lux: float = 600.0,
                    patches=DEFAULT_PATCHES) -> HdrPanorama:
    """Gray HDR panorama whose Lambertian illuminance follows the given lux field."""
    planes = build_surfaces(layout)
    hits = raycast_planes(planes, layout.camera, pixel_rays(layout, w, h))
    lux = np.full((h, w), float(ambient_lux))
    refl = np.ones((h, w))
    for k, p in enumerate(planes):
        sel = hits.plane == k
        refl[sel] = p.reflectance
        for patch in patches:
            if patch.surface == p.id:
                lux[sel] += patch.lux * _soft_box(hits.s[sel], hits.t[sel], patch)
    lum = lux * refl / math.pi
    gray = lum / (DEFAULT_EFFICACY * sum(DEFAULT_WEIGHTS))
    return HdrPanorama(np.repeat(gray[..., None], 3, axis=2), scale=1.0)


def write_layout(path, layout: RoomLayout) -> None:
    with open(path, "w") as fh:
        json.dump(layout.to_dict(), fh, indent=2)
