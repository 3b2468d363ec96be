"""Scene-level pipeline: panorama photometry -> per-vertex flux -> heat -> baked map."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import load_config
from .heatsim import SimConfig, SimResult, run_sim
from .layout import (RoomLayout, SurfaceMesh, bake_to_panorama, build_surfaces, mesh_surfaces, pixel_rays,
                     project_vertices, raycast_planes, sample_at_vertices)
from .pano_core import HdrPanorama
from .photometry import flux_from_illuminance, illuminance_from_luminance, luminance_from_hdr


@dataclass
class Scene:
    """Everything one heat simulation consumes."""

    layout: RoomLayout
    pano: HdrPanorama
    materials: dict
    config: dict = field(default_factory=lambda: load_config())

    def with_config(self, **sim_overrides) -> "Scene":
        return Scene(self.layout, self.pano, self.materials, load_config(overrides=_nest(self.config, sim_overrides)))

    @property
    def sim(self) -> SimConfig:
        return SimConfig.from_dict(self.config["sim"])


def _nest(cfg: dict, sim_overrides: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in cfg.items() if not k.startswith("_")}
    for key, val in sim_overrides.items():
        for sec, body in out.items():
            if isinstance(body, dict) and key in body:
                body[key] = val
                break
        else:
            raise KeyError(key)
    return out


@dataclass
class SceneRun:
    mesh: SurfaceMesh
    flux: list
    result: SimResult
    heat_map: np.ndarray  # kelvin, baked final field
    missed: int


def luminance_map(pano: HdrPanorama, cfg: dict) -> np.ndarray:
    ph = cfg["photometry"]
    return luminance_from_hdr(pano, ph["efficacy_lm_per_w"], ph["channel_weights"])


def vertex_flux(mesh: SurfaceMesh, lum: np.ndarray, cfg: dict) -> list[np.ndarray]:
    """W/m^2 per vertex from the luminance seen at each vertex's pixel."""
    out = []
    for g, L in zip(mesh, sample_at_vertices(mesh, lum)):
        E = illuminance_from_luminance(L, g.plane.reflectance)
        out.append(flux_from_illuminance(E, cfg["photometry"]["lux_per_watt"]))
    return out


def prepare(layout: RoomLayout, pano: HdrPanorama, cfg: dict) -> tuple[SurfaceMesh, list]:
    mesh = mesh_surfaces(build_surfaces(layout), cfg["mesh"]["grid_h"])
    project_vertices(mesh, layout, pano.width, pano.height)
    return mesh, vertex_flux(mesh, luminance_map(pano, cfg), cfg)


def simulate(scene: Scene, out_dims: tuple[int, int] | None = None) -> SceneRun:
    """Full run from scratch; ``out_dims`` = (width, height) of the baked map."""
    mesh, flux = prepare(scene.layout, scene.pano, scene.config)
    result = run_sim(mesh, flux, scene.materials, scene.sim)
    w, h = out_dims or (scene.pano.width, scene.pano.height)
    heat, missed = bake_to_panorama(mesh, result.final, scene.layout, w, h)
    return SceneRun(mesh, flux, result, heat, missed)


def kelvin_to_celsius(t):
    return np.asarray(t, dtype=np.float64) - 273.15



def surface_reflectance_map(layout: RoomLayout, w: int, h: int) -> np.ndarray:
    """Reflectance of the surface seen by each pixel; pixels that miss get 1."""
    planes = build_surfaces(layout)
    hits = raycast_planes(planes, layout.camera, pixel_rays(layout, w, h))
    refl = np.ones((h, w))
    for k, p in enumerate(planes):
        refl[hits.plane == k] = p.reflectance
    return refl
