"""Sensitivity sweeps, transfer-toggle matrix, error maps and thermal comparison."""

from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InputError
from .hdrio import write_false_color_png, write_float_map
from .layout import RoomLayout, build_surfaces
from .pano_core import PerspectiveSpec, crop_perspective
from .photometry import PatchSpec, patch_mean
from .pipeline import Scene, kelvin_to_celsius, simulate

SWEEP_PARAMETERS = ("material", "density", "conductivity", "specific_heat", "thickness", "outdoor_temp", "toggle_matrix")
_MATERIAL_FIELD = {"density": "rho", "conductivity": "k", "specific_heat": "cp"}


def worker_count() -> int:
    """PANOHEAT_THREADS caps parallelism; 0 or unset means one worker per CPU."""
    try:
        n = int(os.environ.get("PANOHEAT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def parallel_map(fn, items):
    items = list(items)
    if worker_count() == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass
class SweepSpec:
    parameter: str
    values: list
    baseline: object = None
    patches: list = field(default_factory=list)

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise InputError(f"unknown sweep parameter {self.parameter!r}")
        if self.parameter != "toggle_matrix":
            if not self.values:
                raise InputError("sweep values must not be empty")
            if self.baseline not in self.values:
                raise InputError(f"baseline {self.baseline!r} is not among the sweep values")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        from .photometry import load_patches

        try:
            return cls(d["parameter"], list(d.get("values", [])), d.get("baseline"), load_patches(d.get("patches", [])))
        except KeyError as exc:
            raise InputError(f"sweep spec missing {exc}") from exc


def _all_surfaces(layout: RoomLayout, **changes) -> RoomLayout:
    surfaces = {p.id: replace(p.props, **changes) for p in build_surfaces(layout)}
    return replace(layout, surfaces=surfaces)


def apply_parameter(scene: Scene, parameter: str, value) -> Scene:
    """Scene copy with one parameter changed; everything else untouched."""
    if parameter == "material":
        if value not in scene.materials:
            raise InputError(f"unknown material {value!r}")
        return Scene(_all_surfaces(scene.layout, material=value), scene.pano, scene.materials, scene.config)
    if parameter in _MATERIAL_FIELD:
        attr = _MATERIAL_FIELD[parameter]
        mats = {name: replace(m, **{attr: float(value)}) for name, m in scene.materials.items()}
        return Scene(scene.layout, scene.pano, mats, scene.config)
    if parameter == "thickness":
        return scene.with_config(thickness=float(value))
    if parameter == "outdoor_temp":
        if value is None:
            return scene.with_config(exchange=False, t_out=None)
        return scene.with_config(exchange=True, t_out=float(value))
    raise InputError(f"parameter {parameter!r} cannot be applied as a single value")


@dataclass
class SweepResult:
    parameter: str
    values: list
    baseline: object
    rows: list  # dicts: value, patch_id, mean_c, delta_c, pct_error
    heat_maps: list  # kelvin, aligned with values
    error_maps: list  # kelvin difference vs baseline
    runs: list


def _patch_rows(value, heat_c, base_c, patches):
    rows = []
    for i, p in enumerate(patches):
        mean, _ = patch_mean(heat_c, p)
        base, _ = patch_mean(base_c, p)
        delta = mean - base
        rows.append({"value": value, "patch_id": i, "mean_c": mean, "delta_c": delta,
                     "pct_error": 100.0 * delta / base})
    return rows


def run_sweep(spec: SweepSpec, scene: Scene, out_dims=None) -> SweepResult:
    """One full simulation per value; differences are taken against the baseline value."""
    def one(value):
        try:
            return simulate(apply_parameter(scene, spec.parameter, value), out_dims)
        except Exception as exc:
            raise type(exc)(f"sweep {spec.parameter}={value!r}: {exc}") from exc

    runs = parallel_map(one, spec.values)
    base_map = runs[spec.values.index(spec.baseline)].heat_map
    base_c = kelvin_to_celsius(base_map)
    rows = []
    errors = []
    for value, run in zip(spec.values, runs):
        rows.extend(_patch_rows(value, kelvin_to_celsius(run.heat_map), base_c, spec.patches))
        errors.append(run.heat_map - base_map)
    return SweepResult(spec.parameter, list(spec.values), spec.baseline, rows,
                       [r.heat_map for r in runs], errors, runs)


TOGGLE_KEYS = ("conduction", "radiation", "convection")


def toggle_label(combo) -> str:
    on = [k for k, v in zip(TOGGLE_KEYS, combo) if v]
    return "+".join(on) if on else "none"


@dataclass
class ToggleResult:
    combos: list  # tuples (conduction, radiation, convection), all-on first
    heat_maps: dict
    error_maps: dict
    runs: dict

    @property
    def baseline(self):
        return (True, True, True)


def toggle_matrix(scene: Scene, out_dims=None) -> ToggleResult:
    """All eight conduction/radiation/convection combinations against all-on."""
    combos = list(itertools.product((True, False), repeat=3))

    def one(combo):
        return simulate(scene.with_config(**dict(zip(TOGGLE_KEYS, combo))), out_dims)

    runs = dict(zip(combos, parallel_map(one, combos)))
    base = runs[(True, True, True)].heat_map
    heat = {c: r.heat_map for c, r in runs.items()}
    err = {c: r.heat_map - base for c, r in runs.items()}
    return ToggleResult(combos, heat, err, runs)


@dataclass
class PatchComparison:
    patch_id: int
    sim_c: float
    thermal_c: float
    delta_c: float


def compare_to_thermal(sim_map_k: np.ndarray, spec: PerspectiveSpec, thermal_k: np.ndarray,
                       patches: list[PatchSpec]) -> tuple[list[PatchComparison], np.ndarray]:
    """Crop the panoramic heat map to the thermal camera's view and compare patches.

    ``delta_c`` is simulation minus thermal.  Returns the rows and the crop.
    """
    thermal_k = np.asarray(thermal_k, dtype=np.float64)
    if (spec.out_height, spec.out_width) != thermal_k.shape:
        raise InputError(f"crop {spec.out_width}x{spec.out_height} does not match thermal frame "
                         f"{thermal_k.shape[1]}x{thermal_k.shape[0]}")
    crop = crop_perspective(sim_map_k, spec, sampling="nearest")
    rows = []
    for i, p in enumerate(patches):
        s, _ = patch_mean(kelvin_to_celsius(crop), p)
        t, _ = patch_mean(kelvin_to_celsius(thermal_k), p)
        rows.append(PatchComparison(i, s, t, s - t))
    return rows, crop


@dataclass
class PerturbationResult:
    base_map: np.ndarray
    heat_maps: list
    error_maps: list
    bounds: tuple = (-2.0, 2.0)


def layout_perturbation(scene: Scene, layouts: list[RoomLayout], out_dims=None,
                        bounds=(-2.0, 2.0)) -> PerturbationResult:
    """Heat maps for alternative layouts and their per-pixel difference from the base."""
    runs = parallel_map(lambda lay: simulate(Scene(lay, scene.pano, scene.materials, scene.config), out_dims),
                        [scene.layout, *layouts])
    base = runs[0].heat_map
    return PerturbationResult(base, [r.heat_map for r in runs[1:]], [r.heat_map - base for r in runs[1:]], tuple(bounds))


# -- output ------------------------------------------------------------------


def heat_bounds_c(maps) -> tuple[float, float]:
    vals = np.concatenate([kelvin_to_celsius(m)[np.isfinite(m)].ravel() for m in maps])
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo < 1e-6:
        hi = lo + 1e-3
    return lo, hi


def write_sweep(result: SweepResult, out_dir, error_bound: float = 2.0, cmap: str = "inferno",
                error_cmap: str = "coolwarm") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "sweep.csv"]
    with open(written[0], "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["value", "patch_id", "mean_c", "delta_c", "pct_error"])
        wr.writeheader()
        for row in result.rows:
            wr.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v) for k, v in row.items()})
    lo, hi = heat_bounds_c(result.heat_maps)
    for i, (value, hm, em) in enumerate(zip(result.values, result.heat_maps, result.error_maps)):
        stem = f"{i:02d}_{result.parameter}_{value}"
        write_float_map(out / f"{stem}_heat.bin", hm)
        write_false_color_png(out / f"{stem}_heat.png", kelvin_to_celsius(hm), lo, hi, cmap)
        write_false_color_png(out / f"{stem}_error.png", em, -error_bound, error_bound, error_cmap)
        written += [out / f"{stem}_heat.bin", out / f"{stem}_heat.png", out / f"{stem}_error.png"]
    return written


def write_toggle_matrix(result: ToggleResult, out_dir, error_bound: float = 2.0, cmap: str = "inferno",
                        error_cmap: str = "coolwarm") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi = heat_bounds_c(result.heat_maps.values())
    written = [out / "toggle_matrix.csv"]
    with open(written[0], "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index", "conduction", "radiation", "convection", "max_abs_error_k", "mean_error_k"])
        for i, c in enumerate(result.combos):
            em = result.error_maps[c]
            wr.writerow([i, *map(int, c), f"{np.nanmax(np.abs(em)):.9g}", f"{np.nanmean(em):.9g}"])
    for i, c in enumerate(result.combos):
        stem = f"{i}_{toggle_label(c)}"
        write_float_map(out / f"{stem}_heat.bin", result.heat_maps[c])
        write_false_color_png(out / f"{stem}_heat.png", kelvin_to_celsius(result.heat_maps[c]), lo, hi, cmap)
        write_false_color_png(out / f"{stem}_error.png", result.error_maps[c], -error_bound, error_bound, error_cmap)
        written += [out / f"{stem}_heat.bin", out / f"{stem}_heat.png", out / f"{stem}_error.png"]
    return written
