"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 numeric/stability error, 3 I/O error.
Angles on the command line are in degrees.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import SweepSpec, run_sweep, toggle_matrix, write_sweep, write_toggle_matrix
from .config import load_config, load_json
from .errors import InputError, NumericError, StabilityError
from .hdrio import read_float_map, read_panorama, write_false_color_png, write_float_map
from .heatsim import SimConfig, load_materials, run_sim
from .layout import bake_to_panorama, build_surfaces, load_layout, mesh_surfaces
from .pano_core import PerspectiveSpec, crop_perspective
from .photometry import flux_from_illuminance, illuminance_from_luminance, load_patches, patch_mean
from .pipeline import Scene, kelvin_to_celsius, luminance_map, prepare, surface_reflectance_map
from .thermography import load_calibration, read_tlinear, reemit, write_tlinear


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_json(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list
    config_sha256: str | None = None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    dt: float | None = None
    dt_bound: float | None = None
    step_count: int | None = None
    toggles: dict = field(default_factory=dict)
    materials: dict = field(default_factory=dict)
    version: str = __version__
    wall_clock_s: float = 0.0

    def add_inputs(self, *paths):
        for p in paths:
            if p:
                self.inputs[str(p)] = sha256_file(p)

    def write(self, out_dir: Path, outputs, started: float) -> Path:
        """Digest the outputs and write ``manifest.json`` atomically."""
        self.outputs = {str(Path(p).relative_to(out_dir)): sha256_file(p) for p in sorted(map(Path, outputs))}
        self.wall_clock_s = time.perf_counter() - started
        target = out_dir / "manifest.json"
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
        os.replace(tmp, target)
        return target


# -- helpers -----------------------------------------------------------------


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_map(out: Path, stem: str, data, lo=None, hi=None, cmap="inferno") -> list[Path]:
    write_float_map(out / f"{stem}.bin", data)
    finite = np.asarray(data)[np.isfinite(data)]
    lo = float(finite.min()) if lo is None else lo
    hi = float(finite.max()) if hi is None else hi
    if hi <= lo:
        hi = lo + 1e-6
    write_false_color_png(out / f"{stem}.png", data, lo, hi, cmap)
    return [out / f"{stem}.bin", out / f"{stem}.png"]


def _scene(args, cfg) -> Scene:
    return Scene(load_layout(args.layout), read_panorama(args.pano), load_materials(args.materials), cfg)


def _reflectance(args, cfg, pano):
    if args.layout:
        return surface_reflectance_map(load_layout(args.layout), pano.width, pano.height)
    return args.reflectance


def _view(args, w=None, h=None) -> PerspectiveSpec:
    return PerspectiveSpec(math.radians(args.yaw), math.radians(args.pitch), math.radians(args.hfov),
                           w or args.width, h or args.height)


# -- commands ----------------------------------------------------------------


def cmd_light_map(args, man, cfg):
    pano = read_panorama(args.pano)
    man.add_inputs(args.pano, args.config)
    out = _out_dir(args.out)
    return out, _write_map(out, "luminance", luminance_map(pano, cfg), 0.0, args.vmax)


def cmd_illum_map(args, man, cfg, flux=False):
    pano = read_panorama(args.pano)
    man.add_inputs(args.pano, args.config, args.layout)
    illum = illuminance_from_luminance(luminance_map(pano, cfg), _reflectance(args, cfg, pano))
    out = _out_dir(args.out)
    if flux:
        return out, _write_map(out, "flux", flux_from_illuminance(illum, cfg["photometry"]["lux_per_watt"]), 0.0, args.vmax)
    return out, _write_map(out, "illuminance", illum, 0.0, args.vmax)


def cmd_patch_stats(args, man, cfg):
    data = read_float_map(args.map)
    if data.ndim != 2:
        raise InputError("patch-stats needs a single-channel map")
    patches = load_patches(load_json(args.patches))
    man.add_inputs(args.map, args.patches)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["patch_id", "mean", "count"])
        for i, p in enumerate(patches):
            mean, count = patch_mean(data, p)
            wr.writerow([i, f"{mean:.12g}", count])
    print(out_path.read_text(), end="")
    return out_path.parent, [out_path]


def cmd_heat_sim(args, man, cfg):
    scene = _scene(args, cfg)
    man.add_inputs(args.layout, args.pano, args.materials, args.config)
    sim = scene.sim
    mesh, flux = prepare(scene.layout, scene.pano, cfg)
    result = run_sim(mesh, flux, scene.materials, sim)
    w = args.width or scene.pano.width
    h = args.height or scene.pano.height
    out = _out_dir(args.out)
    written = []
    maps = []
    for t, snap in zip(result.times, result.snapshots):
        tag = f"t{int(round(t * 1000)):09d}ms"
        fdir = out / "fields" / tag
        fdir.mkdir(parents=True, exist_ok=True)
        for g, field_ in zip(mesh, snap):
            write_float_map(fdir / f"{g.plane.id}.bin", field_)
            written.append(fdir / f"{g.plane.id}.bin")
        heat, _ = bake_to_panorama(mesh, snap, scene.layout, w, h)
        maps.append((tag, heat))
    fdir = out / "fields" / "final"
    fdir.mkdir(parents=True, exist_ok=True)
    for g, field_ in zip(mesh, result.final):
        write_float_map(fdir / f"{g.plane.id}.bin", field_)
        written.append(fdir / f"{g.plane.id}.bin")
    final_map, missed = bake_to_panorama(mesh, result.final, scene.layout, w, h)
    maps.append(("final", final_map))
    lo, hi = _bounds_c([m for _, m in maps])
    for tag, heat in maps:
        written += _write_map(out, f"heat_{tag}", kelvin_to_celsius(heat), lo, hi, cfg["display"]["heat_cmap"])
    for g, f in zip(mesh, flux):
        write_float_map(out / "fields" / f"flux_{g.plane.id}.bin", f)
        written.append(out / "fields" / f"flux_{g.plane.id}.bin")
    with open(out / "surfaces.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["surface", "material", "beta", "vertices", "area_m2", "mean_flux_w_m2", "final_mean_c"])
        for g, f, T in zip(mesh, flux, result.final):
            a = g.area
            wr.writerow([g.plane.id, result.materials[g.plane.id], f"{result.betas[g.plane.id]:.6g}",
                         int(g.active.sum()), f"{a.sum():.9g}",
                         f"{(a * f).sum() / a.sum():.9g}", f"{(a * T).sum() / a.sum() - 273.15:.9g}"])
    written.append(out / "surfaces.csv")
    man.config_sha256 = sha256_json(cfg)
    man.dt = result.dt_max
    man.dt_bound = result.dt_bound
    man.step_count = result.n_steps
    man.toggles = sim.toggles
    man.materials = result.materials
    print(f"simulated {cfg['sim']['duration']} s in {result.n_steps} steps (dt <= {result.dt_max:.6g} s, "
          f"bound {result.dt_bound:.6g} s); {len(result.times)} snapshots, {missed} unassigned pixels")
    return out, written


def _bounds_c(maps):
    vals = np.concatenate([kelvin_to_celsius(m)[np.isfinite(m)] for m in maps])
    return float(vals.min()), float(max(vals.max(), vals.min() + 1e-6))


def cmd_bake_pano(args, man, cfg):
    layout = load_layout(args.layout)
    mesh = mesh_surfaces(build_surfaces(layout), cfg["mesh"]["grid_h"])
    fdir = Path(args.fields)
    values = []
    for g in mesh:
        arr = read_float_map(fdir / f"{g.plane.id}.bin")
        if arr.shape != g.shape:
            raise InputError(f"{g.plane.id}: field shape {arr.shape} does not match grid {g.shape}; check grid_h")
        values.append(arr)
        man.add_inputs(fdir / f"{g.plane.id}.bin")
    man.add_inputs(args.layout, args.config)
    heat, missed = bake_to_panorama(mesh, values, layout, args.width, args.height)
    out = _out_dir(args.out)
    print(f"baked {args.width}x{args.height}, {missed} unassigned pixels")
    return out, _write_map(out, "heat", kelvin_to_celsius(heat) if args.celsius else heat,
                           cmap=cfg["display"]["heat_cmap"])


def cmd_crop(args, man, cfg):
    if bool(args.map) == bool(args.pano):
        raise InputError("crop needs exactly one of --map or --pano")
    src = read_float_map(args.map) if args.map else read_panorama(args.pano)
    man.add_inputs(args.map or args.pano)
    img = crop_perspective(src, _view(args), sampling=args.sampling)
    out = _out_dir(args.out)
    if img.ndim == 3:
        write_float_map(out / "crop.bin", img)
        return out, [out / "crop.bin"]
    return out, _write_map(out, "crop", img)


def cmd_flir_correct(args, man, cfg):
    cal = load_calibration(args.cal)
    frame = read_tlinear(args.frame, args.sidecar)
    man.add_inputs(args.frame, args.cal)
    corrected = reemit(frame.values, args.emissivity, cal)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.float:
        write_float_map(out, corrected)
        written = [out]
    else:
        meta = load_json(args.sidecar or str(args.frame) + ".json")
        write_tlinear(out, corrected, float(meta["factor"]), float(meta.get("offset", 0.0)))
        written = [out, out.with_name(out.name + ".json")]
    print(f"corrected {frame.width}x{frame.height} frame: eps_hat={cal.eps_hat} -> eps={args.emissivity}; "
          f"mean {frame.values.mean():.4f} K -> {corrected.mean():.4f} K")
    return out.parent, written


def cmd_sweep(args, man, cfg):
    spec = SweepSpec.from_dict(load_json(args.spec))
    if spec.parameter == "toggle_matrix":
        return cmd_toggle_matrix(args, man, cfg)
    scene = _scene(args, cfg)
    man.add_inputs(args.spec, args.layout, args.pano, args.materials, args.config)
    res = run_sweep(spec, scene, (args.width or scene.pano.width, args.height or scene.pano.height))
    out = _out_dir(args.out)
    man.config_sha256 = sha256_json(cfg)
    return out, write_sweep(res, out, cfg["display"]["error_bound_c"], cfg["display"]["heat_cmap"], cfg["display"]["error_cmap"])


def cmd_toggle_matrix(args, man, cfg):
    scene = _scene(args, cfg)
    man.add_inputs(args.layout, args.pano, args.materials, args.config)
    res = toggle_matrix(scene, (args.width or scene.pano.width, args.height or scene.pano.height))
    out = _out_dir(args.out)
    man.config_sha256 = sha256_json(cfg)
    return out, write_toggle_matrix(res, out, cfg["display"]["error_bound_c"], cfg["display"]["heat_cmap"], cfg["display"]["error_cmap"])


def cmd_compare(args, man, cfg):
    from .analysis import compare_to_thermal

    sim_map = read_float_map(args.heat_map)
    frame = read_tlinear(args.thermal, args.sidecar)
    thermal = frame.values
    man.add_inputs(args.heat_map, args.thermal, args.cal, args.patches)
    if args.cal and args.emissivity is not None:
        thermal = reemit(thermal, args.emissivity, load_calibration(args.cal))
    if args.celsius_map:
        sim_map = sim_map + 273.15
    rows, crop = compare_to_thermal(sim_map, _view(args, frame.width, frame.height), thermal,
                                    load_patches(load_json(args.patches)))
    out = _out_dir(args.out)
    written = [out / "compare.csv"]
    with open(written[0], "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["patch_id", "sim_c", "thermal_c", "delta_c"])
        for r in rows:
            wr.writerow([r.patch_id, f"{r.sim_c:.9g}", f"{r.thermal_c:.9g}", f"{r.delta_c:.9g}"])
    lo, hi = _bounds_c([crop, thermal])
    written += _write_map(out, "sim_crop", kelvin_to_celsius(crop), lo, hi)
    written += _write_map(out, "thermal", kelvin_to_celsius(thermal), lo, hi)
    print(written[0].read_text(), end="")
    return out, written


def cmd_layout_check(args, man, cfg):
    layout = load_layout(args.layout)
    planes = build_surfaces(layout)
    mesh = mesh_surfaces(planes, cfg["mesh"]["grid_h"])
    print(f"{len(planes)} surfaces")
    for p, g in zip(planes, mesh):
        print(f"  {p.id:<8} {p.extent_u:.3f} x {p.extent_v:.3f} m  area {p.area:.4f} m2  "
              f"normal ({p.normal[0] + 0.0:+.3f}, {p.normal[1] + 0.0:+.3f}, {p.normal[2] + 0.0:+.3f})  "
              f"{p.material} R={p.reflectance:g}  grid {g.shape[0]}x{g.shape[1]}")
    return None, []


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="panoheat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--config", help="JSON config overriding packaged defaults")
        return sp

    def scene_args(sp):
        sp.add_argument("--layout", required=True)
        sp.add_argument("--pano", required=True, help="Radiance .hdr or raw float panorama")
        sp.add_argument("--materials", help="materials JSON (default: packaged table)")
        sp.add_argument("--out", required=True)
        sp.add_argument("--width", type=int, help="baked map width (default: panorama width)")
        sp.add_argument("--height", type=int)

    def view_args(sp, dims=True):
        sp.add_argument("--yaw", type=float, default=0.0, help="degrees, 0 = panorama center")
        sp.add_argument("--pitch", type=float, default=0.0, help="degrees, positive looks up")
        sp.add_argument("--hfov", type=float, default=50.0, help="horizontal field of view, degrees")
        if dims:
            sp.add_argument("--width", type=int, default=640)
            sp.add_argument("--height", type=int, default=512)

    sp = add("light-map", cmd_light_map, "per-pixel luminance (cd/m2)")
    sp.add_argument("--pano", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--vmax", type=float, help="upper bound of the false-color PNG")

    for name, help_, flux in (("illum-map", "per-pixel illuminance (lux)", False),
                              ("flux-map", "per-pixel energy influx (W/m2)", True)):
        sp = add(name, (lambda a, m, c, _f=flux: cmd_illum_map(a, m, c, _f)), help_)
        sp.add_argument("--pano", required=True)
        sp.add_argument("--out", required=True)
        grp = sp.add_mutually_exclusive_group()
        grp.add_argument("--layout", help="per-surface reflectance from a layout")
        grp.add_argument("--reflectance", type=float, default=0.5, help="scene-wide reflectance")
        sp.add_argument("--vmax", type=float)

    sp = add("patch-stats", cmd_patch_stats, "circular patch means of a raw map")
    sp.add_argument("--map", required=True)
    sp.add_argument("--patches", required=True, help="JSON array of {u, v, radius}")
    sp.add_argument("--out", required=True, help="CSV path")

    sp = add("heat-sim", cmd_heat_sim, "transient heat simulation and baked heat maps")
    scene_args(sp)
    sp.add_argument("--dt", type=float, help="time step (s); must respect the stability bound")

    sp = add("bake-pano", cmd_bake_pano, "bake per-vertex fields onto a panorama")
    sp.add_argument("--layout", required=True)
    sp.add_argument("--fields", required=True, help="directory of <surface>.bin fields")
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--height", type=int, required=True)
    sp.add_argument("--celsius", action="store_true", help="write degrees C instead of kelvin")
    sp.add_argument("--out", required=True)

    sp = add("crop", cmd_crop, "perspective crop of a panorama or raw map")
    sp.add_argument("--map")
    sp.add_argument("--pano")
    view_args(sp)
    sp.add_argument("--sampling", choices=("nearest", "bilinear"), default="nearest")
    sp.add_argument("--out", required=True)

    sp = add("flir-correct", cmd_flir_correct, "re-express a TLinear frame for a new emissivity")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--sidecar", help="frame metadata JSON (default: <frame>.json)")
    sp.add_argument("--cal", required=True)
    sp.add_argument("--emissivity", type=float, required=True)
    sp.add_argument("--float", action="store_true", help="write a raw float64 map instead of TLinear")
    sp.add_argument("--out", required=True)

    sp = add("sweep", cmd_sweep, "one-parameter sensitivity sweep")
    sp.add_argument("--spec", required=True)
    scene_args(sp)

    sp = add("toggle-matrix", cmd_toggle_matrix, "all conduction/radiation/convection combinations")
    scene_args(sp)

    sp = add("compare", cmd_compare, "compare a baked heat map with a thermal frame")
    sp.add_argument("--heat-map", required=True, help="raw panoramic heat map (kelvin)")
    sp.add_argument("--celsius-map", action="store_true", help="heat map is in degrees C")
    sp.add_argument("--thermal", required=True)
    sp.add_argument("--sidecar")
    sp.add_argument("--cal")
    sp.add_argument("--emissivity", type=float, help="re-emit the thermal frame before comparing")
    sp.add_argument("--patches", required=True)
    view_args(sp, dims=False)
    sp.add_argument("--out", required=True)

    sp = add("layout-check", cmd_layout_check, "validate a layout and list its surfaces")
    sp.add_argument("--layout", required=True)
    return p


def _effective_config(args) -> dict:
    over = {}
    if getattr(args, "dt", None) is not None:
        over["dt"] = args.dt
    cfg = load_config(args.config, over)
    SimConfig.from_dict(cfg["sim"])
    return cfg


def dispatch(argv=None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            parser.print_help(sys.stderr)
            return 1
        cfg = _effective_config(args)
        man = RunManifest(args.command, list(sys.argv[1:] if argv is None else argv))
        man.config_sha256 = sha256_json(cfg)
        out, written = args.fn(args, man, cfg)
        if out is not None:
            man.write(out, written, started)
        return 0
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.bound is not None:
            print(f"stability bound: dt <= {exc.bound:.6g} s", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
