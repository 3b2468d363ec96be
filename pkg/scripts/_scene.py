"""Scene construction shared by the experiment scripts."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from panoheat.config import load_config
from panoheat.hdrio import read_panorama
from panoheat.heatsim import load_materials
from panoheat.layout import load_layout
from panoheat.pano_core import direction_to_pixel, vector_to_direction
from panoheat.photometry import PatchSpec
from panoheat.pipeline import Scene
from panoheat.synth import cuboid_layout, render_panorama


def scene_parser(description: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--layout", help="layout JSON (default: synthetic 4 x 3 x 2.5 m room)")
    ap.add_argument("--pano", help="HDR panorama (default: rendered for the synthetic room)")
    ap.add_argument("--materials", help="materials JSON (default: packaged table)")
    ap.add_argument("--config", help="config JSON overriding the defaults")
    ap.add_argument("--grid-h", type=float, default=0.1, help="vertex spacing in meters")
    ap.add_argument("--width", type=int, default=512, help="panorama width for the synthetic scene")
    ap.add_argument("--out", required=True)
    return ap


def build_scene(args) -> Scene:
    cfg = load_config(args.config, {"grid_h": args.grid_h})
    layout = load_layout(args.layout) if args.layout else cuboid_layout()
    pano = read_panorama(args.pano) if args.pano else render_panorama(layout, args.width, args.width // 2)
    return Scene(layout, pano, load_materials(args.materials), cfg)


# floor sun patch, wall sun patch, shaded wall, ceiling of the synthetic room
DEFAULT_POINTS = [(3.0, 1.2, 0.0), (2.4, 3.0, 1.3), (0.0, 1.5, 1.2), (2.0, 1.0, 2.5)]


def patches_at(scene: Scene, points=DEFAULT_POINTS, radius: float = 3.0) -> list[PatchSpec]:
    """Patches centred on the panorama pixels that see the given world points."""
    out = []
    for p in points:
        theta, phi = vector_to_direction(np.asarray(p, dtype=float) - scene.layout.camera, scene.layout.yaw_offset)
        u, v = direction_to_pixel((float(theta), float(phi)), scene.pano.width, scene.pano.height)
        out.append(PatchSpec(u, v, radius))
    return out


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=float))
