"""Heat-map error maps when one wall of the room is moved.

    python scripts/layout_perturbation.py --out runs/perturb --shift 0.1 0.3
"""

from pathlib import Path

import numpy as np

from panoheat.analysis import layout_perturbation
from panoheat.hdrio import write_false_color_png, write_float_map
from panoheat.synth import cuboid_layout

from _scene import build_scene, scene_parser


def main():
    ap = scene_parser(__doc__.splitlines()[0])
    ap.add_argument("--shift", type=float, nargs="+", default=[0.1, 0.3], help="outward shift of the back wall, m")
    args = ap.parse_args()
    if args.layout:
        ap.error("this study perturbs the synthetic cuboid; --layout is not supported")
    scene = build_scene(args)
    layouts = [cuboid_layout(depth=3.0 + s) for s in args.shift]
    res = layout_perturbation(scene, layouts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi = res.bounds
    for s, hm, em in zip(args.shift, res.heat_maps, res.error_maps):
        write_float_map(out / f"shift_{s:g}m_heat.bin", hm)
        write_float_map(out / f"shift_{s:g}m_error.bin", em)
        write_false_color_png(out / f"shift_{s:g}m_error.png", em, lo, hi, scene.config["display"]["error_cmap"])
        print(f"shift {s:g} m: max|err| {np.nanmax(np.abs(em)):.4f} K, "
              f"{int((np.abs(em) > 1e-6).sum())} changed pixels")


if __name__ == "__main__":
    main()
