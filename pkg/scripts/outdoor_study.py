"""Indoor-outdoor exchange at 41.85 C and 11.85 C against a no-exchange run.

Error maps are drawn on a -0.2..0.2 C scale; values beyond it saturate.

    python scripts/outdoor_study.py --out runs/outdoor
"""

from pathlib import Path

import numpy as np

from panoheat.analysis import SweepSpec, run_sweep, write_sweep
from panoheat.hdrio import write_false_color_png

from _scene import build_scene, patches_at, scene_parser


def main():
    ap = scene_parser(__doc__.splitlines()[0])
    ap.add_argument("--bound", type=float, default=0.2, help="error map scale, C")
    ap.add_argument("--reversed-sign", action="store_true", help="use the reversed h_out*(T - T_out) exchange sign")
    args = ap.parse_args()
    scene = build_scene(args)
    if args.reversed_sign:
        scene = scene.with_config(reversed_exchange_sign=True)
    values = [None, 41.85 + 273.15, 11.85 + 273.15]
    res = run_sweep(SweepSpec("outdoor_temp", values, None, patches_at(scene)), scene)
    out = Path(args.out)
    write_sweep(res, out, args.bound)
    for value, err in zip(values[1:], res.error_maps[1:]):
        tag = f"{value - 273.15:.2f}C"
        write_false_color_png(out / f"outdoor_{tag}_error.png", err, -args.bound, args.bound,
                              scene.config["display"]["error_cmap"])
        print(f"T_out {tag}: error min {np.nanmin(err):+.4f} K, max {np.nanmax(err):+.4f} K")


if __name__ == "__main__":
    main()
