"""Heat maps recorded every 30 s from 0 to 570 s (20 snapshots).

    python scripts/timeseries.py --out runs/timeseries
"""

from pathlib import Path

import numpy as np

from panoheat.hdrio import write_false_color_png, write_float_map
from panoheat.heatsim import run_sim
from panoheat.layout import bake_to_panorama
from panoheat.pipeline import kelvin_to_celsius, prepare

from _scene import build_scene, scene_parser


def main():
    ap = scene_parser(__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=570.0)
    ap.add_argument("--every", type=float, default=30.0)
    args = ap.parse_args()
    scene = build_scene(args).with_config(duration=args.duration, record_every=args.every)
    mesh, flux = prepare(scene.layout, scene.pano, scene.config)
    res = run_sim(mesh, flux, scene.materials, scene.sim)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    maps = [bake_to_panorama(mesh, snap, scene.layout, scene.pano.width, scene.pano.height)[0] for snap in res.snapshots]
    lo = min(float(m.min()) for m in maps)
    hi = max(float(m.max()) for m in maps)
    with open(out / "timeseries.csv", "w") as fh:
        fh.write("time_s,min_k,mean_k,max_k\n")
        for t, m in zip(res.times, maps):
            stem = f"t{int(t):04d}s"
            write_float_map(out / f"{stem}.bin", m)
            # kelvin display range, as in the recorded-sequence figure
            write_false_color_png(out / f"{stem}.png", m, lo, hi, scene.config["display"]["heat_cmap"])
            fh.write(f"{t:g},{m.min():.6f},{np.mean(m):.6f},{m.max():.6f}\n")
    print(f"{len(res.times)} snapshots, dt {res.dt_max:.4g} s, range {kelvin_to_celsius(lo):.2f}..{kelvin_to_celsius(hi):.2f} C")


if __name__ == "__main__":
    main()
