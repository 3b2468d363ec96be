"""Material, density, conductivity and specific-heat sweeps.

    python scripts/material_sweeps.py --out runs/materials
    python scripts/material_sweeps.py --only density --out runs/density
"""

from pathlib import Path

from panoheat.analysis import SweepSpec, run_sweep, write_sweep

from _scene import build_scene, patches_at, scene_parser

SWEEPS = {
    "material": (["plaster_dense", "copper", "polystyrene", "pvc", "sheep_wool"], "plaster_dense"),
    "density": ([1200, 1250, 1300, 1350, 1400, 1500, 3300, 5300, 7300, 9300], 1300),
    "conductivity": ([0.01, 0.10, 0.20, 0.50, 0.70], 0.50),
    "specific_heat": ([500, 750, 1000, 1250, 1500], 1000),
}


def main():
    ap = scene_parser(__doc__.splitlines()[0])
    ap.add_argument("--only", choices=sorted(SWEEPS))
    args = ap.parse_args()
    scene = build_scene(args)
    patches = patches_at(scene)
    for name, (values, baseline) in SWEEPS.items():
        if args.only and name != args.only:
            continue
        res = run_sweep(SweepSpec(name, values, baseline, patches), scene)
        write_sweep(res, Path(args.out) / name, scene.config["display"]["error_bound_c"])
        print(f"== {name} (baseline {baseline})")
        for row in res.rows:
            print(f"  {str(row['value']):>14}  patch {row['patch_id']}  {row['mean_c']:8.3f} C  "
                  f"{row['delta_c']:+7.3f} C  {row['pct_error']:+7.2f} %")


if __name__ == "__main__":
    main()
