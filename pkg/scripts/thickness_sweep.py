"""Surface thickness sweep over 1, 5, 50, 100 and 150 mm.

    python scripts/thickness_sweep.py --out runs/thickness
"""

from panoheat.analysis import SweepSpec, run_sweep, write_sweep

from _scene import build_scene, patches_at, scene_parser


def main():
    ap = scene_parser(__doc__.splitlines()[0])
    ap.add_argument("--values-mm", type=float, nargs="+", default=[1, 5, 50, 100, 150])
    args = ap.parse_args()
    scene = build_scene(args)
    values = [v / 1000.0 for v in args.values_mm]
    res = run_sweep(SweepSpec("thickness", values, values[0], patches_at(scene)), scene)
    write_sweep(res, args.out, scene.config["display"]["error_bound_c"])
    for row in res.rows:
        print(f"{row['value'] * 1000:6g} mm  patch {row['patch_id']}  {row['mean_c']:8.3f} C  "
              f"{row['delta_c']:+7.3f} C  {row['pct_error']:+7.2f} %")


if __name__ == "__main__":
    main()
