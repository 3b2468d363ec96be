"""Eight-run transfer-mechanism matrix with error maps against the all-on run.

    python scripts/toggle_matrix.py --out runs/toggles
"""

import numpy as np

from panoheat.analysis import toggle_label, toggle_matrix, write_toggle_matrix

from _scene import build_scene, scene_parser


def main():
    args = scene_parser(__doc__.splitlines()[0]).parse_args()
    scene = build_scene(args)
    res = toggle_matrix(scene)
    write_toggle_matrix(res, args.out, scene.config["display"]["error_bound_c"])
    all_off = res.heat_maps[(False, False, False)]
    print(f"{'run':<30} {'max|err| K':>11} {'max(run - all-off) K':>21}")
    for c in res.combos:
        print(f"{toggle_label(c):<30} {np.nanmax(np.abs(res.error_maps[c])):11.4f} "
              f"{np.nanmax(res.heat_maps[c] - all_off):21.4f}")


if __name__ == "__main__":
    main()
