"""Write the sample scene used by the test suite and the README examples.

    python scripts/make_sample_scene.py tests/data

Also records a golden ``heat-sim`` run (surfaces.csv) that the CLI tests
compare against.
"""

import argparse
import json
import shutil
import tempfile
from pathlib import Path

import numpy as np

from panoheat.cli import dispatch
from panoheat.hdrio import write_rgbe
from panoheat.synth import SYNTHETIC_FLIR_CAL, cuboid_layout, render_panorama, write_layout
from panoheat.thermography import write_tlinear


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="tests/data")
    ap.add_argument("--width", type=int, default=256)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    layout = cuboid_layout()
    write_layout(out / "cuboid_layout.json", layout)
    pano = render_panorama(layout, args.width, args.width // 2)
    # stored at 1/100 of physical radiance, recorded via the EXPOSURE header
    write_rgbe(out / "sample.hdr", pano, exposure=0.01)

    w = args.width
    patches = [
        {"u": w * 0.5, "v": w * 0.5 * 0.85, "radius": w / 64},  # floor, below the camera line of sight
        {"u": w * 0.5, "v": w * 0.5 * 0.5, "radius": w / 64},  # wall_1, straight ahead
        {"u": w * 0.5, "v": w * 0.5 * 0.1, "radius": w / 64},  # ceiling
    ]
    (out / "patches.json").write_text(json.dumps(patches, indent=2))
    (out / "synthetic_flir_cal.json").write_text(json.dumps(SYNTHETIC_FLIR_CAL, indent=2))

    rng = np.random.default_rng(7)
    frame = 295.0 + 2.0 * rng.random((512, 640))
    write_tlinear(out / "frame.bin", frame, factor=0.01, offset=0.0)

    sim_cfg = {"mesh": {"grid_h": 0.1}, "sim": {"duration": 120, "record_every": 60}}
    (out / "sample_sim.json").write_text(json.dumps(sim_cfg, indent=2))
    golden = out / "golden"
    golden.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        code = dispatch(["heat-sim", "--layout", str(out / "cuboid_layout.json"), "--pano", str(out / "sample.hdr"),
                         "--config", str(out / "sample_sim.json"), "--out", tmp])
        if code:
            raise SystemExit(f"golden heat-sim run failed with exit code {code}")
        shutil.copy(Path(tmp) / "surfaces.csv", golden / "surfaces.csv")
    print(f"wrote sample scene to {out}")


if __name__ == "__main__":
    main()
