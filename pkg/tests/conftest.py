from pathlib import Path

import pytest

from panoheat.config import load_config
from panoheat.hdrio import read_rgbe
from panoheat.heatsim import load_materials
from panoheat.layout import load_layout
from panoheat.pipeline import Scene
from panoheat.synth import cuboid_layout, render_panorama

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def materials():
    return load_materials()


@pytest.fixture(scope="session")
def sample_layout():
    return load_layout(DATA / "cuboid_layout.json")


@pytest.fixture(scope="session")
def sample_pano():
    return read_rgbe(DATA / "sample.hdr")


@pytest.fixture(scope="session")
def desk_scene(materials):
    """4 x 3 x 2.5 m room, h = 0.1 m, 512 x 256 panorama."""
    layout = cuboid_layout()
    return Scene(layout, render_panorama(layout, 512, 256), materials, load_config(overrides={"grid_h": 0.1}))


@pytest.fixture(scope="session")
def small_scene(materials):
    layout = cuboid_layout()
    return Scene(layout, render_panorama(layout, 128, 64), materials, load_config(overrides={"grid_h": 0.25}))


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, title, checks, elapsed, limit)``.

    ``checks`` maps a short label to ``(ok, detail)``.  The runtime limit is
    one more check.  Returns True when everything passed.
    """

    def report(n, title, checks, elapsed=None, limit=None):
        checks = dict(checks)
        if limit is not None:
            checks["runtime"] = (elapsed < limit, f"{elapsed:.2f} s < {limit:g} s")
        ok = all(c[0] for c in checks.values())
        detail = "; ".join(f"{k}: {'ok' if c[0] else 'FAILED'} ({c[1]})" for k, c in checks.items())
        _CRITERIA[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2} {title}: {detail}"
        print(_CRITERIA[n])
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
