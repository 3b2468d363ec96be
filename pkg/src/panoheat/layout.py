"""Room layout model, planar vertex-grid meshing and panorama correspondence.

A layout is an extruded floor-plan polygon: one floor, one ceiling and one
wall per footprint edge.  Every plane carries an in-plane coordinate frame
``(s, t)`` with ``s`` along ``axis_u`` and ``t`` along ``axis_v``; mesh
lattices live on that frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import Point, Polygon, box

from .errors import InputError
from .pano_core import direction_to_pixel, pixel_grid_directions, direction_to_vector, vector_to_direction

DEFAULT_MATERIAL = "plaster_dense"
DEFAULT_REFLECTANCE = 0.5
_EPS = 1e-9


@dataclass
class SurfaceProps:
    material: str = DEFAULT_MATERIAL
    reflectance: float = DEFAULT_REFLECTANCE
    beta: float | None = None
    # (s0, t0, s1, t1) rectangles in plane coordinates, walls only
    apertures: list = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.reflectance <= 1.0):
            raise InputError(f"reflectance must lie in (0, 1], got {self.reflectance}")
        if self.beta is not None and not (0.0 <= self.beta <= 1.0):
            raise InputError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass
class Plane:
    id: str
    origin: np.ndarray
    axis_u: np.ndarray
    axis_v: np.ndarray
    extent_u: float
    extent_v: float
    normal: np.ndarray
    props: SurfaceProps
    # outline in (s, t) for non-rectangular planes (floor/ceiling)
    outline: list | None = None

    @property
    def material(self) -> str:
        return self.props.material

    @property
    def reflectance(self) -> float:
        return self.props.reflectance

    def region(self):
        """Shapely polygon of the simulated surface in plane coordinates."""
        if self.outline is not None:
            reg = Polygon(self.outline)
        else:
            reg = box(0.0, 0.0, self.extent_u, self.extent_v)
        for s0, t0, s1, t1 in self.props.apertures:
            reg = reg.difference(box(min(s0, s1), min(t0, t1), max(s0, s1), max(t0, t1)))
        return reg

    def is_rectangular(self) -> bool:
        if self.props.apertures:
            return False
        if self.outline is None:
            return True
        return abs(Polygon(self.outline).area - self.extent_u * self.extent_v) <= 1e-12 * self.extent_u * self.extent_v

    @property
    def area(self) -> float:
        if self.is_rectangular():
            return self.extent_u * self.extent_v
        return self.region().area

    def to_world(self, s, t) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)[..., None]
        t = np.asarray(t, dtype=np.float64)[..., None]
        return self.origin + s * self.axis_u + t * self.axis_v


@dataclass
class RoomLayout:
    footprint: list
    floor_z: float
    ceiling_z: float
    camera: np.ndarray
    surfaces: dict = field(default_factory=dict)
    yaw_offset: float = 0.0

    def __post_init__(self):
        self.footprint = [(float(x), float(y)) for x, y in self.footprint]
        self.camera = np.asarray(self.camera, dtype=np.float64)
        if len(self.footprint) < 3:
            raise InputError("footprint needs at least 3 vertices")
        poly = Polygon(self.footprint)
        if not poly.is_valid or not poly.exterior.is_simple or poly.area <= 0:
            raise InputError("footprint polygon must be simple (non-self-intersecting)")
        if self.camera.shape != (3,):
            raise InputError("camera must be [x, y, z]")
        if not (self.floor_z < self.camera[2] < self.ceiling_z):
            raise InputError("camera height must lie strictly between floor and ceiling")
        if not poly.contains(Point(self.camera[0], self.camera[1])):
            raise InputError("camera lies outside the footprint")

    @property
    def ccw(self) -> bool:
        return Polygon(self.footprint).exterior.is_ccw

    def props_for(self, sid: str) -> SurfaceProps:
        return self.surfaces.get(sid, self.surfaces.get("*", SurfaceProps()))

    @classmethod
    def from_dict(cls, d: dict) -> "RoomLayout":
        try:
            surfaces = {}
            for item in d.get("surfaces", []):
                sid = item["id"]
                surfaces[sid] = SurfaceProps(
                    material=item.get("material", DEFAULT_MATERIAL),
                    reflectance=float(item.get("reflectance", DEFAULT_REFLECTANCE)),
                    beta=item.get("beta"),
                    apertures=[tuple(map(float, a)) for a in item.get("apertures", [])],
                )
            return cls(
                footprint=d["footprint"],
                floor_z=float(d["floor_z"]),
                ceiling_z=float(d["ceiling_z"]),
                camera=d["camera"],
                surfaces=surfaces,
                yaw_offset=float(d.get("yaw_offset", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed layout: {exc}") from exc

    def to_dict(self) -> dict:
        out = {
            "footprint": [list(p) for p in self.footprint],
            "floor_z": self.floor_z,
            "ceiling_z": self.ceiling_z,
            "camera": self.camera.tolist(),
            "surfaces": [],
        }
        if self.yaw_offset:
            out["yaw_offset"] = self.yaw_offset
        for sid, p in self.surfaces.items():
            item = {"id": sid, "material": p.material, "reflectance": p.reflectance}
            if p.beta is not None:
                item["beta"] = p.beta
            if p.apertures:
                item["apertures"] = [list(a) for a in p.apertures]
            out["surfaces"].append(item)
        return out


def load_layout(path) -> RoomLayout:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    return RoomLayout.from_dict(data)


def build_surfaces(layout: RoomLayout) -> list[Plane]:
    """Floor, ceiling, then one wall per footprint edge; normals face the room."""
    pts = np.array(layout.footprint)
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    height = layout.ceiling_z - layout.floor_z
    planes = [
        Plane(
            "floor",
            np.array([xmin, ymin, layout.floor_z]),
            np.array([1.0, 0.0, 0.0]),
            np.array([0.0, 1.0, 0.0]),
            xmax - xmin,
            ymax - ymin,
            np.array([0.0, 0.0, 1.0]),
            layout.props_for("floor"),
            [(x - xmin, y - ymin) for x, y in layout.footprint],
        ),
        Plane(
            "ceiling",
            np.array([xmin, ymax, layout.ceiling_z]),
            np.array([1.0, 0.0, 0.0]),
            np.array([0.0, -1.0, 0.0]),
            xmax - xmin,
            ymax - ymin,
            np.array([0.0, 0.0, -1.0]),
            layout.props_for("ceiling"),
            [(x - xmin, ymax - y) for x, y in layout.footprint],
        ),
    ]
    sign = 1.0 if layout.ccw else -1.0
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        edge = q - p
        length = float(np.hypot(*edge))
        if length <= _EPS:
            raise InputError(f"footprint edge {i} has zero length")
        eu = edge / length
        planes.append(
            Plane(
                f"wall_{i}",
                np.array([p[0], p[1], layout.floor_z]),
                np.array([eu[0], eu[1], 0.0]),
                np.array([0.0, 0.0, 1.0]),
                length,
                height,
                sign * np.array([-eu[1], eu[0], 0.0]),
                layout.props_for(f"wall_{i}"),
            )
        )
    return planes


# -- meshing -----------------------------------------------------------------


@dataclass
class PlaneGrid:
    """Vertex lattice on one plane; arrays are indexed ``[i_u, j_v]``."""

    plane: Plane
    s: np.ndarray
    t: np.ndarray
    hu: float
    hv: float
    area: np.ndarray
    active: np.ndarray
    uv: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.s), len(self.t)

    @property
    def positions(self) -> np.ndarray:
        ss, tt = np.meshgrid(self.s, self.t, indexing="ij")
        return self.plane.to_world(ss, tt)


@dataclass
class SurfaceMesh:
    grids: list
    h: float

    def __iter__(self):
        return iter(self.grids)

    def __len__(self):
        return len(self.grids)

    @property
    def n_vertices(self) -> int:
        return sum(int(g.active.sum()) for g in self.grids)

    def by_id(self, sid: str) -> PlaneGrid:
        for g in self.grids:
            if g.plane.id == sid:
                return g
        raise KeyError(sid)


def _is_multiple(extent: float, h: float) -> bool:
    k = extent / h
    return abs(k - round(k)) <= 1e-9 * max(1.0, k)


def _vertex_count(extent: float, h: float) -> int:
    if _is_multiple(extent, h):
        return int(round(extent / h)) + 1
    return math.ceil(extent / h) + 1


def _spacing(extent: float, h: float, n: int) -> float:
    # exact h on whole multiples keeps shared lattice points bit-identical across layouts
    return float(h) if _is_multiple(extent, h) else extent / (n - 1)


def _cell_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = spacing / 2.0
    return w


def mesh_plane(plane: Plane, h: float) -> PlaneGrid:
    n = _vertex_count(plane.extent_u, h)
    m = _vertex_count(plane.extent_v, h)
    hu = _spacing(plane.extent_u, h, n)
    hv = _spacing(plane.extent_v, h, m)
    s = np.arange(n) * hu
    t = np.arange(m) * hv
    s[-1] = plane.extent_u
    t[-1] = plane.extent_v
    if plane.is_rectangular():
        area = np.outer(_cell_weights(n, hu), _cell_weights(m, hv))
    else:
        ss, tt = np.meshgrid(s, t, indexing="ij")
        cells = shapely.box(ss - hu / 2, tt - hv / 2, ss + hu / 2, tt + hv / 2)
        area = shapely.area(shapely.intersection(cells, plane.region()))
        area = np.where(area > 1e-12 * hu * hv, area, 0.0)
    return PlaneGrid(plane, s, t, hu, hv, area, area > 0.0)


def mesh_surfaces(planes: list[Plane], h: float) -> SurfaceMesh:
    """Lattice every plane with nominal spacing ``h`` (meters).

    Vertex counts are ``ceil(extent/h) + 1`` per axis, so the actual spacing
    may be slightly below ``h``.  Each vertex owns the surrounding cell clipped
    to its plane, so cell areas sum to the plane area.
    """
    if not h > 0:
        raise InputError(f"grid spacing must be positive, got {h}")
    smallest = min(min(p.extent_u, p.extent_v) for p in planes)
    if h > smallest + _EPS:
        raise InputError(f"grid spacing {h} m exceeds the smallest plane extent {smallest:.4g} m")
    return SurfaceMesh([mesh_plane(p, h) for p in planes], h)


# -- panorama correspondence -------------------------------------------------


def project_vertices(mesh: SurfaceMesh, layout: RoomLayout, w: int, h: int) -> list[np.ndarray]:
    """Continuous panorama pixel (u, v) of every vertex, arrays (n, m, 2)."""
    out = []
    for g in mesh:
        rel = g.positions - layout.camera
        if np.any(np.linalg.norm(rel, axis=-1) <= 1e-12):
            raise InputError(f"a vertex of {g.plane.id} coincides with the camera")
        u, v = direction_to_pixel(vector_to_direction(rel, layout.yaw_offset), w, h)
        g.uv = np.stack([u, v], axis=-1)
        out.append(g.uv)
    return out


def sample_at_vertices(mesh: SurfaceMesh, image: np.ndarray) -> list[np.ndarray]:
    """Nearest-pixel lookup of ``image`` at each projected vertex."""
    from .pano_core import sample_nearest

    out = []
    for g in mesh:
        if g.uv is None:
            raise InputError("vertices have not been projected; call project_vertices first")
        out.append(sample_nearest(image, g.uv[..., 0], g.uv[..., 1]))
    return out


@dataclass
class RayHits:
    """Per-pixel nearest hit: plane index (-1 for none), plane coordinates, distance."""

    plane: np.ndarray
    s: np.ndarray
    t: np.ndarray
    dist: np.ndarray

    @property
    def missed(self) -> int:
        return int((self.plane < 0).sum())


def raycast_planes(planes: list[Plane], camera, dirs: np.ndarray) -> RayHits:
    """Nearest in-bounds plane hit along each ray; depth sort handles concave rooms."""
    camera = np.asarray(camera, dtype=np.float64)
    shape = dirs.shape[:-1]
    best = np.full(shape, np.inf)
    idx = np.full(shape, -1, dtype=np.int64)
    bs = np.zeros(shape)
    bt = np.zeros(shape)
    for k, p in enumerate(planes):
        denom = dirs @ p.normal
        facing = denom < -1e-12
        dist = np.where(facing, ((p.origin - camera) @ p.normal) / np.where(facing, denom, -1.0), np.inf)
        hit = camera + np.where(facing, dist, 0.0)[..., None] * dirs
        rel = np.where(facing[..., None], hit - p.origin, 0.0)
        s = rel @ p.axis_u
        t = rel @ p.axis_v
        tol_u = _EPS * max(1.0, p.extent_u)
        tol_v = _EPS * max(1.0, p.extent_v)
        ok = facing & (dist > 0) & (s >= -tol_u) & (s <= p.extent_u + tol_u) & (t >= -tol_v) & (t <= p.extent_v + tol_v)
        if p.outline is not None and not p.is_rectangular():
            outline = Polygon(p.outline).buffer(_EPS)
            ok &= shapely.intersects_xy(outline, s, t)
        better = ok & (dist < best)
        best = np.where(better, dist, best)
        idx = np.where(better, k, idx)
        bs = np.where(better, s, bs)
        bt = np.where(better, t, bt)
    return RayHits(idx, bs, bt, best)


def pixel_rays(layout: RoomLayout, w: int, h: int) -> np.ndarray:
    theta, phi = pixel_grid_directions(w, h)
    return direction_to_vector(theta, phi, layout.yaw_offset)


def bake_to_panorama(mesh: SurfaceMesh, values: list, layout: RoomLayout, w: int, h: int,
                     max_missed_fraction: float = 1e-3) -> tuple[np.ndarray, int]:
    """Paint per-vertex values onto an equirectangular grid.

    Each pixel ray is intersected with the layout planes; the pixel takes the
    value of the lattice vertex nearest to the hit point.  Pixels that miss
    every plane, or land in an aperture, are NaN.  Returns the map and the
    number of missed pixels; too many misses means the room is not closed.
    """
    hits = raycast_planes([g.plane for g in mesh], layout.camera, pixel_rays(layout, w, h))
    out = np.full((h, w), np.nan)
    for k, g in enumerate(mesh):
        sel = hits.plane == k
        if not sel.any():
            continue
        s = hits.s[sel]
        t = hits.t[sel]
        i = np.clip(np.floor(s / g.hu + 0.5).astype(np.int64), 0, len(g.s) - 1)
        j = np.clip(np.floor(t / g.hv + 0.5).astype(np.int64), 0, len(g.t) - 1)
        vals = np.asarray(values[k], dtype=np.float64)[i, j]
        vals = np.where(g.active[i, j], vals, np.nan)
        for s0, t0, s1, t1 in g.plane.props.apertures:
            inside = (s > min(s0, s1)) & (s < max(s0, s1)) & (t > min(t0, t1)) & (t < max(t0, t1))
            vals = np.where(inside, np.nan, vals)
        out[sel] = vals
    missed = hits.missed
    if missed > max_missed_fraction * w * h:
        raise InputError(f"{missed} of {w * h} pixel rays hit no surface; is the room closed?")
    return out, missed


def surface_id_map(mesh: SurfaceMesh, layout: RoomLayout, w: int, h: int) -> np.ndarray:
    """Plane index hit by each pixel (-1 when none)."""
    return raycast_planes([g.plane for g in mesh], layout.camera, pixel_rays(layout, w, h)).plane
