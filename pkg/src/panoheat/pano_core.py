"""Equirectangular image model, projection math and perspective cropping.

Conventions
-----------
* Pixel centers sit at half-integer offsets: column ``u`` covers azimuth
  ``theta = 2*pi*(u + 0.5)/w`` and row ``v`` covers polar angle
  ``phi = pi*(v + 0.5)/h``.  ``phi = 0`` is straight up.
* World frame is right-handed, z up.  The image center (``theta = pi``,
  ``phi = pi/2``) looks along world +x; azimuth increases to the right,
  i.e. clockwise seen from above.
* ``yaw_offset`` rotates the panorama about z: a world azimuth ``a``
  appears at panorama azimuth ``a + yaw_offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError

TWO_PI = 2.0 * math.pi


@dataclass
class HdrPanorama:
    """Linear-radiance RGB equirectangular image.

    ``pixels`` has shape (height, width, 3).  ``scale`` converts stored
    values to physical radiance.
    """

    pixels: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise InputError(f"panorama pixels must be (h, w, 3), got {px.shape}")
        h, w = px.shape[:2]
        if w != 2 * h:
            raise InputError(f"equirectangular panorama needs width = 2*height, got {w}x{h}")
        if not np.all(np.isfinite(px)) or np.any(px < 0):
            raise InputError("panorama values must be finite and non-negative")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InputError(f"panorama scale must be positive, got {self.scale}")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


class Direction(NamedTuple):
    theta: float
    phi: float


@dataclass(frozen=True)
class PerspectiveSpec:
    """Pinhole view: yaw/pitch in radians (yaw follows panorama azimuth,
    positive pitch looks up), horizontal field of view in radians."""

    yaw: float
    pitch: float
    hfov: float
    out_width: int
    out_height: int

    def __post_init__(self):
        if not (0.0 < self.hfov < math.pi):
            raise InputError(f"horizontal FOV must lie in (0, pi), got {self.hfov}")
        if self.out_width <= 0 or self.out_height <= 0:
            raise InputError("output dimensions must be positive")

    @property
    def vfov(self) -> float:
        return 2.0 * math.atan(math.tan(self.hfov / 2.0) * self.out_height / self.out_width)


def pixel_to_direction(u, v, w: int, h: int) -> Direction:
    """Direction through the center of pixel (u, v).  Accepts arrays."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any(u < 0) or np.any(u >= w) or np.any(v < 0) or np.any(v >= h):
        raise InputError(f"pixel outside {w}x{h} image")
    theta = TWO_PI * (u + 0.5) / w
    phi = math.pi * (v + 0.5) / h
    if theta.ndim == 0:
        return Direction(float(theta), float(phi))
    return Direction(theta, phi)


def direction_to_pixel(d, w: int, h: int):
    """Continuous pixel coordinates of a direction; pixel centers are integers."""
    theta = np.mod(np.asarray(d[0], dtype=np.float64), TWO_PI)
    phi = np.asarray(d[1], dtype=np.float64)
    u = theta * w / TWO_PI - 0.5
    v = phi * h / math.pi - 0.5
    if u.ndim == 0:
        return float(u), float(v)
    return u, v


def direction_to_vector(theta, phi, yaw_offset: float = 0.0) -> np.ndarray:
    """Unit vectors (..., 3) in the world frame."""
    a = np.asarray(theta, dtype=np.float64) - yaw_offset
    phi = np.asarray(phi, dtype=np.float64)
    s = np.sin(phi)
    return np.stack([-s * np.cos(a), s * np.sin(a), np.cos(phi)], axis=-1)


def vector_to_direction(vec, yaw_offset: float = 0.0) -> Direction:
    """Inverse of :func:`direction_to_vector`; vectors need not be normalized."""
    vec = np.asarray(vec, dtype=np.float64)
    x, y, z = vec[..., 0], vec[..., 1], vec[..., 2]
    norm = np.sqrt(x * x + y * y + z * z)
    theta = np.mod(np.arctan2(y, -x) + yaw_offset, TWO_PI)
    phi = np.arccos(np.clip(z / norm, -1.0, 1.0))
    return Direction(theta, phi)


def solid_angle_weights(w: int, h: int) -> np.ndarray:
    """Per-pixel solid angle (h, w) of an equirectangular grid.

    Rows are integrated exactly (``cos`` of the row edges) rather than with
    the midpoint ``sin(phi)*dphi``, whose sum is short of 4*pi by a relative
    ``(pi/2h)^2/6``.
    """
    edges = np.cos(math.pi * np.arange(h + 1) / h)
    row = (edges[:-1] - edges[1:]) * (TWO_PI / w)
    return np.repeat(row[:, None], w, axis=1)


def pixel_grid_directions(w: int, h: int) -> Direction:
    """Directions of every pixel center, each array shaped (h, w)."""
    uu, vv = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    return pixel_to_direction(uu, vv, w, h)


def sample_nearest(img: np.ndarray, u, v) -> np.ndarray:
    """Nearest-pixel lookup at continuous coordinates, wrapping in u."""
    h, w = img.shape[:2]
    col = np.mod(np.floor(np.asarray(u) + 0.5).astype(np.int64), w)
    row = np.clip(np.floor(np.asarray(v) + 0.5).astype(np.int64), 0, h - 1)
    return img[row, col]


def sample_bilinear(img: np.ndarray, u, v) -> np.ndarray:
    """Bilinear lookup at continuous coordinates, wrapping in u, clamped in v."""
    h, w = img.shape[:2]
    u = np.asarray(u, dtype=np.float64)
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, h - 1.0)
    u0 = np.floor(u)
    v0 = np.floor(v)
    fu = u - u0
    fv = v - v0
    c0 = np.mod(u0.astype(np.int64), w)
    c1 = np.mod(c0 + 1, w)
    r0 = v0.astype(np.int64)
    r1 = np.minimum(r0 + 1, h - 1)
    if img.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    top = img[r0, c0] * (1.0 - fu) + img[r0, c1] * fu
    bot = img[r1, c0] * (1.0 - fu) + img[r1, c1] * fu
    return top * (1.0 - fv) + bot * fv


def view_basis(yaw: float, pitch: float):
    """Forward, right and up unit vectors (panorama frame, no yaw offset)."""
    theta = math.pi + yaw
    phi = math.pi / 2.0 - pitch
    fwd = direction_to_vector(theta, phi)
    right = np.array([math.sin(theta), math.cos(theta), 0.0])
    up = np.cross(right, fwd)
    return fwd, right, up


def perspective_rays(spec: PerspectiveSpec) -> np.ndarray:
    """Unit ray per output pixel, shape (out_height, out_width, 3)."""
    W, H = spec.out_width, spec.out_height
    f = (W / 2.0) / math.tan(spec.hfov / 2.0)
    x = np.arange(W, dtype=np.float64) + 0.5 - W / 2.0
    y = np.arange(H, dtype=np.float64) + 0.5 - H / 2.0
    xx, yy = np.meshgrid(x, y)
    fwd, right, up = view_basis(spec.yaw, spec.pitch)
    rays = f * fwd + xx[..., None] * right - yy[..., None] * up
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)


def crop_perspective(image, spec: PerspectiveSpec, sampling: str = "bilinear") -> np.ndarray:
    """Render a pinhole view out of an equirectangular image.

    ``image`` may be an :class:`HdrPanorama` (physical scale applied) or a
    2D/3D array.  Use ``sampling="nearest"`` for temperature or label maps.
    """
    if isinstance(image, HdrPanorama):
        img = image.pixels * image.scale
    else:
        img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    theta, phi = vector_to_direction(perspective_rays(spec))
    u, v = direction_to_pixel((theta, phi), w, h)
    if sampling == "nearest":
        return sample_nearest(img, u, v)
    if sampling == "bilinear":
        return sample_bilinear(img, u, v)
    raise InputError(f"unknown sampling mode {sampling!r}")
