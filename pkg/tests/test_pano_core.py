import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from panoheat.errors import InputError
from panoheat.pano_core import (
    HdrPanorama,
    PerspectiveSpec,
    crop_perspective,
    direction_to_pixel,
    direction_to_vector,
    pixel_to_direction,
    solid_angle_weights,
    vector_to_direction,
)


def test_image_center_is_forward_equator():
    w, h = 64, 32
    d = pixel_to_direction(w / 2 - 0.5, h / 2 - 0.5, w, h)
    assert d.theta == pytest.approx(math.pi)
    assert d.phi == pytest.approx(math.pi / 2)


def test_first_column_and_row_centers():
    assert pixel_to_direction(0, 0, 4, 2).theta == pytest.approx(math.pi / 4)
    assert pixel_to_direction(0, 0, 4, 2).phi == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("u,v", [(-1, 0), (4, 0), (0, 2), (0, -0.1)])
def test_out_of_range_pixel_rejected(u, v):
    with pytest.raises(InputError):
        pixel_to_direction(u, v, 4, 2)


def test_direction_to_pixel_center():
    assert direction_to_pixel((math.pi, math.pi / 2), 1024, 512) == pytest.approx((511.5, 255.5))


def test_wrap_just_below_two_pi():
    u, _ = direction_to_pixel((2 * math.pi - 1e-9, 1.0), 1024, 512)
    assert 1023 < u < 1024
    u, _ = direction_to_pixel((2 * math.pi + 0.1, 1.0), 1024, 512)
    assert u == pytest.approx(0.1 * 1024 / (2 * math.pi) - 0.5)


def test_roundtrip_every_pixel_small_grid():
    w, h = 32, 16
    uu, vv = np.meshgrid(np.arange(w), np.arange(h))
    u2, v2 = direction_to_pixel(pixel_to_direction(uu, vv, w, h), w, h)
    assert np.abs(u2 - uu).max() < 1e-9
    assert np.abs(v2 - vv).max() < 1e-9


@given(st.floats(0, 2 * math.pi, exclude_max=True), st.floats(1e-6, math.pi - 1e-6), st.floats(-3, 3))
def test_vector_direction_roundtrip(theta, phi, yaw):
    t2, p2 = vector_to_direction(direction_to_vector(theta, phi, yaw), yaw)
    dt = (float(t2) - theta + math.pi) % (2 * math.pi) - math.pi
    assert abs(dt) * math.sin(phi) < 1e-9
    assert abs(float(p2) - phi) < 1e-9


def test_forward_and_right_handed_frame():
    assert direction_to_vector(math.pi, math.pi / 2) == pytest.approx([1, 0, 0])
    assert direction_to_vector(math.pi, 0.0) == pytest.approx([0, 0, 1])
    # turning right (larger azimuth) from +x heads towards -y
    assert direction_to_vector(1.5 * math.pi, math.pi / 2) == pytest.approx([0, -1, 0], abs=1e-12)


@pytest.mark.parametrize("w", [8, 64, 1024])
def test_solid_angle_sums_to_four_pi(w):
    assert solid_angle_weights(w, w // 2).sum() == pytest.approx(4 * math.pi, rel=1e-12)


def test_solid_angle_close_to_midpoint_rule():
    w, h = 1024, 512
    phi = math.pi * (np.arange(h) + 0.5) / h
    midpoint = np.sin(phi) * (2 * math.pi / w) * (math.pi / h)
    exact = solid_angle_weights(w, h)[:, 0]
    x = math.pi / (2 * h)
    assert np.allclose(exact, midpoint, rtol=x * x)
    # the midpoint sum misses 4*pi by exactly x/sin(x) - 1
    assert midpoint.sum() * w / (4 * math.pi) - 1 == pytest.approx(x / math.sin(x) - 1, rel=1e-6)


def test_panorama_invariants():
    with pytest.raises(InputError):
        HdrPanorama(np.ones((4, 4, 3)))
    with pytest.raises(InputError):
        HdrPanorama(-np.ones((4, 8, 3)))
    with pytest.raises(InputError):
        HdrPanorama(np.full((4, 8, 3), np.inf))


def test_fov_must_be_below_pi():
    with pytest.raises(InputError):
        PerspectiveSpec(0, 0, math.pi, 10, 10)


def test_constant_panorama_crops_constant():
    pano = HdrPanorama(np.full((32, 64, 3), 2.5), scale=2.0)
    spec = PerspectiveSpec(0.3, -0.2, math.radians(70), 20, 15)
    for mode in ("nearest", "bilinear"):
        assert np.allclose(crop_perspective(pano, spec, mode), 5.0)


def test_center_pixel_samples_forward_direction():
    w, h = 128, 64
    img = np.arange(w * h, dtype=float).reshape(h, w)
    crop = crop_perspective(img, PerspectiveSpec(0.0, 0.0, math.radians(60), 21, 15), "nearest")
    u, v = direction_to_pixel((math.pi, math.pi / 2), w, h)
    assert crop[7, 10] == img[int(math.floor(v + 0.5)), int(math.floor(u + 0.5)) % w]


def _oracle_pixel(i, j, spec, w, h):
    """Scalar ray trace with explicit rotation matrices, independent of the module."""
    W, H = spec.out_width, spec.out_height
    f = (W / 2) / math.tan(spec.hfov / 2)
    ray = np.array([f, -(j + 0.5 - W / 2), -(i + 0.5 - H / 2)])
    cb, sb = math.cos(-spec.pitch), math.sin(-spec.pitch)
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    ca, sa = math.cos(-spec.yaw), math.sin(-spec.yaw)
    rz = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    x, y, z = rz @ ry @ ray
    theta = math.atan2(y, -x) % (2 * math.pi)
    phi = math.acos(z / math.sqrt(x * x + y * y + z * z))
    u = theta * w / (2 * math.pi) - 0.5
    v = phi * h / math.pi - 0.5
    return min(max(math.floor(v + 0.5), 0), h - 1), math.floor(u + 0.5) % w


@pytest.mark.parametrize("yaw,pitch,hfov", [(0.0, 0.0, 60.0), (1.1, 0.4, 90.0), (-2.5, -0.7, 45.0), (3.0, 1.2, 120.0)])
def test_crop_matches_ray_trace_oracle(yaw, pitch, hfov):
    w, h = 96, 48
    spec = PerspectiveSpec(yaw, pitch, math.radians(hfov), 17, 11)
    index_img = np.arange(w * h, dtype=float).reshape(h, w)
    crop = crop_perspective(index_img, spec, "nearest")
    for i in range(spec.out_height):
        for j in range(spec.out_width):
            r, c = _oracle_pixel(i, j, spec, w, h)
            assert crop[i, j] == r * w + c


def test_one_hot_lands_where_oracle_says():
    w, h = 256, 128
    spec = PerspectiveSpec(0.6, 0.25, math.radians(75), 40, 30)
    i, j = 9, 27
    r, c = _oracle_pixel(i, j, spec, w, h)
    img = np.zeros((h, w))
    img[r, c] = 1.0
    crop = crop_perspective(img, spec, "nearest")
    assert crop[i, j] == 1.0
    assert crop.sum() >= 1.0


def test_bilinear_reproduces_linear_ramp_in_v():
    w, h = 64, 32
    img = np.repeat(np.arange(h, dtype=float)[:, None], w, axis=1)
    from panoheat.pano_core import sample_bilinear

    assert sample_bilinear(img, 10.3, 7.25) == pytest.approx(7.25)
    # wrap across the seam
    ramp = np.repeat(np.arange(w, dtype=float)[None, :], h, axis=0)
    assert sample_bilinear(ramp, w - 0.5, 3.0) == pytest.approx(0.5 * (w - 1))


def test_unknown_sampling_mode():
    with pytest.raises(InputError):
        crop_perspective(np.zeros((8, 16)), PerspectiveSpec(0, 0, 1.0, 4, 4), "cubic")
