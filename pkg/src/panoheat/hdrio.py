"""File formats: Radiance RGBE pictures, raw float maps and false-color PNGs."""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .errors import InputError
from .pano_core import HdrPanorama

RAW_MAGIC = b"PHF8"
_RAW_HEADER = struct.Struct("<4sIII")  # magic, width, height, channels


# -- Radiance RGBE ---------------------------------------------------------


def float_to_rgbe(rgb: np.ndarray) -> np.ndarray:
    """Encode (..., 3) floats into (..., 4) RGBE bytes."""
    rgb = np.asarray(rgb, dtype=np.float64)
    peak = rgb.max(axis=-1)
    mant, expo = np.frexp(peak)
    out = np.zeros(rgb.shape[:-1] + (4,), dtype=np.uint8)
    ok = peak > 1e-32
    factor = np.where(ok, mant * 256.0 / np.where(ok, peak, 1.0), 0.0)
    out[..., :3] = np.clip(np.floor(rgb * factor[..., None]), 0, 255).astype(np.uint8)
    out[..., 3] = np.where(ok, expo + 128, 0).astype(np.uint8)
    return out


def rgbe_to_float(rgbe: np.ndarray) -> np.ndarray:
    """Decode RGBE bytes, using the Radiance half-step reconstruction."""
    rgbe = np.asarray(rgbe)
    e = rgbe[..., 3].astype(np.int64)
    f = np.where(e > 0, np.ldexp(1.0, e - 136), 0.0)
    return (rgbe[..., :3].astype(np.float64) + 0.5) * f[..., None]


def _read_header(buf: bytes):
    pos = 0
    first = True
    exposure = 1.0
    fmt = None
    while True:
        end = buf.find(b"\n", pos)
        if end < 0:
            raise InputError("truncated RGBE header")
        line = buf[pos:end].decode("ascii", "replace").strip()
        pos = end + 1
        if first:
            if not line.startswith("#?"):
                raise InputError("not a Radiance picture (missing #? signature)")
            first = False
            continue
        if not line:
            break
        if line.startswith("FORMAT="):
            fmt = line.split("=", 1)[1].strip()
        elif line.startswith("EXPOSURE="):
            exposure *= float(line.split("=", 1)[1])
    if fmt not in (None, "32-bit_rle_rgbe"):
        raise InputError(f"unsupported RGBE format {fmt!r}")
    end = buf.find(b"\n", pos)
    res = buf[pos:end].decode("ascii").strip()
    m = re.fullmatch(r"-Y\s+(\d+)\s+\+X\s+(\d+)", res)
    if not m:
        raise InputError(f"unsupported resolution line {res!r}")
    return int(m.group(1)), int(m.group(2)), exposure, end + 1


def _decode_scanline(buf: bytes, pos: int, width: int):
    if 8 <= width <= 0x7FFF and buf[pos] == 2 and buf[pos + 1] == 2 and not buf[pos + 2] & 0x80:
        if (buf[pos + 2] << 8 | buf[pos + 3]) != width:
            raise InputError("RGBE scanline width mismatch")
        pos += 4
        line = np.empty((4, width), dtype=np.uint8)
        for ch in range(4):
            x = 0
            while x < width:
                count = buf[pos]
                if count == 0 or count == 128:
                    raise InputError("corrupt RGBE run")
                if count > 128:
                    count -= 128
                    line[ch, x:x + count] = buf[pos + 1]
                    pos += 2
                else:
                    line[ch, x:x + count] = np.frombuffer(buf, np.uint8, count, pos + 1)
                    pos += 1 + count
                x += count
        return line.T, pos
    # flat or old-style run-length pixels
    line = np.empty((width, 4), dtype=np.uint8)
    x = 0
    shift = 0
    while x < width:
        px = buf[pos:pos + 4]
        pos += 4
        if px[0] == 1 and px[1] == 1 and px[2] == 1:
            if x == 0:
                raise InputError("RGBE repeat with no previous pixel")
            n = px[3] << shift
            line[x:x + n] = line[x - 1]
            x += n
            shift += 8
        else:
            line[x] = np.frombuffer(px, np.uint8)
            x += 1
            shift = 0
    return line, pos


def read_rgbe(path) -> HdrPanorama:
    """Load a Radiance .hdr; EXPOSURE lines become ``scale = 1/exposure``."""
    buf = Path(path).read_bytes()
    h, w, exposure, pos = _read_header(buf)
    rows = np.empty((h, w, 4), dtype=np.uint8)
    try:
        for y in range(h):
            rows[y], pos = _decode_scanline(buf, pos, w)
    except IndexError as exc:
        raise InputError("truncated RGBE pixel data") from exc
    return HdrPanorama(rgbe_to_float(rows), scale=1.0 / exposure)


def _encode_channel(data: np.ndarray) -> bytes:
    out = bytearray()
    n = len(data)
    # run starts and lengths
    change = np.flatnonzero(np.diff(data.astype(np.int16))) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [n])))
    lit_start = None
    for s, ln in zip(starts.tolist(), lengths.tolist()):
        if ln >= 4:
            if lit_start is not None:
                _emit_literal(out, data[lit_start:s])
                lit_start = None
            while ln > 0:
                k = min(ln, 127)
                out += bytes((128 + k, int(data[s])))
                s += k
                ln -= k
        elif lit_start is None:
            lit_start = s
    if lit_start is not None:
        _emit_literal(out, data[lit_start:])
    return bytes(out)


def _emit_literal(out: bytearray, chunk: np.ndarray):
    for i in range(0, len(chunk), 128):
        part = chunk[i:i + 128]
        out.append(len(part))
        out += part.tobytes()


def write_rgbe(path, pano: HdrPanorama | np.ndarray, exposure: float = 1.0) -> None:
    """Write a run-length encoded Radiance picture.

    Pixel values are stored multiplied by ``exposure`` and the header records
    it, so :func:`read_rgbe` recovers the original physical values.
    """
    if isinstance(pano, HdrPanorama):
        rgb = pano.pixels * pano.scale
    else:
        rgb = np.asarray(pano, dtype=np.float64)
    h, w = rgb.shape[:2]
    enc = float_to_rgbe(rgb * exposure)
    parts = [b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n"]
    if exposure != 1.0:
        parts.append(f"EXPOSURE={exposure!r}\n".encode())
    parts.append(f"\n-Y {h} +X {w}\n".encode())
    rle = 8 <= w <= 0x7FFF
    for y in range(h):
        if rle:
            parts.append(bytes((2, 2, w >> 8, w & 0xFF)))
            for ch in range(4):
                parts.append(_encode_channel(enc[y, :, ch]))
        else:
            parts.append(enc[y].tobytes())
    Path(path).write_bytes(b"".join(parts))


# -- raw float maps ----------------------------------------------------------


def write_float_map(path, data: np.ndarray) -> None:
    """Little-endian float64 map with a 16-byte header (magic, width, height, channels)."""
    arr = np.asarray(data, dtype="<f8")
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3:
        raise InputError(f"float map must be 2D or 3D, got shape {arr.shape}")
    h, w, c = arr.shape
    Path(path).write_bytes(_RAW_HEADER.pack(RAW_MAGIC, w, h, c) + np.ascontiguousarray(arr).tobytes())


def read_float_map(path) -> np.ndarray:
    """Inverse of :func:`write_float_map`; single-channel maps come back 2D."""
    buf = Path(path).read_bytes()
    if len(buf) < _RAW_HEADER.size:
        raise InputError(f"{path}: too short for a float map")
    magic, w, h, c = _RAW_HEADER.unpack_from(buf)
    if magic != RAW_MAGIC:
        raise InputError(f"{path}: bad float-map magic {magic!r}")
    expected = _RAW_HEADER.size + 8 * w * h * c
    if len(buf) != expected:
        raise InputError(f"{path}: expected {expected} bytes, found {len(buf)}")
    arr = np.frombuffer(buf, dtype="<f8", offset=_RAW_HEADER.size).reshape(h, w, c).astype(np.float64)
    return arr[..., 0] if c == 1 else arr


def read_float_panorama(path, scale: float = 1.0) -> HdrPanorama:
    """Load a 3-channel raw float map as a panorama (test/import route)."""
    arr = read_float_map(path)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InputError(f"{path}: panorama float map needs 3 channels")
    return HdrPanorama(arr, scale=scale)


def read_panorama(path) -> HdrPanorama:
    """Dispatch on file content: RGBE or raw float map."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == RAW_MAGIC:
        return read_float_panorama(path)
    return read_rgbe(path)


# -- display -----------------------------------------------------------------


def false_color(data: np.ndarray, vmin: float, vmax: float, cmap: str = "inferno") -> np.ndarray:
    """Map a scalar image to uint8 RGB with explicit bounds; NaN renders black."""
    from matplotlib import colormaps

    if not vmax > vmin:
        raise InputError(f"false-color bounds need vmax > vmin, got {vmin}..{vmax}")
    data = np.asarray(data, dtype=np.float64)
    t = np.clip((data - vmin) / (vmax - vmin), 0.0, 1.0)
    rgba = colormaps[cmap](np.nan_to_num(t, nan=0.0))
    rgb = (rgba[..., :3] * 255.0 + 0.5).astype(np.uint8)
    rgb[~np.isfinite(data)] = 0
    return rgb


def write_false_color_png(path, data: np.ndarray, vmin: float, vmax: float, cmap: str = "inferno") -> None:
    from PIL import Image

    Image.fromarray(false_color(data, vmin, vmax, cmap)).save(path)
