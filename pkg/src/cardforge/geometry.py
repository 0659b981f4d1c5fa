"""Shared raster geometry: homographies, bilinear sampling, card footprints.

Continuous coordinates put pixel ``(i, j)`` at the unit square
``[i, i+1) x [j, j+1)`` with its center at ``(i + 0.5, j + 0.5)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SingularHomography


def quad_homography(corners, width: int, height: int) -> np.ndarray:
    """3x3 matrix mapping target pixel indices ``(x, y, 1)`` to source points.

    The target rect corners ``(0, 0), (W-1, 0), (W-1, H-1), (0, H-1)`` land on
    ``corners`` (TL, TR, BR, BL). Closed-form square-to-quad mapping.
    """
    q = np.asarray(corners, dtype=np.float64).reshape(4, 2)
    (x0, y0), (x1, y1), (x2, y2), (x3, y3) = q
    for a, b, c in ((0, 1, 2), (1, 2, 3), (2, 3, 0), (3, 0, 1)):
        ab, ac = q[b] - q[a], q[c] - q[a]
        scale = max(np.abs(ab).max(), np.abs(ac).max(), 1e-300)
        if abs(ab[0] * ac[1] - ab[1] * ac[0]) <= 1e-12 * scale * scale:
            raise SingularHomography(f"corners {a}, {b}, {c} are collinear")

    dx1, dy1 = x1 - x2, y1 - y2
    dx2, dy2 = x3 - x2, y3 - y2
    sx = x0 - x1 + x2 - x3
    sy = y0 - y1 + y2 - y3
    den = dx1 * dy2 - dx2 * dy1
    if den == 0.0:
        raise SingularHomography("degenerate corner configuration")
    g = (sx * dy2 - dx2 * sy) / den
    h = (dx1 * sy - sx * dy1) / den
    unit_to_quad = np.array(
        [
            [x1 - x0 + g * x1, x3 - x0 + h * x3, x0],
            [y1 - y0 + g * y1, y3 - y0 + h * y3, y0],
            [g, h, 1.0],
        ]
    )
    to_unit = np.diag([1.0 / max(width - 1, 1), 1.0 / max(height - 1, 1), 1.0])
    return unit_to_quad @ to_unit


def pad_image(image: np.ndarray, fill=0.0, dtype=np.float64) -> np.ndarray:
    """Float copy of ``image`` with a one-pixel ``fill`` border, HxWxC."""
    img = image if image.ndim == 3 else image[:, :, None]
    h, w, c = img.shape
    padded = np.full((h + 2, w + 2, c), fill, dtype=dtype)
    padded[1:-1, 1:-1] = img
    return padded


def sample_padded(padded: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear lookup into a :func:`pad_image` result at unpadded pixel indices."""
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    # shift into padded index space; far-away points clamp onto the border
    px = np.clip(xs + 1.0, 0.0, w + 1.0)
    py = np.clip(ys + 1.0, 0.0, h + 1.0)
    x0 = np.minimum(px.astype(np.intp), w)
    y0 = np.minimum(py.astype(np.intp), h)
    fx = (px - x0)[..., None]
    fy = (py - y0)[..., None]

    top = padded[y0, x0] * (1.0 - fx) + padded[y0, x0 + 1] * fx
    bot = padded[y0 + 1, x0] * (1.0 - fx) + padded[y0 + 1, x0 + 1] * fx
    return top * (1.0 - fy) + bot * fy


def bilinear_sample(image: np.ndarray, xs: np.ndarray, ys: np.ndarray, fill=0.0) -> np.ndarray:
    """Sample ``image`` at fractional pixel indices, ``fill`` outside.

    ``xs``/``ys`` address pixel indices (pixel ``i`` sits at ``i``, not
    ``i + 0.5``). Returns float64 with shape ``xs.shape + (channels,)``.
    """
    return sample_padded(pad_image(image, fill), xs, ys)


def rounded_rect_contains(u, v, width: float, height: float, radius: float):
    """Point-in-shape for a rounded rect centered at the origin (closed set)."""
    hw, hh = width / 2.0, height / 2.0
    au, av = np.abs(u), np.abs(v)
    du = np.maximum(au - (hw - radius), 0.0)
    dv = np.maximum(av - (hh - radius), 0.0)
    return (au <= hw) & (av <= hh) & (du * du + dv * dv <= radius * radius)


def rounded_rect_area(width: float, height: float, radius: float) -> float:
    return width * height - (4.0 - math.pi) * radius * radius


def rotated_half_extents(width: float, height: float, rotation_deg: float) -> tuple[float, float]:
    """Half extents of the axis-aligned box around a rotated rect."""
    t = math.radians(rotation_deg)
    c, s = abs(math.cos(t)), abs(math.sin(t))
    return (width * c + height * s) / 2.0, (width * s + height * c) / 2.0


def footprint_window(cx, cy, width, height, rotation_deg, canvas_w, canvas_h):
    """Pixel window ``(x0, y0, x1, y1)`` (exclusive ends) covering the shape."""
    ex, ey = rotated_half_extents(width, height, rotation_deg)
    x0 = max(int(math.floor(cx - ex - 0.5)), 0)
    y0 = max(int(math.floor(cy - ey - 0.5)), 0)
    x1 = min(int(math.ceil(cx + ex + 0.5)) + 1, canvas_w)
    y1 = min(int(math.ceil(cy + ey + 0.5)) + 1, canvas_h)
    return x0, y0, max(x1, x0), max(y1, y0)


def to_card_frame(px, py, cx, cy, rotation_deg, scale):
    """Canvas point -> unscaled card-local point (origin at card center).

    Forward mapping is ``p = c + scale * R(rotation) @ (u, v)`` with the
    usual rotation matrix; with y pointing down this turns clockwise on screen.
    """
    t = math.radians(rotation_deg)
    c, s = math.cos(t), math.sin(t)
    dx, dy = px - cx, py - cy
    u = (c * dx + s * dy) / scale
    v = (-s * dx + c * dy) / scale
    return u, v


def normalize_angle(deg: float) -> float:
    """Wrap to [0, 360); guards the float edge where ``-tiny % 360 == 360``."""
    a = float(deg) % 360.0
    return 0.0 if a >= 360.0 else a
