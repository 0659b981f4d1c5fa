"""Independent oracles shared by several test modules."""

import hashlib
import math

import numpy as np


def tree_digest(root):
    """sha256 over relative paths and bytes of every file under ``root``."""
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def rounded_box_sdf(px, py, cx, cy, rotation_deg, half_w, half_h, radius):
    """Signed distance to a rotated rounded box (negative inside).

    Written from the usual SDF formulation, separate from the library's
    point-in-shape test.
    """
    t = math.radians(rotation_deg)
    dx, dy = px - cx, py - cy
    lx = np.abs(math.cos(t) * dx + math.sin(t) * dy)
    ly = np.abs(-math.sin(t) * dx + math.cos(t) * dy)
    qx = lx - (half_w - radius)
    qy = ly - (half_h - radius)
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return outside + inside - radius


def brute_force_visibility(placements, canvas, width=200.0, height=311.0, radius_fraction=0.05):
    """Repaint every footprint over the full canvas in z order.

    Returns ``(owner, visible, total)``; ``owner`` holds the z of the topmost
    card at each pixel (-1 for background).
    """
    cw, ch = canvas
    ys, xs = np.mgrid[0:ch, 0:cw].astype(np.float64) + 0.5
    owner = np.full((ch, cw), -1, dtype=np.int64)
    total = {}
    for p in sorted(placements, key=lambda p: p.z):
        s = p.scale
        inside = rounded_box_sdf(xs, ys, p.center[0], p.center[1], p.rotation,
                                 width * s / 2, height * s / 2, radius_fraction * width * s) <= 0
        total[p.z] = int(inside.sum())
        owner[inside] = p.z
    visible = {z: int((owner == z).sum()) for z in total}
    return owner, visible, total


def resize_oracle(region: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Separable bilinear resize, corner-aligned: rows with np.interp, then columns."""
    h, w, c = region.shape
    xs = np.linspace(0, w - 1, out_w)
    ys = np.linspace(0, h - 1, out_h)
    tmp = np.empty((h, out_w, c))
    for j in range(h):
        for ch in range(c):
            tmp[j, :, ch] = np.interp(xs, np.arange(w), region[j, :, ch])
    out = np.empty((out_h, out_w, c))
    for i in range(out_w):
        for ch in range(c):
            out[:, i, ch] = np.interp(ys, np.arange(h), tmp[:, i, ch])
    return out
