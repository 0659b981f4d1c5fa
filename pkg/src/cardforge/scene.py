"""Scene data types and the occupancy geometry shared by sampling and rendering.

A card's footprint is the set of canvas pixels whose centers fall inside its
rotated, scaled rounded rectangle. Visibility is counted on these integer
masks, never on rendered alpha, so counts are exact and artwork-independent.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import footprint_window, rounded_rect_contains, to_card_frame


@dataclass(frozen=True)
class Placement:
    code: str
    variant: int
    center: tuple[float, float]
    rotation: float  # degrees in [0, 360)
    scale: float
    z: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = list(self.center)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(d["code"], int(d["variant"]), tuple(d["center"]), float(d["rotation"]),
                   float(d["scale"]), int(d["z"]))


@dataclass(frozen=True)
class SceneSpec:
    index: int
    background: str
    canvas: tuple[int, int]
    placements: tuple[Placement, ...]
    kind: str = "random"  # or "dummy"
    brightness: float = 1.0
    contrast: float = 1.0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "background": self.background,
            "canvas": list(self.canvas),
            "brightness": self.brightness,
            "contrast": self.contrast,
            "placements": [p.to_dict() for p in self.placements],
        }


@dataclass
class VisibleRegion:
    z: int
    code: str
    visible: int
    total: int
    bbox: tuple[int, int, int, int] | None  # x_min, y_min, x_max, y_max; max exclusive
    amodal_bbox: tuple[int, int, int, int] | None = field(default=None)

    @property
    def fraction(self) -> float:
        return self.visible / self.total if self.total else 0.0


@dataclass(frozen=True)
class CardShape:
    """Unscaled card size in asset pixels and its corner radius."""

    width: float = 200.0
    height: float = 311.0
    radius: float = 10.0


def footprint_crop(p: Placement, canvas, shape: CardShape = CardShape()):
    """Return ``(x0, y0, mask)``: the footprint restricted to a tight window."""
    cw, ch = canvas
    x0, y0, x1, y1 = footprint_window(p.center[0], p.center[1], shape.width * p.scale,
                                      shape.height * p.scale, p.rotation, cw, ch)
    xs = np.arange(x0, x1, dtype=np.float64) + 0.5
    ys = np.arange(y0, y1, dtype=np.float64) + 0.5
    u, v = to_card_frame(xs[None, :], ys[:, None], p.center[0], p.center[1], p.rotation, p.scale)
    mask = rounded_rect_contains(u, v, shape.width, shape.height, shape.radius)
    return x0, y0, mask


def footprint_mask(p: Placement, canvas, shape: CardShape = CardShape()) -> np.ndarray:
    """Full-canvas boolean footprint (height x width)."""
    cw, ch = canvas
    out = np.zeros((ch, cw), dtype=bool)
    x0, y0, mask = footprint_crop(p, canvas, shape)
    out[y0:y0 + mask.shape[0], x0:x0 + mask.shape[1]] = mask
    return out


def mask_bbox(mask: np.ndarray, x0: int = 0, y0: int = 0):
    """Tight ``(x_min, y_min, x_max, y_max)`` of set pixels, exclusive max; None if empty."""
    cols = np.flatnonzero(mask.any(axis=0))
    if cols.size == 0:
        return None
    rows = np.flatnonzero(mask.any(axis=1))
    return (x0 + int(cols[0]), y0 + int(rows[0]), x0 + int(cols[-1]) + 1, y0 + int(rows[-1]) + 1)


class Occupancy:
    """Top-owner map: each pixel holds the index of the highest card covering it.

    Cards are added bottom to top. Adding a card only has to look at its own
    window to learn how many visible pixels each lower card loses.
    """

    def __init__(self, canvas):
        cw, ch = canvas
        self.canvas = (cw, ch)
        self.owner = np.full((ch, cw), -1, dtype=np.int32)
        self.crops: list = []
        self.totals: list[int] = []
        self.visible: list[int] = []

    def __len__(self):
        return len(self.totals)

    def losses(self, crop) -> np.ndarray:
        """Visible pixels each current card would lose under ``crop``."""
        x0, y0, mask = crop
        h, w = mask.shape
        under = self.owner[y0:y0 + h, x0:x0 + w][mask]
        return np.bincount(under + 1, minlength=len(self) + 1)[1:]

    def fits(self, crop, min_visibility: float) -> bool:
        lost = self.losses(crop)
        return all((v - d) / t >= min_visibility for v, d, t in zip(self.visible, lost, self.totals))

    def add(self, crop) -> None:
        x0, y0, mask = crop
        h, w = mask.shape
        lost = self.losses(crop)
        for i, d in enumerate(lost):
            self.visible[i] -= int(d)
        k = len(self)
        window = self.owner[y0:y0 + h, x0:x0 + w]
        window[mask] = k
        n = int(mask.sum())
        self.crops.append(crop)
        self.totals.append(n)
        self.visible.append(n)

    def visible_bbox(self, k: int):
        x0, y0, mask = self.crops[k]
        h, w = mask.shape
        return mask_bbox(self.owner[y0:y0 + h, x0:x0 + w] == k, x0, y0)

    def amodal_bbox(self, k: int):
        x0, y0, mask = self.crops[k]
        return mask_bbox(mask, x0, y0)
