"""Random scene sampling and rendering.

A scene is fully determined by ``(config, master seed, scene index)``: the
per-scene generator is seeded with :func:`cardforge.config.mix64` so any
worker can produce any scene independently.
"""

from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path

import cv2
import numpy as np

from .catalog import ClassCatalog, standard_deck
from .config import GeneratorConfig, mix64
from .dummy import layout_dummy, sample_dummy_hand
from .errors import EmptyBackgrounds, MissingAsset, NoValidPlacement
from .geometry import normalize_angle, rotated_half_extents
from .scene import CardShape, Occupancy, Placement, SceneSpec, VisibleRegion, footprint_crop


def scene_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix64(master_seed, index)))


def card_shape(library) -> CardShape:
    w, h = library.size
    return CardShape(float(w), float(h), float(library.corner_radius))


def _draw_card(rng, config: GeneratorConfig, classes, library, canvas, shape):
    """One candidate placement (z filled in by the caller); None if it cannot fit."""
    code = classes[rng.integers(len(classes))]
    variant = int(rng.integers(library.variant_count(code)))
    scale = float(rng.uniform(config.scale_min, config.scale_max))
    rotation = normalize_angle(rng.uniform(0.0, 360.0))
    ex, ey = rotated_half_extents(shape.width * scale, shape.height * scale, rotation)
    cw, ch = canvas
    if 2 * ex > cw or 2 * ey > ch:
        return None
    cx = float(rng.uniform(ex, cw - ex))
    cy = float(rng.uniform(ey, ch - ey))
    return Placement(code, variant, (cx, cy), rotation, scale, -1)


def _scatter(rng, config, classes, library, canvas, shape, occupancy, placements, count):
    """Add up to ``count`` cards on top with the visibility rejection test."""
    for _ in range(count):
        for _attempt in range(config.max_attempts):
            cand = _draw_card(rng, config, classes, library, canvas, shape)
            if cand is None:
                continue
            crop = footprint_crop(cand, canvas, shape)
            if occupancy.fits(crop, config.min_visibility):
                z = len(placements)
                placements.append(Placement(cand.code, cand.variant, cand.center, cand.rotation, cand.scale, z))
                occupancy.add(crop)
                break


def sample_scene(config: GeneratorConfig, master_seed: int, index: int, library,
                 backgrounds, catalog: ClassCatalog | None = None) -> SceneSpec:
    """Draw a scene.

    Draw order: scene kind, background, photometric jitter (only when
    enabled), then either the dummy hand and its layout or the random card
    count followed by one draw sequence per card attempt.
    """
    return sample_scene_occupancy(config, master_seed, index, library, backgrounds, catalog)[0]


def sample_scene_occupancy(config: GeneratorConfig, master_seed: int, index: int, library,
                           backgrounds, catalog: ClassCatalog | None = None):
    """:func:`sample_scene` plus the occupancy built while sampling."""
    backgrounds = as_backgrounds(backgrounds)
    if not len(backgrounds):
        raise EmptyBackgrounds("no background images")
    catalog = catalog or ClassCatalog.default()
    classes = list(catalog.names)
    canvas = config.canvas
    shape = card_shape(library)

    w, h = shape.width * config.scale_min, shape.height * config.scale_min
    if not ((w <= canvas[0] and h <= canvas[1]) or (h <= canvas[0] and w <= canvas[1])):
        raise NoValidPlacement(f"a card at scale {config.scale_min} cannot fit a {canvas[0]}x{canvas[1]} canvas")

    rng = scene_rng(master_seed, index)
    kind = "dummy" if rng.random() < config.dummy_fraction else "random"
    background = backgrounds.names[int(rng.integers(len(backgrounds)))]
    brightness = float(rng.uniform(1 - config.brightness_jitter, 1 + config.brightness_jitter)) \
        if config.brightness_jitter > 0 else 1.0
    contrast = float(rng.uniform(1 - config.contrast_jitter, 1 + config.contrast_jitter)) \
        if config.contrast_jitter > 0 else 1.0

    placements: list[Placement] = []
    occupancy = Occupancy(canvas)
    if kind == "dummy":
        hand = sample_dummy_hand(rng, config.suit_order)
        scale = float(rng.uniform(config.dummy_scale_min, config.dummy_scale_max))
        laid = layout_dummy(hand, config, rng, canvas, scale, shape, shrink_to_fit=True)
        for p in laid:
            variant = int(rng.integers(library.variant_count(p.code))) if library.variant_count(p.code) else 0
            placements.append(Placement(p.code, variant, p.center, p.rotation, p.scale, p.z))
            occupancy.add(footprint_crop(placements[-1], canvas, shape))
        if config.dummy_extra_cards:
            in_hand = set(hand.cards)
            others = [c for c in classes if c not in in_hand]
            _scatter(rng, config, others, library, canvas, shape, occupancy, placements,
                     config.dummy_extra_cards)
    else:
        count = int(rng.integers(config.min_cards, config.max_cards + 1))
        _scatter(rng, config, classes, library, canvas, shape, occupancy, placements, count)

    return SceneSpec(index, background, canvas, tuple(placements), kind, brightness, contrast), occupancy


def scene_occupancy(spec: SceneSpec, shape: CardShape) -> Occupancy:
    occ = Occupancy(spec.canvas)
    for p in sorted(spec.placements, key=lambda p: p.z):
        occ.add(footprint_crop(p, spec.canvas, shape))
    return occ


def visible_regions(spec: SceneSpec, shape: CardShape, bbox_mode: str = "visible",
                    occupancy: Occupancy | None = None) -> list[VisibleRegion]:
    occ = occupancy if occupancy is not None else scene_occupancy(spec, shape)
    ordered = sorted(spec.placements, key=lambda p: p.z)
    regions = []
    for k, p in enumerate(ordered):
        amodal = occ.amodal_bbox(k)
        visible = occ.visible_bbox(k) if occ.visible[k] else None
        bbox = visible if bbox_mode == "visible" else (amodal if occ.visible[k] else None)
        regions.append(VisibleRegion(p.z, p.code, occ.visible[k], occ.totals[k], bbox, amodal))
    return regions


def _load_background(path: str) -> np.ndarray:
    img = cv2.imread(path, cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot decode background {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def cover_fit(image: np.ndarray, canvas) -> np.ndarray:
    """Scale to cover the canvas without distortion, then center-crop."""
    cw, ch = canvas
    h, w = image.shape[:2]
    s = max(cw / w, ch / h)
    nw, nh = max(cw, math.ceil(w * s - 1e-9)), max(ch, math.ceil(h * s - 1e-9))
    interp = cv2.INTER_AREA if s < 1 else cv2.INTER_LINEAR
    resized = cv2.resize(image, (nw, nh), interpolation=interp) if (nw, nh) != (w, h) else image
    x0, y0 = (nw - cw) // 2, (nh - ch) // 2
    return resized[y0:y0 + ch, x0:x0 + cw]


@lru_cache(maxsize=16)
def _fitted_background(path: str, canvas) -> np.ndarray:
    out = cover_fit(_load_background(path), canvas).astype(np.float32)
    out.flags.writeable = False
    return out


class BackgroundSet:
    """Background image paths in a fixed order, addressable by file name."""

    def __init__(self, paths, root=None):
        self.paths = [Path(p) for p in paths]
        self.names = [p.relative_to(root).as_posix() if root is not None else p.name for p in self.paths]
        self._by_name = dict(zip(self.names, self.paths))
        if len(self._by_name) != len(self.paths):
            raise ValueError("background names must be unique")

    @classmethod
    def from_dir(cls, directory) -> "BackgroundSet":
        suffixes = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
        root = Path(directory)
        return cls(sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in suffixes), root)

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i):
        return self.paths[i]

    def path(self, name: str) -> Path:
        try:
            return self._by_name[name]
        except KeyError:
            raise FileNotFoundError(f"background {name!r} not in background set") from None


def as_backgrounds(backgrounds) -> BackgroundSet:
    return backgrounds if isinstance(backgrounds, BackgroundSet) else BackgroundSet(backgrounds)


class _PremultCache:
    """Padded, premultiplied float32 copies of assets for bilinear sampling."""

    def __init__(self, library):
        self.library = library
        self.get = lru_cache(maxsize=256)(self._make)

    def _make(self, code: str, variant: int) -> np.ndarray:
        rgba = self.library.get(code, variant).astype(np.float32)
        rgba *= 1.0 / 255.0
        rgba[:, :, :3] *= rgba[:, :, 3:4] * 255.0
        return cv2.copyMakeBorder(rgba, 1, 1, 1, 1, cv2.BORDER_CONSTANT, value=0)


_premult: dict = {}


def _premult_for(library) -> _PremultCache:
    cache = _premult.get(id(library))
    if cache is None or cache.library is not library:
        cache = _premult[id(library)] = _PremultCache(library)
    return cache


def composite_card(canvas: np.ndarray, padded_pm: np.ndarray, p: Placement, shape: CardShape) -> None:
    """Alpha-blend one card onto a float32 RGB canvas in place.

    Resampling is bilinear (``cv2.warpAffine``) on premultiplied RGBA, so the
    card edge is anti-aliased by the sampling itself.
    """
    ch, cw = canvas.shape[:2]
    ex, ey = rotated_half_extents(shape.width * p.scale, shape.height * p.scale, p.rotation)
    # one extra pixel so the bilinear edge ramp is not clipped
    x0 = max(int(math.floor(p.center[0] - ex)) - 1, 0)
    y0 = max(int(math.floor(p.center[1] - ey)) - 1, 0)
    x1 = min(int(math.ceil(p.center[0] + ex)) + 2, cw)
    y1 = min(int(math.ceil(p.center[1] + ey)) + 2, ch)
    if x1 <= x0 or y1 <= y0:
        return
    # window pixel (i, j) -> padded asset index; asset pixel k has its center
    # at k + 0.5 in card-local units and sits at index k + 1 after padding
    t = math.radians(p.rotation)
    c, s = math.cos(t) / p.scale, math.sin(t) / p.scale
    dx = x0 + 0.5 - p.center[0]
    dy = y0 + 0.5 - p.center[1]
    off_x = shape.width / 2.0 + 0.5
    off_y = shape.height / 2.0 + 0.5
    m = np.array([[c, s, c * dx + s * dy + off_x],
                  [-s, c, -s * dx + c * dy + off_y]], dtype=np.float64)
    src = cv2.warpAffine(padded_pm, m, (x1 - x0, y1 - y0), flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP,
                         borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    inv = 1.0 - src[:, :, 3]
    canvas[y0:y1, x0:x1] = cv2.add(cv2.multiply(canvas[y0:y1, x0:x1], cv2.merge((inv, inv, inv))), src[:, :, :3])


def render_scene(spec: SceneSpec, library, backgrounds, bbox_mode: str = "visible",
                 occupancy: Occupancy | None = None):
    """Return ``(rgba uint8 canvas, [VisibleRegion])`` for ``spec``.

    ``occupancy`` may be passed in from :func:`sample_scene_occupancy` to
    skip rebuilding the footprints.
    """
    shape = card_shape(library)
    canvas = _fitted_background(str(as_backgrounds(backgrounds).path(spec.background)), spec.canvas).copy()
    cache = _premult_for(library)
    for p in sorted(spec.placements, key=lambda p: p.z):
        if not 0 <= p.variant < library.variant_count(p.code):
            raise MissingAsset(f"no asset for class {p.code} variant {p.variant}")
        composite_card(canvas, cache.get(p.code, p.variant), p, shape)
    if spec.contrast != 1.0 or spec.brightness != 1.0:
        canvas = ((canvas - 128.0) * spec.contrast + 128.0) * spec.brightness
    # saturating, round-to-nearest; the added alpha channel is opaque
    out = cv2.cvtColor(cv2.convertScaleAbs(canvas), cv2.COLOR_RGB2RGBA)
    return out, visible_regions(spec, shape, bbox_mode, occupancy)


def dummy_deck_available(library) -> bool:
    return all(library.variant_count(c) > 0 for c in standard_deck())
