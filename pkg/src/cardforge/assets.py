"""Card asset extraction: annotated frame sequences -> rectified RGBA cards.

Each sequence is a directory of frames showing one stationary card under
changing light. The card corners are marked once; the same quad is applied
to every frame, so each selected frame yields one illumination variant.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import cv2
import numpy as np

from .catalog import ClassCode, parse_class_code
from .errors import (
    AnnotationParseError,
    DegenerateQuad,
    EmptySequence,
    FrameSizeMismatch,
    InvalidClassCode,
    MissingAsset,
)
from .geometry import bilinear_sample, quad_homography, rounded_rect_contains

log = logging.getLogger(__name__)

CANONICAL_SIZE = (200, 311)
CORNER_RADIUS_FRACTION = 0.05
MIN_QUAD_AREA = 64.0
FRAME_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}

_PAIR = re.compile(r"(-?\d+(?:\.\d*)?|-?\.\d+)\s*,\s*(-?\d+(?:\.\d*)?|-?\.\d+)")


@dataclass(frozen=True)
class QuadAnnotation:
    sequence_id: str
    code: ClassCode
    corners: tuple[tuple[float, float], ...]  # TL, TR, BR, BL


@dataclass
class CardAsset:
    code: ClassCode
    variant: int
    pixels: np.ndarray  # H x W x 4 uint8, RGBA
    source: tuple[str, int]


def quad_area(corners) -> float:
    q = np.asarray(corners, dtype=np.float64)
    x, y = q[:, 0], q[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def check_quad(corners, min_area: float = MIN_QUAD_AREA, frame_size=None) -> None:
    """Raise DegenerateQuad unless the quad is strictly convex, ordered and big enough.

    Corner order TL, TR, BR, BL with y pointing down gives positive turns.
    """
    q = np.asarray(corners, dtype=np.float64)
    if q.shape != (4, 2) or not np.all(np.isfinite(q)):
        raise DegenerateQuad("need four finite corners")
    for i in range(4):
        a, b, c = q[i], q[(i + 1) % 4], q[(i + 2) % 4]
        turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if turn <= 0:
            raise DegenerateQuad(
                "quad is not strictly convex in TL, TR, BR, BL order "
                f"(turn at corner {(i + 1) % 4} is {turn:g})"
            )
    area = quad_area(q)
    if area < min_area:
        raise DegenerateQuad(f"quad area {area:g} px^2 below minimum {min_area:g}")
    if frame_size is not None:
        w, h = frame_size
        if q[:, 0].min() < 0 or q[:, 1].min() < 0 or q[:, 0].max() > w - 1 or q[:, 1].max() > h - 1:
            raise DegenerateQuad(f"quad corners fall outside the {w}x{h} frame")


def parse_annotation_line(line: str, min_area: float = MIN_QUAD_AREA) -> QuadAnnotation:
    parts = line.split(";", 2)
    if len(parts) != 3:
        raise AnnotationParseError(f"expected 'sequence_id;class_code;corners', got {line!r}")
    seq, code_text, rest = (p.strip() for p in parts)
    if not seq:
        raise AnnotationParseError(f"empty sequence id in {line!r}")
    try:
        code = parse_class_code(code_text)
    except InvalidClassCode as exc:
        raise AnnotationParseError(f"{seq}: {exc}") from exc
    pairs = _PAIR.findall(rest)
    leftover = _PAIR.sub("", rest)
    if len(pairs) != 4 or re.search(r"[^\s;()]", leftover):
        raise AnnotationParseError(f"{seq}: expected 4 'x,y' corner pairs, got {rest!r}")
    corners = tuple((float(x), float(y)) for x, y in pairs)
    check_quad(corners, min_area)
    return QuadAnnotation(seq, code, corners)


def load_annotations(path, min_area: float = MIN_QUAD_AREA) -> list[QuadAnnotation]:
    """Read an annotation file; blank lines and ``#`` comments are skipped."""
    out, seen = [], set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            ann = parse_annotation_line(line, min_area)
        except AnnotationParseError as exc:
            raise AnnotationParseError(f"{path}:{lineno}: {exc}") from exc
        except DegenerateQuad as exc:
            raise DegenerateQuad(f"{path}:{lineno}: {exc}") from exc
        if ann.sequence_id in seen:
            raise AnnotationParseError(f"{path}:{lineno}: duplicate sequence id {ann.sequence_id!r}")
        seen.add(ann.sequence_id)
        out.append(ann)
    return out


@lru_cache(maxsize=8)
def card_alpha(width: int, height: int, radius: float) -> np.ndarray:
    """Binary rounded-rect alpha (0/255), tested at pixel centers."""
    xs = np.arange(width) + 0.5 - width / 2.0
    ys = np.arange(height) + 0.5 - height / 2.0
    inside = rounded_rect_contains(xs[None, :], ys[:, None], width, height, radius)
    alpha = np.where(inside, 255, 0).astype(np.uint8)
    alpha.flags.writeable = False
    return alpha


def rectify_quad(image: np.ndarray, corners, size=CANONICAL_SIZE,
                 corner_radius_fraction: float = CORNER_RADIUS_FRACTION) -> np.ndarray:
    """Warp the quad onto a ``W x H`` RGBA raster with the rounded-card alpha.

    Corner ``k`` of the quad maps to target pixel corner ``k`` exactly:
    ``(0, 0), (W-1, 0), (W-1, H-1), (0, H-1)``.
    """
    w, h = size
    m = quad_homography(corners, w, h)
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    den = m[2, 0] * gx + m[2, 1] * gy + m[2, 2]
    sx = (m[0, 0] * gx + m[0, 1] * gy + m[0, 2]) / den
    sy = (m[1, 0] * gx + m[1, 1] * gy + m[1, 2]) / den
    src = image if image.ndim == 3 else image[:, :, None].repeat(3, axis=2)
    rgb = bilinear_sample(src[:, :, :3], sx, sy)
    out = np.empty((h, w, 4), dtype=np.uint8)
    out[:, :, :3] = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    out[:, :, 3] = card_alpha(w, h, corner_radius_fraction * w)
    return out


def list_frames(frame_dir) -> list[Path]:
    frame_dir = Path(frame_dir)
    if not frame_dir.is_dir():
        raise FileNotFoundError(f"frame directory not found: {frame_dir}")
    return sorted(p for p in frame_dir.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)


def read_rgb(path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot decode image {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def extract_assets(frame_dir, annotation: QuadAnnotation, stride: int = 10,
                   size=CANONICAL_SIZE,
                   corner_radius_fraction: float = CORNER_RADIUS_FRACTION) -> list[CardAsset]:
    """Rectify every ``stride``-th frame of one sequence.

    Variant ids count from 0 in filename order. The source field records the
    frame's position in the full sorted sequence.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    frames = list_frames(frame_dir)
    if not frames:
        raise EmptySequence(f"{annotation.sequence_id}: no frames in {frame_dir}")
    assets = []
    frame_size = None
    for variant, idx in enumerate(range(0, len(frames), stride)):
        rgb = read_rgb(frames[idx])
        if frame_size is None:
            frame_size = (rgb.shape[1], rgb.shape[0])
            check_quad(annotation.corners, 0.0, frame_size)
        elif (rgb.shape[1], rgb.shape[0]) != frame_size:
            raise FrameSizeMismatch(
                f"{annotation.sequence_id}: {frames[idx].name} is {rgb.shape[1]}x{rgb.shape[0]}, "
                f"expected {frame_size[0]}x{frame_size[1]}"
            )
        pixels = rectify_quad(rgb, annotation.corners, size, corner_radius_fraction)
        assets.append(CardAsset(annotation.code, variant, pixels, (annotation.sequence_id, idx)))
    return assets


def expected_variant_count(n_frames: int, stride: int) -> int:
    return math.ceil(n_frames / stride)


class AssetLibrary:
    """Asset PNGs under ``<root>/<code>/<variant>.png`` plus ``library.json``.

    Pixels are decoded lazily and cached, so worker processes only pay for
    the assets they touch.
    """

    def __init__(self, root, size, corner_radius: float, counts: dict, provenance: dict | None = None):
        self.root = Path(root) if root is not None else None
        self.size = tuple(size)
        self.corner_radius = corner_radius
        self.counts = dict(counts)
        self.provenance = provenance or {}
        self._memory: dict = {}
        self._get = lru_cache(maxsize=512)(self._read)

    @classmethod
    def open(cls, root) -> "AssetLibrary":
        root = Path(root)
        meta = json.loads((root / "library.json").read_text(encoding="utf-8"))
        counts = {code: entry["count"] for code, entry in meta["classes"].items()}
        prov = {code: entry.get("variants", []) for code, entry in meta["classes"].items()}
        return cls(root, meta["canonical_size"], meta["corner_radius"], counts, prov)

    @classmethod
    def from_assets(cls, assets, corner_radius_fraction: float = CORNER_RADIUS_FRACTION) -> "AssetLibrary":
        """In-memory library, variants renumbered per class in input order."""
        assets = list(assets)
        if not assets:
            raise ValueError("no assets")
        h, w = assets[0].pixels.shape[:2]
        lib = cls(None, (w, h), corner_radius_fraction * w, {})
        for a in assets:
            code = str(a.code)
            v = lib.counts.get(code, 0)
            lib.counts[code] = v + 1
            lib._memory[(code, v)] = a.pixels
            lib.provenance.setdefault(code, []).append(
                {"variant": v, "sequence": a.source[0], "frame": a.source[1]}
            )
        return lib

    @property
    def classes(self) -> list[str]:
        return sorted(self.counts)

    def variant_count(self, code) -> int:
        return self.counts.get(str(code), 0)

    def _read(self, code: str, variant: int) -> np.ndarray:
        path = self.root / code / f"{variant}.png"
        img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if img is None or img.ndim != 3 or img.shape[2] != 4:
            raise OSError(f"cannot decode RGBA asset {path}")
        img = cv2.cvtColor(img, cv2.COLOR_BGRA2RGBA)
        img.flags.writeable = False
        return img

    def get(self, code, variant: int) -> np.ndarray:
        code = str(code)
        if not 0 <= variant < self.counts.get(code, 0):
            raise MissingAsset(f"no asset for class {code} variant {variant}")
        if (code, variant) in self._memory:
            return self._memory[(code, variant)]
        return self._get(code, variant)

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_get"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._get = lru_cache(maxsize=512)(self._read)


def write_library(assets_by_class: dict, out_dir, size, corner_radius: float) -> AssetLibrary:
    """Write assets and the manifest. ``assets_by_class`` maps code -> ordered list."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    classes = {}
    for code in sorted(assets_by_class):
        cdir = out / code
        cdir.mkdir(exist_ok=True)
        variants = []
        for v, asset in enumerate(assets_by_class[code]):
            bgra = cv2.cvtColor(asset.pixels, cv2.COLOR_RGBA2BGRA)
            ok, buf = cv2.imencode(".png", bgra)
            if not ok:
                raise OSError(f"PNG encoding failed for {code}/{v}")
            (cdir / f"{v}.png").write_bytes(buf.tobytes())
            variants.append({"variant": v, "sequence": asset.source[0], "frame": asset.source[1]})
        # drop variants left over from an earlier, larger extraction
        for stale in cdir.glob("*.png"):
            if stale.stem.isdigit() and int(stale.stem) >= len(variants):
                stale.unlink()
        classes[code] = {"count": len(variants), "variants": variants}
    meta = {
        "canonical_size": list(size),
        "corner_radius": corner_radius,
        "classes": classes,
    }
    (out / "library.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return AssetLibrary.open(out)
