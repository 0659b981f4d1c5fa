"""Detector label files, the train/test split and the dataset manifest.

Label files hold one line per visible card, ``<class> <cx> <cy> <w> <h>``,
with the box center and size normalised by the canvas size.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SPLIT_STREAM, mix64
from .errors import InvalidFraction, MalformedLabel

_UNIT = r"(?:0\.\d{6}|1\.000000)"
LABEL_LINE = re.compile(rf"^\d+ {_UNIT} {_UNIT} {_UNIT} {_UNIT}$")
SPLITS = ("train", "test")


@dataclass(frozen=True)
class LabelRecord:
    class_index: int
    cx: float
    cy: float
    w: float
    h: float

    def line(self) -> str:
        return f"{self.class_index} {self.cx:.6f} {self.cy:.6f} {self.w:.6f} {self.h:.6f}"

    def rounded(self) -> "LabelRecord":
        return LabelRecord(self.class_index, *(float(f"{v:.6f}") for v in (self.cx, self.cy, self.w, self.h)))

    def corners(self, width: int, height: int) -> tuple[float, float, float, float]:
        """Denormalised ``(x_min, y_min, x_max, y_max)`` in pixels, max exclusive."""
        return ((self.cx - self.w / 2) * width, (self.cy - self.h / 2) * height,
                (self.cx + self.w / 2) * width, (self.cy + self.h / 2) * height)


def bbox_to_record(class_index: int, bbox, canvas) -> LabelRecord:
    cw, ch = canvas
    x0, y0, x1, y1 = (float(v) for v in bbox)
    x0, x1 = max(x0, 0.0), min(x1, float(cw))
    y0, y1 = max(y0, 0.0), min(y1, float(ch))
    return LabelRecord(class_index, (x0 + x1) / 2 / cw, (y0 + y1) / 2 / ch, (x1 - x0) / cw, (y1 - y0) / ch)


def to_label_records(regions, canvas, catalog, min_visibility: float = 0.0) -> list[LabelRecord]:
    """One record per region that is visible enough, in z order."""
    out = []
    for r in sorted(regions, key=lambda r: r.z):
        if r.visible <= 0 or r.bbox is None or r.fraction < min_visibility:
            continue
        out.append(bbox_to_record(catalog.index(r.code), r.bbox, canvas))
    return out


def format_labels(records) -> str:
    return "".join(r.line() + "\n" for r in records)


def write_labels(records, path) -> None:
    Path(path).write_bytes(format_labels(records).encode("ascii"))


def parse_label_line(line: str) -> LabelRecord:
    parts = line.split()
    if len(parts) != 5:
        raise MalformedLabel(f"expected 5 fields, got {len(parts)}: {line!r}")
    try:
        idx = int(parts[0])
        vals = [float(v) for v in parts[1:]]
    except ValueError:
        raise MalformedLabel(f"non-numeric field in {line!r}") from None
    if idx < 0 or not all(math.isfinite(v) for v in vals):
        raise MalformedLabel(f"invalid values in {line!r}")
    return LabelRecord(idx, *vals)


def parse_labels(text: str) -> list[LabelRecord]:
    return [parse_label_line(line) for line in text.splitlines() if line.strip()]


def read_labels(path) -> list[LabelRecord]:
    return parse_labels(Path(path).read_text(encoding="ascii"))


def train_count(total: int, fraction: float) -> int:
    # half-up rounding, not Python's round-half-even
    return int(math.floor(total * fraction + 0.5))


def split_dataset(total: int, fraction: float, master_seed: int) -> list[str]:
    """Assign each scene index to ``"train"`` or ``"test"``.

    The first ``train_count`` positions of a seeded permutation go to train.
    """
    if not 0 < fraction < 1:
        raise InvalidFraction(f"train fraction must be in (0, 1), got {fraction}")
    if total < 0:
        raise ValueError("total must be >= 0")
    rng = np.random.Generator(np.random.PCG64(mix64(master_seed ^ SPLIT_STREAM, total)))
    order = rng.permutation(total)
    split = np.full(total, 1, dtype=np.int8)
    split[order[:train_count(total, fraction)]] = 0
    return [SPLITS[s] for s in split]


def scene_stem(index: int) -> str:
    return f"{index:06d}"


def write_manifest(path, manifest: dict) -> None:
    text = json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    Path(path).write_bytes(text.encode("utf-8"))


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
