"""Dataset validation, statistics and label overlays."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .catalog import ClassCatalog
from .errors import MalformedLabel
from .labels import LABEL_LINE, SPLITS, LabelRecord, parse_label_line, read_labels

BALANCE_TOLERANCE = 0.25
BOX_COLOR = (0, 255, 0)  # RGB
EPS = 1e-6


@dataclass
class DatasetStats:
    scenes: dict = field(default_factory=dict)
    labels_per_class: dict = field(default_factory=dict)
    labels_per_scene: dict = field(default_factory=dict)
    visibility: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def total_labels(self) -> int:
        return sum(self.labels_per_class.values())

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        d = asdict(self)
        d["labels_per_scene"] = {str(k): v for k, v in sorted(self.labels_per_scene.items())}
        d["total_labels"] = self.total_labels
        return d


def check_label_line(line: str, n_classes: int) -> list[str]:
    """Problems with one label line; empty if it is valid."""
    problems = []
    if not LABEL_LINE.match(line):
        problems.append("line does not match '<int> 0.dddddd x4'")
    try:
        rec = parse_label_line(line)
    except MalformedLabel as exc:
        return problems + [str(exc)]
    if rec.class_index >= n_classes:
        problems.append(f"class index {rec.class_index} out of range (catalog has {n_classes})")
    if rec.w <= 0 or rec.h <= 0:
        problems.append("box has zero or negative size")
    x0, y0, x1, y1 = rec.cx - rec.w / 2, rec.cy - rec.h / 2, rec.cx + rec.w / 2, rec.cy + rec.h / 2
    if min(x0, y0) < -EPS or max(x1, y1) > 1 + EPS:
        problems.append("box extends outside the image")
    return problems


def _catalog_for(dataset: Path) -> ClassCatalog:
    return ClassCatalog.load(dataset / "classes.names")


def validate_dataset(dataset_dir) -> DatasetStats:
    """Check layout and every label line; content problems are collected, not raised."""
    root = Path(dataset_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    catalog = _catalog_for(root)
    n = len(catalog)
    stats = DatasetStats()
    per_class = Counter()
    per_scene = Counter()

    for split in SPLITS:
        sdir = root / split
        if not sdir.is_dir():
            stats.scenes[split] = 0
            continue
        images = {p.stem for p in sdir.glob("*.png")}
        labels = {p.stem for p in sdir.glob("*.txt")}
        for stem in sorted(images - labels):
            stats.errors.append(f"{split}/{stem}.png: no label file")
        for stem in sorted(labels - images):
            stats.errors.append(f"{split}/{stem}.txt: no image file")
        stats.scenes[split] = len(images & labels)
        for stem in sorted(labels):
            path = sdir / f"{stem}.txt"
            raw = path.read_bytes()
            if b"\r" in raw:
                stats.errors.append(f"{split}/{stem}.txt: CR line endings")
            try:
                text = raw.decode("ascii")
            except UnicodeDecodeError:
                stats.errors.append(f"{split}/{stem}.txt: not ASCII")
                continue
            if text and not text.endswith("\n"):
                stats.errors.append(f"{split}/{stem}.txt: missing final newline")
            count = 0
            for lineno, line in enumerate(text.splitlines(), 1):
                problems = check_label_line(line, n)
                for prob in problems:
                    stats.errors.append(f"{split}/{stem}.txt:{lineno}: {prob}")
                if not problems:
                    per_class[parse_label_line(line).class_index] += 1
                    count += 1
            per_scene[count] += 1

    stats.labels_per_class = {catalog.name(i): per_class.get(i, 0) for i in range(n)}
    stats.labels_per_scene = dict(sorted(per_scene.items()))
    _manifest_checks(root, stats)
    stats.warnings.extend(balance_warnings(stats.labels_per_class))
    return stats


def _manifest_checks(root: Path, stats: DatasetStats) -> None:
    path = root / "manifest.json"
    if not path.is_file():
        stats.warnings.append("manifest.json missing; visibility summary unavailable")
        return
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        stats.errors.append(f"manifest.json: {exc}")
        return
    for split, n in manifest.get("splits", {}).items():
        if stats.scenes.get(split, 0) != n:
            stats.errors.append(f"manifest lists {n} {split} scenes, found {stats.scenes.get(split, 0)}")
    fractions = visibility_fractions(manifest)
    if fractions.size:
        stats.visibility = {"min": float(fractions.min()), "mean": float(fractions.mean()),
                            "max": float(fractions.max()), "count": int(fractions.size)}


def visibility_fractions(manifest: dict) -> np.ndarray:
    vals = [p["visible"] / p["total"]
            for s in manifest.get("scenes", []) for p in s.get("placements", [])
            if p.get("labeled") and p.get("total")]
    return np.asarray(vals, dtype=float)


def balance_warnings(histogram: dict, tolerance: float = BALANCE_TOLERANCE) -> list[str]:
    counts = np.array(list(histogram.values()), dtype=float)
    if counts.size == 0 or counts.sum() == 0:
        return []
    mean = counts.mean()
    return [f"class {name}: {c} labels deviates more than {tolerance:.0%} from mean {mean:.1f}"
            for name, c in histogram.items() if abs(c - mean) > tolerance * mean]


def box_pixels(rec: LabelRecord, width: int, height: int) -> tuple[int, int, int, int]:
    """Inclusive pixel corners ``(x0, y0, x1, y1)`` of a label's rectangle."""
    x0, y0, x1, y1 = rec.corners(width, height)
    px0 = min(max(int(round(x0)), 0), width - 1)
    py0 = min(max(int(round(y0)), 0), height - 1)
    px1 = min(max(int(round(x1)) - 1, px0), width - 1)
    py1 = min(max(int(round(y1)) - 1, py0), height - 1)
    return px0, py0, px1, py1


def draw_overlay(image: np.ndarray, records, catalog: ClassCatalog):
    """Draw boxes and class names on a copy of an RGB image.

    Returns ``(overlay, ids)`` where ``ids`` is a uint16 raster holding
    ``k + 1`` on the outline pixels of the k-th rectangle.
    """
    overlay = np.ascontiguousarray(image[:, :, :3]).copy()
    h, w = overlay.shape[:2]
    ids = np.zeros((h, w), dtype=np.uint16)
    for k, rec in enumerate(records):
        x0, y0, x1, y1 = box_pixels(rec, w, h)
        cv2.rectangle(overlay, (x0, y0), (x1, y1), BOX_COLOR, 1)
        cv2.rectangle(ids, (x0, y0), (x1, y1), k + 1, 1)
        name = catalog.name(rec.class_index) if rec.class_index < len(catalog) else str(rec.class_index)
        (tw, th), base = cv2.getTextSize(name, cv2.FONT_HERSHEY_SIMPLEX, 0.5, 1)
        ty = y0 - 3 if y0 - th - 3 >= 0 else y0 + th + 3
        cv2.putText(overlay, name, (x0 + 2, ty), cv2.FONT_HERSHEY_SIMPLEX, 0.5, BOX_COLOR, 1, cv2.LINE_AA)
    return overlay, ids


def render_overlay(image_path, label_path, catalog: ClassCatalog) -> np.ndarray:
    img = cv2.imread(str(image_path), cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot decode image {image_path}")
    records = read_labels(label_path)
    overlay, _ = draw_overlay(cv2.cvtColor(img, cv2.COLOR_BGR2RGB), records, catalog)
    return overlay


def sample_scenes(dataset_dir, k: int, seed: int) -> list[tuple[str, str]]:
    """Seeded sample of ``(split, stem)`` pairs that have both files."""
    root = Path(dataset_dir)
    pairs = []
    for split in SPLITS:
        sdir = root / split
        if sdir.is_dir():
            pairs += [(split, p.stem) for p in sorted(sdir.glob("*.png")) if (sdir / f"{p.stem}.txt").is_file()]
    if k >= len(pairs):
        return pairs
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(len(pairs), size=k, replace=False))
    return [pairs[i] for i in picks]


def write_overlays(dataset_dir, out_dir, k: int, seed: int = 0) -> list[Path]:
    root = Path(dataset_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    catalog = _catalog_for(root)
    written = []
    for split, stem in sample_scenes(root, k, seed):
        overlay = render_overlay(root / split / f"{stem}.png", root / split / f"{stem}.txt", catalog)
        path = out / f"{stem}.png"
        cv2.imwrite(str(path), cv2.cvtColor(overlay, cv2.COLOR_RGB2BGR))
        written.append(path)
    return written


def write_class_counts(stats: DatasetStats, path) -> Path:
    """Per-class label counts as CSV: class index, name, count, share of mean."""
    counts = list(stats.labels_per_class.items())
    mean = (sum(c for _, c in counts) / len(counts)) if counts else 0.0
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class_index", "class", "labels", "ratio_to_mean"])
        for i, (name, c) in enumerate(counts):
            writer.writerow([i, name, c, f"{c / mean:.4f}" if mean else "nan"])
    return path


def run_qc(dataset_dir, out_dir=None, overlays: int = 10, seed: int = 0, figures: bool = True) -> DatasetStats:
    """Validate, then write ``stats.json``, ``class_counts.csv``, figures and overlays under ``qc/``."""
    from . import plotting

    root = Path(dataset_dir)
    qc_dir = Path(out_dir) if out_dir is not None else root / "qc"
    stats = validate_dataset(root)
    qc_dir.mkdir(parents=True, exist_ok=True)
    (qc_dir / "stats.json").write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    write_class_counts(stats, qc_dir / "class_counts.csv")
    if figures:
        plotting.class_balance_figure(stats.labels_per_class, qc_dir / "figures" / "class_balance.png",
                                      BALANCE_TOLERANCE)
        plotting.labels_per_scene_figure(stats.labels_per_scene, qc_dir / "figures" / "labels_per_scene.png")
        manifest = root / "manifest.json"
        if manifest.is_file():
            try:
                data = json.loads(manifest.read_text(encoding="utf-8"))
                fractions = visibility_fractions(data)
                threshold = data.get("config", {}).get("min_visibility")
            except (json.JSONDecodeError, KeyError):
                fractions, threshold = np.array([]), None
            plotting.visibility_figure(fractions, qc_dir / "figures" / "visibility.png", threshold)
    write_overlays(root, qc_dir / "overlays", overlays, seed)
    return stats
