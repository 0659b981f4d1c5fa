"""Orchestration: asset extraction and dataset generation on disk."""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import sys
from collections import defaultdict
from pathlib import Path

import cv2
from tqdm import tqdm

from .assets import AssetLibrary, extract_assets, load_annotations, write_library
from .catalog import ClassCatalog, standard_deck
from .composer import BackgroundSet, card_shape, render_scene, sample_scene_occupancy, visible_regions
from .config import GeneratorConfig
from .errors import EmptyBackgrounds, MissingClassAssets, MissingSequence
from .labels import SPLITS, scene_stem, split_dataset, to_label_records, write_labels, write_manifest

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
# Huffman-only deflate with the Average filter: lossless, faster and smaller than
# the default settings on textured scenes (encoding dominates generation time)
PNG_PARAMS = [cv2.IMWRITE_PNG_COMPRESSION, 1, cv2.IMWRITE_PNG_STRATEGY, cv2.IMWRITE_PNG_STRATEGY_HUFFMAN_ONLY,
              cv2.IMWRITE_PNG_FILTER, cv2.IMWRITE_PNG_FILTER_AVG]


def extract_library(frames_root, annotations_path, out_dir, config: GeneratorConfig, progress: bool = False):
    """Extract every annotated sequence into an asset library.

    Sequences of one class (e.g. two card patterns) are pooled; their
    variants are numbered in sequence-id order.
    """
    annotations = load_annotations(annotations_path, config.min_quad_area)
    frames_root = Path(frames_root)
    missing = [a.sequence_id for a in annotations if not (frames_root / a.sequence_id).is_dir()]
    if missing:
        raise MissingSequence("frame directory missing for sequence(s): " + ", ".join(missing))

    radius = config.corner_radius_fraction * config.asset_width
    jobs = sorted(annotations, key=lambda a: (str(a.code), a.sequence_id))
    args = [(frames_root / a.sequence_id, a, config.stride, config.asset_size, config.corner_radius_fraction)
            for a in jobs]
    if config.workers > 1 and len(args) > 1:
        with mp.get_context(_mp_method()).Pool(min(config.workers, len(args))) as pool:
            results = pool.starmap(extract_assets, args)
    else:
        results = [extract_assets(*a) for a in tqdm(args, disable=not progress, file=sys.stderr, desc="extract")]

    by_class = defaultdict(list)
    for ann, assets in zip(jobs, results):
        by_class[str(ann.code)].extend(assets)
    return write_library(by_class, out_dir, config.asset_size, radius)


def _mp_method() -> str:
    return "fork" if "fork" in mp.get_all_start_methods() else "spawn"


class SceneJob:
    """Everything a worker needs to produce scenes; shared read-only."""

    def __init__(self, assets_dir, backgrounds, out_dir, config: GeneratorConfig, catalog: ClassCatalog,
                 splits: list[str]):
        self.assets_dir = Path(assets_dir)
        self.library = AssetLibrary.open(assets_dir)
        self.backgrounds = backgrounds
        self.out_dir = Path(out_dir)
        self.config = config
        self.catalog = catalog
        self.splits = splits

    def __call__(self, index: int) -> dict:
        cfg = self.config
        split = self.splits[index]
        stem = scene_stem(index)
        image_path = self.out_dir / split / f"{stem}.png"
        label_path = self.out_dir / split / f"{stem}.txt"
        spec, occupancy = sample_scene_occupancy(cfg, cfg.seed, index, self.library, self.backgrounds,
                                                 self.catalog)
        if image_path.is_file() and label_path.is_file():
            regions = visible_regions(spec, card_shape(self.library), cfg.bbox_mode, occupancy)
        else:
            rgba, regions = render_scene(spec, self.library, self.backgrounds, cfg.bbox_mode, occupancy)
            records = to_label_records(regions, spec.canvas, self.catalog, cfg.min_visibility)
            ok, buf = cv2.imencode(".png", cv2.cvtColor(rgba, cv2.COLOR_RGBA2BGR), PNG_PARAMS)
            if not ok:
                raise OSError(f"PNG encoding failed for scene {index}")
            # label last: a scene counts as done only when both files exist
            _atomic_write(image_path, buf.tobytes())
            tmp = label_path.with_suffix(".txt.tmp")
            write_labels(records, tmp)
            os.replace(tmp, label_path)

        entry = spec.to_dict()
        entry["split"] = split
        entry["image"] = f"{split}/{stem}.png"
        entry["label"] = f"{split}/{stem}.txt"
        by_z = {r.z: r for r in regions}
        for p in entry["placements"]:
            r = by_z[p["z"]]
            p["visible"] = r.visible
            p["total"] = r.total
            p["labeled"] = bool(r.visible > 0 and r.bbox is not None and r.fraction >= cfg.min_visibility)
        return entry


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


_worker_job: SceneJob | None = None


def _init_worker(job: SceneJob) -> None:
    global _worker_job
    _worker_job = job


def _run_index(index: int) -> dict:
    return _worker_job(index)


def check_inputs(library: AssetLibrary, catalog: ClassCatalog, backgrounds: BackgroundSet,
                 config: GeneratorConfig) -> None:
    needed = list(catalog.names)
    if config.dummy_fraction > 0:
        needed += [c for c in standard_deck() if c not in needed]
    missing = [c for c in needed if library.variant_count(c) == 0]
    if missing:
        raise MissingClassAssets(missing)
    if not len(backgrounds):
        raise EmptyBackgrounds("no background images found")


def generate_dataset(assets_dir, backgrounds_dir, out_dir, count: int, config: GeneratorConfig,
                     catalog: ClassCatalog | None = None, progress: bool = False) -> dict:
    """Render ``count`` scenes into ``out_dir`` and write the manifest.

    Scenes whose image and label already exist are not re-rendered, so an
    interrupted run can simply be repeated.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    catalog = catalog or ClassCatalog.default()
    out = Path(out_dir)
    backgrounds = BackgroundSet.from_dir(backgrounds_dir)
    library = AssetLibrary.open(assets_dir)
    check_inputs(library, catalog, backgrounds, config)

    splits = split_dataset(count, config.train_fraction, config.seed)
    for s in SPLITS:
        (out / s).mkdir(parents=True, exist_ok=True)
    catalog.write_names_file(out / "classes.names")

    job = SceneJob(assets_dir, backgrounds, out, config, catalog, splits)
    indices = range(count)
    bar = tqdm(total=count, disable=not progress, file=sys.stderr, desc="generate")
    entries = []
    if config.workers > 1 and count > 1:
        ctx = mp.get_context(_mp_method())
        with ctx.Pool(config.workers, initializer=_init_worker, initargs=(job,)) as pool:
            for entry in pool.imap(_run_index, indices, chunksize=8):
                entries.append(entry)
                bar.update()
    else:
        for i in indices:
            entries.append(job(i))
            bar.update()
    bar.close()

    manifest = {
        "version": MANIFEST_VERSION,
        "config": config.snapshot(),
        "seed": config.seed,
        "catalog_sha256": catalog.digest(),
        "classes": list(catalog.names),
        "splits": {s: splits.count(s) for s in SPLITS},
        "scenes": entries,
    }
    write_manifest(out / "manifest.json", manifest)
    return manifest
