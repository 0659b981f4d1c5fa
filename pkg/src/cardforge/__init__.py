"""Synthetic, automatically labeled playing-card detection datasets."""

from .assets import AssetLibrary, CardAsset, QuadAnnotation, extract_assets, load_annotations, rectify_quad
from .catalog import ClassCatalog, ClassCode, catalog_index, parse_class_code
from .composer import BackgroundSet, render_scene, sample_scene
from .config import GeneratorConfig
from .dummy import DummyHand, layout_dummy, sample_dummy_hand
from .labels import LabelRecord, split_dataset, to_label_records, write_labels
from .scene import Placement, SceneSpec, VisibleRegion, footprint_mask

__version__ = "0.1.0"

__all__ = [
    "AssetLibrary", "BackgroundSet", "CardAsset", "ClassCatalog", "ClassCode", "DummyHand", "GeneratorConfig",
    "LabelRecord", "Placement", "QuadAnnotation", "SceneSpec", "VisibleRegion", "catalog_index",
    "extract_assets", "footprint_mask", "layout_dummy", "load_annotations", "parse_class_code",
    "rectify_quad", "render_scene", "sample_dummy_hand", "sample_scene", "split_dataset",
    "to_label_records", "write_labels",
]
