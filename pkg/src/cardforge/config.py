"""Generator configuration and per-scene seed derivation."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .catalog import SUITS
from .errors import ConfigError

SEED_ENV = "CARDFORGE_SEED"
MASK64 = (1 << 64) - 1


@dataclass
class GeneratorConfig:
    # canvas and random scatter
    canvas_width: int = 608
    canvas_height: int = 608
    min_cards: int = 1
    max_cards: int = 5
    scale_min: float = 0.55
    scale_max: float = 0.9
    min_visibility: float = 0.3
    max_attempts: int = 20
    bbox_mode: str = "visible"
    brightness_jitter: float = 0.0
    contrast_jitter: float = 0.0
    # dummy layout
    dummy_fraction: float = 0.25
    dummy_scale_min: float = 0.35
    dummy_scale_max: float = 0.45
    overlap_offset: float = 0.35
    column_pitch: float = 1.1
    block_jitter: float = 10.0
    card_jitter: float = 3.0
    suit_order: str = "SHDC"
    dummy_margin: int = 8
    dummy_extra_cards: int = 0
    # dataset
    train_fraction: float = 0.8
    seed: int = 0
    # asset extraction
    stride: int = 10
    frame_rate: float = 30.0
    asset_width: int = 200
    asset_height: int = 311
    corner_radius_fraction: float = 0.05
    min_quad_area: float = 64.0
    # execution; never affects outputs
    workers: int = 1

    def validate(self) -> "GeneratorConfig":
        problems = []

        def need(cond, msg):
            if not cond:
                problems.append(msg)

        need(self.canvas_width >= 32 and self.canvas_height >= 32, "canvas must be at least 32x32")
        need(1 <= self.min_cards <= self.max_cards, "need 1 <= min_cards <= max_cards")
        need(0 < self.scale_min <= self.scale_max, "need 0 < scale_min <= scale_max")
        need(0 < self.dummy_scale_min <= self.dummy_scale_max, "need 0 < dummy_scale_min <= dummy_scale_max")
        need(0 < self.min_visibility < 1, "min_visibility must be in (0, 1)")
        need(self.max_attempts >= 1, "max_attempts must be >= 1")
        need(self.bbox_mode in ("visible", "amodal"), "bbox_mode must be 'visible' or 'amodal'")
        need(0 <= self.brightness_jitter < 1 and 0 <= self.contrast_jitter < 1, "jitter must be in [0, 1)")
        need(0 <= self.dummy_fraction <= 1, "dummy_fraction must be in [0, 1]")
        need(0 < self.overlap_offset <= 1, "overlap_offset must be in (0, 1]")
        need(self.column_pitch >= 1.0, "column_pitch must be >= 1 (columns may not overlap)")
        need(0 <= self.block_jitter <= 45 and 0 <= self.card_jitter <= 45, "jitter angles must be in [0, 45]")
        need(sorted(self.suit_order) == sorted(SUITS), "suit_order must be a permutation of CDHS")
        need(self.dummy_margin >= 0, "dummy_margin must be >= 0")
        need(0 <= self.dummy_extra_cards <= 4, "dummy_extra_cards must be in [0, 4]")
        need(0 < self.train_fraction < 1, "train_fraction must be in (0, 1)")
        need(0 <= self.seed <= MASK64, "seed must be a 64-bit unsigned integer")
        need(self.stride >= 1, "stride must be >= 1")
        need(self.frame_rate > 0, "frame_rate must be positive")
        need(self.asset_width >= 8 and self.asset_height >= 8, "asset size must be at least 8x8")
        need(0 <= self.corner_radius_fraction <= 0.5, "corner_radius_fraction must be in [0, 0.5]")
        need(self.min_quad_area >= 0, "min_quad_area must be >= 0")
        need(self.workers >= 1, "workers must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    @property
    def canvas(self) -> tuple[int, int]:
        return self.canvas_width, self.canvas_height

    @property
    def asset_size(self) -> tuple[int, int]:
        return self.asset_width, self.asset_height

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def snapshot(self) -> dict:
        """Output-relevant settings (excludes ``workers``)."""
        d = self.to_dict()
        del d["workers"]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in data.items():
            kwargs[key] = coerce(known[key], value)
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GeneratorConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


def coerce(f: dataclasses.Field, value):
    kind = type(f.default)
    if kind is bool:
        return bool(value)
    try:
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{f.name}: cannot use {value!r} as {kind.__name__}") from None


def resolve_config(config_path=None, overrides: dict | None = None, env=None) -> GeneratorConfig:
    """Flag overrides > config file > ``CARDFORGE_SEED`` (seed only) > defaults."""
    env = os.environ if env is None else env
    data = {}
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path}: expected a JSON object")
    if "seed" not in data and env.get(SEED_ENV):
        data["seed"] = env[SEED_ENV]
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return GeneratorConfig.from_dict(data).validate()


def mix64(master_seed: int, index: int) -> int:
    """SplitMix64 finalizer over ``master + (index + 1) * golden``."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


# stream offsets keep the split permutation independent of scene streams
SPLIT_STREAM = 0xD1B54A32D192ED03
