"""The "bridge dummy" arrangement.

Thirteen cards of one hand lie face up in overlapping suit columns: one
column per suit present, each column sorted from ace down, every card
covering the lower part of the one above so only its index strip shows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import parse_class_code, sort_hand, standard_deck
from .errors import CanvasTooSmall
from .geometry import normalize_angle, rotated_half_extents
from .scene import CardShape, Placement

HAND_SIZE = 13


@dataclass(frozen=True)
class DummyHand:
    cards: tuple[str, ...]  # suit-grouped, descending rank within suit
    suit_order: str

    @property
    def columns(self) -> list[list[str]]:
        cols = [[c for c in self.cards if c[0] == s] for s in self.suit_order]
        return [c for c in cols if c]


def make_hand(codes, suit_order: str = "SHDC") -> DummyHand:
    codes = [str(parse_class_code(c)) for c in codes]
    if len(codes) != HAND_SIZE or len(set(codes)) != HAND_SIZE:
        raise ValueError("a dummy hand is 13 distinct cards")
    return DummyHand(tuple(sort_hand(codes, suit_order)), suit_order)


def sample_dummy_hand(rng: np.random.Generator, suit_order: str = "SHDC") -> DummyHand:
    deck = standard_deck()
    picks = rng.choice(len(deck), size=HAND_SIZE, replace=False)
    return make_hand([deck[i] for i in picks], suit_order)


def layout_dummy(hand: DummyHand, config, rng: np.random.Generator, canvas, scale: float,
                 shape: CardShape = CardShape(), shrink_to_fit: bool = False) -> list[Placement]:
    """Place the hand as suit columns. Returns placements with ``variant=0``.

    Draw order from ``rng``: block rotation, one jitter per card (column by
    column, top to bottom), block center x, block center y. With
    ``shrink_to_fit`` the scale is reduced until the block fits instead of
    raising :class:`CanvasTooSmall`.
    """
    cw_canvas, ch_canvas = canvas
    columns = hand.columns
    block = rng.uniform(-config.block_jitter, config.block_jitter) if config.block_jitter > 0 else 0.0
    n = sum(len(c) for c in columns)
    jitter = (rng.uniform(-config.card_jitter, config.card_jitter, size=n)
              if config.card_jitter > 0 else np.zeros(n))

    # unit-scale geometry, in the block frame
    pitch = config.column_pitch * shape.width
    offset = config.overlap_offset * shape.height
    longest = max(len(c) for c in columns)
    mid_x = (len(columns) - 1) * pitch / 2.0
    mid_y = (longest - 1) * offset / 2.0
    t = math.radians(block)
    cb, sb = math.cos(t), math.sin(t)

    cards = []
    k = 0
    for j, col in enumerate(columns):
        for i, code in enumerate(col):
            lx, ly = j * pitch - mid_x, i * offset - mid_y
            dx, dy = cb * lx - sb * ly, sb * lx + cb * ly
            rot = block + float(jitter[k])
            cards.append((code, dx, dy, rot))
            k += 1

    # extents at unit scale; everything scales linearly
    lo_x = min(dx - rotated_half_extents(shape.width, shape.height, r)[0] for _, dx, _, r in cards)
    hi_x = max(dx + rotated_half_extents(shape.width, shape.height, r)[0] for _, dx, _, r in cards)
    lo_y = min(dy - rotated_half_extents(shape.width, shape.height, r)[1] for _, _, dy, r in cards)
    hi_y = max(dy + rotated_half_extents(shape.width, shape.height, r)[1] for _, _, dy, r in cards)
    room_x = cw_canvas - 2 * config.dummy_margin
    room_y = ch_canvas - 2 * config.dummy_margin
    fit = min(room_x / (hi_x - lo_x), room_y / (hi_y - lo_y))
    if scale > fit:
        if not shrink_to_fit or fit <= 0:
            raise CanvasTooSmall(
                f"dummy block of {len(columns)} columns x {longest} cards at scale {scale:g} "
                f"needs scale <= {fit:.4g} on a {cw_canvas}x{ch_canvas} canvas"
            )
        scale = fit * (1.0 - 1e-9)

    x_lo = config.dummy_margin - lo_x * scale
    x_hi = cw_canvas - config.dummy_margin - hi_x * scale
    y_lo = config.dummy_margin - lo_y * scale
    y_hi = ch_canvas - config.dummy_margin - hi_y * scale
    bx = rng.uniform(x_lo, x_hi) if x_hi > x_lo else x_lo
    by = rng.uniform(y_lo, y_hi) if y_hi > y_lo else y_lo

    return [
        Placement(code, 0, (bx + dx * scale, by + dy * scale), normalize_angle(rot), scale, z)
        for z, (code, dx, dy, rot) in enumerate(cards)
    ]
