import dataclasses
import math
from collections import Counter

import numpy as np
import pytest
from helpers import brute_force_visibility

from cardforge.catalog import RANK_STRENGTH, standard_deck
from cardforge.composer import sample_scene, visible_regions
from cardforge.config import GeneratorConfig
from cardforge.dummy import layout_dummy, make_hand, sample_dummy_hand
from cardforge.errors import CanvasTooSmall
from cardforge.scene import CardShape

SHAPE = CardShape(200.0, 311.0, 10.0)
STILL = GeneratorConfig(block_jitter=0.0, card_jitter=0.0)
DUMMY = GeneratorConfig(dummy_fraction=1.0)


def check_hand(hand, suit_order="SHDC"):
    assert len(hand.cards) == 13 and len(set(hand.cards)) == 13
    suits = [c[0] for c in hand.cards]
    # contiguous groups in suit order
    seen = [s for i, s in enumerate(suits) if i == 0 or suits[i - 1] != s]
    assert len(seen) == len(set(seen))
    assert seen == [s for s in suit_order if s in seen]
    for col in hand.columns:
        strengths = [RANK_STRENGTH[c[1]] for c in col]
        assert strengths == sorted(strengths, reverse=True) and len(set(strengths)) == len(strengths)


def test_hand_properties():
    rng = np.random.default_rng(0)
    for _ in range(200):
        check_hand(sample_dummy_hand(rng))


def test_descending_spades():
    hand = make_hand(["S2", "SA", "SK", "H3", "H4", "D5", "D6", "C7", "C8", "C9", "CT", "CJ", "CQ"])
    assert hand.columns[0] == ["SA", "SK", "S2"]


def test_card_frequency_is_quarter():
    rng = np.random.default_rng(77)
    counts = Counter()
    n = 10_000
    for _ in range(n):
        counts.update(sample_dummy_hand(rng).cards)
    freq = np.array([counts[c] / n for c in standard_deck()])
    assert np.all(np.abs(freq - 13 / 52) <= 0.02)


def test_zero_jitter_geometry():
    hand = make_hand(["SA", "SQ", "S9", "HK", "H5", "D2", "D3", "D4", "D8", "CA", "CJ", "C6", "C2"])
    scale = 0.4
    placements = layout_dummy(hand, STILL, np.random.default_rng(1), (608, 608), scale, SHAPE)
    assert len(placements) == 13 and [p.z for p in placements] == list(range(13))
    offset = STILL.overlap_offset * SHAPE.height * scale
    pitch = STILL.column_pitch * SHAPE.width * scale
    it = iter(placements)
    cols = [[next(it) for _ in col] for col in hand.columns]
    top_y = cols[0][0].center[1]
    x_first = cols[0][0].center[0]
    for j, col in enumerate(cols):
        assert col[0].center[1] == pytest.approx(top_y, abs=1e-9)
        for k, p in enumerate(col):
            assert p.center[1] == pytest.approx(top_y + k * offset, abs=1e-9)
            assert p.center[0] == pytest.approx(x_first + j * pitch, abs=1e-9)
            assert p.rotation == 0.0 and p.scale == scale


def test_single_suit_visibility():
    hand = make_hand(["S" + r for r in "A23456789TJQK"])
    cfg = dataclasses.replace(STILL, overlap_offset=0.25)
    placements = layout_dummy(hand, cfg, np.random.default_rng(2), (608, 608), 0.3, SHAPE)
    assert len({round(p.center[0], 9) for p in placements}) == 1
    _, visible, total = brute_force_visibility(placements, (608, 608))
    assert visible[12] == total[12]
    for z in range(12):
        assert abs(visible[z] / total[z] - cfg.overlap_offset) <= 0.03


def test_canvas_too_small():
    hand = make_hand(["S" + r for r in "A23456789TJQK"])
    with pytest.raises(CanvasTooSmall):
        layout_dummy(hand, STILL, np.random.default_rng(0), (608, 608), 0.9, SHAPE)
    shrunk = layout_dummy(hand, STILL, np.random.default_rng(0), (608, 608), 0.9, SHAPE, shrink_to_fit=True)
    assert shrunk[0].scale < 0.9


def test_suit_grouping_in_block_frame():
    rng = np.random.default_rng(5)
    for _ in range(50):
        hand = sample_dummy_hand(rng)
        placements = layout_dummy(hand, DUMMY, rng, (608, 608), 0.4, SHAPE, shrink_to_fit=True)
        # undo the block rotation: use the mean card rotation as an estimate of the block angle
        angles = np.radians([(p.rotation + 180) % 360 - 180 for p in placements])
        t = float(np.mean(angles))
        xs = [math.cos(t) * p.center[0] + math.sin(t) * p.center[1] for p in placements]
        order = [p.code[0] for _, p in sorted(zip(xs, placements), key=lambda q: q[0])]
        runs = [s for i, s in enumerate(order) if i == 0 or order[i - 1] != s]
        assert len(runs) == len(set(runs))


def test_default_dummy_scenes_are_labelable(library, backgrounds):
    cfg = DUMMY
    strip = 0.2  # index corner strip: top 20% of the card, inside the corner radius
    for idx in range(30):
        spec = sample_scene(cfg, 13, idx, library, backgrounds)
        assert spec.kind == "dummy" and len(spec.placements) == 13
        regions = visible_regions(spec, SHAPE)
        for p, r in zip(sorted(spec.placements, key=lambda p: p.z), regions):
            assert r.fraction >= cfg.min_visibility
            t = math.radians(p.rotation)
            for u, v in ((-90, -155.5), (90, -155.5), (-90, -155.5 + strip * 311), (90, -155.5 + strip * 311)):
                x = p.center[0] + p.scale * (math.cos(t) * u - math.sin(t) * v)
                y = p.center[1] + p.scale * (math.sin(t) * u + math.cos(t) * v)
                x0, y0, x1, y1 = r.bbox
                assert x0 - 1 <= x <= x1 + 1 and y0 - 1 <= y <= y1 + 1


def test_dummy_deterministic_and_extra_cards(library, backgrounds):
    cfg = dataclasses.replace(DUMMY, dummy_extra_cards=2)
    a = sample_scene(cfg, 4, 2, library, backgrounds)
    assert a == sample_scene(cfg, 4, 2, library, backgrounds)
    hand = {p.code for p in a.placements[:13]}
    extras = a.placements[13:]
    assert len(hand) == 13 and len(extras) <= 2
    assert all(p.code not in hand for p in extras)
