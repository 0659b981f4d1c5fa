"""Procedural stand-ins for the recorded inputs, for tests and demos.

Real use feeds photographed frame sequences and a texture dataset. This
module draws simple card faces, "films" each under drifting lamp light with
a fixed slightly-perspective pose, and writes noise textures as backgrounds.

    python -m cardforge.synthetic demo_inputs --frames 30
"""

from __future__ import annotations

import argparse
from pathlib import Path

import cv2
import numpy as np

from .catalog import standard_deck

FACE_SIZE = (200, 311)
RED = (200, 30, 40)
BLACK = (20, 20, 20)


def card_face(code: str, pattern: int = 0, size=FACE_SIZE) -> np.ndarray:
    """RGB face with the code in two corners and a large central mark."""
    w, h = size
    face = np.full((h, w, 3), 245 if pattern == 0 else 232, dtype=np.uint8)
    color = RED if code[0] in "DH" else BLACK
    frame_color = (40, 60, 160) if pattern == 0 else (30, 120, 60)
    cv2.rectangle(face, (6, 6), (w - 7, h - 7), frame_color, 2)
    for x, y, s in ((12, 34, 0.9), (w - 48, h - 14, 0.9)):
        cv2.putText(face, code, (x, y), cv2.FONT_HERSHEY_SIMPLEX, s, color, 2, cv2.LINE_AA)
    cv2.putText(face, code[1], (w // 2 - 30, h // 2 + 25), cv2.FONT_HERSHEY_DUPLEX, 2.6, color, 4, cv2.LINE_AA)
    cv2.circle(face, (w // 2, h // 2 + 70), 14 + 3 * pattern, color, -1)
    return face


def default_quad(frame_size=(320, 440)) -> list[tuple[float, float]]:
    """A mildly perspective card pose well inside the frame."""
    fw, fh = frame_size
    return [(0.17 * fw, 0.12 * fh), (0.82 * fw, 0.14 * fh), (0.85 * fw, 0.88 * fh), (0.14 * fw, 0.86 * fh)]


def film_card(face: np.ndarray, quad, n_frames: int, frame_size=(320, 440), seed: int = 0,
              background=(70, 110, 80)):
    """Yield RGB frames of a stationary card under changing light."""
    fw, fh = frame_size
    h, w = face.shape[:2]
    src = np.float32([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]])
    m = cv2.getPerspectiveTransform(src, np.float32(quad))
    base = np.empty((fh, fw, 3), dtype=np.uint8)
    base[:] = background
    warped = cv2.warpPerspective(face, m, (fw, fh), flags=cv2.INTER_LINEAR)
    mask = cv2.warpPerspective(np.full((h, w), 255, np.uint8), m, (fw, fh), flags=cv2.INTER_NEAREST)
    scene = np.where(mask[:, :, None] > 0, warped, base).astype(np.float32)

    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:fh, 0:fw].astype(np.float32)
    for i in range(n_frames):
        angle = 2 * np.pi * (i / max(n_frames, 1)) + rng.uniform(-0.2, 0.2)
        lx, ly = fw / 2 + 0.6 * fw * np.cos(angle), fh / 2 + 0.6 * fh * np.sin(angle)
        dist = np.hypot(xx - lx, yy - ly) / np.hypot(fw, fh)
        gain = rng.uniform(0.6, 1.2) * (1.25 - 0.6 * dist)
        tint = rng.uniform(0.85, 1.1, size=3).astype(np.float32)
        yield np.clip(scene * gain[:, :, None] * tint, 0, 255).astype(np.uint8)


def write_sequence(out_dir, code: str, n_frames: int, frame_size=(320, 440), pattern: int = 0,
                   seed: int = 0, quad=None) -> list[tuple[float, float]]:
    """Write ``frame_00000.png...`` into ``out_dir`` and return the card quad."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    quad = quad or default_quad(frame_size)
    for i, frame in enumerate(film_card(card_face(code, pattern), quad, n_frames, frame_size, seed)):
        cv2.imwrite(str(out / f"frame_{i:05d}.png"), cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    return quad


def annotation_line(sequence_id: str, code: str, quad) -> str:
    corners = ";".join(f"{x:g},{y:g}" for x, y in quad)
    return f"{sequence_id};{code};{corners}"


def write_inputs(root, codes=None, n_frames: int = 10, patterns: int = 1, frame_size=(320, 440),
                 n_backgrounds: int = 8, seed: int = 0) -> dict:
    """Frames, annotation file and backgrounds under ``root``; returns their paths."""
    root = Path(root)
    codes = codes or standard_deck()
    lines = []
    for pattern in range(patterns):
        for k, code in enumerate(codes):
            seq = f"seq_{code}_{pattern}"
            quad = write_sequence(root / "frames" / seq, code, n_frames, frame_size, pattern,
                                  seed * 1000 + pattern * 100 + k)
            lines.append(annotation_line(seq, code, quad))
    ann = root / "annotations.txt"
    ann.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_backgrounds(root / "backgrounds", n_backgrounds, seed=seed)
    return {"frames": root / "frames", "annotations": ann, "backgrounds": root / "backgrounds"}


def texture(size=(640, 480), seed: int = 0) -> np.ndarray:
    """Smooth colored noise plus stripes, loosely texture-like."""
    w, h = size
    rng = np.random.default_rng(seed)
    noise = rng.random((h // 16 + 1, w // 16 + 1, 3)).astype(np.float32)
    img = cv2.resize(noise, (w, h), interpolation=cv2.INTER_CUBIC)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    freq, theta = rng.uniform(0.02, 0.1), rng.uniform(0, np.pi)
    stripes = 0.5 + 0.5 * np.sin(freq * (xx * np.cos(theta) + yy * np.sin(theta)))
    base = rng.uniform(40, 200, size=3).astype(np.float32)
    img = base * (0.6 + 0.4 * img) * (0.75 + 0.25 * stripes[:, :, None])
    return np.clip(img, 0, 255).astype(np.uint8)


def write_backgrounds(out_dir, n: int, size=(640, 480), seed: int = 0) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        path = out / f"texture_{i:04d}.jpg"
        cv2.imwrite(str(path), cv2.cvtColor(texture(size, seed * 7919 + i), cv2.COLOR_RGB2BGR))
        paths.append(path)
    return paths


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description="write synthetic frame sequences and backgrounds")
    parser.add_argument("root", type=Path)
    parser.add_argument("--frames", type=int, default=30, help="frames per sequence")
    parser.add_argument("--patterns", type=int, default=1, help="card designs per class")
    parser.add_argument("--backgrounds", type=int, default=16)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    paths = write_inputs(args.root, n_frames=args.frames, patterns=args.patterns,
                         n_backgrounds=args.backgrounds, seed=args.seed)
    for key, path in paths.items():
        print(f"{key}: {path}")


if __name__ == "__main__":
    main()
