"""Synthetic six-class face dataset with class signatures inside the active patches.

Each class paints two cues over the union of its active patches on a plain
face-like template:

* a sinusoidal grating oriented at ``30 * class_id`` degrees, which gradient
  orientation histograms pick up;
* a random binary micro-texture tile drawn once per class from a fixed seed,
  which shows up in LBP code histograms.

Per image there is a random grating phase and tile offset, +-2 px landmark
jitter, Gaussian noise (sigma 8) and a random monotone contrast curve.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imagecore import GrayImage, write_pgm
from .landmarks import LandmarkSet, localize_patches
from .pipeline import CLASS_NAMES, write_manifest

SIZE = 96
NOMINAL_LANDMARKS = np.array([
    [28.8, 33.6],   # left eye
    [67.2, 33.6],   # right eye
    [48.0, 55.0],   # nose tip
    [36.5, 70.0],   # left lip corner
    [59.5, 70.0],   # right lip corner
])
JITTER = 2.0
NOISE_SIGMA = 8.0
GRATING_AMPLITUDE = 30.0
GRATING_PERIOD = 7.0
TEXTURE_AMPLITUDE = 16.0
TEXTURE_TILE = 4
CONTRAST_GAMMA = (0.9, 1.1)
TILE_SEED = 1000


def class_signature(class_id: int):
    """(grating angle in degrees, +-1 micro-texture tile) for a class."""
    tile = np.random.default_rng(TILE_SEED + class_id).integers(0, 2, size=(TEXTURE_TILE, TEXTURE_TILE))
    return 30.0 * class_id, tile.astype(np.float64) * 2.0 - 1.0


def _face_template(lm: np.ndarray) -> np.ndarray:
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    img = np.full((SIZE, SIZE), 55.0)
    eye_mid = (lm[0] + lm[1]) / 2
    cx, cy = eye_mid[0], eye_mid[1] + 16.0
    r = ((xx - cx) / 40.0) ** 2 + ((yy - cy) / 52.0) ** 2
    img += 95.0 * np.clip(1.2 - r, 0.0, 1.0) ** 0.5
    img += 10.0 * np.cos((xx - cx) / 30.0)  # soft side shading
    for ex, ey in lm[:2]:
        img -= 70.0 * np.exp(-(((xx - ex) / 5.0) ** 2 + ((yy - ey) / 2.8) ** 2))
    nx, ny = lm[2]
    img -= 25.0 * np.exp(-(((xx - nx) / 4.0) ** 2 + ((yy - ny) / 2.0) ** 2))
    (lx, ly), (rx, ry) = lm[3], lm[4]
    t = np.clip(((xx - lx) * (rx - lx) + (yy - ly) * (ry - ly)) / ((rx - lx) ** 2 + (ry - ly) ** 2), 0, 1)
    d2 = (xx - (lx + t * (rx - lx))) ** 2 + (yy - (ly + t * (ry - ly))) ** 2
    img -= 60.0 * np.exp(-d2 / 3.0)
    return img


def render_face(class_id: int, rng: np.random.Generator):
    """Render one image; returns (GrayImage, LandmarkSet)."""
    lm = NOMINAL_LANDMARKS + rng.uniform(-JITTER, JITTER, size=NOMINAL_LANDMARKS.shape)
    landmarks = LandmarkSet.from_array(lm)
    img = _face_template(lm)

    angle, tile = class_signature(class_id)
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    for spec in localize_patches(landmarks, 32, SIZE):
        x0, y0 = spec.top_left
        mask[y0:y0 + spec.side, x0:x0 + spec.side] = True

    theta = np.deg2rad(angle)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    grating = np.sin(2.0 * np.pi * (xx * np.cos(theta) + yy * np.sin(theta)) / GRATING_PERIOD + phase)
    oy, ox = rng.integers(0, TEXTURE_TILE, size=2)
    texture = np.tile(tile, (SIZE // TEXTURE_TILE + 2, SIZE // TEXTURE_TILE + 2))[oy:oy + SIZE, ox:ox + SIZE]
    img = img + mask * (GRATING_AMPLITUDE * grating) + mask * (TEXTURE_AMPLITUDE * texture)

    img = img + rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    # monotone contrast curve: gamma, then gain and offset
    gamma = rng.uniform(*CONTRAST_GAMMA)
    gain = rng.uniform(0.85, 1.1)
    offset = rng.uniform(-10.0, 10.0)
    img = 255.0 * (np.clip(img, 0.0, 255.0) / 255.0) ** gamma
    img = gain * img + offset
    return GrayImage(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)), landmarks


def generate_synthetic(out_dir, per_class: int = 60, seed: int = 42) -> Path:
    """Write images plus ``manifest.csv`` to ``out_dir``; returns the manifest path."""
    if per_class < 10:
        raise ValueError("per_class must be at least 10")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(per_class):
        for cid, name in enumerate(CLASS_NAMES):
            img, lm = render_face(cid, rng)
            rel = f"images/{name}_{i:04d}.pgm"
            write_pgm(img, out_dir / rel)
            rows.append((rel, name, lm))
    manifest = out_dir / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest
