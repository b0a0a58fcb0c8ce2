"""Landmark records, active-patch layout and patch cropping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, InvalidArgumentError, ParseError
from .imagecore import GrayImage, apply_transform

PATCH_IDS = (
    "LipL", "LipR", "BelowLip",
    "CheekUL", "CheekUR", "CheekLL", "CheekLR",
    "ForeheadL", "ForeheadR",
    "UpperNose",
)

PATCH_REGIONS = {
    "LipL": "lips", "LipR": "lips", "BelowLip": "lips",
    "CheekUL": "cheek", "CheekUR": "cheek", "CheekLL": "cheek", "CheekLR": "cheek",
    "ForeheadL": "forehead", "ForeheadR": "forehead",
    "UpperNose": "upper_nose",
}

# Mirror pairing under reflection about the vertical face axis.
MIRROR_PAIRS = (("LipL", "LipR"), ("CheekUL", "CheekUR"), ("CheekLL", "CheekLR"), ("ForeheadL", "ForeheadR"))

ANCHORS = (
    "left_eye", "right_eye", "nose_tip", "lip_left", "lip_right",
    "eye_mid", "lip_mid", "left_eye_lip_mid", "right_eye_lip_mid",
)

# patch id -> (anchor, dx as fraction of raster width, dy as fraction of raster width)
DEFAULT_OFFSETS = {
    "LipL": ("lip_left", -0.08, 0.0),
    "LipR": ("lip_right", 0.08, 0.0),
    "BelowLip": ("lip_mid", 0.0, 0.15),
    "CheekUL": ("left_eye_lip_mid", 0.0, 0.0),
    "CheekUR": ("right_eye_lip_mid", 0.0, 0.0),
    "CheekLL": ("nose_tip", -0.18, 0.05),
    "CheekLR": ("nose_tip", 0.18, 0.05),
    "ForeheadL": ("left_eye", 0.10, -0.14),
    "ForeheadR": ("right_eye", -0.10, -0.14),
    "UpperNose": ("eye_mid", 0.0, 0.06),
}

MANIFEST_COORDS = ("lex", "ley", "rex", "rey", "nx", "ny", "llx", "lly", "lrx", "lry")


@dataclass(frozen=True)
class LandmarkSet:
    left_eye: tuple[float, float]
    right_eye: tuple[float, float]
    nose_tip: tuple[float, float]
    lip_left: tuple[float, float]
    lip_right: tuple[float, float]

    def __post_init__(self):
        for name in ("left_eye", "right_eye", "nose_tip", "lip_left", "lip_right"):
            p = getattr(self, name)
            p = (float(p[0]), float(p[1]))
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise GeometryError(f"{name} is not finite")
            object.__setattr__(self, name, p)
        if not self.left_eye[0] < self.right_eye[0]:
            raise GeometryError("left eye must lie left of the right eye")
        if not self.lip_left[0] < self.lip_right[0]:
            raise GeometryError("left lip corner must lie left of the right lip corner")

    def as_array(self) -> np.ndarray:
        return np.array([self.left_eye, self.right_eye, self.nose_tip, self.lip_left, self.lip_right])

    def as_row(self) -> list[float]:
        return [float(v) for v in self.as_array().ravel()]

    @classmethod
    def from_array(cls, pts) -> "LandmarkSet":
        pts = np.asarray(pts, dtype=np.float64).reshape(5, 2)
        return cls(*(tuple(p) for p in pts))

    def transformed(self, t) -> "LandmarkSet":
        return LandmarkSet.from_array([apply_transform(t, p) for p in self.as_array()])

    def anchor(self, name: str) -> np.ndarray:
        le, re, nose, ll, lr = (np.array(p) for p in
                                (self.left_eye, self.right_eye, self.nose_tip, self.lip_left, self.lip_right))
        points = {
            "left_eye": le, "right_eye": re, "nose_tip": nose, "lip_left": ll, "lip_right": lr,
            "eye_mid": (le + re) / 2, "lip_mid": (ll + lr) / 2,
            "left_eye_lip_mid": (le + ll) / 2, "right_eye_lip_mid": (re + lr) / 2,
        }
        try:
            return points[name]
        except KeyError:
            raise InvalidArgumentError(f"unknown anchor {name!r}") from None


def parse_landmarks(record, row=None) -> LandmarkSet:
    """Build a LandmarkSet from ten coordinates ``lex,ley,rex,rey,nx,ny,llx,lly,lrx,lry``."""
    fields = record.split(",") if isinstance(record, str) else list(record)
    if len(fields) != 10:
        raise ParseError(f"expected 10 landmark coordinates, got {len(fields)}", row)
    values = []
    for name, raw in zip(MANIFEST_COORDS, fields):
        try:
            v = float(raw.strip() if isinstance(raw, str) else raw)
        except (TypeError, ValueError):
            raise ParseError(f"field {name} is not numeric: {raw!r}", row) from None
        if not math.isfinite(v):
            raise ParseError(f"field {name} is not finite", row)
        values.append(v)
    try:
        return LandmarkSet.from_array(values)
    except GeometryError as exc:
        if row is not None:
            raise GeometryError(f"row {row}: {exc}") from None
        raise


@dataclass(frozen=True)
class PatchSpec:
    id: str
    center: tuple[float, float]
    side: int
    clamped: bool = False

    def __post_init__(self):
        if self.id not in PATCH_IDS:
            raise InvalidArgumentError(f"unknown patch id {self.id!r}")
        if self.side <= 0 or self.side % 8:
            raise InvalidArgumentError(f"patch side must be a positive multiple of 8, got {self.side}")

    @property
    def top_left(self) -> tuple[int, int]:
        half = self.side / 2.0
        return (int(math.floor(self.center[0] - half + 0.5)), int(math.floor(self.center[1] - half + 0.5)))


@dataclass(frozen=True)
class PatchLayout:
    patches: tuple[PatchSpec, ...]
    width: int = 96
    height: int = 96

    def __post_init__(self):
        ids = tuple(p.id for p in self.patches)
        if ids != PATCH_IDS:
            raise InvalidArgumentError(f"layout must list the 10 patches in canonical order, got {ids}")

    def __iter__(self):
        return iter(self.patches)

    def __len__(self):
        return len(self.patches)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.patches[PATCH_IDS.index(key)]
        return self.patches[key]


@dataclass(frozen=True)
class LayoutConfig:
    """Patch offset table; fractions are relative to the aligned raster width."""

    offsets: dict = field(default_factory=lambda: dict(DEFAULT_OFFSETS))

    def __post_init__(self):
        merged = dict(DEFAULT_OFFSETS)
        for pid, entry in dict(self.offsets).items():
            if pid not in PATCH_IDS:
                raise InvalidArgumentError(f"unknown patch id {pid!r} in layout")
            anchor, dx, dy = entry
            if anchor not in ANCHORS:
                raise InvalidArgumentError(f"unknown anchor {anchor!r} for patch {pid}")
            merged[pid] = (str(anchor), float(dx), float(dy))
        object.__setattr__(self, "offsets", merged)

    def to_json(self) -> dict:
        return {pid: {"anchor": a, "dx_frac": dx, "dy_frac": dy} for pid, (a, dx, dy) in self.offsets.items()}

    @classmethod
    def from_json(cls, mapping: dict) -> "LayoutConfig":
        offsets = {}
        for pid, entry in mapping.items():
            if pid not in PATCH_IDS:
                raise InvalidArgumentError(f"unknown patch id {pid!r} in layout")
            default = DEFAULT_OFFSETS[pid]
            offsets[pid] = (entry.get("anchor", default[0]),
                            entry.get("dx_frac", default[1]),
                            entry.get("dy_frac", default[2]))
        return cls(offsets)

    @classmethod
    def load(cls, path) -> "LayoutConfig":
        try:
            mapping = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read layout overrides {path}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise ParseError(f"layout overrides {path} must be a JSON object")
        return cls.from_json(mapping)


def localize_patches(lm: LandmarkSet, side: int = 32, width: int = 96, height: int | None = None,
                     layout: LayoutConfig | None = None) -> PatchLayout:
    """Place the 10 active patches from landmark geometry, clamping rectangles into the raster."""
    height = width if height is None else height
    layout = layout or LayoutConfig()
    if side > min(width, height):
        raise InvalidArgumentError(f"patch side {side} exceeds raster {width}x{height}")
    for name, p in zip(("left_eye", "right_eye", "nose_tip", "lip_left", "lip_right"), lm.as_array()):
        if not (0.0 <= p[0] <= width and 0.0 <= p[1] <= height):
            raise GeometryError(f"{name} at ({p[0]:.2f}, {p[1]:.2f}) lies outside the {width}x{height} raster")
    half = side / 2.0
    patches = []
    for pid in PATCH_IDS:
        anchor, dx, dy = layout.offsets[pid]
        c = lm.anchor(anchor) + np.array([dx * width, dy * width])
        cx = min(max(c[0], half), width - half)
        cy = min(max(c[1], half), height - half)
        clamped = bool(cx != c[0] or cy != c[1])
        patches.append(PatchSpec(pid, (float(cx), float(cy)), side, clamped))
    return PatchLayout(tuple(patches), width, height)


def extract_patch(img: GrayImage, spec: PatchSpec) -> GrayImage:
    """Crop ``spec.side`` x ``spec.side`` pixels at ``round(center - side/2)``; no resampling."""
    x0, y0 = spec.top_left
    if x0 < 0 or y0 < 0 or x0 + spec.side > img.width or y0 + spec.side > img.height:
        raise GeometryError(
            f"patch {spec.id} rectangle ({x0}, {y0}, {spec.side}) exceeds image {img.width}x{img.height}")
    return GrayImage(img.data[y0:y0 + spec.side, x0:x0 + spec.side])
