"""Pyramid histogram of oriented gradients over a single patch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray  # unsigned, degrees in [0, 180)


@dataclass(frozen=True)
class PhogDescriptor:
    values: np.ndarray
    n_bins: int
    levels: int

    def level_slices(self):
        start = 0
        for level in range(self.levels):
            stop = start + self.n_bins * 4 ** level
            yield slice(start, stop)
            start = stop


def descriptor_length(n_bins: int, levels: int) -> int:
    return n_bins * (4 ** levels - 1) // 3


def orientation_from(gx, gy) -> np.ndarray:
    ang = np.mod(np.degrees(np.arctan2(gy, gx)), 180.0)
    ang[ang >= 180.0] = 0.0
    return ang


def compute_gradients(patch) -> GradientField:
    """Central differences with replicated borders, on raw intensities at every pixel."""
    data = patch.data if hasattr(patch, "data") else patch
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 3 or a.shape[1] < 3:
        raise InvalidArgumentError(f"gradients need a patch of at least 3x3, got {a.shape[::-1]}")
    p = np.pad(a, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    return GradientField(gx, gy, np.hypot(gx, gy), orientation_from(gx, gy))


def _bin_index(orientation: np.ndarray, n_bins: int) -> np.ndarray:
    idx = np.floor(orientation / (180.0 / n_bins)).astype(np.intp)
    idx[idx >= n_bins] = 0  # only reachable at exactly 180 degrees
    return idx


def cell_histogram(field: GradientField, cell, n_bins: int = 9) -> np.ndarray:
    """Magnitude-weighted hard orientation histogram over ``cell = (x0, y0, width, height)``."""
    if n_bins < 2:
        raise InvalidArgumentError("need at least 2 orientation bins")
    x0, y0, w, h = cell
    rows, cols = field.magnitude.shape
    if x0 < 0 or y0 < 0 or w <= 0 or h <= 0 or x0 + w > cols or y0 + h > rows:
        raise InvalidArgumentError(f"cell {cell} lies outside the {cols}x{rows} field")
    mag = field.magnitude[y0:y0 + h, x0:x0 + w].ravel()
    idx = _bin_index(field.orientation[y0:y0 + h, x0:x0 + w].ravel(), n_bins)
    return np.bincount(idx, weights=mag, minlength=n_bins)


def phog_from_field(field: GradientField, n_bins: int = 9, levels: int = 3) -> np.ndarray:
    rows, cols = field.magnitude.shape
    top = 2 ** (levels - 1)
    if rows % top or cols % top:
        raise InvalidArgumentError(f"patch {cols}x{rows} is not divisible into {top}x{top} cells")
    idx = _bin_index(field.orientation, n_bins).ravel()
    mag = field.magnitude.ravel()
    yy, xx = np.divmod(np.arange(rows * cols), cols)
    parts = []
    for level in range(levels):
        g = 2 ** level
        cell = (yy // (rows // g)) * g + xx // (cols // g)  # row-major cell order
        parts.append(np.bincount(cell * n_bins + idx, weights=mag, minlength=g * g * n_bins))
    values = np.concatenate(parts)
    total = values.sum()
    if total > 0:
        values = values / total
    return values


def phog_descriptor(patch, n_bins: int = 9, levels: int = 3) -> PhogDescriptor:
    """Concatenate cell histograms over 1, 4, 16, ... cells (coarse to fine), then L1-normalise."""
    if levels < 1:
        raise InvalidArgumentError("levels must be >= 1")
    if n_bins < 2:
        raise InvalidArgumentError("need at least 2 orientation bins")
    field = compute_gradients(patch)
    return PhogDescriptor(phog_from_field(field, n_bins, levels), n_bins, levels)
