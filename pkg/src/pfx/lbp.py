"""Basic 3x3 local binary patterns and their histograms.

Neighbour ``n`` carries weight ``2**n``; ``n = 0`` is the East neighbour and the
index advances counter-clockwise (E, NE, N, NW, W, SW, S, SE). A neighbour sets its
bit when it is greater than or equal to the centre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidArgumentError

# (dx, dy) per neighbour index; y grows downwards.
NEIGHBOR_OFFSETS = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))

SUPPORTED_BINS = (256, 128, 64, 32, 16)


@dataclass(frozen=True)
class LbpImage:
    codes: np.ndarray

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def height(self) -> int:
        return self.codes.shape[0]


@dataclass(frozen=True)
class LbpHistogram:
    bins: np.ndarray
    n_bins: int


def lbp_code(neighborhood) -> int:
    nb = np.asarray(neighborhood, dtype=np.int64).reshape(3, 3)
    center = nb[1, 1]
    code = 0
    for n, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        if nb[1 + dy, 1 + dx] >= center:
            code |= 1 << n
    return code


def lbp_image(img) -> LbpImage:
    """LBP code at every interior pixel; the result is 2 pixels smaller in each direction."""
    data = img.data if hasattr(img, "data") else np.asarray(img)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] < 3:
        raise InvalidArgumentError(f"LBP needs an image of at least 3x3, got {data.shape[::-1]}")
    codes = _backend.lbp_codes(np.ascontiguousarray(data, dtype=np.uint8))
    return LbpImage(np.asarray(codes))


def lbp_histogram(limg: LbpImage, n_bins: int = 64) -> LbpHistogram:
    if n_bins not in SUPPORTED_BINS:
        raise InvalidArgumentError(f"n_bins must be one of {SUPPORTED_BINS}, got {n_bins}")
    width = 256 // n_bins
    codes = np.asarray(limg.codes, dtype=np.intp).ravel()
    bins = np.bincount(codes // width, minlength=n_bins).astype(np.int64)
    return LbpHistogram(bins, n_bins)
