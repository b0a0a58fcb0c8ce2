"""Grayscale raster, Gaussian smoothing and eye-based similarity alignment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .errors import DataError, GeometryError, InvalidArgumentError

# Canonical eye anchors as fractions of the output side.
LEFT_EYE_ANCHOR = (0.30, 0.35)
RIGHT_EYE_ANCHOR = (0.70, 0.35)


class GrayImage:
    """Immutable 8-bit single-channel image stored row-major as ``data[y, x]``."""

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise InvalidArgumentError(f"expected a 2-D raster, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgumentError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer) and not np.issubdtype(arr.dtype, np.floating):
                raise InvalidArgumentError(f"unsupported pixel type {arr.dtype}")
            if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
                raise InvalidArgumentError("intensities must lie in [0, 255]")
            if np.issubdtype(arr.dtype, np.floating) and np.any(arr != np.round(arr)):
                raise InvalidArgumentError("float input must hold integral intensities")
        arr = np.array(arr, dtype=np.uint8, order="C", copy=True)
        arr.flags.writeable = False
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self._data, other._data)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class AffineTransform:
    """2x3 matrix mapping source ``(x, y)`` to destination ``(x', y')``."""

    matrix: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (2, 3) or not np.all(np.isfinite(m)):
            raise InvalidArgumentError("affine transform needs a finite 2x3 matrix")
        if abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) < 1e-12:
            raise GeometryError("affine transform is not invertible")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in m))

    @classmethod
    def identity(cls):
        return cls(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.float64)

    def inverse(self) -> "AffineTransform":
        m = self.array
        lin_inv = np.linalg.inv(m[:, :2])
        return AffineTransform(np.hstack([lin_inv, -(lin_inv @ m[:, 2:3])]))

    def compose(self, first: "AffineTransform") -> "AffineTransform":
        """Transform that applies ``first`` and then ``self``."""
        a = np.vstack([self.array, [0.0, 0.0, 1.0]])
        b = np.vstack([first.array, [0.0, 0.0, 1.0]])
        return AffineTransform((a @ b)[:2])


def apply_transform(t: AffineTransform, p) -> tuple[float, float]:
    (a, b, tx), (c, d, ty) = t.matrix
    x, y = float(p[0]), float(p[1])
    return (a * x + b * y + tx, c * x + d * y + ty)


def _round_clamp(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def gaussian_taps(sigma: float, ksize: int) -> np.ndarray:
    r = ksize // 2
    k = np.arange(-r, r + 1, dtype=np.float64)
    taps = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_smooth(img: GrayImage, sigma: float = 1.0, ksize: int = 5) -> GrayImage:
    """Separable Gaussian low-pass with edge replication, rounded back to 8 bits."""
    if not (isinstance(ksize, (int, np.integer)) and ksize >= 3 and ksize % 2 == 1):
        raise InvalidArgumentError(f"ksize must be an odd integer >= 3, got {ksize!r}")
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma!r}")
    if ksize > min(img.width, img.height):
        raise InvalidArgumentError(f"ksize {ksize} exceeds image size {img.width}x{img.height}")
    src = np.ascontiguousarray(img.data, dtype=np.float64)
    out = _backend.convolve_separable(src, gaussian_taps(sigma, ksize))
    return GrayImage(_round_clamp(np.asarray(out)))


def warp_affine(img: GrayImage, t: AffineTransform, out_width: int, out_height: int) -> GrayImage:
    """Resample ``img`` through ``t`` (source -> destination) with bilinear interpolation.

    Destination pixels whose preimage falls outside the source are 0.
    """
    inv = np.ascontiguousarray(t.inverse().array)
    out = _backend.warp_bilinear(np.ascontiguousarray(img.data), inv, int(out_height), int(out_width))
    return GrayImage(_round_clamp(np.asarray(out)))


def eye_alignment_transform(left_eye, right_eye, out_size: int = 96) -> AffineTransform:
    """Similarity transform taking the eye pair onto the canonical anchors."""
    le = complex(float(left_eye[0]), float(left_eye[1]))
    re = complex(float(right_eye[0]), float(right_eye[1]))
    if not all(math.isfinite(v) for v in (le.real, le.imag, re.real, re.imag)):
        raise GeometryError("eye coordinates must be finite")
    if abs(re - le) < 1e-9:
        raise GeometryError("left and right eye coincide")
    if re.real < le.real:
        le, re = re, le
    dst_l = complex(LEFT_EYE_ANCHOR[0] * out_size, LEFT_EYE_ANCHOR[1] * out_size)
    dst_r = complex(RIGHT_EYE_ANCHOR[0] * out_size, RIGHT_EYE_ANCHOR[1] * out_size)
    a = (dst_r - dst_l) / (re - le)
    t = dst_l - a * le
    return AffineTransform(((a.real, -a.imag, t.real), (a.imag, a.real, t.imag)))


def align_face(img: GrayImage, left_eye, right_eye, out_size: int = 96):
    """Rotate, scale and crop so the eyes sit level at the canonical anchors.

    Returns the ``out_size`` x ``out_size`` aligned image and the transform used,
    so landmarks can be carried into the aligned frame with ``apply_transform``.
    """
    if out_size < 1:
        raise InvalidArgumentError("out_size must be positive")
    t = eye_alignment_transform(left_eye, right_eye, out_size)
    return warp_affine(img, t, out_size, out_size), t


# -- file I/O -----------------------------------------------------------------

def _read_pgm(raw: bytes, path) -> GrayImage:
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval
    if tokens[0] != b"P5":
        raise DataError(f"{path}: only binary PGM (P5) is supported")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if maxval != 255:
        raise DataError(f"{path}: PGM maxval must be 255, got {maxval}")
    body = raw[pos:pos + width * height]
    if len(body) != width * height:
        raise DataError(f"{path}: PGM pixel data truncated")
    return GrayImage(np.frombuffer(body, dtype=np.uint8).reshape(height, width))


def read_image(path) -> GrayImage:
    """Load an 8-bit grayscale PGM (P5) or PNG. Colour images are rejected."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    if raw[:2] == b"P5":
        return _read_pgm(raw, path)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(path) as im:
            if im.mode != "L":
                raise DataError(f"{path}: expected 8-bit grayscale PNG, got mode {im.mode}")
            return GrayImage(np.asarray(im, dtype=np.uint8))
    raise DataError(f"{path}: unsupported image format (need PGM P5 or PNG)")


def write_pgm(img: GrayImage, path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.data.tobytes())


def write_png(img: GrayImage, path) -> None:
    from PIL import Image

    Image.fromarray(np.asarray(img.data)).save(path, format="PNG")
