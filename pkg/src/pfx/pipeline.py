"""End-to-end feature assembly, training and prediction."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidArgumentError, ModelIncompatibleError, ParseError, PfxError
from .imagecore import GrayImage, align_face, gaussian_smooth, read_image
from .landmarks import PATCH_IDS, LandmarkSet, LayoutConfig, extract_patch, localize_patches, parse_landmarks
from .lbp import SUPPORTED_BINS, lbp_histogram, lbp_image
from .phog import descriptor_length, phog_descriptor
from .reduce import Projection, fit_projection, project
from .svm import KernelSpec, OvoEnsemble, predict_ovo, predict_ovo_batch, train_ovo

# Class ids follow the row order of the published confusion matrices.
CLASS_NAMES = ("anger", "fear", "disgust", "happiness", "sadness", "surprise")
FEATURE_SETS = ("both", "phog", "lbp")
MANIFEST_HEADER = ("image", "label", "lex", "ley", "rex", "rey", "nx", "ny", "llx", "lly", "lrx", "lry")


@dataclass(frozen=True)
class PipelineConfig:
    smooth_sigma: float = 1.0  # 0 disables smoothing
    smooth_ksize: int = 5
    out_size: int = 96
    patch_size: int = 32
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    lbp_bins: int = 64
    phog_bins: int = 9
    phog_levels: int = 3
    features: str = "both"
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float | None = None  # None -> 1 / reduced dimension
    degree: int = 3
    coef0: float = 1.0
    tol: float = 1e-3
    seed: int = 0
    pca_dim: int | None = None  # None -> min(C - 1, D, N - C)
    lda_dim: int | None = None

    def __post_init__(self):
        if self.features not in FEATURE_SETS:
            raise InvalidArgumentError(f"features must be one of {FEATURE_SETS}")
        if self.lbp_bins not in SUPPORTED_BINS:
            raise InvalidArgumentError(f"lbp_bins must be one of {SUPPORTED_BINS}")
        if self.patch_size <= 0 or self.patch_size % 8 or self.patch_size % 2 ** (self.phog_levels - 1):
            raise InvalidArgumentError(f"patch size {self.patch_size} incompatible with "
                                       f"{self.phog_levels} pyramid levels and 8-pixel cells")
        if self.patch_size > self.out_size:
            raise InvalidArgumentError("patch size exceeds the aligned raster")
        if self.smooth_sigma < 0:
            raise InvalidArgumentError("smoothing sigma must be >= 0")
        if self.kernel in ("poly",):
            object.__setattr__(self, "kernel", "polynomial")
        if self.kernel not in ("linear", "polynomial", "rbf"):
            raise InvalidArgumentError(f"unknown kernel {self.kernel!r}")
        if self.tol <= 0 or self.C <= 0:
            raise InvalidArgumentError("C and tol must be positive")

    @property
    def phog_length(self) -> int:
        return descriptor_length(self.phog_bins, self.phog_levels) if self.features != "lbp" else 0

    @property
    def lbp_length(self) -> int:
        return self.lbp_bins if self.features != "phog" else 0

    @property
    def feature_length(self) -> int:
        return len(PATCH_IDS) * (self.phog_length + self.lbp_length)

    def kernel_spec(self, reduced_dim: int) -> KernelSpec:
        if self.kernel == "linear":
            return KernelSpec.linear()
        if self.kernel == "polynomial":
            return KernelSpec.polynomial(self.degree, self.coef0)
        return KernelSpec.rbf(self.gamma if self.gamma is not None else 1.0 / reduced_dim)

    def to_json(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "layout"}
        d["layout"] = self.layout.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        layout = LayoutConfig.from_json(d.pop("layout", {}))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(layout=layout, **d)


@dataclass(frozen=True)
class HybridFeature:
    values: np.ndarray
    slices: tuple  # (patch id, family, start, stop), tiling ``values``

    def block(self, patch_id: str, family: str) -> np.ndarray:
        for pid, fam, start, stop in self.slices:
            if pid == patch_id and fam == family:
                return self.values[start:stop]
        raise KeyError((patch_id, family))

    def per_patch(self) -> dict:
        out = {}
        for pid, fam, start, stop in self.slices:
            out.setdefault(pid, {})[fam] = self.values[start:stop]
        return out


def feature_slices(config: PipelineConfig) -> tuple:
    slices, pos = [], 0
    for pid in PATCH_IDS:
        for fam, length in (("phog", config.phog_length), ("lbp", config.lbp_length)):
            if length:
                slices.append((pid, fam, pos, pos + length))
                pos += length
    return tuple(slices)


def family_columns(config: PipelineConfig, family: str) -> np.ndarray:
    """Column indices of one feature family within the full vector of ``config``."""
    return np.concatenate([np.arange(a, b) for _, fam, a, b in feature_slices(config) if fam == family])


def preprocess(img: GrayImage, lm: LandmarkSet, config: PipelineConfig):
    """Smooth, align on the eyes, and carry the landmarks into the aligned frame."""
    if config.smooth_sigma > 0:
        img = gaussian_smooth(img, config.smooth_sigma, config.smooth_ksize)
    aligned, t = align_face(img, lm.left_eye, lm.right_eye, config.out_size)
    return aligned, lm.transformed(t)


def extract_hybrid(img: GrayImage, lm: LandmarkSet, config: PipelineConfig | None = None) -> HybridFeature:
    """Per patch: PHOG block then LBP histogram block, patches in canonical order."""
    config = config or PipelineConfig()
    aligned, lm_aligned = preprocess(img, lm, config)
    layout = localize_patches(lm_aligned, config.patch_size, config.out_size, layout=config.layout)
    parts = []
    for spec in layout:
        patch = extract_patch(aligned, spec)
        if config.phog_length:
            parts.append(phog_descriptor(patch, config.phog_bins, config.phog_levels).values)
        if config.lbp_length:
            parts.append(lbp_histogram(lbp_image(patch), config.lbp_bins).bins.astype(np.float64))
    return HybridFeature(np.concatenate(parts), feature_slices(config))


# -- dataset manifest -----------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    image: Path
    label: str
    landmarks: LandmarkSet


@dataclass(frozen=True)
class DatasetManifest:
    samples: tuple[Sample, ...]
    base_dir: Path

    def __len__(self):
        return len(self.samples)

    @property
    def label_ids(self) -> np.ndarray:
        return np.array([CLASS_NAMES.index(s.label) for s in self.samples], dtype=np.int64)


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
        raise ParseError(f"{path}: header must be {','.join(MANIFEST_HEADER)}", 1)
    samples = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise ParseError(f"expected {len(MANIFEST_HEADER)} fields, got {len(row)}", line_no)
        label = row[1].strip().lower()
        if label not in CLASS_NAMES:
            raise ParseError(f"unknown label {row[1]!r}", line_no)
        lm = parse_landmarks(row[2:], row=line_no)
        samples.append(Sample(path.parent / row[0].strip(), label, lm))
    return DatasetManifest(tuple(samples), path.parent)


def write_manifest(path, rows) -> None:
    """``rows``: iterable of (relative image path, label, LandmarkSet)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for image, label, lm in rows:
            w.writerow([image, label] + [repr(round(v, 6)) for v in lm.as_row()])


def extract_features(manifest: DatasetManifest, config: PipelineConfig) -> np.ndarray:
    rows = []
    for s in manifest.samples:
        try:
            rows.append(extract_hybrid(read_image(s.image), s.landmarks, config).values)
        except PfxError as exc:
            raise type(exc)(f"{s.image}: {exc}") from exc
    return np.vstack(rows) if rows else np.zeros((0, config.feature_length))


# -- training / prediction -------------------------------------------------------

@dataclass(frozen=True)
class TrainedModel:
    config: PipelineConfig
    projection: Projection
    ensemble: OvoEnsemble
    class_names: tuple[str, ...] = CLASS_NAMES


def check_classes(labels, class_names=CLASS_NAMES, minimum: int = 2):
    labels = np.asarray(labels)
    for cid, name in enumerate(class_names):
        n = int((labels == cid).sum())
        if n < minimum:
            raise InvalidArgumentError(f"class {name!r} has {n} sample(s); need at least {minimum}")


def fit_model(X, labels, config: PipelineConfig) -> TrainedModel:
    """Scaler -> PCA -> LDA -> one-against-one SVMs, all on the given rows only."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    try:
        proj = fit_projection(X, labels, config.pca_dim, config.lda_dim)
    except PfxError as exc:
        raise type(exc)(f"reduction stage: {exc}") from exc
    Z = project(proj, X)
    kernel = config.kernel_spec(proj.output_dim)
    try:
        ens = train_ovo(Z, labels, kernel, config.C, config.tol, config.seed)
    except PfxError as exc:
        raise type(exc)(f"svm stage: {exc}") from exc
    return TrainedModel(config, proj, ens)


def predict_features(model: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.projection.input_dim:
        raise ModelIncompatibleError(
            f"model expects {model.projection.input_dim} features, got {X.shape[1]}")
    return predict_ovo_batch(model.ensemble, project(model.projection, X))


def train(manifest: DatasetManifest, config: PipelineConfig | None = None) -> TrainedModel:
    config = config or PipelineConfig()
    labels = manifest.label_ids
    check_classes(labels)
    return fit_model(extract_features(manifest, config), labels, config)


def predict(model: TrainedModel, image, landmarks):
    """Classify one face; returns (label name, vote vector over model classes)."""
    img = image if isinstance(image, GrayImage) else read_image(image)
    lm = landmarks if isinstance(landmarks, LandmarkSet) else parse_landmarks(landmarks)
    feat = extract_hybrid(img, lm, model.config).values
    if feat.size != model.projection.input_dim:
        raise ModelIncompatibleError(
            f"model expects {model.projection.input_dim} features, got {feat.size}")
    cid, votes = predict_ovo(model.ensemble, project(model.projection, feat))
    return model.class_names[cid], votes


def ablation_configs(config: PipelineConfig) -> dict:
    return {name: replace(config, features=name) for name in FEATURE_SETS}
