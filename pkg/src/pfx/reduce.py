"""Z-score scaling, PCA pre-projection and Fisher LDA (fisherface-style reduction)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDiscriminantError, InvalidArgumentError

LDA_RIDGE = 1e-6
# Training rows per retained PCA component when no dimension is given; keeps
# the within-class scatter estimate well conditioned.


@dataclass(frozen=True)
class FeatureScale:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


@dataclass(frozen=True)
class Projection:
    scale: FeatureScale
    pca_mean: np.ndarray
    pca_basis: np.ndarray  # D x p, orthonormal columns
    lda_basis: np.ndarray  # p x q
    pca_eigenvalues: np.ndarray | None = None
    lda_eigenvalues: np.ndarray | None = None

    @property
    def input_dim(self) -> int:
        return self.pca_basis.shape[0]

    @property
    def output_dim(self) -> int:
        return self.lda_basis.shape[1]

    def pca_coordinates(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.input_dim:
            raise InvalidArgumentError(f"expected feature length {self.input_dim}, got {X.shape[-1]}")
        return (self.scale.apply(X) - self.pca_mean) @ self.pca_basis


def project(proj: Projection, x) -> np.ndarray:
    """Map raw feature vector(s) to the reduced discriminant space."""
    return proj.pca_coordinates(x) @ proj.lda_basis


def _check_matrix(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise InvalidArgumentError("feature matrix must be a non-empty 2-D array")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("feature matrix contains NaN or Inf")
    return X


def fit_scaler(X) -> FeatureScale:
    """Per-dimension mean and population stddev; constant dimensions get stddev 1."""
    X = _check_matrix(X)
    if X.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 samples to fit the scaler")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    const = np.all(X == X[0], axis=0)
    mean[const] = X[0, const]
    std[const] = 1.0
    std[std == 0.0] = 1.0
    return FeatureScale(mean, std)


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    v = np.array(vectors, dtype=np.float64)
    if v.size == 0:
        return v
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def pca_fit(X, p: int, n_classes: int = 1):
    """Top-``p`` principal axes of the population covariance.

    Returns ``(mean, basis, eigenvalues)`` with eigenvalues non-increasing.
    """
    X = _check_matrix(X)
    n, d = X.shape
    limit = min(d, n - n_classes)
    if not (1 <= p <= limit):
        raise InvalidArgumentError(f"PCA dimension {p} outside [1, {limit}] (D={d}, N={n}, C={n_classes})")
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    eigvals = (s ** 2) / n
    basis = canonical_signs(vt[:p].T)
    return mean, basis, eigvals[:p]


def scatter_matrices(Y, labels):
    """Population within-class and between-class scatter (both divided by N)."""
    Y = np.asarray(Y, dtype=np.float64)
    labels = np.asarray(labels)
    n, p = Y.shape
    mu = Y.mean(axis=0)
    sw = np.zeros((p, p))
    sb = np.zeros((p, p))
    for c in np.unique(labels):
        Yc = Y[labels == c]
        mc = Yc.mean(axis=0)
        dc = Yc - mc
        sw += dc.T @ dc
        dm = (mc - mu)[:, None]
        sb += len(Yc) * (dm @ dm.T)
    return sw / n, sb / n


def lda_fit(Y, labels, q: int):
    """Solve ``S_b v = lambda S_w v`` for the top ``q`` directions.

    ``S_w`` gets a ridge of ``1e-6 * trace(S_w) / p``. Columns are scaled so that
    ``v.T @ S_w @ v = I``. Returns ``(basis, eigenvalues)``.
    """
    Y = _check_matrix(Y)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if not (1 <= q <= len(classes) - 1):
        raise InvalidArgumentError(f"LDA dimension {q} outside [1, {len(classes) - 1}] for {len(classes)} classes")
    p = Y.shape[1]
    sw, sb = scatter_matrices(Y, labels)
    tr_w = np.trace(sw)
    if np.trace(sb) <= 1e-12 * max(tr_w, 1e-300):
        raise DegenerateDiscriminantError("all class means coincide; no discriminant direction exists")
    sw = sw + LDA_RIDGE * (tr_w / p if tr_w > 0 else 1.0) * np.eye(p)
    # whiten S_w, then an ordinary symmetric eigenproblem
    L = np.linalg.cholesky(sw)
    Linv = np.linalg.inv(L)
    M = Linv @ sb @ Linv.T
    M = (M + M.T) / 2
    w, u = np.linalg.eigh(M)
    order = np.argsort(w, kind="stable")[::-1][:q]
    basis = canonical_signs(Linv.T @ u[:, order])
    return basis, w[order]


def default_pca_dim(n_samples: int, n_features: int, n_classes: int) -> int:
    """``min(C - 1, D, N - C)``.

    Keeping more components than the discriminant needs lets LDA fit noise in
    the training rows, so held-out points land far from the collapsed class
    means. ``pca_dim`` overrides this.
    """
    return max(1, min(n_classes - 1, n_features, n_samples - n_classes))


def fit_projection(X, labels, pca_dim: int | None = None, lda_dim: int | None = None) -> Projection:
    """Scaler, PCA and LDA fitted in sequence on the same training rows."""
    X = _check_matrix(X)
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise InvalidArgumentError("need at least two classes")
    small = classes[counts < 2]
    if len(small):
        raise InvalidArgumentError(f"classes with fewer than 2 samples: {small.tolist()}")
    n, d = X.shape
    scale = fit_scaler(X)
    Z = scale.apply(X)
    p = default_pca_dim(n, d, len(classes)) if pca_dim is None else pca_dim
    q = len(classes) - 1 if lda_dim is None else lda_dim
    mean, basis, eig = pca_fit(Z, p, len(classes))
    Y = (Z - mean) @ basis
    lda_basis, lda_eig = lda_fit(Y, labels, q)
    return Projection(scale, mean, basis, lda_basis, eig, lda_eig)
