import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfx.errors import DegenerateDiscriminantError, InvalidArgumentError
from pfx.reduce import (default_pca_dim, fit_projection, fit_scaler, lda_fit, pca_fit, project,
                        scatter_matrices)


def two_gaussians(seed=0, n=200):
    r = np.random.default_rng(seed)
    X = np.vstack([r.normal(size=(n, 2)), r.normal(size=(n, 2)) + [4.0, 0.0]])
    return X, np.repeat([0, 1], n)


def fisher_ratio(X, y, v):
    z = X @ v
    m0, m1 = z[y == 0].mean(), z[y == 1].mean()
    return (m0 - m1) ** 2 / (z[y == 0].var() + z[y == 1].var())


class TestScaler:
    def test_two_values(self):
        s = fit_scaler(np.array([[1.0], [3.0]]))
        assert s.mean[0] == 2 and s.std[0] == 1

    def test_constant_dimension(self):
        X = np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]])
        s = fit_scaler(X)
        assert s.mean[0] == 5 and s.std[0] == 1
        assert (s.apply(X)[:, 0] == 0).all()

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            fit_scaler(np.zeros((0, 3)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_standardised_output(self, seed):
        r = np.random.default_rng(seed)
        X = r.normal(r.uniform(-50, 50, 6), r.uniform(0.1, 20, 6), size=(25, 6))
        Z = fit_scaler(X).apply(X)
        assert np.allclose(Z.mean(axis=0), 0, atol=1e-9)
        assert np.allclose(Z.std(axis=0), 1, atol=1e-9)


class TestPca:
    def test_line_data(self):
        t = np.linspace(-3, 5, 20)[:, None]
        u = np.ones(3) / math.sqrt(3)
        _, basis, eig = pca_fit(t * u, 3)
        assert np.allclose(basis[:, 0], u, atol=1e-12)
        assert eig[1] < 1e-9 and eig[2] < 1e-9
        assert eig[0] == pytest.approx(t.var())

    def test_full_rank_isometry(self, rng):
        X = rng.normal(size=(12, 5))
        mean, basis, _ = pca_fit(X, 5)
        Y = (X - mean) @ basis
        dx = np.linalg.norm(X[:, None] - X[None], axis=-1)
        dy = np.linalg.norm(Y[:, None] - Y[None], axis=-1)
        assert np.abs(dx - dy).max() < 1e-8

    def test_p_exceeds_limit(self, rng):
        with pytest.raises(InvalidArgumentError):
            pca_fit(rng.normal(size=(10, 20)), 9, n_classes=2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
    def test_orthonormal_sorted(self, seed, p):
        X = np.random.default_rng(seed).normal(size=(15, 9)) @ np.diag(np.arange(1, 10.0))
        _, basis, eig = pca_fit(X, p)
        assert np.abs(basis.T @ basis - np.eye(p)).max() < 1e-8
        assert (np.diff(eig) <= 1e-12).all()

    def test_reconstruction_low_rank(self, rng):
        X = rng.normal(size=(30, 3)) @ rng.normal(size=(3, 10)) + 7
        mean, basis, _ = pca_fit(X, 3)
        rec = (X - mean) @ basis @ basis.T + mean
        assert np.abs(rec - X).max() < 1e-6

    def test_sign_canonical(self, rng):
        X = rng.normal(size=(20, 4))
        _, b1, _ = pca_fit(X, 3)
        _, b2, _ = pca_fit(X[::-1].copy(), 3)
        assert np.allclose(b1, b2, atol=1e-10)
        idx = np.argmax(np.abs(b1), axis=0)
        assert (b1[idx, np.arange(3)] > 0).all()


class TestLda:
    def test_two_gaussian_direction(self):
        X, y = two_gaussians()
        basis, _ = lda_fit(X, y, 1)
        sw, _ = scatter_matrices(X, y)
        closed = np.linalg.solve(sw, X[y == 1].mean(0) - X[y == 0].mean(0))
        v = basis[:, 0]
        cos = abs(v @ closed) / (np.linalg.norm(v) * np.linalg.norm(closed))
        assert math.degrees(math.acos(min(1.0, cos))) < 3.0
        cos_x = abs(v[0]) / np.linalg.norm(v)
        assert math.degrees(math.acos(min(1.0, cos_x))) < 3.0

    def test_fisher_ratio_beats_random_directions(self, rng):
        X, y = two_gaussians(1)
        v = lda_fit(X, y, 1)[0][:, 0]
        best = fisher_ratio(X, y, v)
        for _ in range(100):
            u = rng.normal(size=2)
            assert best >= fisher_ratio(X, y, u / np.linalg.norm(u)) - 1e-12

    def test_whitened_within_class(self, rng):
        X = rng.normal(size=(60, 4)) + np.repeat(np.eye(3, 4) * 3, 20, axis=0)
        y = np.repeat([0, 1, 2], 20)
        basis, eig = lda_fit(X, y, 2)
        sw, _ = scatter_matrices(X, y)
        assert np.allclose(basis.T @ sw @ basis, np.eye(2), atol=1e-4)
        assert eig[0] >= eig[1]

    def test_q_limit(self, rng):
        X = rng.normal(size=(60, 8))
        y = np.repeat(np.arange(6), 10)
        with pytest.raises(InvalidArgumentError):
            lda_fit(X, y, 6)
        assert lda_fit(X, y, 5)[0].shape == (8, 5)

    def test_identical_means(self):
        X = np.array([[1.0, 0], [-1, 0], [1, 0], [-1, 0]])
        with pytest.raises(DegenerateDiscriminantError):
            lda_fit(X, np.array([0, 0, 1, 1]), 1)


class TestProjection:
    @pytest.fixture
    def fitted(self, rng):
        y = np.repeat(np.arange(6), 8)
        X = rng.normal(size=(48, 30)) + np.eye(6, 30)[y] * 4
        return X, y, fit_projection(X, y)

    def test_default_dims(self, fitted):
        X, y, proj = fitted
        assert proj.pca_basis.shape == (30, default_pca_dim(48, 30, 6)) == (30, 5)
        assert proj.output_dim == 5

    def test_mean_maps_to_origin(self, fitted):
        X, _, proj = fitted
        assert np.abs(proj.pca_coordinates(X.mean(axis=0))).max() < 1e-10

    def test_class_mean_linearity(self, fitted):
        X, y, proj = fitted
        m = X[y == 2]
        assert np.allclose(project(proj, m.mean(0)), project(proj, m).mean(0), atol=1e-8)

    @given(st.floats(-2, 3))
    def test_affine(self, a):
        r = np.random.default_rng(3)
        y = np.repeat(np.arange(3), 6)
        X = r.normal(size=(18, 7)) + np.eye(3, 7)[y] * 3
        proj = fit_projection(X, y, pca_dim=5)
        x1, x2 = r.normal(size=7), r.normal(size=7)
        lhs = project(proj, a * x1 + (1 - a) * x2)
        assert np.allclose(lhs, a * project(proj, x1) + (1 - a) * project(proj, x2), atol=1e-8)

    def test_dimension_mismatch(self, fitted):
        with pytest.raises(InvalidArgumentError):
            project(fitted[2], np.zeros(29))

    def test_singleton_class(self, rng):
        with pytest.raises(InvalidArgumentError):
            fit_projection(rng.normal(size=(5, 3)), [0, 0, 1, 1, 2])

    def test_nan_rejected(self):
        X = np.ones((4, 2))
        X[0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            fit_projection(X, [0, 0, 1, 1])
