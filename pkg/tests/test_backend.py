"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfx import _backend, _fallback
from pfx.svm import KernelSpec, gram

native = pytest.importorskip("pfx._native", reason="compiled extension not built")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([3, 5, 7]))
def test_convolution(seed, ksize):
    r = np.random.default_rng(seed)
    img = r.uniform(0, 255, size=(int(r.integers(ksize, 30)), int(r.integers(ksize, 30))))
    taps = r.uniform(0.1, 1, ksize)
    taps /= taps.sum()
    assert np.array_equal(np.asarray(native.convolve_separable(img, taps)), _fallback.convolve_separable(img, taps))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_warp(seed):
    r = np.random.default_rng(seed)
    img = r.integers(0, 256, size=(40, 50)).astype(np.uint8)
    ang, scale = r.uniform(-0.5, 0.5), r.uniform(0.6, 1.5)
    inv = np.array([[scale * np.cos(ang), -scale * np.sin(ang), r.uniform(-5, 10)],
                    [scale * np.sin(ang), scale * np.cos(ang), r.uniform(-5, 10)]])
    a = np.asarray(native.warp_bilinear(img, inv, 32, 36))
    b = _fallback.warp_bilinear(img, inv, 32, 36)
    assert np.allclose(a, b, atol=1e-9, rtol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 255))
def test_lbp(seed, hi):
    r = np.random.default_rng(seed)
    img = r.integers(0, hi + 1, size=(int(r.integers(3, 40)), int(r.integers(3, 40)))).astype(np.uint8)
    assert np.array_equal(np.asarray(native.lbp_codes(img)), _fallback.lbp_codes(img))


@pytest.mark.parametrize("kind", ["linear", "rbf", "poly"])
@pytest.mark.parametrize("seed", range(4))
def test_smo_identical(kind, seed):
    r = np.random.default_rng(seed)
    X = np.vstack([r.normal(size=(25, 3)) - 0.7, r.normal(size=(25, 3)) + 0.7])
    y = np.repeat([1.0, -1.0], 25)
    k = {"linear": KernelSpec.linear(), "rbf": KernelSpec.rbf(0.5), "poly": KernelSpec.polynomial(2, 1.0)}[kind]
    K = np.ascontiguousarray(gram(k, X, X))
    order = r.permutation(50).astype(np.int64)
    a1, g1, n1, c1 = native.smo_solve(K, y, 1.0, 1e-3, 100000, order)
    a2, g2, n2, c2 = _fallback.smo_solve(K, y, 1.0, 1e-3, 100000, order)
    assert (n1, c1) == (n2, c2) and c1
    assert np.array_equal(np.asarray(a1), a2) and np.array_equal(np.asarray(g1), g2)


def test_env_forces_fallback():
    code = "from pfx import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, PFX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _backend.BACKEND == ("python" if os.environ.get("PFX_PURE_PYTHON") == "1" else "native")
