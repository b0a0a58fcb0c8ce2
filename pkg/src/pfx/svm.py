"""Soft-margin kernel SVM trained by SMO, and a one-against-one ensemble."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ConvergenceError, InvalidArgumentError

KERNEL_KINDS = ("linear", "polynomial", "rbf")
GRAM_CACHE_LIMIT = 4096


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None
    degree: int | None = None
    coef0: float | None = None

    def __post_init__(self):
        kind = {"poly": "polynomial"}.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KERNEL_KINDS:
            raise InvalidArgumentError(f"unknown kernel {self.kind!r}")
        if kind == "rbf":
            if self.gamma is None or not self.gamma > 0:
                raise InvalidArgumentError("rbf kernel needs gamma > 0")
            if self.degree is not None or self.coef0 is not None:
                raise InvalidArgumentError("rbf kernel takes no degree/coef0")
        elif kind == "polynomial":
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise InvalidArgumentError("polynomial kernel needs an integer degree >= 1")
            if self.coef0 is None:
                raise InvalidArgumentError("polynomial kernel needs coef0")
            if self.gamma is not None:
                raise InvalidArgumentError("polynomial kernel takes no gamma")
            object.__setattr__(self, "degree", int(self.degree))
            object.__setattr__(self, "coef0", float(self.coef0))
        elif any(v is not None for v in (self.gamma, self.degree, self.coef0)):
            raise InvalidArgumentError("linear kernel takes no parameters")
        if self.gamma is not None:
            object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def rbf(cls, gamma):
        return cls("rbf", gamma=gamma)

    @classmethod
    def polynomial(cls, degree=3, coef0=1.0):
        return cls("polynomial", degree=degree, coef0=coef0)

    def to_json(self):
        return {k: v for k, v in
                (("kind", self.kind), ("gamma", self.gamma), ("degree", self.degree), ("coef0", self.coef0))
                if v is not None}

    @classmethod
    def from_json(cls, d):
        return cls(**d)


def gram(k: KernelSpec, A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise InvalidArgumentError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if k.kind == "linear":
        return A @ B.T
    if k.kind == "polynomial":
        return (A @ B.T + k.coef0) ** k.degree
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-k.gamma * sq)


def kernel_eval(k: KernelSpec, u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise InvalidArgumentError(f"dimension mismatch: {u.size} vs {v.size}")
    if k.kind == "linear":
        return float(u @ v)
    if k.kind == "polynomial":
        return float((u @ v + k.coef0) ** k.degree)
    d = u - v
    return float(np.exp(-k.gamma * (d @ d)))


@dataclass(frozen=True)
class BinarySvm:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    pair: tuple[int, int] = (0, 1)
    C: float = 1.0
    n_train: tuple[int, int] = (0, 0)  # (positive, negative) sample counts
    n_iter: int = 0
    duality_gap: float = 0.0
    dual_objective: float = 0.0

    @property
    def alphas(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def decision_function(svm: BinarySvm, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != svm.dim:
        raise InvalidArgumentError(f"expected vectors of length {svm.dim}, got {X.shape[1]}")
    return gram(svm.kernel, X, svm.support_vectors) @ svm.dual_coef + svm.bias


def decision(svm: BinarySvm, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError("decision expects a single vector")
    return float(decision_function(svm, x)[0])


def _bias(alpha, G, y, C):
    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        if np.isinf(ub) or np.isinf(lb):
            rho = lb if np.isinf(ub) else ub
        else:
            rho = (ub + lb) / 2
    return -float(rho)


def _objectives(alpha, G, y, b, C):
    """Dual objective (maximisation form) and primal-dual gap."""
    quad = float(alpha @ (G + 1.0))  # alpha^T Q alpha
    dual = float(alpha.sum()) - 0.5 * quad
    margin = G + 1.0 + y * b  # y_i f(x_i)
    primal = 0.5 * quad + C * float(np.maximum(0.0, 1.0 - margin).sum())
    return dual, primal - dual


def _solve_uncached(X, y, k, C, eps, max_iter, order):
    """Row-on-demand variant for subproblems too large for a full Gram matrix."""

    class _Rows:
        def __init__(self):
            self.diag = np.array([kernel_eval(k, x, x) for x in X])

        def __getitem__(self, key):
            if isinstance(key, tuple):
                a, b = key
                if isinstance(a, slice):
                    return gram(k, X, X[b:b + 1]).ravel()
                if a == b:
                    return self.diag[a]
                return kernel_eval(k, X[a], X[b])
            raise TypeError(key)

    return _backend._fallback.smo_solve(_Rows(), y, C, eps, max_iter, order)


def train_binary(X, y, kernel: KernelSpec, C: float = 1.0, tol: float = 1e-3, seed: int = 0,
                 max_iter: int | None = None, pair=(0, 1)) -> BinarySvm:
    """Solve the soft-margin dual with maximal-violating-pair SMO.

    The stopping threshold on the KKT violation is ``tol / max(1, C)``, which
    keeps the final duality gap within ``tol * N``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidArgumentError("X must be N x d with one label per row")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidArgumentError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidArgumentError("both classes (+1 and -1) must be present")
    if not C > 0:
        raise InvalidArgumentError("C must be positive")
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    n = len(y)
    max_iter = 10 * 1000 * n if max_iter is None else int(max_iter)
    order = np.random.default_rng(seed).permutation(n).astype(np.int64)
    eps = tol / max(1.0, C)
    if n <= GRAM_CACHE_LIMIT:
        K = np.ascontiguousarray(gram(kernel, X, X))
        alpha, G, n_iter, converged = _backend.smo_solve(K, y, float(C), eps, max_iter, order)
    else:
        alpha, G, n_iter, converged = _solve_uncached(X, y, kernel, float(C), eps, max_iter, order)
    alpha = np.asarray(alpha)
    G = np.asarray(G)
    b = _bias(alpha, G, y, C)
    dual, gap = _objectives(alpha, G, y, b, C)
    if not converged:
        raise ConvergenceError(f"SMO did not converge in {max_iter} iterations (duality gap {gap:.3g})", gap)
    sv = alpha > 0
    return BinarySvm(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * y)[sv],
        bias=b,
        kernel=kernel,
        pair=tuple(int(v) for v in pair),
        C=float(C),
        n_train=(int((y > 0).sum()), int((y < 0).sum())),
        n_iter=int(n_iter),
        duality_gap=gap,
        dual_objective=dual,
    )


@dataclass(frozen=True)
class OvoEnsemble:
    classes: tuple[int, ...]
    members: dict = field(default_factory=dict)  # (a, b) with a < b -> BinarySvm

    @property
    def dim(self) -> int:
        return next(iter(self.members.values())).dim


def train_ovo(X, labels, kernel: KernelSpec, C: float = 1.0, tol: float = 1e-3, seed: int = 0) -> OvoEnsemble:
    """One binary machine per unordered class pair; class ``a`` of pair ``(a, b)`` is the +1 side."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise InvalidArgumentError("one-against-one training needs at least 2 classes")
    for c, cnt in zip(classes, counts):
        if cnt < 2:
            raise InvalidArgumentError(f"class {c} has {cnt} sample(s); need at least 2")
    members = {}
    for a, b in itertools.combinations(classes.tolist(), 2):
        mask = (labels == a) | (labels == b)
        y = np.where(labels[mask] == a, 1.0, -1.0)
        members[(a, b)] = train_binary(X[mask], y, kernel, C, tol, seed=seed, pair=(a, b))
    return OvoEnsemble(tuple(classes.tolist()), members)


def ovo_votes(e: OvoEnsemble, X):
    """Vote counts and summed |decision| per class for each row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != e.dim:
        raise InvalidArgumentError(f"expected vectors of length {e.dim}, got {X.shape[1]}")
    index = {c: i for i, c in enumerate(e.classes)}
    votes = np.zeros((X.shape[0], len(e.classes)), dtype=np.int64)
    strength = np.zeros((X.shape[0], len(e.classes)))
    rows = np.arange(X.shape[0])
    for (a, b), svm in e.members.items():
        f = decision_function(svm, X)
        winner = np.where(f >= 0, index[a], index[b])
        np.add.at(votes, (rows, winner), 1)
        strength[:, index[a]] += np.abs(f)
        strength[:, index[b]] += np.abs(f)
    return votes, strength


def _pick(votes_row, strength_row):
    best = votes_row.max()
    tied = np.flatnonzero(votes_row == best)
    if len(tied) > 1:
        s = strength_row[tied]
        tied = tied[s == s.max()]
    return int(tied[0])


def predict_ovo(e: OvoEnsemble, x):
    """Majority vote; ties go to the larger summed |decision|, then to the smaller class id."""
    x = np.asarray(x, dtype=np.float64)
    votes, strength = ovo_votes(e, x.reshape(1, -1))
    return e.classes[_pick(votes[0], strength[0])], votes[0]


def predict_ovo_batch(e: OvoEnsemble, X) -> np.ndarray:
    votes, strength = ovo_votes(e, X)
    return np.array([e.classes[_pick(v, s)] for v, s in zip(votes, strength)], dtype=np.int64)
