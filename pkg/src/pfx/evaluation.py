"""Stratified k-fold cross-validation and confusion-matrix reporting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, PfxError, StratificationError


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[np.ndarray, ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i: int):
        test = self.folds[i]
        train = np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))
        return train, test


def stratified_folds(labels, k: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle each class with a seeded generator and deal its members round-robin.

    Dealing continues from the fold where the previous class stopped, so total
    fold sizes stay balanced as well as per-class counts.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise InvalidArgumentError("need at least 2 folds")
    classes, counts = np.unique(labels, return_counts=True)
    short = [(c.item(), int(n)) for c, n in zip(classes, counts) if n < k]
    if short:
        listing = ", ".join(f"{c} ({n} samples)" for c, n in short)
        raise StratificationError(f"classes smaller than {k} folds: {listing}")
    rng = np.random.default_rng(seed)
    buckets = [[] for _ in range(k)]
    start = 0
    for c in classes:
        idx = rng.permutation(np.flatnonzero(labels == c))
        for pos, sample in enumerate(idx):
            buckets[(start + pos) % k].append(int(sample))
        start = (start + len(idx)) % k
    return FoldPlan(tuple(np.array(sorted(b), dtype=np.int64) for b in buckets), int(seed))


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # row = true class, column = predicted

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def empty_rows(self) -> np.ndarray:
        return self.counts.sum(axis=1) == 0

    def percentages(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        out = np.zeros(self.counts.shape)
        np.divide(100.0 * self.counts, rows, out=out, where=rows > 0)
        return out

    def __add__(self, other):
        return ConfusionMatrix(self.counts + other.counts)


def confusion_matrix(true, pred, n_classes: int | None = None) -> ConfusionMatrix:
    true = np.asarray(true, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if true.shape != pred.shape:
        raise InvalidArgumentError(f"length mismatch: {true.size} true vs {pred.size} predicted labels")
    if n_classes is None:
        n_classes = int(max(true.max(initial=-1), pred.max(initial=-1))) + 1
    if true.size and (min(true.min(), pred.min()) < 0 or max(true.max(), pred.max()) >= n_classes):
        raise InvalidArgumentError(f"labels must lie in [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (true, pred), 1)
    return ConfusionMatrix(counts)


def average_recognition_rate(m) -> float:
    """Unweighted mean of per-class recognition rates (diagonal row percentages).

    Accepts a ConfusionMatrix or a sequence of per-class diagonal percentages.
    """
    if isinstance(m, ConfusionMatrix):
        if m.empty_rows.any():
            raise InvalidArgumentError(f"classes without samples: {np.flatnonzero(m.empty_rows).tolist()}")
        diag = np.diag(m.percentages())
    else:
        diag = np.asarray(m, dtype=np.float64)
        if diag.size == 0:
            raise InvalidArgumentError("no classes")
    return float(diag.mean())


@dataclass(frozen=True)
class CrossValResult:
    fold_matrices: tuple[ConfusionMatrix, ...]
    pooled: ConfusionMatrix
    pooled_rate: float
    fold_rates: tuple[float, ...]
    plan: FoldPlan

    @property
    def mean_fold_rate(self) -> float:
        return float(np.mean(self.fold_rates))


def cross_validate(X, labels, fit, predict, n_classes: int | None = None, k: int = 5, seed: int = 0,
                   plan: FoldPlan | None = None) -> CrossValResult:
    """Fit on k-1 folds, predict the held-out fold, for every fold.

    ``fit(X_train, y_train)`` returns a model; ``predict(model, X_test)`` returns
    class ids. Only training rows are ever passed to ``fit``.
    """
    X = np.asarray(X)
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = int(labels.max()) + 1 if n_classes is None else n_classes
    plan = plan or stratified_folds(labels, k, seed)
    mats, rates = [], []
    for i in range(plan.k):
        train, test = plan.train_test(i)
        try:
            model = fit(X[train], labels[train])
            pred = predict(model, X[test])
        except PfxError as exc:
            raise type(exc)(f"fold {i}: {exc}") from exc
        cm = confusion_matrix(labels[test], pred, n_classes)
        mats.append(cm)
        rates.append(average_recognition_rate(cm) if not cm.empty_rows.any()
                     else float(np.mean(np.diag(cm.percentages())[~cm.empty_rows])))
    pooled = ConfusionMatrix(sum(m.counts for m in mats))
    return CrossValResult(tuple(mats), pooled, average_recognition_rate(pooled), tuple(rates), plan)


# -- reporting ----------------------------------------------------------------

def format_table(m: ConfusionMatrix, class_names, title: str = "") -> str:
    """Row-percentage table with one row per true class and a closing average."""
    names = [n.capitalize() for n in class_names]
    width = max(9, max(len(n) for n in names) + 1)
    pct = m.percentages()
    lines = []
    if title:
        lines.append(title)
    lines.append(" " * width + "".join(f"{n:>{width}}" for n in names))
    for name, row in zip(names, pct):
        lines.append(f"{name:<{width}}" + "".join(f"{v:>{width}.2f}" for v in row))
    if not m.empty_rows.any():
        lines.append(f"Average recognition rate = {average_recognition_rate(m):.2f}%")
    return "\n".join(lines)


def matrix_csv(m: ConfusionMatrix, class_names) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["true\\pred"] + list(class_names) + ["total"])
    pct = m.percentages()
    for name, row, prow in zip(class_names, m.counts, pct):
        w.writerow([name] + [int(v) for v in row] + [int(row.sum())])
    w.writerow([])
    w.writerow(["true\\pred %"] + list(class_names))
    for name, prow in zip(class_names, pct):
        w.writerow([name] + [f"{v:.4f}" for v in prow])
    return buf.getvalue()


def summary_csv(result: CrossValResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "n_test", "recognition_rate"])
    for i, (m, r) in enumerate(zip(result.fold_matrices, result.fold_rates)):
        w.writerow([i, int(m.counts.sum()), f"{r:.4f}"])
    w.writerow(["mean_of_folds", int(result.pooled.counts.sum()), f"{result.mean_fold_rate:.4f}"])
    w.writerow(["pooled", int(result.pooled.counts.sum()), f"{result.pooled_rate:.4f}"])
    return buf.getvalue()
