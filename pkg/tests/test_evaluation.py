import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfx import modelio, pipeline
from pfx.errors import InvalidArgumentError, PfxError, StratificationError
from pfx.evaluation import (ConfusionMatrix, average_recognition_rate, confusion_matrix, cross_validate,
                            format_table, matrix_csv, stratified_folds, summary_csv)

REFERENCE_A_DIAGONAL = (95.26, 88.75, 97.78, 95.50, 94.21, 96.32)
REFERENCE_B_DIAGONAL = (98.33, 88.33, 79.59, 93.33, 83.33, 81.67)


def nearest_mean_fit(X, y):
    return np.stack([X[y == c].mean(0) for c in range(int(y.max()) + 1)])


def nearest_mean_predict(means, X):
    return np.argmin(((X[:, None, :] - means[None]) ** 2).sum(-1), axis=1)


class TestFolds:
    def test_six_by_thirty(self):
        labels = np.repeat(np.arange(6), 30)
        plan = stratified_folds(labels, 5, 0)
        for f in plan.folds:
            assert len(f) == 36 and (np.bincount(labels[f], minlength=6) == 6).all()

    def test_five_samples_one_per_fold(self):
        labels = np.array([0] * 5 + [1] * 7)
        plan = stratified_folds(labels, 5, 1)
        assert all((labels[f] == 0).sum() == 1 for f in plan.folds)

    def test_seeded(self):
        labels = np.repeat(np.arange(4), 25)
        a, b, c = stratified_folds(labels, 5, 9), stratified_folds(labels, 5, 9), stratified_folds(labels, 5, 10)
        assert all(np.array_equal(x, y) for x, y in zip(a.folds, b.folds))
        assert not all(np.array_equal(x, y) for x, y in zip(a.folds, c.folds))

    def test_class_smaller_than_k(self):
        with pytest.raises(StratificationError):
            stratified_folds([0, 0, 0, 1, 1, 1, 1, 1], 5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=30, max_size=120), st.integers(2, 5), st.integers(0, 1000))
    def test_partition_and_balance(self, raw, k, seed):
        labels = np.array(raw)
        if np.bincount(labels).min(initial=0) < k or len(np.unique(labels)) != labels.max() + 1:
            return
        plan = stratified_folds(labels, k, seed)
        everything = np.concatenate(plan.folds)
        assert np.array_equal(np.sort(everything), np.arange(len(labels)))
        for c in np.unique(labels):
            per_fold = [(labels[f] == c).sum() for f in plan.folds]
            assert max(per_fold) - min(per_fold) <= 1
        train, test = plan.train_test(0)
        assert not set(train) & set(test)


class TestConfusion:
    def test_perfect(self):
        m = confusion_matrix([0, 1, 2, 2], [0, 1, 2, 2], 3)
        assert (np.diag(m.percentages()) == 100).all()

    def test_row_percentages(self):
        m = confusion_matrix([0, 0, 0], [0, 0, 1], 3)
        assert np.allclose(m.percentages()[0], [200 / 3, 100 / 3, 0])
        assert m.empty_rows.tolist() == [False, True, True]
        assert not m.percentages()[1].any()

    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=200))
    def test_rows_sum_to_100(self, pairs):
        t, p = zip(*pairs)
        m = confusion_matrix(t, p, 6)
        rows = m.percentages().sum(axis=1)
        assert np.allclose(rows[~m.empty_rows], 100, atol=1e-9) and (m.counts >= 0).all()

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            confusion_matrix([0, 1], [0], 2)


class TestRates:
    def test_reference_a(self):
        assert abs(average_recognition_rate(REFERENCE_A_DIAGONAL) - 94.63) <= 0.01

    def test_reference_b(self):
        assert abs(average_recognition_rate(REFERENCE_B_DIAGONAL) - 87.43) <= 0.01

    def test_identity(self):
        assert average_recognition_rate(ConfusionMatrix(np.eye(6, dtype=np.int64) * 4)) == 100

    def test_unweighted(self):
        m = ConfusionMatrix(np.array([[9, 1], [0, 1]]))
        assert average_recognition_rate(m) == pytest.approx(95.0)

    def test_empty_class(self):
        with pytest.raises(InvalidArgumentError):
            average_recognition_rate(ConfusionMatrix(np.array([[2, 0], [0, 0]])))


class TestCrossValidate:
    def test_separable(self, rng):
        labels = np.repeat(np.arange(6), 10)
        X = labels[:, None] * 100.0 + rng.uniform(0, 1, size=(60, 3))
        r = cross_validate(X, labels, nearest_mean_fit, nearest_mean_predict, 6, 5, 0)
        assert r.pooled_rate == 100
        assert np.array_equal(sum(m.counts for m in r.fold_matrices), r.pooled.counts)

    def test_fit_sees_training_rows_only(self, rng):
        labels = np.repeat(np.arange(3), 10)
        X = np.arange(30.0)[:, None]
        seen = []

        def fit(Xtr, ytr):
            seen.append(set(Xtr[:, 0].astype(int)))
            return nearest_mean_fit(Xtr, ytr)

        r = cross_validate(X, labels, fit, nearest_mean_predict, 3, 5, 0)
        for i, s in enumerate(seen):
            assert not s & set(r.plan.folds[i].tolist())

    def test_errors_name_the_fold(self):
        labels = np.repeat(np.arange(2), 5)

        def fit(Xtr, ytr):
            raise InvalidArgumentError("boom")

        with pytest.raises(InvalidArgumentError, match="fold 0"):
            cross_validate(np.zeros((10, 1)), labels, fit, nearest_mean_predict, 2, 5, 0)

    def test_reports(self, rng):
        labels = np.repeat(np.arange(6), 5)
        r = cross_validate(rng.normal(size=(30, 2)), labels, nearest_mean_fit, nearest_mean_predict, 6, 5, 0)
        names = pipeline.CLASS_NAMES
        table = format_table(r.pooled, names, "pooled")
        assert table.splitlines()[0] == "pooled" and "Average recognition rate" in table
        csv_text = matrix_csv(r.pooled, names)
        assert csv_text.splitlines()[0].split(",")[1:7] == list(names)
        summary = summary_csv(r)
        assert "pooled" in summary and "mean_of_folds" in summary


class TestLeakage:
    def test_deleting_a_test_sample_leaves_the_fold_model_unchanged(self, small_features):
        X, y = small_features
        cfg = pipeline.PipelineConfig()
        plan = stratified_folds(y, 5, 0)
        train, test = plan.train_test(2)
        ref = modelio.dumps(pipeline.fit_model(X[train], y[train], cfg))
        for victim in test[:4]:
            keep = np.delete(np.arange(len(y)), victim)
            X2, y2 = X[keep], y[keep]
            # the same training rows, addressed in the reduced dataset
            train2 = np.searchsorted(keep, train)
            assert modelio.dumps(pipeline.fit_model(X2[train2], y2[train2], cfg)) == ref
