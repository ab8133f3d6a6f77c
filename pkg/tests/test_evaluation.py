import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from limbeeg.cases import CaseTable
from limbeeg.classifiers import MODEL_NAMES, ModelSpec
from limbeeg.errors import EmptyMatrix, FoldsReduced, TooFewSamples
from limbeeg.evaluation import (
    ConfusionMatrix, SelectionSpec, cross_validate, metrics_from_confusion, stratified_kfold,
)
from limbeeg.selection import mrmr_select_matrix


def table_from(X, y):
    return CaseTable(1, "motor", np.asarray(X, float), np.asarray(y, int), [""] * len(y),
                     [f"f{i}" for i in range(np.shape(X)[1])])


@st.composite
def label_vectors(draw):
    n0 = draw(st.integers(2, 60))
    n1 = draw(st.integers(2, 60))
    seed = draw(st.integers(0, 2**32 - 1))
    y = np.array([0] * n0 + [1] * n1)
    return np.random.default_rng(seed).permutation(y)


class TestFolds:
    @settings(max_examples=100)
    @given(label_vectors(), st.integers(2, 12), st.integers(0, 1000))
    def test_invariants(self, y, k, seed):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FoldsReduced)
            folds = stratified_kfold(y, k, seed)
        k_eff = min(k, int(min(np.sum(y == 0), np.sum(y == 1))))
        assert len(folds) == k_eff
        joined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(joined, np.arange(y.size))
        sizes = [f.size for f in folds]
        assert max(sizes) - min(sizes) <= 1
        for c in (0, 1):
            n_c = int(np.sum(y == c))
            per_fold = [int(np.sum(y[f] == c)) for f in folds]
            assert all(n_c // k_eff <= m <= -(-n_c // k_eff) for m in per_fold)

    def test_seed_controls_assignment(self):
        y = np.repeat([0, 1], 30)
        a = stratified_kfold(y, 5, 1)
        b = stratified_kfold(y, 5, 1)
        c = stratified_kfold(y, 5, 2)
        assert all(np.array_equal(p, q) for p, q in zip(a, b))
        assert not all(np.array_equal(p, q) for p, q in zip(a, c))

    def test_folds_reduced(self):
        y = np.array([0] * 20 + [1] * 3)
        with pytest.warns(FoldsReduced):
            assert len(stratified_kfold(y, 10)) == 3

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            stratified_kfold(np.array([0, 0, 0, 1]), 2)
        with pytest.raises(TooFewSamples):
            stratified_kfold(np.zeros(10), 2)


class TestMetrics:
    def test_worked_example(self):
        m = metrics_from_confusion(ConfusionMatrix(tp=8, fp=2, fn=1, tn=9))
        assert m.accuracy == pytest.approx(17 / 20)
        p1, r1 = 8 / 10, 8 / 9
        p0, r0 = 9 / 10, 9 / 11
        f1 = lambda p, r: 2 * p * r / (p + r)
        assert m.precision == pytest.approx((p0 + p1) / 2, abs=1e-15)
        assert m.recall == pytest.approx((r0 + r1) / 2, abs=1e-15)
        assert m.f1 == pytest.approx((f1(p0, r0) + f1(p1, r1)) / 2, abs=1e-15)
        assert m.per_class[1]["precision"] == pytest.approx(p1)

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
    def test_macro_is_symmetric_and_bounded(self, tp, fp, fn, tn):
        cm = ConfusionMatrix(tp, fp, fn, tn)
        if cm.total == 0:
            with pytest.raises(EmptyMatrix):
                metrics_from_confusion(cm)
            return
        a, b = metrics_from_confusion(cm), metrics_from_confusion(cm.swapped())
        for name in ("accuracy", "precision", "recall", "f1"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-15)
            assert 0.0 <= getattr(a, name) <= 1.0

    def test_undefined_ratio_is_zero(self):
        m = metrics_from_confusion(ConfusionMatrix(tp=0, fp=0, fn=5, tn=5))
        assert m.per_class[1]["precision"] == 0.0 and m.per_class[1]["f1"] == 0.0

    def test_from_predictions(self):
        cm = ConfusionMatrix.from_predictions([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
        assert cm == ConfusionMatrix(tp=2, fp=1, fn=1, tn=1)


def noisy_table(rng, n=60, d=8, shift=1.0):
    y = np.repeat([0, 1], n // 2)
    X = rng.normal(size=(n, d))
    X[:, 2] += shift * y
    X[:, 5] -= shift * y
    return table_from(X, y)


class TestCrossValidate:
    def test_aggregates(self, rng):
        t = noisy_table(rng)
        rep = cross_validate(t, ModelSpec("gnb"), SelectionSpec(k=3), k=5, seed=4)
        total = ConfusionMatrix()
        for f in rep.folds:
            total = total + f.confusion
        assert rep.confusion == total and rep.confusion.total == t.n_rows
        assert rep.mean_test_accuracy == pytest.approx(np.mean([f.test_accuracy for f in rep.folds]))
        assert rep.summary()["precision"] == rep.metrics.precision

    def test_selection_is_fitted_inside_each_fold(self, rng):
        t = noisy_table(rng, shift=0.6)
        rep = cross_validate(t, ModelSpec("gnb"), SelectionSpec(k=2), k=5, seed=0)
        for f in rep.folds:
            expect = mrmr_select_matrix(t.X[f.train_index], t.y[f.train_index], 2).indices
            assert f.selected == expect
            assert not set(f.train_index) & set(f.test_index)

    def test_global_selection_uses_all_rows(self, rng):
        t = noisy_table(rng, shift=0.6)
        rep = cross_validate(t, ModelSpec("gnb"), SelectionSpec(k=2, global_selection=True), k=5)
        expect = mrmr_select_matrix(t.X, t.y, 2).indices
        assert all(f.selected == expect for f in rep.folds)

    def test_no_selection_keeps_everything(self, rng):
        t = noisy_table(rng)
        rep = cross_validate(t, ModelSpec("tree"), SelectionSpec(method="none"), k=3)
        assert all(f.selected == list(range(8)) for f in rep.folds)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_separable_data_is_perfect(self, rng, name):
        y = np.repeat([0, 1], 30)
        X = rng.normal(size=(60, 5))
        X[:, 1] += 10 * y
        rep = cross_validate(table_from(X, y), ModelSpec(name), SelectionSpec(k=2), k=5)
        assert rep.mean_test_accuracy == 1.0 and rep.metrics.f1 == 1.0

    def test_permuted_labels_are_chance(self, rng):
        X = rng.normal(size=(80, 6))
        accs = []
        for r in range(20):
            y = np.random.default_rng(r).permutation(np.repeat([0, 1], 40))
            rep = cross_validate(table_from(X, y), ModelSpec("svm-rbf"), SelectionSpec(k=3),
                                 k=5, seed=r)
            accs.append(rep.mean_test_accuracy)
        assert abs(np.mean(accs) - 0.5) <= 0.15

    def test_report_is_json_and_reproducible(self, rng):
        t = noisy_table(rng)
        a = cross_validate(t, ModelSpec("knn-euclid"), k=4, seed=11).as_dict()
        b = cross_validate(t, ModelSpec("knn-euclid"), k=4, seed=11).as_dict()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
        assert a["schema"] == "limbeeg.report/1"
        assert len(a["selected_names"]) == 4 and len(a["selected_names"][0]) == 4

    def test_tiny_table(self):
        t = table_from(np.arange(8.0).reshape(4, 2), [0, 0, 0, 1])
        with pytest.raises(TooFewSamples):
            cross_validate(t)
