import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from complexfair.data import DataError, TabularDataset
from complexfair.learners import (FoldPredictions, fit_knn, fit_learner, fit_tree,
                                  resolve_fold_count, run_cv)
from complexfair.linear import fit_logistic, lipschitz_bound, logistic_loss


def blobs(n, seed, sep=3.0, d=2):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, d)) + sep * y[:, None]
    return X, y


class TestLogistic:
    def test_separable_1d(self):
        X = np.array([-3, -2, -1, 1, 2, 3], dtype=float)[:, None]
        y = np.array([0, 0, 0, 1, 1, 1])
        assert np.array_equal(fit_logistic(X, y).predict(X), y)

    def test_label_flip_negates(self):
        X, y = blobs(40, 1, sep=1.0)
        a, b = fit_logistic(X, y), fit_logistic(X, 1 - y)
        assert np.allclose(a.weights, -b.weights, atol=1e-9)
        assert abs(a.bias + b.bias) < 1e-9

    def test_loss_monotone(self):
        X, y = blobs(50, 2, sep=1.0)
        l100 = logistic_loss(X, y, *(lambda m: (m.weights, m.bias))(fit_logistic(X, y, n_iter=100)))
        l1000 = logistic_loss(X, y, *(lambda m: (m.weights, m.bias))(fit_logistic(X, y)))
        assert l1000 <= l100

    def test_matches_loop_reference(self):
        X, y = blobs(12, 3, sep=0.5)
        m = fit_logistic(X, y)
        w, b = oracle.logistic_gd(X.tolist(), y.tolist())
        assert np.allclose(m.weights, w, atol=1e-10) and abs(m.bias - b) < 1e-10

    def test_single_class_is_constant(self):
        m = fit_logistic(np.zeros((4, 2)), np.ones(4))
        assert m.degenerate and m.predict(np.ones((3, 2))).tolist() == [1, 1, 1]

    def test_rotation_invariance(self):
        X, y = blobs(30, 4, sep=1.0)
        th = 0.7
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        a, b = fit_logistic(X, y), fit_logistic(X @ R, y)
        assert np.allclose(a.decision_function(X), b.decision_function(X @ R), atol=1e-9)

    def test_lipschitz_bound(self):
        X, _ = blobs(20, 5)
        Xb = np.column_stack([X, np.ones(20)])
        assert lipschitz_bound(X) == pytest.approx(
            np.linalg.eigvalsh(Xb.T @ Xb).max() / 80 + 1e-4, rel=1e-12)


class TestTree:
    def test_xor(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        y = np.array([0, 1, 1, 0])
        t = fit_tree(X, y)
        assert t.n_internal >= 2 and np.array_equal(t.predict(X), y)

    def test_pure_is_leaf(self):
        t = fit_tree(np.arange(5.0)[:, None], np.ones(5))
        assert t.n_nodes == 1 and t.predict([[9.0]]).tolist() == [1]

    def test_root_threshold(self):
        x = np.linspace(0, 1, 20)
        y = (x > 0.5).astype(int)
        t = fit_tree(x[:, None], y)
        below, above = x[x <= 0.5].max(), x[x > 0.5].min()
        assert t.threshold[0] == pytest.approx(0.5 * (below + above))

    def test_even_leaf_predicts_zero(self):
        t = fit_tree(np.zeros((2, 1)), [0, 1])
        assert t.predict([[0.0]]).tolist() == [0]

    @given(st.integers(0, 10 ** 6))
    def test_matches_recursive_reference(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 25))
        X = rng.integers(0, 4, size=(n, 2)).astype(float)
        y = rng.integers(0, 2, n)
        Q = rng.integers(-1, 5, size=(15, 2)).astype(float)
        ref = oracle.tree_predict_fn(X.tolist(), y.tolist())
        assert fit_tree(X, y).predict(Q).tolist() == [ref(q) for q in Q.tolist()]

    def test_monotone_transform_invariance(self):
        X, y = blobs(40, 6, sep=0.8)
        Q = np.random.default_rng(0).normal(size=(25, 2))
        a = fit_tree(X, y).predict(Q)
        b = fit_tree(np.exp(X), y).predict(np.exp(Q))
        assert np.array_equal(a, b)


class TestKnn:
    def test_unanimous(self):
        X = np.zeros((10, 1))
        assert fit_knn(X, np.ones(10)).predict([[0.0]]).tolist() == [1]

    def test_tie_goes_to_nearest(self):
        X = np.array([[0.0], [0.1]] + [[5.0]] * 8)
        y = np.array([1, 0, 1, 1, 1, 0, 0, 0, 0, 1])
        # query at 0: five of each class, nearest neighbor has label 1
        assert fit_knn(X, y).predict([[0.0]]).tolist() == [1]
        assert fit_knn(X, 1 - y).predict([[0.0]]).tolist() == [0]

    def test_brute_force(self):
        X, y = blobs(30, 7, sep=0.5)
        Q = np.random.default_rng(1).normal(size=(20, 2))
        got = fit_knn(X, y).predict(Q).tolist()
        assert got == [oracle.knn_predict(X.tolist(), y.tolist(), q) for q in Q.tolist()]

    def test_clamped(self):
        m = fit_knn(np.zeros((4, 1)), [0, 1, 1, 1])
        assert m.clamped and m.k == 4


class TestCrossValidation:
    def ds(self, n=60, seed=0, sep=3.0):
        X, y = blobs(n, seed, sep)
        return TabularDataset(X, ["a", "b"], y, (np.arange(n) // 2) % 2)

    @pytest.mark.parametrize("learner", ["LR", "DT", "KN"])
    def test_separable_accuracy(self, learner):
        p = run_cv(self.ds(sep=12.0), learner)
        assert np.array_equal(p.y_pred, p.y_true)

    @pytest.mark.parametrize("learner", ["LR", "DT", "KN"])
    def test_deterministic(self, learner):
        a, b = run_cv(self.ds(sep=0.5), learner, seed=3), run_cv(self.ds(sep=0.5), learner, seed=3)
        assert np.array_equal(a.y_pred, b.y_pred) and np.array_equal(a.fold, b.fold)

    def test_each_row_once(self):
        p = run_cv(self.ds(), "DT")
        assert np.array_equal(p.row_index, np.arange(60)) and set(p.fold.tolist()) == set(range(10))

    def test_no_leakage(self):
        # perturbing a held-out row must not change any prediction of its own fold
        ds = self.ds(sep=0.5)
        base = run_cv(ds, "LR", seed=1)
        X = ds.features.copy()
        r = 5
        X[r] += 100.0
        other = run_cv(ds.with_features(X), "LR", seed=1)
        f = base.fold[r]
        same_fold = (base.fold == f) & (np.arange(60) != r)
        assert np.array_equal(base.y_pred[same_fold], other.y_pred[same_fold])

    def test_small_class_reduces_folds(self):
        n = 30
        y = np.array([1] * 4 + [0] * 26)
        ds = TabularDataset(np.random.default_rng(0).normal(size=(n, 1)), ["x"], y, np.arange(n) % 2)
        p = run_cv(ds, "KN")
        assert p.k == 4 and any("reduced" in f for f in p.flags)
        assert resolve_fold_count(y, 10)[0] == 4
        with pytest.raises(DataError):
            resolve_fold_count([1] + [0] * 10, 10)

    def test_csv_round_trip(self, tmp_path):
        p = run_cv(self.ds(sep=0.5), "DT")
        p.to_csv(tmp_path / "p.csv")
        q = FoldPredictions.from_csv(tmp_path / "p.csv", "DT")
        for c in ("row_index", "fold", "y_true", "y_pred", "protected"):
            assert np.array_equal(getattr(p, c), getattr(q, c))

    def test_unknown_learner(self):
        with pytest.raises(KeyError):
            fit_learner("SVM", np.zeros((2, 1)), [0, 1])
