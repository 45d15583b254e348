import numpy as np
import pytest
from scipy.spatial.distance import pdist

import oracle
from complexfair.embedding import classical_mds, impute_undefined


class TestClassicalMds:
    def test_345_triangle(self):
        V = np.zeros((3, 14))
        V[1, 0] = 3.0
        V[2, 1] = 4.0
        res = classical_mds(V)
        assert np.allclose(pdist(res.coords), [3.0, 4.0, 5.0], atol=1e-9)
        assert res.stress < 1e-9

    def test_identical_vectors(self):
        res = classical_mds(np.full((5, 14), 0.3))
        assert np.all(res.coords == 0.0)
        assert len(res.flags) == 2

    def test_too_few(self):
        with pytest.raises(ValueError):
            classical_mds(np.zeros((2, 3)))

    def test_matches_pca_reference(self):
        V = np.random.default_rng(0).random((10, 14))
        res = classical_mds(V)
        ref = oracle.pca_scores(V)
        for k in range(2):
            assert np.allclose(np.abs(res.coords[:, k]), np.abs(ref[:, k]), atol=1e-9)
        r_got = np.corrcoef(pdist(V), pdist(res.coords))[0, 1]
        r_ref = np.corrcoef(pdist(V), pdist(ref))[0, 1]
        assert abs(r_got - r_ref) < 1e-6

    def test_invariants(self):
        V = np.random.default_rng(1).random((12, 14))
        res = classical_mds(V)
        assert np.all(np.abs(res.coords.mean(axis=0)) < 1e-9)
        assert np.all(np.diff(res.eigenvalues) <= 1e-12)
        assert np.all(pdist(res.coords) <= pdist(V) + 1e-9)
        for k in range(2):
            col = res.coords[:, k]
            assert col[np.argmax(np.abs(col) > 1e-9 * np.abs(col).max())] > 0

    def test_planar_input_is_exact(self):
        rng = np.random.default_rng(2)
        V = np.zeros((8, 14))
        V[:, :2] = rng.normal(size=(8, 2))
        assert np.allclose(pdist(classical_mds(V).coords), pdist(V), atol=1e-9)

    def test_byte_stable(self):
        V = np.random.default_rng(3).random((9, 14))
        assert classical_mds(V).coords.tobytes() == classical_mds(V.copy()).coords.tobytes()

    def test_collinear_flags_second_axis(self):
        V = np.outer(np.arange(5.0), np.ones(14))
        res = classical_mds(V)
        assert np.all(res.coords[:, 1] == 0) and any("axis 2" in f for f in res.flags)

    def test_imputation(self):
        V, k = impute_undefined([[np.nan, 1.0], [0.5, np.nan], [1, 1]])
        assert k == 2 and V[0, 0] == 0.0
        res = classical_mds([[np.nan, 1.0], [0.5, 0.2], [1.0, 1.0]])
        assert res.imputed == 1 and any("imputed" in f for f in res.flags)
