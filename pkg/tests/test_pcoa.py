import numpy as np
import pytest
from scipy.spatial.distance import pdist

import pcoa as pcoa_module
from centering import center_fused
from conftest import euclidean_matrix, random_distance_matrix
from distmat import DistanceMatrix
from error_handling import DimensionError, EigensolverError, ValidationRequiredError
from pcoa import pcoa, register_eigensolver


def pairwise(coordinates):
    return pdist(coordinates) if coordinates.shape[1] else np.zeros(0)


class TestPcoa:
    def test_two_points(self):
        result = pcoa(DistanceMatrix.from_buffer([[0, 2], [2, 0]], ids=['a', 'b']))
        assert result.eigenvalues[0] == pytest.approx(2.0)
        assert result.axes == 1
        np.testing.assert_allclose(np.abs(result.coordinates[:, 0]), [1.0, 1.0])
        assert result.coordinates[0, 0] == pytest.approx(-result.coordinates[1, 0])
        np.testing.assert_allclose(result.proportion_explained, [1.0])
        assert result.ids == ('a', 'b')
        assert not result.negative_eigenvalue_warning

    def test_equilateral_triangle(self):
        result = pcoa(DistanceMatrix.from_buffer(np.ones((3, 3)) - np.eye(3)))
        np.testing.assert_allclose(result.eigenvalues, [0.5, 0.5, 0.0], atol=1e-12)
        assert result.axes == 2
        np.testing.assert_allclose(pairwise(result.coordinates), [1.0, 1.0, 1.0], rtol=1e-10)
        np.testing.assert_allclose(result.proportion_explained, [0.5, 0.5])

    def test_zero_matrix(self):
        result = pcoa(DistanceMatrix.from_buffer(np.zeros((4, 4))))
        np.testing.assert_array_equal(result.eigenvalues, np.zeros(4))
        assert result.coordinates.shape == (4, 0)
        assert result.proportion_explained.size == 0
        assert not result.negative_eigenvalue_warning

    def test_eigenvalues_sorted_and_sum_to_trace(self, rng):
        mat = random_distance_matrix(rng, 60)
        result = pcoa(mat)
        assert np.all(np.diff(result.eigenvalues) <= 0)
        trace = np.trace(center_fused(mat).data)
        assert result.eigenvalues.sum() == pytest.approx(trace, rel=1e-8)
        assert result.proportion_explained.sum() <= 1 + 1e-9

    @pytest.mark.parametrize('d', [1, 2, 3, 5])
    def test_recovers_point_cloud(self, rng, d):
        for n in (10, 57, 100):
            points = rng.normal(size=(n, d))
            original = euclidean_matrix(points)
            np.fill_diagonal(original, 0.0)
            original = (original + original.T) / 2
            result = pcoa(DistanceMatrix.from_buffer(original))
            assert np.all(result.eigenvalues[:d] >= 0)
            assert result.axes <= n
            np.testing.assert_allclose(pairwise(result.coordinates), pdist(points), rtol=1e-6, atol=1e-9)
            gram = result.coordinates.T @ result.coordinates
            off_diagonal = gram - np.diag(np.diag(gram))
            assert np.abs(off_diagonal).max() <= 1e-8 * result.eigenvalues[0]
            np.testing.assert_allclose(np.diag(gram), result.eigenvalues[:result.axes], rtol=1e-8)

    def test_axes_cap(self, rng):
        points = rng.normal(size=(20, 4))
        result = pcoa(DistanceMatrix.from_buffer(euclidean_matrix(points)), axes=2)
        assert result.coordinates.shape == (20, 2)
        assert result.proportion_explained.shape == (2,)

    def test_negative_eigenvalues(self):
        # The triangle inequality fails for (0, 2): not embeddable in Euclidean space
        data = np.array([[0, 1, 5, 1], [1, 0, 1, 1], [5, 1, 0, 1], [1, 1, 1, 0]], dtype=float)
        result = pcoa(DistanceMatrix.from_buffer(data))
        assert result.negative_eigenvalue_warning
        assert result.eigenvalues[-1] < 0
        positive = result.eigenvalues[result.eigenvalues > 1e-12 * np.abs(result.eigenvalues).max()]
        assert result.axes == positive.size
        np.testing.assert_allclose(result.proportion_explained.sum(), 1.0)

    def test_naive_matches_fused(self, rng):
        mat = random_distance_matrix(rng, 40)
        fused = pcoa(mat)
        naive = pcoa(mat, naive=True)
        np.testing.assert_allclose(fused.eigenvalues, naive.eigenvalues, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(np.abs(fused.coordinates), np.abs(naive.coordinates), rtol=1e-6, atol=1e-8)

    def test_too_small(self):
        with pytest.raises(DimensionError):
            pcoa(DistanceMatrix.from_buffer([[0.0]]))

    def test_requires_validation(self):
        with pytest.raises(ValidationRequiredError):
            pcoa(DistanceMatrix.from_buffer([[0, 1], [1, 0]], validate=False))

    def test_solver_failure(self, monkeypatch):
        def failing(centered):
            raise EigensolverError('failing', 'no convergence after 30 iterations')
        monkeypatch.setitem(pcoa_module.EIGENSOLVERS, 'failing', failing)
        with pytest.raises(EigensolverError) as info:
            pcoa(DistanceMatrix.from_buffer([[0, 1], [1, 0]]), eigensolver='failing')
        assert 'iterations' in info.value.diagnostics

    def test_register_backend(self, monkeypatch):
        monkeypatch.setattr(pcoa_module, 'EIGENSOLVERS', dict(pcoa_module.EIGENSOLVERS))
        register_eigensolver('numpy', np.linalg.eigh)
        result = pcoa(DistanceMatrix.from_buffer([[0, 2], [2, 0]]), eigensolver='numpy')
        assert result.eigenvalues[0] == pytest.approx(2.0)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            pcoa(DistanceMatrix.from_buffer([[0, 1], [1, 0]]), eigensolver='randomized')
