import numpy as np
import pytest

from distmat import DistanceMatrix


def random_symmetric_hollow(rng, n, dtype=np.float64):
    a = rng.random((n, n))
    data = (a + a.T) / 2
    np.fill_diagonal(data, 0.0)
    return data.astype(dtype)


def random_distance_matrix(rng, n, ids=None):
    return DistanceMatrix.from_buffer(random_symmetric_hollow(rng, n), ids=ids)


def euclidean_matrix(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


@pytest.fixture
def rng():
    return np.random.default_rng(20210719)


@pytest.fixture
def small_pair():
    x = DistanceMatrix.from_buffer([[0, 1, 2], [1, 0, 3], [2, 3, 0]], ids=['a', 'b', 'c'])
    y = DistanceMatrix.from_buffer([[0, 2, 7], [2, 0, 6], [7, 6, 0]], ids=['a', 'b', 'c'])
    return x, y


@pytest.fixture
def write_text(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return _write
