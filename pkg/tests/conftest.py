import numpy as np
import pytest

from roughbody.chains import Chain
from roughbody.generate import grid_mesh
from roughbody.mesh import build_complex


@pytest.fixture
def square():
    """Unit square as two triangles: the smallest interesting 2D mesh."""
    return build_complex([[0, 0], [1, 0], [1, 1], [0, 1]], {2: [(0, 1, 2), (0, 2, 3)]})


@pytest.fixture
def square_chain(square):
    return Chain(square, 2, {0: 1.0, 1: 1.0})


@pytest.fixture
def split_square():
    """Unit square split at x = 0.5 (four triangles)."""
    verts = [[0, 0], [0.5, 0], [1, 0], [0, 1], [0.5, 1], [1, 1]]
    return build_complex(verts, {2: [(0, 1, 4), (0, 4, 3), (1, 2, 5), (1, 5, 4)]})


@pytest.fixture
def grid44():
    return grid_mesh(4, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
