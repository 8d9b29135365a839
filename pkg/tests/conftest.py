import numpy as np
import pytest

from rockperm.voxel import VoxelGrid


@pytest.fixture
def throat_image():
    """4x4 single-slice image: a 2x2 pool draining through a one-pixel
    throat into a 3-pixel outflow column; max flow 1 along x."""
    img = np.zeros((4, 4, 1), dtype=bool)
    img[0:2, 0:2, 0] = True  # pool
    img[2, 1, 0] = True  # throat
    img[3, 0:3, 0] = True  # outflow column
    return VoxelGrid(img)


@pytest.fixture
def three_channel_image():
    """8x8 single-slice image of three full-width horizontal channels:
    max flow 3 along x, 0 along y."""
    img = np.zeros((8, 8, 1), dtype=bool)
    img[:, 1, 0] = True
    img[:, 4, 0] = True
    img[:, 6, 0] = True
    return VoxelGrid(img)


@pytest.fixture(scope="session")
def channel_grid():
    """100^3 grid with a straight 6x3-voxel channel along x."""
    fluid = np.zeros((100, 100, 100), dtype=bool)
    fluid[:, 47:53, 48:51] = True
    return VoxelGrid(fluid, 2.25e-6)
