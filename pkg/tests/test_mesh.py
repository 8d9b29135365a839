import numpy as np
import pytest

from rockperm.stokes.mesh import MeshError, VoxelMesh, build_mesh
from rockperm.voxel import VoxelGrid

from gridutil import random_grid


def tube(n, width=1):
    data = np.zeros((n, max(3, width + 2), max(3, width + 2)), dtype=bool)
    data[:, 1 : 1 + width, 1 : 1 + width] = True
    return VoxelGrid(data)


class TestBuildMesh:
    def test_channel_cell_count(self, channel_grid):
        mesh = build_mesh(channel_grid, 0)
        assert mesh.num_cells == 6 * 3 * 100  # 1800

    def test_refined_channel_cell_count(self, channel_grid):
        mesh = build_mesh(channel_grid, 1)
        assert mesh.num_cells == 8 * 1800  # 14400
        assert mesh.h == pytest.approx(1.0 / 200)

    def test_cell_edge_unit_cube(self):
        mesh = build_mesh(tube(10), 0)
        assert mesh.h == pytest.approx(0.1)
        mesh = build_mesh(tube(10), 2)
        assert mesh.h == pytest.approx(1.0 / 40)

    def test_refinement_preserves_geometry(self):
        grid = tube(4, width=2)
        base = build_mesh(grid, 0)
        fine = build_mesh(grid, 1)
        assert fine.num_cells == 8 * base.num_cells
        # every fine cell maps into a coarse fluid voxel
        coarse_of = fine.cells // 2
        assert np.all(
            grid.data[coarse_of[:, 0], coarse_of[:, 1], coarse_of[:, 2]]
        )

    def test_non_percolating_rejected(self):
        data = np.zeros((4, 4, 4), dtype=bool)
        data[1:3, 1:3, 1:3] = True
        with pytest.raises(MeshError, match="percolate"):
            build_mesh(VoxelGrid(data), 0)

    def test_negative_refinement_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            build_mesh(tube(3), -1)

    def test_cell_id_round_trip(self):
        rng = np.random.default_rng(20)
        grid = random_grid(rng, (5, 5, 5), 0.8)
        mesh = build_mesh(grid, 0)
        for cid, (i, j, k) in enumerate(mesh.cells):
            assert mesh.cell_id[i, j, k] == cid
        assert (mesh.cell_id >= 0).sum() == mesh.num_cells


class TestFaceClassification:
    def test_single_file_tube_counts(self):
        # 1x1xn tube along x: 1 inflow face, 1 outflow face, 4n no-slip
        for n in (1, 3, 7):
            n_in, n_out, n_d = build_mesh(tube(n), 0).face_counts()
            assert (n_in, n_out, n_d) == (1, 1, 4 * n)

    def test_channel_traction_faces(self, channel_grid):
        mesh = build_mesh(channel_grid, 0)
        n_in, n_out, _ = mesh.face_counts()
        assert n_in == 18 and n_out == 18  # 6x3 cross-section

    def test_total_face_count_matches_surface(self, channel_grid):
        from rockperm.voxel import surface_area

        mesh = build_mesh(channel_grid, 0)
        n_in, n_out, n_d = mesh.face_counts()
        # the voxel surface counts every fluid-solid/exterior face once
        assert n_in + n_out + n_d == surface_area(channel_grid)[0]

    def test_boundary_mask_interior_face(self):
        grid = tube(3, width=2)
        mesh = build_mesh(grid, 0)
        low_x = mesh.boundary_face_mask(0, -1)
        # only the four cells in the x = 0 slab have a low-x boundary face
        assert low_x.sum() == 4
        assert np.all(mesh.cells[low_x, 0] == 0)

    def test_gamma_cells_are_plane_slabs(self):
        grid = tube(5, width=2)
        mesh = build_mesh(grid, 1)
        assert np.all(mesh.cells[mesh.gamma_in_cells(), 0] == 0)
        assert np.all(mesh.cells[mesh.gamma_out_cells(), 0] == 9)
        assert mesh.gamma_in_cells().size == 16  # 4x4 refined cross-section
