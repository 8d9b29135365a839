import numpy as np
import pytest

from rockperm.stokes.assemble import assemble
from rockperm.stokes.mesh import build_mesh
from rockperm.stokes.minres import minres, minres_solve
from rockperm.stokes.precond import (
    GmgPreconditioner,
    JacobiPreconditioner,
    build_prolongation,
    make_preconditioner,
)
from rockperm.voxel import VoxelGrid


def tube_system(n=4, width=2, ell=0, refinement=0, **kw):
    data = np.zeros((n, width + 2, width + 2), dtype=bool)
    data[:, 1 : 1 + width, 1 : 1 + width] = True
    return assemble(build_mesh(VoxelGrid(data), refinement), ell, **kw)


class TestMinres:
    def test_identity_system_converges_in_one_step(self):
        b = np.array([3.0, -1.0, 2.0])
        x, itn, rel, _ = minres(lambda v: v, b, lambda v: v, 1e-12, 10)
        np.testing.assert_allclose(x, b, atol=1e-12)
        assert itn == 1
        assert rel < 1e-12

    def test_zero_rhs_zero_iterations(self):
        x, itn, rel, hist = minres(
            lambda v: v, np.zeros(5), lambda v: v, 1e-8, 10
        )
        assert itn == 0 and rel == 0.0
        np.testing.assert_array_equal(x, 0.0)

    def test_spd_random_matches_direct(self):
        rng = np.random.default_rng(40)
        a = rng.normal(size=(20, 20))
        a = a @ a.T + 20 * np.eye(20)
        b = rng.normal(size=20)
        x, _, rel, _ = minres(lambda v: a @ v, b, lambda v: v, 1e-12, 200)
        np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-9)

    def test_indefinite_symmetric(self):
        d = np.array([3.0, -2.0, 1.0, -4.0, 5.0])
        b = np.ones(5)
        x, _, _, _ = minres(lambda v: d * v, b, lambda v: v, 1e-12, 50)
        np.testing.assert_allclose(x, b / d, atol=1e-10)

    def test_residual_history_monotone(self):
        rng = np.random.default_rng(41)
        a = rng.normal(size=(15, 15))
        a = 0.5 * (a + a.T)
        _, _, _, hist = minres(
            lambda v: a @ v, rng.normal(size=15), lambda v: v, 1e-10, 100
        )
        assert np.all(np.diff(hist) <= 1e-12)

    def test_iteration_cap_reported(self):
        system = tube_system()
        prec = make_preconditioner("jacobi", system)
        sol = minres_solve(system, prec, rel_tol=1e-14, max_iter=3)
        assert not sol.converged
        assert sol.iterations == 3

    def test_tolerance_validation(self):
        system = tube_system()
        prec = make_preconditioner("jacobi", system)
        with pytest.raises(ValueError, match="rel_tol"):
            minres_solve(system, prec, rel_tol=0.0)


class TestPreconditioners:
    @pytest.mark.parametrize("names", [("jacobi", "gmg"), ("jacobi", "amg")])
    def test_solutions_agree(self, names):
        system = tube_system(n=4, width=2, ell=0, refinement=1)
        sols = []
        for name in names:
            prec = make_preconditioner(name, system)
            sol = minres_solve(system, prec, rel_tol=1e-10)
            assert sol.converged, name
            sols.append(np.concatenate([sol.x_u, sol.x_p]))
        scale = np.abs(sols[0]).max()
        np.testing.assert_allclose(sols[0], sols[1], atol=1e-6 * scale)

    def test_gmg_beats_jacobi_on_refined_mesh(self):
        system = tube_system(n=6, width=3, ell=0, refinement=2)
        iters = {}
        for name in ("jacobi", "gmg"):
            prec = make_preconditioner(name, system)
            sol = minres_solve(system, prec, rel_tol=1e-8)
            assert sol.converged
            iters[name] = sol.iterations
        assert iters["gmg"] < iters["jacobi"]

    def test_gmg_order_two(self):
        system = tube_system(n=3, width=2, ell=1, refinement=1)
        sol_g = minres_solve(system, GmgPreconditioner(system), rel_tol=1e-10)
        sol_j = minres_solve(system, JacobiPreconditioner(system), rel_tol=1e-10)
        assert sol_g.converged and sol_j.converged
        scale = np.abs(sol_j.x_u).max()
        np.testing.assert_allclose(sol_g.x_u, sol_j.x_u, atol=1e-6 * scale)

    def test_auto_is_gmg(self):
        system = tube_system()
        assert make_preconditioner("auto", system).name == "gmg"
        with pytest.raises(ValueError, match="unknown"):
            make_preconditioner("nope", system)

    def test_vcycle_is_linear_operator(self):
        # MINRES theory needs a fixed SPD action: check linearity
        system = tube_system(n=4, width=2, refinement=1)
        prec = GmgPreconditioner(system)
        rng = np.random.default_rng(42)
        r1 = rng.normal(size=system.n)
        r2 = rng.normal(size=system.n)
        lhs = prec.apply_velocity(2.0 * r1 - 3.0 * r2)
        rhs = 2.0 * prec.apply_velocity(r1) - 3.0 * prec.apply_velocity(r2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_vcycle_is_spd(self):
        system = tube_system(n=3, width=1, refinement=1)
        prec = GmgPreconditioner(system)
        nv = system.nv
        mat = np.empty((nv, nv))
        eye = np.eye(nv)
        for i in range(nv):
            mat[:, i] = prec._vcycle(len(prec.ops) - 1, eye[:, i])
        np.testing.assert_allclose(mat, mat.T, atol=1e-10)
        assert np.linalg.eigvalsh(0.5 * (mat + mat.T)).min() > 0


class TestProlongation:
    def test_preserves_constants_in_interior(self):
        system = tube_system(n=4, width=3, refinement=1)
        prec = GmgPreconditioner(system)
        p = prec.prolongs[0]
        ones = np.ones(p.shape[1])
        out = p @ ones
        # rows not touching any no-slip node must interpolate exactly
        row_full = np.asarray((p != 0).sum(axis=1)).ravel()
        interior = out > 0.999  # nodes unaffected by boundary masking
        assert interior.any()
        np.testing.assert_allclose(out[interior], 1.0, atol=1e-12)

    def test_weights_between_zero_and_one(self):
        system = tube_system(n=4, width=2, refinement=1)
        for p in GmgPreconditioner(system).prolongs:
            assert p.data.min() >= 0.0
            assert p.data.max() <= 1.0 + 1e-15
