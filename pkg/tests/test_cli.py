import numpy as np
import pytest
from click.testing import CliRunner

from rockperm import manifest as mf
from rockperm import voxel
from rockperm.cli import main
from rockperm.voxel import VoxelGrid


@pytest.fixture
def runner():
    return CliRunner()


def make_input(tmp_path, dims=(20, 20, 20), seed=0, name="rock.raw"):
    """Porous random medium dilated enough to percolate reliably."""
    rng = np.random.default_rng(seed)
    grid = VoxelGrid(rng.random(dims) < 0.35)
    grid = voxel.morph(grid, 1)
    path = tmp_path / name
    voxel.save_raw(grid, path)
    return path, dims


def acquire(runner, tmp_path, size=10, stride=5, **kw):
    raw, dims = make_input(tmp_path, **kw)
    out = tmp_path / "dataset"
    result = runner.invoke(
        main,
        ["acquire", str(raw), str(out), "--dims", *map(str, dims),
         "--size", str(size), "--stride", str(stride)],
    )
    assert result.exit_code == 0, result.output
    return out, result


class TestAcquire:
    def test_counts_and_layout(self, runner, tmp_path):
        out, result = acquire(runner, tmp_path)
        # 3 frames per axis, 3 rotations per origin
        assert "out of 81 candidates" in result.output
        manifest = mf.load_manifest(out / "manifest.csv")
        assert 0 < len(manifest) <= 81
        for rec in manifest:
            assert (out / rec.raw_name).exists()
            assert rec.f_max > 0
            assert rec.flow_axis == {"none": "x", "y90": "z", "z90": "y"}[rec.rotation]

    def test_saved_raws_are_pruned_and_percolating(self, runner, tmp_path):
        out, _ = acquire(runner, tmp_path)
        manifest = mf.load_manifest(out / "manifest.csv")
        for rec in list(manifest)[:5]:
            grid = voxel.load_raw(out / rec.raw_name, (10, 10, 10))
            pruned, permeable = voxel.retain_percolating(grid, "x")
            assert permeable
            assert pruned == grid  # already pruned on disk

    def test_bad_dims_exit_2(self, runner, tmp_path):
        raw, _ = make_input(tmp_path)
        result = runner.invoke(
            main,
            ["acquire", str(raw), str(tmp_path / "o"), "--dims", "9", "9", "9"],
        )
        assert result.exit_code == 2

    def test_oversized_frame_exit_2(self, runner, tmp_path):
        raw, dims = make_input(tmp_path)
        result = runner.invoke(
            main,
            ["acquire", str(raw), str(tmp_path / "o"),
             "--dims", *map(str, dims), "--size", "30"],
        )
        assert result.exit_code == 2


@pytest.fixture(scope="module")
def labeled_dataset(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("pipeline")
    runner = CliRunner()
    out, _ = acquire(runner, tmp_path)
    result = runner.invoke(
        main,
        ["label", str(out / "manifest.csv"), str(out),
         "--order", "0", "--refinement", "1", "--rel-tol", "1e-6"],
    )
    assert result.exit_code in (0, 1), result.output
    return out


class TestLabelFitStats:
    def test_label_fills_k_cmp(self, labeled_dataset):
        manifest = mf.load_manifest(labeled_dataset / "manifest.csv")
        labeled = [r for r in manifest if r.status == "labeled"]
        assert labeled
        for rec in labeled:
            assert rec.k_cmp_md is not None and rec.k_cmp_md > 0
            assert rec.solver_iterations > 0
            assert rec.solver_residual <= 1e-6

    def test_label_skips_done_rows(self, runner, labeled_dataset):
        result = runner.invoke(
            main, ["label", str(labeled_dataset / "manifest.csv"), str(labeled_dataset)]
        )
        assert result.exit_code == 0
        assert "labeled 0/0 pending samples" in result.output

    def test_fit_fills_baseline(self, runner, labeled_dataset):
        result = runner.invoke(main, ["fit", str(labeled_dataset / "manifest.csv")])
        assert result.exit_code == 0, result.output
        assert "R²_log" in result.output
        manifest = mf.load_manifest(labeled_dataset / "manifest.csv")
        for rec in manifest:
            assert rec.k_baseline_md is not None
            if rec.f_max == 0:
                assert rec.k_baseline_md == 0.0

    def test_stats_reports_metrics(self, runner, labeled_dataset):
        result = runner.invoke(
            main,
            ["stats", str(labeled_dataset / "manifest.csv"),
             "--predictions", "k_baseline_md"],
        )
        assert result.exit_code == 0, result.output
        assert "porosity: n=" in result.output
        assert "R2=" in result.output and "R2_log=" in result.output

    def test_filter_range_split_counts(self, runner, labeled_dataset, tmp_path):
        src = labeled_dataset / "manifest.csv"
        dst = tmp_path / "filtered.csv"
        result = runner.invoke(
            main,
            ["filter-range", str(src), str(dst),
             "--k-min", "0", "--k-max", "1e30", "--val-frac", "0.1"],
        )
        assert result.exit_code == 0, result.output
        out = mf.load_manifest(dst)
        n = len(out)
        n_val = sum(1 for r in out if r.split == "val")
        n_train = sum(1 for r in out if r.split == "train")
        assert n_val == -(-n // 10)  # ceil(0.1 n)
        assert n_train + n_val == n

    def test_filter_range_bounds_inclusive(self, runner, labeled_dataset, tmp_path):
        src = labeled_dataset / "manifest.csv"
        manifest = mf.load_manifest(src)
        ks = sorted(r.k_cmp_md for r in manifest if r.k_cmp_md)
        lo, hi = ks[0], ks[-1]
        dst = tmp_path / "edge.csv"
        result = runner.invoke(
            main,
            ["filter-range", str(src), str(dst),
             "--k-min", repr(lo), "--k-max", repr(hi)],
        )
        assert result.exit_code == 0
        out = mf.load_manifest(dst)
        kept = {r.id for r in out}
        for rec in manifest:
            inside = rec.k_cmp_md is not None and lo <= rec.k_cmp_md <= hi
            assert (rec.id in kept) == inside

    def test_filter_range_deterministic_seed(self, runner, labeled_dataset, tmp_path):
        src = labeled_dataset / "manifest.csv"
        outs = []
        for name in ("a.csv", "b.csv"):
            dst = tmp_path / name
            result = runner.invoke(
                main, ["filter-range", str(src), str(dst), "--k-min", "0",
                       "--k-max", "1e30", "--seed", "7"]
            )
            assert result.exit_code == 0
            outs.append(dst.read_bytes())
        assert outs[0] == outs[1]


class TestDistort:
    def test_series_output(self, runner, tmp_path):
        data = np.zeros((10, 10, 10), dtype=bool)
        data[:, 3:7, 3:7] = True
        raw = tmp_path / "tube.raw"
        voxel.save_raw(VoxelGrid(data), raw)
        result = runner.invoke(
            main,
            ["distort", str(raw), "--dims", "10", "10", "10",
             "--min-layers", "-1", "--max-layers", "1"],
        )
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0] == "layers porosity f_max"
        rows = [line.split() for line in lines[1:]]
        assert [r[0] for r in rows] == ["-1", "+0", "+1"]
        porosities = [float(r[1]) for r in rows]
        flows = [int(r[2]) for r in rows]
        assert porosities == sorted(porosities)
        assert flows == sorted(flows)
        assert flows[1] == 16  # 4x4 channel cross-section

    def test_labeled_series(self, runner, tmp_path):
        data = np.zeros((10, 10, 10), dtype=bool)
        data[:, 3:7, 3:7] = True
        raw = tmp_path / "tube.raw"
        voxel.save_raw(VoxelGrid(data), raw)
        result = runner.invoke(
            main,
            ["distort", str(raw), "--dims", "10", "10", "10",
             "--min-layers", "-2", "--max-layers", "0", "--label",
             "--refinement", "1"],
        )
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0] == "layers porosity f_max k_cmp_md"
        ks = [float(line.split()[3]) for line in lines[1:]]
        assert ks[0] == 0.0  # eroded to nothing
        assert 0.0 < ks[1] < ks[2]  # permeability grows with the channel


def test_fit_without_labels_exit_2(tmp_path):
    runner = CliRunner()
    manifest = mf.DatasetManifest(
        voxel_edge=1e-6, size=10, stride=5,
        records=[mf.SampleRecord(id="a", f_max=3)],
    )
    path = tmp_path / "m.csv"
    mf.save_manifest(manifest, path)
    result = runner.invoke(main, ["fit", str(path)])
    assert result.exit_code == 2
