import pytest

from rockperm.manifest import (
    DatasetManifest,
    ManifestError,
    SampleRecord,
    load_manifest,
    save_manifest,
)


def sample(i, **kw):
    defaults = dict(
        id=f"s{i:04d}",
        parent="rock0",
        origin_x=50 * i,
        rotation="none",
        flow_axis="x",
        porosity=0.25,
        face_count=1234,
        area_m2=6.2e-9,
        f_max=17,
        status="labeled",
    )
    defaults.update(kw)
    return SampleRecord(**defaults)


def make_manifest(n=3, **kw):
    return DatasetManifest(
        voxel_edge=2.25e-6,
        size=100,
        stride=50,
        records=[sample(i) for i in range(n)],
        **kw,
    )


class TestRecord:
    def test_validation(self):
        with pytest.raises(ManifestError, match="id"):
            SampleRecord(id="")
        with pytest.raises(ManifestError, match="porosity"):
            sample(0, porosity=1.5)
        with pytest.raises(ManifestError, match="f_max"):
            sample(0, f_max=-1)
        with pytest.raises(ManifestError, match="non-negative"):
            sample(0, k_cmp_md=-2.0)

    def test_impermeable_cannot_carry_label(self):
        with pytest.raises(ManifestError, match="impermeable"):
            sample(0, f_max=0, k_cmp_md=3.0)
        # zero or missing labels are fine
        assert sample(0, f_max=0, k_cmp_md=0.0).permeable is False
        assert sample(0, f_max=0).permeable is False

    def test_raw_name(self):
        assert sample(7).raw_name == "s0007.raw"


class TestManifest:
    def test_round_trip(self, tmp_path):
        manifest = make_manifest()
        manifest.records[1].k_cmp_md = 123.456
        manifest.records[1].split = "train"
        path = tmp_path / "manifest.csv"
        save_manifest(manifest, path)
        loaded = load_manifest(path)
        assert loaded.voxel_edge == manifest.voxel_edge
        assert loaded.size == 100 and loaded.stride == 50
        assert loaded.records == manifest.records

    def test_rewrite_is_byte_identical(self, tmp_path):
        manifest = make_manifest()
        manifest.records[0].k_cmp_md = 0.1 + 0.2  # needs full precision
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_manifest(manifest, p1)
        save_manifest(load_manifest(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_line_format(self, tmp_path):
        path = tmp_path / "manifest.csv"
        save_manifest(make_manifest(), path)
        first = path.read_text().splitlines()[0]
        assert first == (
            "# rockperm-manifest v1 voxel_edge_m=2.25e-06 "
            "size=100 stride=50 k_unit=mD area_unit=m2"
        )

    def test_unknown_columns_preserved(self, tmp_path):
        path = tmp_path / "manifest.csv"
        manifest = make_manifest(extra_columns=["operator_note"])
        manifest.records[0].extra["operator_note"] = "checked by hand"
        save_manifest(manifest, path)
        loaded = load_manifest(path)
        assert loaded.extra_columns == ["operator_note"]
        assert loaded.records[0].extra["operator_note"] == "checked by hand"
        # survives a rewrite
        path2 = tmp_path / "copy.csv"
        save_manifest(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ManifestError, match="duplicate"):
            DatasetManifest(
                voxel_edge=1e-6, size=10, stride=5,
                records=[sample(0), sample(0)],
            )
        manifest = make_manifest()
        with pytest.raises(ManifestError, match="duplicate"):
            manifest.add(sample(0))

    def test_lookup(self):
        manifest = make_manifest()
        assert manifest.get("s0001").origin_x == 50
        with pytest.raises(KeyError):
            manifest.get("missing")
        assert len(manifest) == 3
        assert [r.id for r in manifest] == ["s0000", "s0001", "s0002"]


class TestFormatErrors:
    def test_missing_magic(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,parent\nx,y\n")
        with pytest.raises(ManifestError, match="header"):
            load_manifest(path)

    def test_newer_version_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "# rockperm-manifest v2 voxel_edge_m=1e-06 size=10 stride=5 "
            "k_unit=mD area_unit=m2\nid\nx\n"
        )
        with pytest.raises(ManifestError, match="version 2"):
            load_manifest(path)

    def test_missing_parameter(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# rockperm-manifest v1 size=10 stride=5\nid\n")
        with pytest.raises(ManifestError, match="voxel_edge_m"):
            load_manifest(path)

    def test_missing_column_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "# rockperm-manifest v1 voxel_edge_m=1e-06 size=10 stride=5 "
            "k_unit=mD area_unit=m2\n"
        )
        with pytest.raises(ManifestError, match="column header"):
            load_manifest(path)
