"""Dataset manifest: one CSV row per voxel sample plus a header line.

File layout (version 1)::

    # rockperm-manifest v1 voxel_edge_m=2.25e-06 size=100 stride=50 k_unit=mD area_unit=m2
    id,parent,origin_x,...,status
    <row>
    ...

The first line carries the dataset-wide parameters as ``key=value``
pairs; the second line is a standard CSV header.  Permeability columns
(``k_cmp_md``, ``k_baseline_md``, ``k_prd_md``) are in millidarcy and
empty until the corresponding pipeline stage fills them.  Unknown
columns are preserved verbatim on read-modify-write so that external
tools can annotate manifests without losing data.  Floats are written
with the shortest round-trip representation, making rewrites of an
unchanged manifest byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields

MANIFEST_VERSION = 1

_MAGIC = "# rockperm-manifest"


class ManifestError(ValueError):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_float(text):
    return None if text == "" else float(text)


def _parse_int(text):
    return None if text == "" else int(text)


@dataclass
class SampleRecord:
    """One manifest row; see the module docstring for units."""

    id: str
    parent: str = ""
    origin_x: int = 0
    origin_y: int = 0
    origin_z: int = 0
    rotation: str = "none"
    flow_axis: str = "x"
    porosity: float = 0.0
    face_count: int = 0
    area_m2: float = 0.0
    f_max: int = 0
    k_cmp_md: float | None = None
    k_baseline_md: float | None = None
    k_prd_md: float | None = None
    split: str = ""
    solver_iterations: int | None = None
    solver_residual: float | None = None
    status: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ManifestError("sample id must be non-empty")
        if not 0.0 <= self.porosity <= 1.0:
            raise ManifestError(f"{self.id}: porosity {self.porosity} outside [0, 1]")
        if self.f_max < 0:
            raise ManifestError(f"{self.id}: f_max must be non-negative")
        if self.k_cmp_md is not None and self.k_cmp_md < 0:
            raise ManifestError(f"{self.id}: k_cmp must be non-negative")
        if self.f_max == 0 and self.k_cmp_md not in (None, 0.0):
            raise ManifestError(
                f"{self.id}: impermeable sample (f_max = 0) cannot carry k_cmp > 0"
            )

    @property
    def permeable(self) -> bool:
        return self.f_max > 0

    @property
    def raw_name(self) -> str:
        return f"{self.id}.raw"


_COLUMNS = [f.name for f in fields(SampleRecord) if f.name != "extra"]
_INT_COLUMNS = {
    "origin_x",
    "origin_y",
    "origin_z",
    "face_count",
    "f_max",
    "solver_iterations",
}
_FLOAT_COLUMNS = {
    "porosity",
    "area_m2",
    "k_cmp_md",
    "k_baseline_md",
    "k_prd_md",
    "solver_residual",
}


@dataclass
class DatasetManifest:
    voxel_edge: float
    size: int
    stride: int
    records: list = field(default_factory=list)
    version: int = MANIFEST_VERSION
    extra_columns: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise ManifestError(f"duplicate sample id {rec.id!r}")
            seen.add(rec.id)

    def add(self, record: SampleRecord):
        if any(r.id == record.id for r in self.records):
            raise ManifestError(f"duplicate sample id {record.id!r}")
        self.records.append(record)

    def get(self, sample_id: str) -> SampleRecord:
        for rec in self.records:
            if rec.id == sample_id:
                return rec
        raise KeyError(sample_id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def save_manifest(manifest: DatasetManifest, path) -> None:
    manifest.validate()
    columns = _COLUMNS + list(manifest.extra_columns)
    header = (
        f"{_MAGIC} v{manifest.version} "
        f"voxel_edge_m={manifest.voxel_edge!r} "
        f"size={manifest.size} stride={manifest.stride} "
        f"k_unit=mD area_unit=m2"
    )
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in manifest.records:
            row = [_fmt(getattr(rec, c)) for c in _COLUMNS]
            row += [rec.extra.get(c, "") for c in manifest.extra_columns]
            writer.writerow(row)


def load_manifest(path) -> DatasetManifest:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(_MAGIC):
            raise ManifestError(f"{path}: missing manifest header line")
        tokens = header[len(_MAGIC) :].split()
        if not tokens or not tokens[0].startswith("v"):
            raise ManifestError(f"{path}: malformed manifest header")
        version = int(tokens[0][1:])
        if version > MANIFEST_VERSION:
            raise ManifestError(
                f"{path}: manifest version {version} is newer than supported "
                f"version {MANIFEST_VERSION}"
            )
        params = dict(tok.split("=", 1) for tok in tokens[1:] if "=" in tok)
        try:
            voxel_edge = float(params["voxel_edge_m"])
            size = int(params["size"])
            stride = int(params["stride"])
        except KeyError as exc:
            raise ManifestError(f"{path}: header misses {exc}") from exc
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: missing column header") from None
        extra_columns = [c for c in columns if c not in _COLUMNS]
        records = []
        for row in reader:
            if not row:
                continue
            cells = dict(zip(columns, row))
            kwargs = {}
            for c in _COLUMNS:
                text = cells.get(c, "")
                if c in _INT_COLUMNS:
                    kwargs[c] = _parse_int(text) if text != "" else (
                        None if c == "solver_iterations" else 0
                    )
                elif c in _FLOAT_COLUMNS:
                    val = _parse_float(text)
                    if c in ("porosity", "area_m2") and val is None:
                        val = 0.0
                    kwargs[c] = val
                else:
                    kwargs[c] = text
            kwargs["extra"] = {c: cells.get(c, "") for c in extra_columns}
            records.append(SampleRecord(**kwargs))
    return DatasetManifest(
        voxel_edge=voxel_edge,
        size=size,
        stride=stride,
        records=records,
        version=version,
        extra_columns=extra_columns,
    )
