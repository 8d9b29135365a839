"""Readers for the labeling pipeline's on-disk dataset formats.

Manifest: a CSV file whose first line is a ``# rockperm-manifest v<N>``
header carrying ``key=value`` dataset parameters, followed by a column
header and one row per sample.  Relevant columns: ``id``, ``f_max``
(integer connectivity feature), ``k_cmp_md`` (permeability label in
millidarcy), ``split`` (``train``/``val``/empty).

Raw voxel files: ``ceil(n/8)`` bytes for ``n = nx*ny*nz`` voxels; bit
``i`` of byte ``b`` is the voxel with linear index ``8*b + i``, linear
index ``ix + nx*(iy + ny*iz)`` (x fastest), bit value 1 = pore space.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
import torch

_MAGIC = "# rockperm-manifest"


class DataError(ValueError):
    pass


@dataclass
class ManifestRow:
    id: str
    f_max: int
    k_cmp_md: float | None
    split: str
    raw: dict = field(default_factory=dict)


@dataclass
class Manifest:
    voxel_edge: float
    size: int
    rows: list


def read_manifest(path) -> Manifest:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(_MAGIC):
            raise DataError(f"{path}: not a dataset manifest")
        params = dict(
            tok.split("=", 1) for tok in header.split() if "=" in tok
        )
        reader = csv.DictReader(fh)
        rows = []
        for cells in reader:
            k_text = cells.get("k_cmp_md", "")
            rows.append(
                ManifestRow(
                    id=cells["id"],
                    f_max=int(cells.get("f_max") or 0),
                    k_cmp_md=float(k_text) if k_text else None,
                    split=cells.get("split", ""),
                    raw=cells,
                )
            )
    return Manifest(
        voxel_edge=float(params["voxel_edge_m"]),
        size=int(params["size"]),
        rows=rows,
    )


def write_predictions(manifest_path, out_path, predictions: dict) -> None:
    """Copy a manifest, filling ``k_prd_md`` from ``{id: value}``."""
    with open(manifest_path, newline="") as fh:
        header = fh.readline()
        reader = csv.reader(fh)
        columns = next(reader)
        body = list(reader)
    if "k_prd_md" not in columns:
        raise DataError(f"{manifest_path}: manifest lacks a k_prd_md column")
    id_col = columns.index("id")
    prd_col = columns.index("k_prd_md")
    with open(out_path, "w", newline="") as fh:
        fh.write(header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in body:
            if row and row[id_col] in predictions:
                row[prd_col] = repr(float(predictions[row[id_col]]))
            writer.writerow(row)


def read_raw(path, size: int) -> np.ndarray:
    """Load one cubic 1-bit raw file as a bool array [ix, iy, iz]."""
    nbits = size**3
    expected = math.ceil(nbits / 8)
    actual = os.path.getsize(path)
    if actual != expected:
        raise DataError(
            f"{path}: expected {expected} bytes for a {size}^3 sample, got {actual}"
        )
    bits = np.unpackbits(
        np.fromfile(path, dtype=np.uint8), bitorder="little"
    )[:nbits]
    return bits.reshape(size, size, size).transpose(2, 1, 0).astype(bool)


class VoxelSampleDataset(torch.utils.data.Dataset):
    """(image, physics feature, log10 label) triples for one split.

    The physics scalar is ``log10(1 + f_max)`` by default, matching the
    logarithmic scale of the labels; pass ``transform_fmax=False`` for
    the raw integer.  Labels are ``log10(k_cmp_md)``; rows without a
    label are rejected.
    """

    def __init__(self, manifest: Manifest, raw_dir, split=None,
                 transform_fmax=True):
        self.rows = [
            r for r in manifest.rows if split is None or r.split == split
        ]
        for r in self.rows:
            if r.k_cmp_md is None or r.k_cmp_md <= 0:
                raise DataError(f"{r.id}: sample lacks a positive k_cmp label")
        self.raw_dir = raw_dir
        self.size = manifest.size
        self.transform_fmax = transform_fmax

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, idx):
        row = self.rows[idx]
        path = os.path.join(self.raw_dir, f"{row.id}.raw")
        if not os.path.exists(path):
            raise DataError(f"{row.id}: raw file {path} is missing")
        image = torch.from_numpy(
            read_raw(path, self.size).astype(np.float32)
        ).unsqueeze(0)
        f_feat = float(row.f_max)
        if self.transform_fmax:
            f_feat = math.log10(1.0 + f_feat)
        target = math.log10(row.k_cmp_md)
        return image, torch.tensor(f_feat), torch.tensor(target)
