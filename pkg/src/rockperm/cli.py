"""Command-line pipeline: acquisition -> labeling -> fitting -> statistics.

Subcommands map to the stages of the dataset workflow:

* ``acquire``      -- cut a large raw image into subsamples, add rotated
                      variants, prune non-percolating pore space, drop
                      impermeable samples, write raws + manifest;
* ``label``        -- fill ``k_cmp_md`` by direct numerical simulation;
* ``fit``          -- power-law baseline fit, fills ``k_baseline_md``;
* ``stats``        -- dataset statistics and prediction metrics;
* ``distort``      -- morphological perturbation series of one sample;
* ``filter-range`` -- permeability range filter + train/validation split.

Exit codes: 0 on success, 1 when individual samples failed during a
batch, 2 on usage or file-format errors.
"""

from __future__ import annotations

import concurrent.futures
import math
import os
import sys
import time

import click
import numpy as np

from . import manifest as mf
from . import poregraph, powerlaw, stats, voxel
from .manifest import DatasetManifest, ManifestError, SampleRecord
from .powerlaw import MILLIDARCY_M2
from .stokes import (
    assemble,
    build_mesh,
    compute_permeability,
    make_preconditioner,
    minres_solve,
)
from .stokes.export import SolverReport, export_fields, write_solver_report
from .voxel import ROTATIONS, RawFormatError, VoxelGrid

#: flow axis of the parent sample probed by each rotated variant
_ROTATION_AXIS = {"none": "x", "y90": "z", "z90": "y"}


def _fail_format(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group()
def main():
    """Permeability labeling pipeline for binary pore-space voxel images."""


@main.command()
@click.argument("input_raw", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--dims", nargs=3, type=int, required=True, help="Input grid dims nx ny nz.")
@click.option("--size", type=int, default=100, show_default=True, help="Subsample edge length.")
@click.option("--stride", type=int, default=50, show_default=True, help="Sliding-frame step.")
@click.option("--voxel-edge", type=float, default=2.25e-6, show_default=True, help="Voxel edge [m].")
def acquire(input_raw, out_dir, dims, size, stride, voxel_edge):
    """Extract, rotate, prune and filter subsamples of INPUT_RAW."""
    try:
        grid = voxel.load_raw(input_raw, tuple(dims), voxel_edge)
        subs = voxel.extract_subsamples(grid, size, stride)
    except (RawFormatError, ValueError) as exc:
        _fail_format(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    parent = os.path.basename(input_raw)
    stem = os.path.splitext(parent)[0]
    manifest = DatasetManifest(voxel_edge=voxel_edge, size=size, stride=stride)
    candidates = 0
    for sub, meta in subs:
        ix, iy, iz = meta.origin
        for rotation in ROTATIONS:
            candidates += 1
            rotated = voxel.rotated_variant(sub, rotation)
            pruned, permeable = voxel.retain_percolating(rotated, "x")
            if not permeable:
                continue
            f_max = poregraph.max_flow(poregraph.build_graph(pruned, "x"))
            if f_max == 0:
                continue
            face_count, area = voxel.surface_area(pruned)
            rec = SampleRecord(
                id=f"{stem}-{ix:04d}-{iy:04d}-{iz:04d}-{rotation}",
                parent=parent,
                origin_x=ix,
                origin_y=iy,
                origin_z=iz,
                rotation=rotation,
                flow_axis=_ROTATION_AXIS[rotation],
                porosity=voxel.porosity(pruned),
                face_count=face_count,
                area_m2=area,
                f_max=f_max,
            )
            voxel.save_raw(pruned, os.path.join(out_dir, rec.raw_name))
            manifest.add(rec)
    mf.save_manifest(manifest, os.path.join(out_dir, "manifest.csv"))
    click.echo(
        f"acquired {len(manifest)} permeable samples "
        f"out of {candidates} candidates into {out_dir}"
    )


def _label_one(args):
    """Label a single sample; runs inside a worker process."""
    (sample_id, raw_path, size, voxel_edge, ell, refinement, rel_tol,
     precond_name, fields_dir, reports_dir) = args
    t0 = time.perf_counter()
    try:
        grid = voxel.load_raw(raw_path, (size, size, size), voxel_edge)
        mesh = build_mesh(grid, refinement)
        system = assemble(mesh, ell)
        prec = make_preconditioner(precond_name, system)
        solution = minres_solve(system, prec, rel_tol=rel_tol)
        if not solution.converged:
            return (sample_id, None, solution.iterations,
                    solution.achieved_residual,
                    f"error: no convergence in {solution.iterations} iterations")
        l_c = size * voxel_edge
        result = compute_permeability(solution, system, l_c)
        k_md = result.k_m2 / MILLIDARCY_M2
        if fields_dir:
            export_fields(
                os.path.join(fields_dir, f"{sample_id}.npz"), system, solution
            )
        if reports_dir:
            report = SolverReport(
                sample_id=sample_id,
                order=ell,
                refinement_level=refinement,
                n=system.n,
                m=system.m,
                iterations=solution.iterations,
                achieved_residual=solution.achieved_residual,
                converged=solution.converged,
                wall_time_s=time.perf_counter() - t0,
                residual_history=[float(r) for r in solution.residual_history],
            )
            write_solver_report(
                os.path.join(reports_dir, f"{sample_id}.json"), report
            )
        return (sample_id, k_md, solution.iterations,
                solution.achieved_residual, "labeled")
    except Exception as exc:  # per-sample isolation: never poison the batch
        return (sample_id, None, None, None, f"error: {exc}")


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("raw_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--order", "-l", "ell", type=click.IntRange(0, 1), default=0, show_default=True, help="Pressure order.")
@click.option("--refinement", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--rel-tol", type=float, default=1e-6, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--preconditioner", default="auto", show_default=True)
@click.option("--force", is_flag=True, help="Re-label rows that already carry k_cmp.")
@click.option("--deterministic", is_flag=True, help="Force a single worker for bit-reproducible runs.")
@click.option("--fields-dir", type=click.Path(file_okay=False), default=None, help="Export flow fields here.")
@click.option("--reports-dir", type=click.Path(file_okay=False), default=None, help="Write solver reports here.")
def label(manifest_path, raw_dir, ell, refinement, rel_tol, workers,
          preconditioner, force, deterministic, fields_dir, reports_dir):
    """Fill k_cmp for all permeable samples of MANIFEST_PATH."""
    try:
        manifest = mf.load_manifest(manifest_path)
    except ManifestError as exc:
        _fail_format(str(exc))
    for d in (fields_dir, reports_dir):
        if d:
            os.makedirs(d, exist_ok=True)
    pending = [
        rec for rec in manifest
        if rec.permeable and (force or rec.k_cmp_md is None)
    ]
    for rec in manifest:
        if not rec.permeable and rec.k_cmp_md is None:
            rec.k_cmp_md = 0.0
            rec.status = "impermeable"
    tasks = [
        (rec.id, os.path.join(raw_dir, rec.raw_name), manifest.size,
         manifest.voxel_edge, ell, refinement, rel_tol, preconditioner,
         fields_dir, reports_dir)
        for rec in pending
    ]
    if deterministic:
        workers = 1
    if workers == 1:
        results = map(_label_one, tasks)
    else:
        pool = concurrent.futures.ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_label_one, tasks)
    failures = 0
    for sample_id, k_md, iters, resid, status in results:
        rec = manifest.get(sample_id)
        rec.status = status
        rec.solver_iterations = iters
        rec.solver_residual = resid
        if k_md is not None:
            rec.k_cmp_md = k_md
        else:
            failures += 1
            click.echo(f"{sample_id}: {status}", err=True)
    if workers > 1:
        pool.shutdown()
    mf.save_manifest(manifest, manifest_path)
    click.echo(
        f"labeled {len(tasks) - failures}/{len(tasks)} pending samples"
        + (f", {failures} failed" if failures else "")
    )
    if failures:
        sys.exit(1)


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
def fit(manifest_path):
    """Fit the power-law baseline k = c*f_max^gamma on MANIFEST_PATH."""
    try:
        manifest = mf.load_manifest(manifest_path)
    except ManifestError as exc:
        _fail_format(str(exc))
    pairs = [
        (rec.f_max, rec.k_cmp_md / 1e3)
        for rec in manifest
        if rec.f_max > 0 and rec.k_cmp_md is not None and rec.k_cmp_md > 0
    ]
    try:
        result = powerlaw.fit_power_law(pairs)
    except powerlaw.FitError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for rec in manifest:
        rec.k_baseline_md = powerlaw.predict_baseline(rec.f_max, result) * 1e3
    mf.save_manifest(manifest, manifest_path)
    click.echo(
        f"k ≈ {result.c:.6g}·f^{result.gamma:.4g} [D] "
        f"(R²_log = {result.r_squared_log:.4f}, {len(pairs)} samples)"
    )


def _describe(name, values, bins):
    values = np.asarray(values, dtype=float)
    click.echo(f"{name}: n={values.size}")
    if values.size == 0:
        return
    click.echo(
        f"  mean={values.mean():.6g} "
        + (f"std={stats.std_dev(values):.6g} " if values.size >= 2 else "")
        + f"min={values.min():.6g} max={values.max():.6g}"
    )
    counts, edges = np.histogram(values, bins=bins)
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        click.echo(f"  [{lo:.6g}, {hi:.6g}): {c}")


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--predictions", type=click.Choice(["k_baseline_md", "k_prd_md"]), default=None,
              help="Prediction column to score against k_cmp_md.")
@click.option("--bins", type=int, default=10, show_default=True)
def stats_cmd(manifest_path, predictions, bins):
    """Dataset statistics and, optionally, prediction metrics."""
    try:
        manifest = mf.load_manifest(manifest_path)
    except ManifestError as exc:
        _fail_format(str(exc))
    _describe("porosity", [r.porosity for r in manifest], bins)
    labeled = [r.k_cmp_md for r in manifest if r.k_cmp_md is not None]
    _describe("k_cmp [mD]", labeled, bins)
    if predictions:
        rows = [
            (r.k_cmp_md, getattr(r, predictions))
            for r in manifest
            if r.k_cmp_md is not None and getattr(r, predictions) is not None
        ]
        if not rows:
            click.echo("no rows carry both target and prediction", err=True)
            sys.exit(2)
        t = np.array([x for x, _ in rows])
        y = np.array([x for _, x in rows])
        click.echo(f"metrics vs {predictions} ({len(rows)} rows):")
        click.echo(f"  R2={stats.r_squared(t, y):.6g} MSE={stats.mse(t, y):.6g}")
        pos = (t > 0) & (y > 0)
        if pos.any():
            click.echo(
                f"  R2_log={stats.r_squared_log10(t[pos], y[pos]):.6g} "
                f"MSE_log={stats.mse_log10(t[pos], y[pos]):.6g}"
            )


main.add_command(stats_cmd, name="stats")


@main.command()
@click.argument("sample_raw", type=click.Path(exists=True, dir_okay=False))
@click.option("--dims", nargs=3, type=int, required=True)
@click.option("--voxel-edge", type=float, default=2.25e-6, show_default=True)
@click.option("--min-layers", type=int, default=-2, show_default=True)
@click.option("--max-layers", type=int, default=2, show_default=True)
@click.option("--label", "do_label", is_flag=True, help="Also compute k_cmp per step.")
@click.option("--order", "-l", "ell", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--refinement", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--rel-tol", type=float, default=1e-6, show_default=True)
def distort(sample_raw, dims, voxel_edge, min_layers, max_layers, do_label,
            ell, refinement, rel_tol):
    """Morphological perturbation series of SAMPLE_RAW."""
    try:
        grid = voxel.load_raw(sample_raw, tuple(dims), voxel_edge)
    except RawFormatError as exc:
        _fail_format(str(exc))
    header = "layers porosity f_max" + (" k_cmp_md" if do_label else "")
    click.echo(header)
    for layers in range(min_layers, max_layers + 1):
        morphed = voxel.morph(grid, layers)
        pruned, permeable = voxel.retain_percolating(morphed, "x")
        f_max = (
            poregraph.max_flow(poregraph.build_graph(pruned, "x"))
            if permeable
            else 0
        )
        line = f"{layers:+d} {voxel.porosity(morphed):.6f} {f_max}"
        if do_label:
            if f_max == 0:
                line += " 0"
            else:
                mesh = build_mesh(pruned, refinement)
                system = assemble(mesh, ell)
                solution = minres_solve(
                    system, make_preconditioner("auto", system), rel_tol=rel_tol
                )
                l_c = grid.dims[0] * voxel_edge
                k_md = (
                    compute_permeability(solution, system, l_c).k_m2
                    / MILLIDARCY_M2
                )
                line += f" {k_md:.6g}"
        click.echo(line)


@main.command(name="filter-range")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
@click.option("--k-min", type=float, default=50.0, show_default=True, help="Lower bound [mD], inclusive.")
@click.option("--k-max", type=float, default=50_000.0, show_default=True, help="Upper bound [mD], inclusive.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--val-frac", type=float, default=0.1, show_default=True)
def filter_range(manifest_path, out_path, k_min, k_max, seed, val_frac):
    """Range-filter labeled rows and record a train/validation split."""
    try:
        manifest = mf.load_manifest(manifest_path)
    except ManifestError as exc:
        _fail_format(str(exc))
    kept = [
        rec for rec in manifest
        if rec.k_cmp_md is not None and k_min <= rec.k_cmp_md <= k_max
    ]
    if not kept:
        click.echo("warning: no rows inside the permeability range", err=True)
    n_val = math.ceil(val_frac * len(kept))
    order = np.random.default_rng(seed).permutation(len(kept))
    val_ids = {kept[i].id for i in order[:n_val]}
    for rec in kept:
        rec.split = "val" if rec.id in val_ids else "train"
    out = DatasetManifest(
        voxel_edge=manifest.voxel_edge,
        size=manifest.size,
        stride=manifest.stride,
        records=kept,
        extra_columns=manifest.extra_columns,
    )
    mf.save_manifest(out, out_path)
    click.echo(
        f"kept {len(kept)}/{len(manifest)} rows: "
        f"{len(kept) - n_val} train + {n_val} validation"
    )


if __name__ == "__main__":
    main()
