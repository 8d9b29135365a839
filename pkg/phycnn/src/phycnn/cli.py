"""Command-line interface: train a model and write predictions back.

Both subcommands consume the dataset manifest + raw-file layout of the
labeling pipeline; ``predict`` emits a manifest copy with the
``k_prd_md`` column filled.
"""

from __future__ import annotations

import sys

import click
import torch

from . import data, train as training
from .model import PhyCnn, PhyCnnConfig


@click.group()
def main():
    """Physics-informed CNN permeability predictor."""


@main.command(name="train")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("raw_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("checkpoint", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=15, show_default=True)
@click.option("--lr", type=float, default=0.0020, show_default=True)
@click.option("--batch-size", type=int, default=4, show_default=True)
@click.option("--history", "history_path", type=click.Path(dir_okay=False), default=None,
              help="Write per-epoch metrics as CSV.")
def train_cmd(manifest_path, raw_dir, checkpoint, seed, epochs, lr,
              batch_size, history_path):
    """Train on the 'train' split of MANIFEST_PATH, validate on 'val'."""
    try:
        manifest = data.read_manifest(manifest_path)
        config = PhyCnnConfig(
            epochs=epochs, initial_lr=lr, batch_size=batch_size,
            input_size=manifest.size,
        )
        train_set = data.VoxelSampleDataset(manifest, raw_dir, split="train")
        has_val = any(r.split == "val" for r in manifest.rows)
        val_set = (
            data.VoxelSampleDataset(manifest, raw_dir, split="val")
            if has_val
            else None
        )
    except (data.DataError, KeyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    torch.manual_seed(seed)
    model = PhyCnn(config)
    history = training.train(model, train_set, val_set, seed=seed)
    training.save_checkpoint(model, checkpoint)
    if history_path:
        training.save_history(history, history_path)
    last = history[-1]
    msg = f"epoch {last['epoch']}: train_mse={last['train_mse']:.4g}"
    if "val_mse" in last:
        msg += f" val_mse={last['val_mse']:.4g}"
    click.echo(msg)


@main.command(name="predict")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("raw_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_manifest", type=click.Path(dir_okay=False))
def predict_cmd(manifest_path, raw_dir, checkpoint, out_manifest):
    """Fill k_prd_md for every labeled row of MANIFEST_PATH."""
    try:
        manifest = data.read_manifest(manifest_path)
        model = training.load_checkpoint(checkpoint)
        labeled = data.Manifest(
            voxel_edge=manifest.voxel_edge,
            size=manifest.size,
            rows=[r for r in manifest.rows if r.k_cmp_md],
        )
        dataset = data.VoxelSampleDataset(labeled, raw_dir)
        predictions = training.predict(model, dataset)
        data.write_predictions(manifest_path, out_manifest, predictions)
    except data.DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    targets = [r.k_cmp_md for r in labeled.rows]
    preds = [predictions[r.id] for r in labeled.rows]
    click.echo(
        f"predicted {len(preds)} rows: "
        f"R2_log={training.r_squared_log(targets, preds):.4f} "
        f"MSE_log={training.log_mse(targets, preds):.4g}"
    )


if __name__ == "__main__":
    main()
