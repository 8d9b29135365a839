"""Training and prediction loops for the log-permeability regressor.

Targets are ``log10(k)`` with k in millidarcy; the loss is plain MSE in
that scale.  The optimizer is SGD with momentum and a stepped learning
rate: the step size is multiplied by ``lr_decay`` every
``lr_step_epochs`` epochs.  Runs are deterministic for a fixed seed on
CPU (accelerator kernels may introduce nondeterminism; documented, not
worked around).
"""

from __future__ import annotations

import csv
import math

import torch
from torch.utils.data import DataLoader

from .data import VoxelSampleDataset
from .model import PhyCnn, PhyCnnConfig


def scheduled_lr(config: PhyCnnConfig, epoch: int) -> float:
    """Learning rate in force during ``epoch`` (1-based)."""
    return config.initial_lr * config.lr_decay ** ((epoch - 1) // config.lr_step_epochs)


def _epoch_pass(model, loader, optimizer=None):
    total, count = 0.0, 0
    for image, physics, target in loader:
        if optimizer is not None:
            optimizer.zero_grad()
            out = model(image, physics)
            loss = torch.mean((out - target) ** 2)
            loss.backward()
            optimizer.step()
        else:
            with torch.no_grad():
                out = model(image, physics)
                loss = torch.mean((out - target) ** 2)
        total += float(loss.detach()) * target.shape[0]
        count += target.shape[0]
    return total / max(count, 1)


def train(model: PhyCnn, train_set: VoxelSampleDataset,
          val_set: VoxelSampleDataset | None = None, seed: int = 0,
          epochs: int | None = None):
    """Optimize the model in place; returns the per-epoch history.

    History rows are dicts with ``epoch`` (1-based), ``lr``,
    ``train_mse`` and (when a validation set is given) ``val_mse``, all
    in the log10 target scale.
    """
    config = model.config
    epochs = config.epochs if epochs is None else epochs
    torch.manual_seed(seed)
    gen = torch.Generator().manual_seed(seed)
    loader = DataLoader(
        train_set, batch_size=config.batch_size, shuffle=True, generator=gen
    )
    val_loader = (
        DataLoader(val_set, batch_size=config.batch_size)
        if val_set is not None
        else None
    )
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.initial_lr, momentum=config.momentum
    )
    history = []
    for epoch in range(1, epochs + 1):
        lr = scheduled_lr(config, epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        train_mse = _epoch_pass(model, loader, optimizer)
        row = {"epoch": epoch, "lr": lr, "train_mse": train_mse}
        if val_loader is not None:
            model.eval()
            row["val_mse"] = _epoch_pass(model, val_loader)
        history.append(row)
    return history


def predict(model: PhyCnn, dataset: VoxelSampleDataset) -> dict:
    """Per-sample permeability predictions {id: k in mD}."""
    model.eval()
    out = {}
    with torch.no_grad():
        for idx in range(len(dataset)):
            image, physics, _ = dataset[idx]
            log_k = float(
                model(image.unsqueeze(0), physics.unsqueeze(0))[0]
            )
            out[dataset.rows[idx].id] = 10.0**log_k
    return out


def save_history(history, path) -> None:
    columns = sorted({k for row in history for k in row})
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(history)


def save_checkpoint(model: PhyCnn, path) -> None:
    torch.save(
        {"config": vars(model.config), "state_dict": model.state_dict()}, path
    )


def load_checkpoint(path) -> PhyCnn:
    payload = torch.load(path, weights_only=True)
    model = PhyCnn(PhyCnnConfig(**payload["config"]))
    model.load_state_dict(payload["state_dict"])
    return model


def log_mse(targets_md, predictions_md) -> float:
    n = len(targets_md)
    return sum(
        (math.log10(t) - math.log10(p)) ** 2
        for t, p in zip(targets_md, predictions_md)
    ) / n


def r_squared_log(targets_md, predictions_md) -> float:
    logs = [math.log10(t) for t in targets_md]
    mean = sum(logs) / len(logs)
    ss_tot = sum((v - mean) ** 2 for v in logs)
    ss_res = sum(
        (math.log10(t) - math.log10(p)) ** 2
        for t, p in zip(targets_md, predictions_md)
    )
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -math.inf
    return 1.0 - ss_res / ss_tot
