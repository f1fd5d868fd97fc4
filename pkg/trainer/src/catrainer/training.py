"""Training loop with best-validation checkpointing and CSV history.

Binary cross-entropy, Adam, fixed seed.  Runs are reproducible on one
machine up to backend nondeterminism (BLAS thread scheduling can perturb
the last float bits; the seed pins initialization, shuffling and dropout).
"""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from .formats import SplitData
from .model import ModelConfig, build_model

__all__ = ["EpochStats", "TrainResult", "split_to_tensors", "train",
           "predict_probabilities", "load_checkpoint", "threshold_accuracy"]


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainResult:
    history: list[EpochStats]
    best_epoch: int
    best_val_loss: float
    checkpoint_path: str
    history_path: str


def split_to_tensors(split: SplitData) -> TensorDataset:
    inputs = torch.from_numpy(split.inputs.astype(np.float32))
    targets = torch.from_numpy(split.targets.astype(np.float32)).unsqueeze(1)
    return TensorDataset(inputs, targets)


def threshold_accuracy(probabilities: torch.Tensor, targets: torch.Tensor) -> tuple[int, int]:
    """(correct, total) cells at the evaluator's 0.5 ties-alive threshold."""
    predicted = (probabilities >= 0.5).to(targets.dtype)
    return int((predicted == targets).sum().item()), targets.numel()


@torch.no_grad()
def _evaluate(model, loader, loss_fn, device) -> tuple[float, float]:
    model.eval()
    total_loss = 0.0
    correct = total = 0
    for x, y in loader:
        x, y = x.to(device), y.to(device)
        out = model(x)
        total_loss += loss_fn(out, y).item() * y.shape[0]
        c, t = threshold_accuracy(out, y)
        correct += c
        total += t
    return total_loss / len(loader.dataset), correct / total


def train(dataset_splits: dict[str, SplitData], config: ModelConfig, out_dir,
          height: int, width: int, device: str = "cpu",
          log=None) -> TrainResult:
    """Train on the train split, checkpoint the best validation epoch.

    Writes `best.pt` and `history.csv` into out_dir and returns the run
    summary.  `log`, when given, is called with one line per epoch.
    """
    os.makedirs(out_dir, exist_ok=True)
    torch.manual_seed(config.seed)
    model = build_model(config, height, width).to(device)

    generator = torch.Generator().manual_seed(config.seed)
    train_loader = DataLoader(split_to_tensors(dataset_splits["train"]),
                              batch_size=config.batch_size, shuffle=True,
                              generator=generator)
    val_loader = DataLoader(split_to_tensors(dataset_splits["val"]),
                            batch_size=config.batch_size)

    loss_fn = nn.BCELoss()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.MultiStepLR(
        optimizer, milestones=list(config.lr_decay_at), gamma=config.lr_decay_factor)

    checkpoint_path = os.path.join(out_dir, "best.pt")
    history_path = os.path.join(out_dir, "history.csv")
    history: list[EpochStats] = []
    best_val = float("inf")
    best_epoch = -1

    for epoch in range(1, config.epochs + 1):
        model.train()
        running_loss = 0.0
        correct = total = 0
        for x, y in train_loader:
            x, y = x.to(device), y.to(device)
            optimizer.zero_grad()
            out = model(x)
            loss = loss_fn(out, y)
            loss.backward()
            optimizer.step()
            running_loss += loss.item() * y.shape[0]
            c, t = threshold_accuracy(out.detach(), y)
            correct += c
            total += t
        scheduler.step()
        train_loss = running_loss / len(train_loader.dataset)
        train_acc = correct / total
        val_loss, val_acc = _evaluate(model, val_loader, loss_fn, device)
        stats = EpochStats(epoch, train_loss, train_acc, val_loss, val_acc)
        history.append(stats)
        if log:
            log(f"epoch {epoch:4d}  train loss {train_loss:.4f} acc {train_acc:.4f}"
                f"  val loss {val_loss:.4f} acc {val_acc:.4f}")
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            torch.save({
                "model_state": model.state_dict(),
                "config": asdict(config),
                "height": height,
                "width": width,
                "epoch": epoch,
                "val_loss": val_loss,
            }, checkpoint_path)

    with open(history_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for s in history:
            writer.writerow([s.epoch, f"{s.train_loss:.6f}", f"{s.train_acc:.6f}",
                             f"{s.val_loss:.6f}", f"{s.val_acc:.6f}"])

    return TrainResult(history=history, best_epoch=best_epoch, best_val_loss=best_val,
                       checkpoint_path=checkpoint_path, history_path=history_path)


def load_checkpoint(path, device: str = "cpu"):
    """Rebuild the model from a checkpoint; returns (model, config, height, width)."""
    payload = torch.load(path, map_location=device, weights_only=False)
    config = ModelConfig(**{k: tuple(v) if k == "downsample_kernels" else v
                            for k, v in payload["config"].items()})
    model = build_model(config, payload["height"], payload["width"]).to(device)
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, config, payload["height"], payload["width"]


@torch.no_grad()
def predict_probabilities(model, split: SplitData, batch_size: int = 64,
                          device: str = "cpu") -> np.ndarray:
    """Sigmoid outputs for every sample, in split order: (N, H, W) float32."""
    model.eval()
    loader = DataLoader(split_to_tensors(split), batch_size=batch_size)
    chunks = [model(x.to(device)).squeeze(1).cpu().numpy() for x, _ in loader]
    return np.concatenate(chunks, axis=0).astype(np.float32)


def predict_to_file(checkpoint_path, dataset_path, split: str, out_path,
                    batch_size: int = 64, device: str = "cpu"):
    """Checkpoint + CADS split -> CAPR probability file, in split order."""
    from .formats import read_cads, write_capr

    model, _, height, width = load_checkpoint(checkpoint_path, device=device)
    data = read_cads(dataset_path)
    if (data.height, data.width) != (height, width):
        raise ValueError(f"checkpoint is for {height}x{width} grids, "
                         f"dataset is {data.height}x{data.width}")
    probs = predict_probabilities(model, data.splits[split],
                                  batch_size=batch_size, device=device)
    write_capr(out_path, probs)
    return probs.shape[0]
