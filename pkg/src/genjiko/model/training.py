"""Seeded, single-threaded training for both classifier kinds."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..features import (
    PreprocessFlags,
    ScalerStats,
    WindowConfig,
    apply_scaler,
    fit_scaler,
    make_windows,
    preprocess_series,
)
from ..sensing.dataset import DatasetManifest
from .models import CentroidModel, TransformerModel, fit_centroids
from .network import ModelConfig, TransformerNet

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = WindowConfig(200, 100)
DEFAULT_FLAGS = PreprocessFlags(scale=True)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 16
    epochs: int = 25
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def to_json(self) -> dict:
        return {
            "lr": self.lr, "batch_size": self.batch_size, "epochs": self.epochs,
            "seed": self.seed, "beta1": self.beta1, "beta2": self.beta2,
            "adam_eps": self.adam_eps,
        }


def load_training_arrays(
    manifest: DatasetManifest,
    window: WindowConfig,
    flags: PreprocessFlags,
    split: str = "train",
):
    """Preprocess a split into (windows, labels, scaler).

    The scaler is fitted on this split's post-diff/filter series; pass the
    returned stats along when transforming any other split.
    """
    recordings = list(manifest.recordings(split))
    if not recordings:
        raise DomainError(f"split {split!r} is empty")
    series_list, labels = [], []
    for rec in recordings:
        if rec.meta.class_label is None:
            raise DomainError(f"recording {rec.meta.recording_id} has no class label")
        series_list.append(preprocess_series(rec.values, flags, rec.meta.sample_rate_hz))
        labels.append(rec.meta.class_label)
    present = set(labels)
    if split == "train" and present != set(range(5)):
        raise DomainError(f"train split must cover classes 0..4, found {sorted(present)}")
    scaler = fit_scaler(np.concatenate(series_list, axis=0)) if flags.scale \
        else ScalerStats.identity()
    xs, ys = [], []
    for series, label in zip(series_list, labels):
        if flags.scale:
            series = apply_scaler(scaler, series)
        windows = make_windows(series, window)
        xs.append(windows)
        ys.append(np.full(windows.shape[0], label, dtype=np.int64))
    return np.concatenate(xs, axis=0), np.concatenate(ys), scaler


def train(
    manifest: DatasetManifest,
    model_config: ModelConfig = ModelConfig(),
    train_config: TrainConfig = TrainConfig(),
    window: WindowConfig = DEFAULT_WINDOW,
    flags: PreprocessFlags = DEFAULT_FLAGS,
) -> TransformerModel:
    """Train the transformer classifier on the manifest's train split.

    Deterministic for a fixed seed: initialization, shuffling, and the
    update order over parameters all come from one seeded generator and a
    fixed iteration order.
    """
    x, y, scaler = load_training_arrays(manifest, window, flags)
    net = TransformerNet(model_config)
    rng = np.random.default_rng(train_config.seed)
    params = net.init_params(rng)
    param_names = list(params)

    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    step = 0
    losses = []
    n = x.shape[0]
    for epoch in range(train_config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            loss, grads = net.loss_and_grads(params, x[idx], y[idx])
            step += 1
            lr_t = train_config.lr * (
                np.sqrt(1.0 - train_config.beta2**step) / (1.0 - train_config.beta1**step)
            )
            for name in param_names:
                g = grads[name]
                m[name] = train_config.beta1 * m[name] + (1 - train_config.beta1) * g
                v[name] = train_config.beta2 * v[name] + (1 - train_config.beta2) * g * g
                params[name] -= lr_t * m[name] / (np.sqrt(v[name]) + train_config.adam_eps)
            epoch_loss += loss
            batches += 1
        losses.append(epoch_loss / batches)
        logger.info("epoch %d/%d cross-entropy %.6f", epoch + 1, train_config.epochs, losses[-1])
    return TransformerModel(
        config=model_config,
        window=window,
        flags=flags,
        scaler=scaler,
        params=params,  # canonicalized to float32 by the model
        seed=train_config.seed,
        train_losses=losses,
    )


def train_centroid(
    manifest: DatasetManifest,
    window: WindowConfig = DEFAULT_WINDOW,
    flags: PreprocessFlags = DEFAULT_FLAGS,
    seed: int = 0,
) -> CentroidModel:
    x, y, scaler = load_training_arrays(manifest, window, flags)
    return CentroidModel(
        centroids=fit_centroids(x, y),
        window=window,
        flags=flags,
        scaler=scaler,
        seed=seed,
    )
