"""Finite-difference verification of the hand-built backward pass."""

from __future__ import annotations

import numpy as np

from .network import ModelConfig, TransformerNet


def gradient_check(
    config: ModelConfig | None = None,
    *,
    window_len: int = 12,
    batch: int = 4,
    n_samples: int = 220,
    h: float = 1e-5,
    seed: int = 0,
    head_only: bool = False,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples parameter coordinates across every tensor (or only the head
    when ``head_only``), perturbs each by +-h, and compares the analytic
    gradient against (f(p+h) - f(p-h)) / 2h in double precision.
    """
    if config is None:
        config = ModelConfig(d_model=8, n_heads=2, n_layers=1, d_ff=16, head_hidden=8)
    net = TransformerNet(config)
    rng = np.random.default_rng(seed)
    params = net.init_params(rng)
    x = rng.normal(size=(batch, window_len, config.n_channels))
    y = rng.integers(0, config.n_classes, size=batch)

    _, grads = net.loss_and_grads(params, x, y)

    names = list(net.head_param_names()) if head_only else list(params)
    coords = []
    for name in names:
        for flat_index in range(params[name].size):
            coords.append((name, flat_index))
    picked_idx = rng.choice(len(coords), size=min(n_samples, len(coords)), replace=False)

    worst = 0.0
    for ci in picked_idx:
        name, flat_index = coords[ci]
        tensor = params[name]
        original = tensor.flat[flat_index]
        tensor.flat[flat_index] = original + h
        loss_plus = net.loss_only(params, x, y)
        tensor.flat[flat_index] = original - h
        loss_minus = net.loss_only(params, x, y)
        tensor.flat[flat_index] = original
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        analytic = grads[name].flat[flat_index]
        denom = max(abs(numeric), abs(analytic), 1e-8)
        worst = max(worst, abs(numeric - analytic) / denom)
    return worst
