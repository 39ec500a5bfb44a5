"""Transformer encoder + MLP head with hand-written forward and backward.

Everything runs in float64 numpy with explicit caches so the analytic
gradients can be checked against finite differences.  The architecture is
the classic post-norm encoder: self-attention and feed-forward sublayers
with residual connections and layer norm, sinusoidal positions added to
the input projection, mean pooling over time, then a one-hidden-layer
classifier head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from ..errors import DomainError

LN_EPS = 1e-5
INV_SQRT2 = 1.0 / math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 32
    n_heads: int = 2
    n_layers: int = 2
    d_ff: int = 64
    head_hidden: int = 32
    n_classes: int = 5
    n_channels: int = 9
    positional: str = "sinusoidal"  # or "none"

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise DomainError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.positional not in ("sinusoidal", "none"):
            raise DomainError(f"unknown positional mode {self.positional!r}")

    def to_json(self) -> dict:
        return {
            "d_model": self.d_model,
            "n_heads": self.n_heads,
            "n_layers": self.n_layers,
            "d_ff": self.d_ff,
            "head_hidden": self.head_hidden,
            "n_classes": self.n_classes,
            "n_channels": self.n_channels,
            "positional": self.positional,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModelConfig":
        return cls(**obj)


def gelu(x):
    return 0.5 * x * (1.0 + erf(x * INV_SQRT2))


def gelu_grad(x):
    return 0.5 * (1.0 + erf(x * INV_SQRT2)) + x * np.exp(-0.5 * x * x) * INV_SQRT_2PI


def softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def sinusoidal_encoding(t: int, d_model: int) -> np.ndarray:
    positions = np.arange(t, dtype=np.float64)[:, None]
    div = np.exp(-math.log(10000.0) * np.arange(0, d_model, 2, dtype=np.float64) / d_model)
    pe = np.zeros((t, d_model))
    pe[:, 0::2] = np.sin(positions * div)
    pe[:, 1::2] = np.cos(positions * div)
    return pe


def _linear(x, w, b):
    return x @ w + b


def _linear_back(dout, x, w):
    flat_x = x.reshape(-1, x.shape[-1])
    flat_d = dout.reshape(-1, dout.shape[-1])
    dw = flat_x.T @ flat_d
    db = flat_d.sum(axis=0)
    dx = dout @ w.T
    return dx, dw, db


def _layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mu) * inv
    return g * xhat + b, (xhat, inv)


def _layer_norm_back(dout, cache, g):
    xhat, inv = cache
    dg = (dout * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0)
    db = dout.reshape(-1, xhat.shape[-1]).sum(axis=0)
    dxhat = dout * g
    mean_dxhat = dxhat.mean(axis=-1, keepdims=True)
    mean_dxhat_xhat = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)
    return dx, dg, db


class TransformerNet:
    """Stateless forward/backward over an external parameter dict."""

    def __init__(self, config: ModelConfig):
        self.config = config

    # parameter layout -------------------------------------------------
    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        c = self.config
        shapes: dict[str, tuple[int, ...]] = {
            "input.w": (c.n_channels, c.d_model),
            "input.b": (c.d_model,),
        }
        for i in range(c.n_layers):
            p = f"enc{i}"
            for proj in ("wq", "wk", "wv", "wo"):
                shapes[f"{p}.attn.{proj}"] = (c.d_model, c.d_model)
            for proj in ("bq", "bk", "bv", "bo"):
                shapes[f"{p}.attn.{proj}"] = (c.d_model,)
            shapes[f"{p}.ln1.g"] = (c.d_model,)
            shapes[f"{p}.ln1.b"] = (c.d_model,)
            shapes[f"{p}.ff.w1"] = (c.d_model, c.d_ff)
            shapes[f"{p}.ff.b1"] = (c.d_ff,)
            shapes[f"{p}.ff.w2"] = (c.d_ff, c.d_model)
            shapes[f"{p}.ff.b2"] = (c.d_model,)
            shapes[f"{p}.ln2.g"] = (c.d_model,)
            shapes[f"{p}.ln2.b"] = (c.d_model,)
        shapes["head.w1"] = (c.d_model, c.head_hidden)
        shapes["head.b1"] = (c.head_hidden,)
        shapes["head.w2"] = (c.head_hidden, c.n_classes)
        shapes["head.b2"] = (c.n_classes,)
        return shapes

    def init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        params = {}
        for name, shape in self.param_shapes().items():
            if name.endswith(".g"):
                params[name] = np.ones(shape)
            elif len(shape) == 1:
                params[name] = np.zeros(shape)
            else:
                limit = math.sqrt(6.0 / (shape[0] + shape[1]))
                params[name] = rng.uniform(-limit, limit, shape)
        return params

    @staticmethod
    def head_param_names() -> tuple[str, ...]:
        return ("head.w1", "head.b1", "head.w2", "head.b2")

    # forward ------------------------------------------------------------
    def forward(self, params, x):
        """x: (batch, time, channels) -> logits (batch, classes), cache."""
        c = self.config
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[2] != c.n_channels:
            raise DomainError(f"expected (batch, time, {c.n_channels}) input, got {x.shape}")
        t = x.shape[1]
        h = _linear(x, params["input.w"], params["input.b"])
        if c.positional == "sinusoidal":
            h = h + sinusoidal_encoding(t, c.d_model)
        cache = {"x": x, "t": t, "blocks": []}
        for i in range(c.n_layers):
            h, block_cache = self._block_forward(params, f"enc{i}", h)
            cache["blocks"].append(block_cache)
        pooled = h.mean(axis=1)
        z1 = _linear(pooled, params["head.w1"], params["head.b1"])
        a1 = gelu(z1)
        logits = _linear(a1, params["head.w2"], params["head.b2"])
        cache.update(pooled=pooled, z1=z1, a1=a1)
        return logits, cache

    def _block_forward(self, params, prefix, h):
        c = self.config
        b, t, d = h.shape
        dh = d // c.n_heads

        q = _linear(h, params[f"{prefix}.attn.wq"], params[f"{prefix}.attn.bq"])
        k = _linear(h, params[f"{prefix}.attn.wk"], params[f"{prefix}.attn.bk"])
        v = _linear(h, params[f"{prefix}.attn.wv"], params[f"{prefix}.attn.bv"])
        # (b, t, d) -> (b, heads, t, dh)
        split = lambda m: m.reshape(b, t, c.n_heads, dh).transpose(0, 2, 1, 3)
        qh, kh, vh = split(q), split(k), split(v)
        scores = qh @ kh.transpose(0, 1, 3, 2) / math.sqrt(dh)
        attn = softmax(scores, axis=-1)
        ctx = attn @ vh
        merged = ctx.transpose(0, 2, 1, 3).reshape(b, t, d)
        attn_out = _linear(merged, params[f"{prefix}.attn.wo"], params[f"{prefix}.attn.bo"])

        res1 = h + attn_out
        n1, ln1_cache = _layer_norm(res1, params[f"{prefix}.ln1.g"], params[f"{prefix}.ln1.b"])

        f1 = _linear(n1, params[f"{prefix}.ff.w1"], params[f"{prefix}.ff.b1"])
        g1 = gelu(f1)
        f2 = _linear(g1, params[f"{prefix}.ff.w2"], params[f"{prefix}.ff.b2"])

        res2 = n1 + f2
        n2, ln2_cache = _layer_norm(res2, params[f"{prefix}.ln2.g"], params[f"{prefix}.ln2.b"])

        block_cache = {
            "h": h, "qh": qh, "kh": kh, "vh": vh, "attn": attn, "merged": merged,
            "ln1": ln1_cache, "n1": n1, "f1": f1, "g1": g1, "ln2": ln2_cache,
        }
        return n2, block_cache

    # backward -----------------------------------------------------------
    def backward(self, params, cache, dlogits):
        """Gradient of the loss w.r.t. every parameter, given dlogits."""
        c = self.config
        grads = {}
        da1, grads["head.w2"], grads["head.b2"] = _linear_back(
            dlogits, cache["a1"], params["head.w2"]
        )
        dz1 = da1 * gelu_grad(cache["z1"])
        dpooled, grads["head.w1"], grads["head.b1"] = _linear_back(
            dz1, cache["pooled"], params["head.w1"]
        )
        t = cache["t"]
        dh = np.repeat(dpooled[:, None, :], t, axis=1) / t
        for i in reversed(range(c.n_layers)):
            dh = self._block_backward(params, f"enc{i}", cache["blocks"][i], dh, grads)
        dx, grads["input.w"], grads["input.b"] = _linear_back(
            dh, cache["x"], params["input.w"]
        )
        return grads

    def _block_backward(self, params, prefix, bc, dout, grads):
        c = self.config
        h = bc["h"]
        b, t, d = h.shape
        dh_heads = d // c.n_heads

        dres2, grads[f"{prefix}.ln2.g"], grads[f"{prefix}.ln2.b"] = _layer_norm_back(
            dout, bc["ln2"], params[f"{prefix}.ln2.g"]
        )
        dg1, grads[f"{prefix}.ff.w2"], grads[f"{prefix}.ff.b2"] = _linear_back(
            dres2, bc["g1"], params[f"{prefix}.ff.w2"]
        )
        df1 = dg1 * gelu_grad(bc["f1"])
        dn1_ff, grads[f"{prefix}.ff.w1"], grads[f"{prefix}.ff.b1"] = _linear_back(
            df1, bc["n1"], params[f"{prefix}.ff.w1"]
        )
        dn1 = dres2 + dn1_ff

        dres1, grads[f"{prefix}.ln1.g"], grads[f"{prefix}.ln1.b"] = _layer_norm_back(
            dn1, bc["ln1"], params[f"{prefix}.ln1.g"]
        )
        dattn_out = dres1
        dmerged, grads[f"{prefix}.attn.wo"], grads[f"{prefix}.attn.bo"] = _linear_back(
            dattn_out, bc["merged"], params[f"{prefix}.attn.wo"]
        )
        dctx = dmerged.reshape(b, t, c.n_heads, dh_heads).transpose(0, 2, 1, 3)

        attn, qh, kh, vh = bc["attn"], bc["qh"], bc["kh"], bc["vh"]
        dattn = dctx @ vh.transpose(0, 1, 3, 2)
        dvh = attn.transpose(0, 1, 3, 2) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores /= math.sqrt(dh_heads)
        dqh = dscores @ kh
        dkh = dscores.transpose(0, 1, 3, 2) @ qh

        merge = lambda m: m.transpose(0, 2, 1, 3).reshape(b, t, d)
        dq, dk, dv = merge(dqh), merge(dkh), merge(dvh)

        dh_q, grads[f"{prefix}.attn.wq"], grads[f"{prefix}.attn.bq"] = _linear_back(
            dq, h, params[f"{prefix}.attn.wq"]
        )
        dh_k, grads[f"{prefix}.attn.wk"], grads[f"{prefix}.attn.bk"] = _linear_back(
            dk, h, params[f"{prefix}.attn.wk"]
        )
        dh_v, grads[f"{prefix}.attn.wv"], grads[f"{prefix}.attn.bv"] = _linear_back(
            dv, h, params[f"{prefix}.attn.wv"]
        )
        return dres1 + dh_q + dh_k + dh_v

    # loss ---------------------------------------------------------------
    def loss_and_grads(self, params, x, y):
        """Mean cross-entropy over the batch plus all parameter gradients."""
        logits, cache = self.forward(params, x)
        probs = softmax(logits, axis=-1)
        n = logits.shape[0]
        y = np.asarray(y, dtype=np.int64)
        eps = 1e-300  # guards log(0) only; probs are strictly positive anyway
        loss = -np.log(probs[np.arange(n), y] + eps).mean()
        dlogits = probs.copy()
        dlogits[np.arange(n), y] -= 1.0
        dlogits /= n
        grads = self.backward(params, cache, dlogits)
        return float(loss), grads

    def loss_only(self, params, x, y):
        logits, _ = self.forward(params, x)
        probs = softmax(logits, axis=-1)
        n = logits.shape[0]
        y = np.asarray(y, dtype=np.int64)
        return float(-np.log(probs[np.arange(n), y] + 1e-300).mean())

    def predict_probs(self, params, x):
        logits, _ = self.forward(params, x)
        return softmax(logits, axis=-1)
