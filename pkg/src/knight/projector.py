"""3-layer MLP projecting encoder embeddings into decoder space.

Forward: y = W3 gelu(W2 gelu(W1 x + b1) + b2) + b3 — GELU between layers,
nothing after the last. Weights are stored (fan_in, fan_out) so batches
flow as row vectors: x @ W + b.

Backward is hand-derived; tests hold it to central finite differences, so
the GELU here is the tanh approximation with fixed constants — exact
reproducibility across platforms matters more than the true erf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch

GELU_C = 0.7978845608  # sqrt(2/pi)
GELU_A = 0.044715


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + np.tanh(GELU_C * (x + GELU_A * x * x * x)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    inner = GELU_C * (x + GELU_A * x * x * x)
    t = np.tanh(inner)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)


@dataclass
class MlpParams:
    w1: np.ndarray  # (d_in, d_h)
    b1: np.ndarray  # (d_h,)
    w2: np.ndarray  # (d_h, d_h)
    b2: np.ndarray  # (d_h,)
    w3: np.ndarray  # (d_h, d_model)
    b3: np.ndarray  # (d_model,)

    @property
    def d_in(self) -> int:
        return self.w1.shape[0]

    @property
    def d_model(self) -> int:
        return self.w3.shape[1]

    def tensors(self) -> dict[str, np.ndarray]:
        """Live views keyed by checkpoint tensor names."""
        return {
            "mlp.w1": self.w1,
            "mlp.b1": self.b1,
            "mlp.w2": self.w2,
            "mlp.b2": self.b2,
            "mlp.w3": self.w3,
            "mlp.b3": self.b3,
        }

    @classmethod
    def from_tensors(cls, tensors: dict[str, np.ndarray]) -> "MlpParams":
        return cls(
            w1=tensors["mlp.w1"],
            b1=tensors["mlp.b1"],
            w2=tensors["mlp.w2"],
            b2=tensors["mlp.b2"],
            w3=tensors["mlp.w3"],
            b3=tensors["mlp.b3"],
        )


def mlp_init(d_in: int, d_h: int, d_model: int, seed: int, dtype=np.float32) -> MlpParams:
    """Glorot-normal weights (variance 2/(fan_in+fan_out)), zero biases."""
    if min(d_in, d_h, d_model) < 1:
        raise ValueError(f"dims must be >= 1, got {(d_in, d_h, d_model)}")
    rng = np.random.Generator(np.random.Philox(key=seed))

    def draw(fan_in: int, fan_out: int) -> np.ndarray:
        std = np.sqrt(2.0 / (fan_in + fan_out))
        return (rng.standard_normal((fan_in, fan_out)) * std).astype(dtype)

    return MlpParams(
        w1=draw(d_in, d_h),
        b1=np.zeros(d_h, dtype=dtype),
        w2=draw(d_h, d_h),
        b2=np.zeros(d_h, dtype=dtype),
        w3=draw(d_h, d_model),
        b3=np.zeros(d_model, dtype=dtype),
    )


def _as_batch(x: np.ndarray, d_in: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x)
    if x.ndim == 1:
        if x.shape[0] != d_in:
            raise DimMismatch(f"input dim {x.shape[0]}, expected {d_in}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != d_in:
        raise DimMismatch(f"input shape {x.shape}, expected (*, {d_in})")
    return x, False


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Project a vector or a batch of row vectors to d_model."""
    batch, single = _as_batch(x, params.d_in)
    h1 = gelu(batch @ params.w1 + params.b1)
    h2 = gelu(h1 @ params.w2 + params.b2)
    y = h2 @ params.w3 + params.b3
    return y[0] if single else y


def mlp_backward(
    params: MlpParams, x: np.ndarray, upstream_grad: np.ndarray
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients of sum(forward(x) * upstream) w.r.t. params and x.

    Recomputes the forward pass; at the sizes this projector runs at, the
    replay is cheaper than threading activations through the call sites.
    """
    batch, single = _as_batch(x, params.d_in)
    dy = np.asarray(upstream_grad)
    if single:
        dy = dy[None, :]
    if dy.shape != (batch.shape[0], params.d_model):
        raise DimMismatch(f"upstream shape {dy.shape}, expected {(batch.shape[0], params.d_model)}")

    z1 = batch @ params.w1 + params.b1
    h1 = gelu(z1)
    z2 = h1 @ params.w2 + params.b2
    h2 = gelu(z2)

    dw3 = h2.T @ dy
    db3 = dy.sum(axis=0)
    dh2 = dy @ params.w3.T

    dz2 = dh2 * gelu_grad(z2)
    dw2 = h1.T @ dz2
    db2 = dz2.sum(axis=0)
    dh1 = dz2 @ params.w2.T

    dz1 = dh1 * gelu_grad(z1)
    dw1 = batch.T @ dz1
    db1 = dz1.sum(axis=0)
    dx = dz1 @ params.w1.T

    grads = {
        "mlp.w1": dw1,
        "mlp.b1": db1,
        "mlp.w2": dw2,
        "mlp.b2": db2,
        "mlp.w3": dw3,
        "mlp.b3": db3,
    }
    return grads, (dx[0] if single else dx)
