"""Small tanh MLP classifiers with manual backprop and bias-corrected Adam.

These are the desk-scale teacher/student networks: a wide MLP plays the
teacher, a narrow one the student. Forward, backward, and optimizer steps
are plain numpy so training is deterministic on one thread.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError, DimensionError, InputError, TrainingDivergenceError

CHECKPOINT_MAGIC = b"MDL1"

# Parameter gradients in layer order: [(dW0, db0), (dW1, db1), ...]
Gradients = list[tuple[np.ndarray, np.ndarray]]


class MLPClassifier:
    """Fully-connected tanh network mapping feature vectors to class logits."""

    def __init__(self, layer_dims: list[int], seed: int = 0) -> None:
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise InputError(f"layer_dims needs >= 2 positive entries, got {layer_dims}")
        self.layer_dims = list(layer_dims)
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape[-1] != self.input_dim:
            raise DimensionError(
                f"input dim {arr.shape[-1]} does not match model input {self.input_dim}"
            )
        return arr

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass keeping per-layer activations for ``backward``.

        Accepts a single vector (d,) or a batch (B, d); logits match.
        The cache holds the input to every layer, batch-shaped.
        """
        arr = self._check_input(x)
        single = arr.ndim == 1
        a = arr[None, :] if single else arr
        cache = [a]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = np.tanh(z) if i < len(self.weights) - 1 else z
            cache.append(a)
        logits = cache[-1]
        return (logits[0] if single else logits), cache

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Class logits for a vector or batch; deterministic."""
        logits, _ = self.forward_cached(x)
        return logits

    def penultimate_repr(self, x: np.ndarray) -> np.ndarray:
        """Activations of the last hidden layer, before the classification head."""
        if len(self.layer_dims) < 3:
            raise InputError("model has no hidden layer to take a representation from")
        arr = self._check_input(x)
        single = arr.ndim == 1
        a = arr[None, :] if single else arr
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(a @ w + b)
        return a[0] if single else a

    def backward(self, cache: list[np.ndarray], grad_logits: np.ndarray) -> Gradients:
        """Backpropagate d(loss)/d(logits) to gradients for every parameter.

        ``grad_logits`` may be (C,) or (B, C) matching the cached forward;
        batch contributions are summed.
        """
        g = np.asarray(grad_logits, dtype=np.float64)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != cache[-1].shape:
            raise DimensionError(
                f"grad_logits shape {g.shape} does not match forward output {cache[-1].shape}"
            )
        grads: Gradients = [None] * len(self.weights)  # type: ignore[list-item]
        for i in range(len(self.weights) - 1, -1, -1):
            a_in = cache[i]
            grads[i] = (a_in.T @ g, g.sum(axis=0))
            if i > 0:
                g = (g @ self.weights[i].T) * (1.0 - cache[i] ** 2)  # tanh'
        return grads

    def copy(self) -> "MLPClassifier":
        clone = MLPClassifier.__new__(MLPClassifier)
        clone.layer_dims = list(self.layer_dims)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def save(self, path: str | Path) -> None:
        """Write the checkpoint: magic, layer dims, then float32 LE tensors in order."""
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<I", len(self.layer_dims)))
            fh.write(struct.pack(f"<{len(self.layer_dims)}I", *self.layer_dims))
            for w, b in zip(self.weights, self.biases):
                fh.write(w.astype("<f4").tobytes())
                fh.write(b.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "MLPClassifier":
        """Read a checkpoint written by ``save``."""
        raw = Path(path).read_bytes()
        if raw[:4] != CHECKPOINT_MAGIC:
            raise DataError(f"bad checkpoint magic in {path}")
        offset = 4
        (ndims,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        dims = list(struct.unpack_from(f"<{ndims}I", raw, offset))
        offset += 4 * ndims
        model = cls.__new__(cls)
        model.layer_dims = dims
        model.weights = []
        model.biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            w_bytes = 4 * fan_in * fan_out
            w = np.frombuffer(raw, dtype="<f4", count=fan_in * fan_out, offset=offset)
            offset += w_bytes
            b = np.frombuffer(raw, dtype="<f4", count=fan_out, offset=offset)
            offset += 4 * fan_out
            model.weights.append(w.reshape(fan_in, fan_out).astype(np.float64))
            model.biases.append(b.astype(np.float64))
        if offset != len(raw):
            raise DataError(f"checkpoint {path} has {len(raw) - offset} trailing bytes")
        return model


class AdamOptimizer:
    """Adam with bias correction; moments are tracked per parameter tensor."""

    def __init__(
        self,
        model: MLPClassifier,
        base_lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.base_lr = base_lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(model.weights, model.biases)]
        self._v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(model.weights, model.biases)]

    def step(self, model: MLPClassifier, grads: Gradients, lr: float | None = None) -> None:
        """Apply one bias-corrected update in place; ``lr`` defaults to ``base_lr``."""
        if len(grads) != len(model.weights):
            raise DimensionError("gradient count does not match parameter count")
        rate = self.base_lr if lr is None else lr
        self.step_count += 1
        t = self.step_count
        for i, (dw, db) in enumerate(grads):
            if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
                raise TrainingDivergenceError("non-finite gradient in Adam step")
            for moment_idx, (param, grad) in enumerate(
                ((model.weights[i], dw), (model.biases[i], db))
            ):
                m = self._m[i][moment_idx]
                v = self._v[i][moment_idx]
                m *= self.beta1
                m += (1.0 - self.beta1) * grad
                v *= self.beta2
                v += (1.0 - self.beta2) * grad**2
                m_hat = m / (1.0 - self.beta1**t)
                v_hat = v / (1.0 - self.beta2**t)
                param -= rate * m_hat / (np.sqrt(v_hat) + self.eps)
