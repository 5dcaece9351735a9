"""Dense feed-forward regression network, written directly on numpy.

Two GELU hidden layers with inverted dropout after each, a linear output
layer, batch-mean squared-error loss, exact backpropagation, and Adam
updates. Everything is double precision and deterministic for a fixed
seed; no autodiff framework is involved.

The output layer is linear by default because the regression targets are
standardized reals; a configuration switch restores GELU on the output
for fidelity experiments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .dataset import Scaler
from .errors import NumericalError, ValidationError

ADAM_DEFAULTS = {"lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8}

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(x):
    """Exact GELU: x * Phi(x) with Phi the standard normal CDF."""
    x = np.asarray(x, dtype=float)
    return x * ndtr(x)


def gelu_derivative(x):
    """d/dx [x * Phi(x)] = Phi(x) + x * phi(x)."""
    x = np.asarray(x, dtype=float)
    return ndtr(x) + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


def glorot_bound(n_in: int, n_out: int) -> float:
    return math.sqrt(6.0) / math.sqrt(n_in + n_out)


def glorot_init(n_in: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (out, in) weight matrix on +-sqrt(6)/sqrt(n_in + n_out)."""
    if n_in < 1 or n_out < 1:
        raise ValidationError("layer widths must be positive")
    bound = glorot_bound(n_in, n_out)
    return rng.uniform(-bound, bound, size=(n_out, n_in))


def mse(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValidationError(
            f"shape mismatch: {predictions.shape} vs {targets.shape}")
    diff = predictions - targets
    return float(np.mean(diff * diff))


def mse_gradient(predictions, targets) -> np.ndarray:
    """Gradient of batch-mean MSE with respect to the predictions."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValidationError(
            f"shape mismatch: {predictions.shape} vs {targets.shape}")
    return 2.0 * (predictions - targets) / predictions.size


@dataclass
class ForwardCache:
    """Intermediates of one forward pass, consumed by backward()."""

    x: np.ndarray
    z: list               # pre-activations per layer
    h: list               # post-activation, post-dropout inputs to next layer
    masks: list           # dropout masks (None in infer mode / on output)
    version: int


class MlpModel:
    """Fully connected (n_in, nh1, nh2, n_out) regression network."""

    def __init__(self, weights, biases, dropout: float = 0.0,
                 output_activation: str = "identity"):
        if not 0.0 <= dropout < 1.0:
            raise ValidationError(f"dropout must be in [0, 1), got {dropout}")
        if output_activation not in ("identity", "gelu"):
            raise ValidationError(f"unknown output activation {output_activation!r}")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        dims = [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]
        for i, w in enumerate(self.weights):
            if w.shape != (dims[i + 1], dims[i]) or self.biases[i].shape != (dims[i + 1],):
                raise ValidationError("inconsistent layer dimension chain")
        if not all(np.all(np.isfinite(w)) for w in self.weights):
            raise ValidationError("non-finite weights")
        self.layer_dims = tuple(dims)
        self.dropout = float(dropout)
        self.output_activation = output_activation
        self._version = 0

    @classmethod
    def initialize(cls, nh1: int, nh2: int, dropout: float = 0.0,
                   seed: int = 0, n_in: int = 32, n_out: int = 38,
                   output_activation: str = "identity") -> "MlpModel":
        rng = np.random.default_rng(seed)
        dims = (n_in, nh1, nh2, n_out)
        weights = [glorot_init(dims[i], dims[i + 1], rng) for i in range(3)]
        biases = [np.zeros(dims[i + 1]) for i in range(3)]
        return cls(weights, biases, dropout, output_activation)

    # -- parameter plumbing ------------------------------------------------

    def parameters(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def set_parameters(self, params) -> None:
        if len(params) != 6:
            raise ValidationError("expected 6 parameter arrays")
        new_w = [np.asarray(params[0]), np.asarray(params[2]), np.asarray(params[4])]
        new_b = [np.asarray(params[1]), np.asarray(params[3]), np.asarray(params[5])]
        for old, new in zip(self.weights + self.biases, new_w + new_b):
            if old.shape != new.shape:
                raise ValidationError("parameter shape changed")
        self.weights = new_w
        self.biases = new_b
        self._version += 1

    def clone(self) -> "MlpModel":
        m = MlpModel([w.copy() for w in self.weights],
                     [b.copy() for b in self.biases],
                     self.dropout, self.output_activation)
        return m

    # -- forward / backward --------------------------------------------------

    def forward(self, x, mode: str = "infer",
                rng: np.random.Generator | None = None,
                masks: list | None = None):
        """Run the network; returns (output, cache).

        Train mode draws inverted-dropout masks (Bernoulli keep with
        probability 1 - dropout, survivors scaled by 1/(1 - dropout));
        infer mode applies no mask and no scaling. Explicit ``masks``
        override the rng so gradients can be checked against a frozen
        mask.
        """
        if mode not in ("train", "infer"):
            raise ValidationError(f"unknown mode {mode!r}")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.layer_dims[0]:
            raise ValidationError(
                f"input width {x.shape[1]}, expected {self.layer_dims[0]}")

        use_dropout = mode == "train" and (self.dropout > 0.0 or masks is not None)
        if use_dropout and masks is None:
            if rng is None:
                raise ValidationError("train-mode forward needs an rng for dropout")
            keep = 1.0 - self.dropout
            masks = [
                (rng.random((x.shape[0], self.layer_dims[i + 1])) < keep) / keep
                for i in range(2)
            ]

        zs, hs, used_masks = [], [], []
        h = x
        for layer in range(3):
            z = h @ self.weights[layer].T + self.biases[layer]
            zs.append(z)
            if layer < 2:
                h = gelu(z)
                if use_dropout:
                    h = h * masks[layer]
                    used_masks.append(masks[layer])
                else:
                    used_masks.append(None)
            else:
                h = gelu(z) if self.output_activation == "gelu" else z
                used_masks.append(None)
            hs.append(h)
        cache = ForwardCache(x=x, z=zs, h=hs, masks=used_masks,
                             version=self._version)
        return hs[-1], cache

    def backward(self, cache: ForwardCache, output_gradient) -> list:
        """Exact parameter gradients for a given dLoss/dOutput.

        The cache must come from a forward pass against the current
        parameters; reusing one across an update is an error.
        """
        if cache.version != self._version:
            raise ValidationError("stale forward cache: parameters changed")
        dy = np.atleast_2d(np.asarray(output_gradient, dtype=float))
        if dy.shape != cache.h[-1].shape:
            raise ValidationError(
                f"output gradient shape {dy.shape}, expected {cache.h[-1].shape}")

        grads = [None] * 6
        if self.output_activation == "gelu":
            dz = dy * gelu_derivative(cache.z[2])
        else:
            dz = dy
        for layer in (2, 1, 0):
            inputs = cache.x if layer == 0 else cache.h[layer - 1]
            grads[2 * layer] = dz.T @ inputs
            grads[2 * layer + 1] = dz.sum(axis=0)
            if layer > 0:
                dh = dz @ self.weights[layer]
                if cache.masks[layer - 1] is not None:
                    dh = dh * cache.masks[layer - 1]
                dz = dh * gelu_derivative(cache.z[layer - 1])
        return grads

    def predict(self, x) -> np.ndarray:
        out, _ = self.forward(x, mode="infer")
        return out


class AdamState:
    """Bias-corrected Adam accumulators for one parameter list."""

    def __init__(self, params, lr: float = ADAM_DEFAULTS["lr"],
                 beta1: float = ADAM_DEFAULTS["beta1"],
                 beta2: float = ADAM_DEFAULTS["beta2"],
                 eps: float = ADAM_DEFAULTS["eps"]):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.step = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]


def adam_step(state: AdamState, params, grads) -> list:
    """One Adam update; returns the new parameter arrays."""
    if len(params) != len(state.m) or len(grads) != len(state.m):
        raise ValidationError("parameter/gradient count mismatch")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient")
    state.step += 1
    t = state.step
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g
        m_hat = state.m[i] / (1.0 - state.beta1 ** t)
        v_hat = state.v[i] / (1.0 - state.beta2 ** t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


# -- checkpoint format --------------------------------------------------------

@dataclass
class Checkpoint:
    """Everything needed to serve predictions: model, scalers, context."""

    model: MlpModel
    feature_scaler: Scaler
    label_scaler: Scaler
    ref_cycles: np.ndarray
    label_times: np.ndarray      # statepoint times of the trajectory labels
    label_indices: list
    metadata: dict = field(default_factory=dict)


def save_checkpoint(ckpt: Checkpoint, path: str) -> None:
    m = ckpt.model
    doc = {
        "v": 1,
        "layer_dims": list(m.layer_dims),
        "dropout": m.dropout,
        "activations": ["gelu", "gelu", m.output_activation],
        "weights": [w.tolist() for w in m.weights],     # row-major (out x in)
        "biases": [b.tolist() for b in m.biases],
        "feature_scaler": ckpt.feature_scaler.to_dict(),
        "label_scaler": ckpt.label_scaler.to_dict(),
        "reference_cycles_efpd": np.asarray(ckpt.ref_cycles).tolist(),
        "label_statepoint_times": np.asarray(ckpt.label_times).tolist(),
        "label_statepoint_indices": list(ckpt.label_indices),
        "metadata": ckpt.metadata,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("v") != 1:
        raise ValidationError(f"unsupported checkpoint version {doc.get('v')!r}")
    model = MlpModel(doc["weights"], doc["biases"], doc["dropout"],
                     doc["activations"][-1])
    if list(model.layer_dims) != doc["layer_dims"]:
        raise ValidationError("checkpoint layer_dims disagree with weights")
    return Checkpoint(
        model=model,
        feature_scaler=Scaler.from_dict(doc["feature_scaler"]),
        label_scaler=Scaler.from_dict(doc["label_scaler"]),
        ref_cycles=np.asarray(doc["reference_cycles_efpd"], dtype=float),
        label_times=np.asarray(doc["label_statepoint_times"], dtype=float),
        label_indices=list(doc["label_statepoint_indices"]),
        metadata=doc.get("metadata", {}),
    )
