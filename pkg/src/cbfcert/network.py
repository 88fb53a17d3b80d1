"""Feedforward candidate barrier networks: exact evaluation, gradients, file I/O.

A candidate is a chain of dense layers, each with an elementwise activation;
the final layer is always linear. Exact evaluation here is the ground truth
against which every relaxation in the package is tested, and is what turns a
probed point into a genuine counterexample.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

VALID_ACTIVATIONS = ("identity", "relu", "leaky_relu", "sigmoid", "tanh")


@dataclass(frozen=True)
class Activation:
    """Elementwise activation: one of identity/relu/leaky_relu/sigmoid/tanh."""

    kind: str
    leaky_slope: float | None = None

    def __post_init__(self):
        if self.kind not in VALID_ACTIVATIONS:
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "leaky_relu":
            s = self.leaky_slope
            if s is None or not (0.0 < s < 1.0):
                raise ValueError("leaky_relu slope must lie strictly in (0, 1)")
        elif self.leaky_slope is not None:
            raise ValueError(f"{self.kind} takes no slope parameter")

    def value(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "identity":
            return y
        if self.kind == "relu":
            return np.maximum(y, 0.0)
        if self.kind == "leaky_relu":
            return np.where(y >= 0.0, y, self.leaky_slope * y)
        if self.kind == "sigmoid":
            return _sigmoid(y)
        return np.tanh(y)

    def derivative(self, y: np.ndarray) -> np.ndarray:
        """Exact derivative; at ReLU-family kinks the right derivative is used."""
        y = np.asarray(y, dtype=float)
        if self.kind == "identity":
            return np.ones_like(y)
        if self.kind == "relu":
            return np.where(y >= 0.0, 1.0, 0.0)
        if self.kind == "leaky_relu":
            return np.where(y >= 0.0, 1.0, self.leaky_slope)
        if self.kind == "sigmoid":
            s = _sigmoid(y)
            return s * (1.0 - s)
        return 1.0 - np.tanh(y) ** 2


def _sigmoid(y: np.ndarray) -> np.ndarray:
    # Split by sign to avoid overflow in exp for large |y|.
    out = np.empty_like(y, dtype=float)
    pos = y >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-y[pos]))
    ey = np.exp(y[~pos])
    out[~pos] = ey / (1.0 + ey)
    return out


IDENTITY = Activation("identity")
RELU = Activation("relu")
SIGMOID = Activation("sigmoid")
TANH = Activation("tanh")


def leaky_relu(slope: float) -> Activation:
    return Activation("leaky_relu", slope)


@dataclass(frozen=True)
class LayerDef:
    """One dense layer ``z -> act(weight @ z + bias)``."""

    weight: np.ndarray
    bias: np.ndarray
    activation: Activation = IDENTITY

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weight, dtype=float))
        b = np.atleast_1d(np.asarray(self.bias, dtype=float))
        if w.shape[0] != b.shape[0]:
            raise ValueError(
                f"weight has {w.shape[0]} rows but bias has length {b.shape[0]}"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]


@dataclass(frozen=True)
class NetworkDef:
    """An ordered stack of dense layers with a linear final layer."""

    layers: tuple[LayerDef, ...]
    input_dim: int = field(default=0)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        input_dim = self.input_dim or layers[0].in_dim
        if layers[0].in_dim != input_dim:
            raise ValueError(
                f"layer 0 expects {layers[0].in_dim} inputs, declared {input_dim}"
            )
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ValueError(
                    f"layer {i} expects {layers[i].in_dim} inputs but layer "
                    f"{i - 1} produces {layers[i - 1].out_dim}"
                )
        if layers[-1].activation.kind != "identity":
            raise ValueError("final layer must have the identity activation")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input_dim", input_dim)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(layer.out_dim for layer in self.layers[:-1])


def forward_trace(net: NetworkDef, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Exact forward pass returning the output and all pre-activation vectors.

    ``x`` may be a single point ``(n,)`` or a batch ``(B, n)``; pre-activations
    follow the same leading shape.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.input_dim:
        raise ValueError(
            f"input has dimension {x.shape[-1]}, network expects {net.input_dim}"
        )
    z = x
    preacts = []
    for layer in net.layers:
        y = z @ layer.weight.T + layer.bias
        preacts.append(y)
        z = layer.activation.value(y)
    return z, preacts


def forward(net: NetworkDef, x: np.ndarray) -> np.ndarray:
    """Exact network output at ``x`` (single point or batch)."""
    out, _ = forward_trace(net, x)
    return out


def analytic_gradient(net: NetworkDef, x: np.ndarray) -> np.ndarray:
    """Exact chain-rule gradient of a scalar-output network.

    Returns shape ``(n,)`` for a single point or ``(B, n)`` for a batch.
    """
    if net.output_dim != 1:
        raise ValueError("analytic_gradient requires a scalar-output network")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    _, preacts = forward_trace(net, np.atleast_2d(x))
    batch = preacts[0].shape[0]
    # Backward accumulation: row vector times diag(sigma'(y_i)) W_i per layer.
    final = net.layers[-1]
    grad = np.broadcast_to(final.weight[0], (batch, final.in_dim)).copy()
    for layer, y in zip(reversed(net.layers[:-1]), reversed(preacts[:-1])):
        grad = (grad * layer.activation.derivative(y)) @ layer.weight
    return grad[0] if single else grad


def save_network(net: NetworkDef, path) -> None:
    """Write the weight file (JSON, full double round-trip precision)."""
    doc = {
        "input_dim": net.input_dim,
        "layers": [],
    }
    for layer in net.layers:
        entry = {
            "rows": layer.out_dim,
            "cols": layer.in_dim,
            "weight": layer.weight.tolist(),
            "bias": layer.bias.tolist(),
            "activation": layer.activation.kind,
        }
        if layer.activation.kind == "leaky_relu":
            entry["leaky_slope"] = layer.activation.leaky_slope
        doc["layers"].append(entry)
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


class WeightFileError(ValueError):
    """Raised when a weight file fails to parse or validate."""


def load_network(path) -> NetworkDef:
    """Parse a weight file, validating shapes and the layer dimension chain."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightFileError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "layers" not in doc or "input_dim" not in doc:
        raise WeightFileError(f"{path}: expected object with 'input_dim' and 'layers'")
    layers = []
    for i, entry in enumerate(doc["layers"]):
        try:
            rows, cols = int(entry["rows"]), int(entry["cols"])
            weight = np.asarray(entry["weight"], dtype=float)
            bias = np.asarray(entry["bias"], dtype=float)
            name = entry["activation"]
        except (KeyError, TypeError, ValueError) as exc:
            raise WeightFileError(f"{path}: layer {i}: missing or malformed field ({exc})") from exc
        if weight.shape != (rows, cols):
            raise WeightFileError(
                f"{path}: layer {i}: weight shape {weight.shape} does not match "
                f"declared ({rows}, {cols})"
            )
        if bias.shape != (rows,):
            raise WeightFileError(
                f"{path}: layer {i}: bias length {bias.shape[0]} does not match rows {rows}"
            )
        if name not in VALID_ACTIVATIONS:
            raise WeightFileError(f"{path}: layer {i}: unknown activation {name!r}")
        slope = entry.get("leaky_slope")
        try:
            act = Activation(name, slope)
        except ValueError as exc:
            raise WeightFileError(f"{path}: layer {i}: {exc}") from exc
        layers.append(LayerDef(weight, bias, act))
    try:
        return NetworkDef(tuple(layers), int(doc["input_dim"]))
    except ValueError as exc:
        raise WeightFileError(f"{path}: {exc}") from exc
