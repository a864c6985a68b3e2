"""Dense-network math core: forward pass, softmax cross-entropy, and exact
reverse-mode gradients with respect to both inputs and parameters.

Everything is float64 and pure-functional: no operation mutates its inputs,
so params/datasets can be shared freely across concurrent episodes. The
single-sample entry points delegate to the batched ones (batch of one) so
that a value computed "alone" is bit-identical to the same value computed
inside a batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError

# A tensor is simply a float64 ndarray; shape/data-length consistency and
# row-major layout come with the type.
Tensor = np.ndarray

DENSE = "dense"
RELU = "relu"


def as_tensor(values) -> Tensor:
    return np.asarray(values, dtype=np.float64)


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a dense+ReLU stack. ReLU layers carry no dimensions."""

    kind: str
    in_dim: int = 0
    out_dim: int = 0

    def __post_init__(self):
        if self.kind not in (DENSE, RELU):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind == DENSE and (self.in_dim < 1 or self.out_dim < 1):
            raise ValueError("dense layer needs positive in_dim and out_dim")

    @staticmethod
    def dense(in_dim: int, out_dim: int) -> "LayerSpec":
        return LayerSpec(DENSE, in_dim, out_dim)

    @staticmethod
    def relu() -> "LayerSpec":
        return LayerSpec(RELU)


@dataclass(frozen=True)
class ModelSpec:
    """Architecture of a small feedforward classifier."""

    layers: tuple[LayerSpec, ...]
    num_classes: int
    name: str = "model"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        dense = [l for l in self.layers if l.kind == DENSE]
        if not dense:
            raise ValueError("network needs at least one dense layer")
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if self.layers[-1].kind != DENSE or self.layers[-1].out_dim != self.num_classes:
            raise ValueError(
                "network must end in a dense layer with out_dim == num_classes"
            )
        width = None
        for i, layer in enumerate(self.layers):
            if layer.kind == DENSE:
                if width is not None and layer.in_dim != width:
                    raise ValueError(
                        f"layer {i} expects in_dim {width}, got {layer.in_dim}"
                    )
                width = layer.out_dim

    @property
    def input_dim(self) -> int:
        for layer in self.layers:
            if layer.kind == DENSE:
                return layer.in_dim
        raise AssertionError("validated spec has a dense layer")

    @property
    def dense_layers(self) -> list[LayerSpec]:
        return [l for l in self.layers if l.kind == DENSE]


def dense_mlp(input_dim: int, hidden: list[int], num_classes: int, name: str = "model") -> ModelSpec:
    """Convenience builder: dense/ReLU stack with the given hidden widths."""
    layers: list[LayerSpec] = []
    width = input_dim
    for h in hidden:
        layers.append(LayerSpec.dense(width, h))
        layers.append(LayerSpec.relu())
        width = h
    layers.append(LayerSpec.dense(width, num_classes))
    return ModelSpec(tuple(layers), num_classes, name)


@dataclass
class ModelParams:
    """Weights and biases for each dense layer of `spec`, in layer order.

    weights[j] has shape [out_dim, in_dim] and biases[j] shape [out_dim] for
    the j-th dense layer. The spec rides along so a params object alone is
    enough to run the network.
    """

    spec: ModelSpec
    weights: list[Tensor]
    biases: list[Tensor]

    def __post_init__(self):
        dense = self.spec.dense_layers
        if len(self.weights) != len(dense) or len(self.biases) != len(dense):
            raise ShapeMismatchError(
                f"expected {len(dense)} weight/bias pairs, got "
                f"{len(self.weights)}/{len(self.biases)}"
            )
        for j, layer in enumerate(dense):
            w, b = self.weights[j], self.biases[j]
            if w.shape != (layer.out_dim, layer.in_dim):
                raise ShapeMismatchError(
                    f"dense layer {j}: weight shape {w.shape} != "
                    f"({layer.out_dim}, {layer.in_dim})"
                )
            if b.shape != (layer.out_dim,):
                raise ShapeMismatchError(
                    f"dense layer {j}: bias shape {b.shape} != ({layer.out_dim},)"
                )
        if not all(np.all(np.isfinite(w)) for w in self.weights + self.biases):
            raise ValueError("model parameters must be finite")

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.spec,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


@dataclass
class ForwardTrace:
    """Per-layer inputs and outputs retained for the backward pass.

    Arrays are batched ([n, dim]); entry i belongs to layer i of the spec.
    """

    inputs: list[Tensor] = field(default_factory=list)
    outputs: list[Tensor] = field(default_factory=list)


@dataclass
class ModelGrads:
    """Gradient of a scalar loss w.r.t. every weight and bias tensor."""

    weights: list[Tensor]
    biases: list[Tensor]


def batch_forward(params: ModelParams, X: Tensor) -> tuple[Tensor, ForwardTrace]:
    """Run the network on a batch [n, input_dim]; returns logits [n, k]."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.spec.input_dim:
        raise ShapeMismatchError(
            f"input shape {X.shape} does not feed layer 0 "
            f"({params.spec.layers[0].kind}, expects dim {params.spec.input_dim})"
        )
    trace = ForwardTrace()
    a = X
    j = 0  # dense-layer index
    for layer in params.spec.layers:
        trace.inputs.append(a)
        if layer.kind == DENSE:
            a = a @ params.weights[j].T + params.biases[j]
            j += 1
        else:
            a = np.maximum(a, 0.0)
        trace.outputs.append(a)
    return a, trace


def forward(params: ModelParams, x: Tensor) -> tuple[Tensor, ForwardTrace]:
    """Single-sample forward pass; x is a flat [input_dim] vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatchError(f"expected a flat input vector, got shape {x.shape}")
    logits, trace = batch_forward(params, x[None, :])
    return logits[0], trace


def softmax(logits: Tensor) -> Tensor:
    """Stabilized softmax along the last axis (max-logit subtraction)."""
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def batch_softmax_cross_entropy(
    logits: Tensor, labels: Tensor
) -> tuple[Tensor, Tensor]:
    """Fused stabilized loss for a batch: returns (losses [n], probs [n, k])."""
    labels = np.asarray(labels)
    k = logits.shape[-1]
    if np.any(labels < 0) or np.any(labels >= k):
        raise ValueError(f"label out of range [0, {k})")
    z = logits - np.max(logits, axis=-1, keepdims=True)
    lse = np.log(np.sum(np.exp(z), axis=-1, keepdims=True))
    logp = z - lse
    losses = -logp[np.arange(len(labels)), labels]
    return losses, np.exp(logp)


def softmax_cross_entropy(logits: Tensor, label: int) -> tuple[float, Tensor]:
    """Cross-entropy of a single logit vector against `label`.

    Returns (loss, probs). Loss is computed in log-space, fused with the
    softmax, so it stays finite even when probabilities underflow.
    """
    logits = np.asarray(logits, dtype=np.float64)
    losses, probs = batch_softmax_cross_entropy(logits[None, :], [label])
    return float(losses[0]), probs[0]


def _backward(
    params: ModelParams, trace: ForwardTrace, dlogits: Tensor, want_params: bool
) -> tuple[Tensor, ModelGrads | None]:
    """Reverse pass from dL/dlogits to dL/dinput and optionally dL/dparams.

    ReLU routes gradient only where its pre-activation was strictly
    positive, so a tie at exactly 0 passes zero gradient.
    """
    n_dense = len(params.weights)
    grads_w: list = [None] * n_dense
    grads_b: list = [None] * n_dense
    grad = dlogits
    j = n_dense
    for i in range(len(params.spec.layers) - 1, -1, -1):
        layer = params.spec.layers[i]
        inp = trace.inputs[i]
        if layer.kind == DENSE:
            j -= 1
            if want_params:
                grads_w[j] = grad.T @ inp
                grads_b[j] = grad.sum(axis=0)
            grad = grad @ params.weights[j]
        else:
            grad = grad * (inp > 0.0)
    model_grads = ModelGrads(grads_w, grads_b) if want_params else None
    return grad, model_grads


def batch_input_gradient(params: ModelParams, X: Tensor, labels: Tensor) -> Tensor:
    """d(loss_i)/d(x_i) for every sample in the batch, shape [n, input_dim]."""
    logits, trace = batch_forward(params, X)
    _, probs = batch_softmax_cross_entropy(logits, labels)
    dlogits = probs.copy()
    dlogits[np.arange(len(labels)), labels] -= 1.0
    grad, _ = _backward(params, trace, dlogits, want_params=False)
    return grad


def input_gradient(params: ModelParams, x: Tensor, label: int) -> Tensor:
    """Gradient of the cross-entropy loss with respect to the input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatchError(f"expected a flat input vector, got shape {x.shape}")
    return batch_input_gradient(params, x[None, :], [label])[0]


def param_gradients(
    params: ModelParams, batch_x: Tensor, batch_labels: Tensor
) -> tuple[ModelGrads, float]:
    """Mean-over-batch loss gradients for every weight and bias tensor.

    Returns (grads, mean_loss).
    """
    batch_x = np.asarray(batch_x, dtype=np.float64)
    if batch_x.ndim != 2 or batch_x.shape[0] == 0:
        raise ValueError("batch must be a nonempty [n, input_dim] array")
    labels = np.asarray(batch_labels)
    logits, trace = batch_forward(params, batch_x)
    losses, probs = batch_softmax_cross_entropy(logits, labels)
    n = len(labels)
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    _, grads = _backward(params, trace, dlogits, want_params=True)
    assert grads is not None
    return grads, float(losses.mean())


def batch_predict(params: ModelParams, X: Tensor) -> Tensor:
    logits, _ = batch_forward(params, X)
    return np.argmax(logits, axis=-1)


def predict(params: ModelParams, x: Tensor) -> int:
    logits, _ = forward(params, x)
    return int(np.argmax(logits))
