"""Independent oracles shared by the test suite.

These deliberately avoid the library's backward pass / attack internals:
gradients come from central finite differences on the forward loss, and
attack success on linear models comes from the closed-form L-inf margin
argument.
"""

from __future__ import annotations

import numpy as np

from advgame import nn


def loss_at(params, x, label) -> float:
    logits, _ = nn.forward(params, x)
    loss, _ = nn.softmax_cross_entropy(logits, label)
    return loss


def fd_input_gradient(params, x, label, h=1e-6) -> np.ndarray:
    """Central finite differences of the loss in the input."""
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (loss_at(params, x + e, label) - loss_at(params, x - e, label)) / (2 * h)
    return grad


def fd_param_gradients(params, X, labels, h=1e-6):
    """Central finite differences of the mean batch loss in every parameter."""

    def batch_loss(p) -> float:
        logits, _ = nn.batch_forward(p, X)
        losses, _ = nn.batch_softmax_cross_entropy(logits, labels)
        return float(losses.mean())

    grads_w, grads_b = [], []
    for j in range(len(params.weights)):
        gw = np.zeros_like(params.weights[j])
        for idx in np.ndindex(*params.weights[j].shape):
            p_hi, p_lo = params.copy(), params.copy()
            p_hi.weights[j][idx] += h
            p_lo.weights[j][idx] -= h
            gw[idx] = (batch_loss(p_hi) - batch_loss(p_lo)) / (2 * h)
        grads_w.append(gw)
        gb = np.zeros_like(params.biases[j])
        for idx in np.ndindex(*params.biases[j].shape):
            p_hi, p_lo = params.copy(), params.copy()
            p_hi.biases[j][idx] += h
            p_lo.biases[j][idx] -= h
            gb[idx] = (batch_loss(p_hi) - batch_loss(p_lo)) / (2 * h)
        grads_b.append(gb)
    return grads_w, grads_b


def max_rel_error(analytic, numeric, floor=1e-8) -> float:
    """Largest deviation relative to the gradient's overall magnitude.

    Per-coordinate ratios are meaningless where the true gradient is ~0
    (ReLU-dead paths) and finite differences only carry cancellation noise,
    so the error is normalized by the tensor-wide scale, as in standard
    gradient checkers.
    """
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), floor)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def grad_check_error(analytic_tensors, numeric_tensors, floor=1e-8) -> float:
    """max_rel_error across a whole gradient set, normalized by the global
    gradient scale (dead tensors shouldn't divide by their own noise)."""
    scale = floor
    for a, b in zip(analytic_tensors, numeric_tensors):
        scale = max(scale, np.abs(a).max(), np.abs(b).max())
    worst = 0.0
    for a, b in zip(analytic_tensors, numeric_tensors):
        worst = max(worst, float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) / scale)
    return worst


def random_net(rng, depth=None, max_width=32, num_classes=None):
    """A random dense/ReLU stack with dims <= max_width, random finite params."""
    depth = depth if depth is not None else int(rng.integers(2, 5))
    num_classes = num_classes or int(rng.integers(2, 6))
    dims = [int(rng.integers(2, max_width + 1)) for _ in range(depth)]
    layers = []
    for i in range(depth - 1):
        layers.append(nn.LayerSpec.dense(dims[i], dims[i + 1]))
        layers.append(nn.LayerSpec.relu())
    layers.append(nn.LayerSpec.dense(dims[-1], num_classes))
    spec = nn.ModelSpec(tuple(layers), num_classes, "rand")
    weights = [rng.normal(0, 0.7, (l.out_dim, l.in_dim)) for l in spec.dense_layers]
    biases = [rng.normal(0, 0.3, l.out_dim) for l in spec.dense_layers]
    return nn.ModelParams(spec, weights, biases)


def linear_model(W, b, name="lin") -> nn.ModelParams:
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    spec = nn.ModelSpec((nn.LayerSpec.dense(W.shape[1], W.shape[0]),), W.shape[0], name)
    return nn.ModelParams(spec, [W], [b])


def linear_attack_oracle(W, b, x0, true_label, eps, alpha):
    """Closed-form L-inf attack outcome for a binary linear-softmax model.

    The loss gradient in x is p_other * (w_other - w_true), whose sign field
    is constant, so PGD walks straight: the attack succeeds iff
    margin < eps * ||w_true - w_other||_1, after ceil(needed / alpha) steps
    where needed = margin / ||w_true - w_other||_1.
    """
    other = 1 - true_label
    logits = W @ x0 + b
    margin = logits[true_label] - logits[other]
    dw1 = float(np.abs(W[true_label] - W[other]).sum())
    success = margin < eps * dw1
    if margin <= 0:
        steps = 0
    elif success:
        steps = int(np.ceil((margin / dw1) / alpha))
    else:
        steps = None
    return success, steps


class RecordingOracle:
    """Wraps a callable and counts invocations."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, *args):
        self.calls += 1
        return self.fn(*args)
