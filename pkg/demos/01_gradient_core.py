#!/usr/bin/env python3
"""Tour of the math core: dense nets, the fused softmax loss, and exact
input/parameter gradients validated against finite differences."""

import numpy as np

from advgame import nn

print("=== a tiny classifier ===")
spec = nn.dense_mlp(input_dim=4, hidden=[8], num_classes=3, name="demo")
print("layers:", [(l.kind, l.in_dim, l.out_dim) for l in spec.layers])

rng = np.random.default_rng(0)
params = nn.ModelParams(
    spec,
    [rng.normal(0, 0.5, (l.out_dim, l.in_dim)) for l in spec.dense_layers],
    [rng.normal(0, 0.2, l.out_dim) for l in spec.dense_layers],
)

x = np.array([0.2, 0.8, 0.5, 0.1])
logits, trace = nn.forward(params, x)
loss, probs = nn.softmax_cross_entropy(logits, label=2)
print("logits:", np.round(logits, 4))
print("probs: ", np.round(probs, 4), " sum =", probs.sum())
print("loss:  ", round(loss, 6))

print("\n=== stability: the loss is fused with the softmax ===")
huge = np.array([1000.0, 0.0])
loss_huge, probs_huge = nn.softmax_cross_entropy(huge, 0)
print(f"logits {huge} -> loss {loss_huge} (no overflow), probs {probs_huge}")

print("\n=== gradient wrt the input, checked by finite differences ===")
grad = nn.input_gradient(params, x, label=2)
h = 1e-6
fd = np.array([
    (nn.softmax_cross_entropy(nn.forward(params, x + h * e)[0], 2)[0]
     - nn.softmax_cross_entropy(nn.forward(params, x - h * e)[0], 2)[0]) / (2 * h)
    for e in np.eye(4)
])
print("analytic:", np.round(grad, 6))
print("numeric: ", np.round(fd, 6))
print("max abs diff:", float(np.max(np.abs(grad - fd))))

print("\n=== parameter gradients drive training ===")
X = rng.uniform(0, 1, (16, 4))
y = rng.integers(0, 3, 16)
grads, mean_loss = nn.param_gradients(params, X, y)
print("batch mean loss:", round(mean_loss, 6))
print("per-layer gradient norms:",
      [round(float(np.linalg.norm(g)), 4) for g in grads.weights])

print("\n=== a linear-softmax model has a closed-form input gradient ===")
W = rng.normal(size=(2, 4))
lin = nn.ModelParams(nn.ModelSpec((nn.LayerSpec.dense(4, 2),), 2, "lin"), [W], [np.zeros(2)])
logits, _ = nn.forward(lin, x)
_, p = nn.softmax_cross_entropy(logits, 0)
closed = (p - np.array([1.0, 0.0])) @ W
print("closed form (p - onehot)^T W :", np.round(closed, 6))
print("input_gradient               :", np.round(nn.input_gradient(lin, x, 0), 6))
