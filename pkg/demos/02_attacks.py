#!/usr/bin/env python3
"""The attack toolbox: one-step sign moves, L-inf projection, full PGD with
its closed-form behavior on linear models, and the two black-box attacks."""

import numpy as np

from advgame import attacks, nn

rng = np.random.default_rng(7)

print("=== sign step + projection are the whole of L-inf PGD ===")
x0 = np.full(6, 0.5)
grad = rng.normal(size=6)
stepped = attacks.sign_step(x0, grad, alpha=0.2)
print("x0        :", x0)
print("stepped   :", np.round(stepped, 3))
print("projected :", np.round(attacks.project(stepped, x0, eps=0.1), 3), "(ball radius 0.1)")

print("\n=== full PGD against a linear model matches the margin math ===")
W = rng.normal(size=(2, 6))
model = nn.ModelParams(nn.ModelSpec((nn.LayerSpec.dense(6, 2),), 2, "lin"), [W], [np.zeros(2)])
x0 = rng.uniform(0.35, 0.65, 6)
label = nn.predict(model, x0)
logits, _ = nn.forward(model, x0)
margin = logits[label] - logits[1 - label]
dw1 = np.abs(W[label] - W[1 - label]).sum()

cfg = attacks.AttackConfig(eps=0.35, alpha=0.05, max_steps=10)
oracle = lambda x: (nn.input_gradient(model, x, label), nn.predict(model, x))
x_adv, success, steps = attacks.pgd_full(oracle, x0, label, cfg)
print(f"margin {margin:.4f} vs eps*||w1-w0||_1 = {cfg.eps * dw1:.4f}")
want = margin < cfg.eps * dw1
predicted = f", steps={int(np.ceil(margin / dw1 / cfg.alpha))}" if want else ""
print(f"closed form predicts success={want}{predicted}")
print(f"pgd_full observed success={success}, steps={steps}, "
      f"perturbation {np.max(np.abs(x_adv - x0)):.4f}")

print("\n=== NES estimates gradients from probability queries alone ===")
def prob_oracle(q):
    logits, _ = nn.forward(model, q)
    return nn.softmax(logits)

est = attacks.nes_gradient_estimate(prob_oracle, x0, label, sigma=1e-4, n_samples=400, rng=rng)
true = nn.input_gradient(model, x0, label)
cos = float(est @ true / (np.linalg.norm(est) * np.linalg.norm(true)))
print(f"cosine(NES estimate, true gradient) = {cos:.4f} using 800 queries")

print("\n=== the label-only attack keeps a proposal only on a label flip ===")
wide = attacks.AttackConfig(eps=0.3, alpha=0.3)  # blind corner jumps, generous budget
state = attacks.AttackState(x0, x0.copy(), true_label=label)
probe_rng = np.random.default_rng(7)
kept = 0
for step in range(30):
    before = state.x_t.copy()
    state = attacks.random_sign_step(lambda q: nn.predict(model, q), state, wide, probe_rng)
    kept += not np.array_equal(before, state.x_t)
print(f"after {state.steps_taken} probes: {kept} kept proposal(s), "
      f"final prediction {nn.predict(model, state.x_t)} (true label {label})")
