"""L-inf evasion attacks and the attacker agents that drive game episodes.

The primitives (sign_step / project / pgd_round_step) broadcast over any
array shape, so single queries and whole evaluation batches share one code
path. Attacks never mutate their inputs and are deterministic given their
rng.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import nn
from .errors import ShapeMismatchError

PGD_WHITEBOX = "pgd_whitebox"
NES_SOFTBOX = "nes_softbox"
RANDOM_SIGN_HARDBOX = "random_sign_hardbox"

BUDGET_TOL = 1e-12


@dataclass(frozen=True)
class AttackConfig:
    """L-inf attack budget and step schedule (input units)."""

    eps: float
    alpha: float
    max_steps: int = 20
    norm: str = "linf"
    random_start: bool = False

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.norm != "linf":
            raise ValueError("only the linf norm is supported")
        if self.eps > 0 and self.alpha > 2 * self.eps:
            # Steps beyond the ball get projected back anyway.
            warnings.warn(
                f"alpha={self.alpha} exceeds 2*eps={2 * self.eps}; "
                "most of each step will be projected away",
                stacklevel=2,
            )


@dataclass
class AttackState:
    """Per-episode attack bookkeeping: clean input, current candidate, steps."""

    x0: np.ndarray
    x_t: np.ndarray
    true_label: int
    steps_taken: int = 0

    def within_budget(self, eps: float) -> bool:
        return (
            float(np.max(np.abs(self.x_t - self.x0))) <= eps + BUDGET_TOL
            and float(self.x_t.min()) >= 0.0
            and float(self.x_t.max()) <= 1.0
        )


@dataclass(frozen=True)
class AttackerPolicy:
    """Which attacker plays, with what budget and estimator parameters.

    `attack=None` means "use the scenario's attack config". sigma/n_samples
    only matter for the NES soft black-box attacker.
    """

    kind: str
    attack: AttackConfig | None = None
    sigma: float = 1e-3
    n_samples: int = 20

    def __post_init__(self):
        if self.kind not in (PGD_WHITEBOX, NES_SOFTBOX, RANDOM_SIGN_HARDBOX):
            raise ValueError(f"unknown attacker kind {self.kind!r}")
        if self.sigma <= 0 or self.n_samples < 1:
            raise ValueError("need sigma > 0 and n_samples >= 1")


def sign_step(x: np.ndarray, grad: np.ndarray, alpha: float) -> np.ndarray:
    """x + alpha * sign(grad), with sign(0) defined as 0."""
    if x.shape != grad.shape:
        raise ShapeMismatchError(f"x shape {x.shape} != grad shape {grad.shape}")
    return x + alpha * np.sign(grad)


def project(x: np.ndarray, x0: np.ndarray, eps: float) -> np.ndarray:
    """Clamp into the eps-ball around x0, then into the [0, 1] box."""
    if x.shape != x0.shape:
        raise ShapeMismatchError(f"x shape {x.shape} != x0 shape {x0.shape}")
    return np.clip(np.clip(x, x0 - eps, x0 + eps), 0.0, 1.0)


def pgd_round_step(state: AttackState, grad: np.ndarray, config: AttackConfig) -> AttackState:
    """One in-game PGD step from the current candidate using a fresh gradient."""
    x_next = project(sign_step(state.x_t, grad, config.alpha), state.x0, config.eps)
    return replace(state, x_t=x_next, steps_taken=state.steps_taken + 1)


def random_start(x0: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    return project(x0 + rng.uniform(-eps, eps, size=x0.shape), x0, eps)


def pgd_full(
    gradient_oracle,
    x0: np.ndarray,
    true_label: int,
    config: AttackConfig,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, bool, int]:
    """Multi-step PGD against a fixed model, stopping at first misclassification.

    `gradient_oracle(x)` must return (loss gradient at the true label,
    predicted label) for the query x. Returns (x_adv, success, steps_used);
    steps_used counts gradient steps, so an input that is already
    misclassified succeeds with 0 steps.
    """
    x = np.asarray(x0, dtype=np.float64)
    if config.random_start:
        if rng is None:
            raise ValueError("random_start needs an rng")
        x = random_start(x, config.eps, rng)
    grad, pred = gradient_oracle(x)
    if pred != true_label:
        return x, True, 0
    for step in range(1, config.max_steps + 1):
        x = project(sign_step(x, grad, config.alpha), x0, config.eps)
        grad, pred = gradient_oracle(x)
        if pred != true_label:
            return x, True, step
    return x, False, config.max_steps


def pgd_attack_batch(
    params: nn.ModelParams,
    X: np.ndarray,
    labels: np.ndarray,
    eps: float,
    alpha: float,
    steps: int,
    rng: np.random.Generator | None = None,
    use_random_start: bool = False,
) -> np.ndarray:
    """Vectorized multi-step white-box PGD over a whole batch (no early stop).

    Used by adversarial training and Table-style evaluation, where the final
    perturbed batch is what matters.
    """
    X = np.asarray(X, dtype=np.float64)
    X_t = X
    if use_random_start:
        if rng is None:
            raise ValueError("random start needs an rng")
        X_t = project(X + rng.uniform(-eps, eps, size=X.shape), X, eps)
    for _ in range(steps):
        G = nn.batch_input_gradient(params, X_t, labels)
        X_t = project(sign_step(X_t, G, alpha), X, eps)
    return X_t


def nes_gradient_estimate(
    prob_oracle,
    x: np.ndarray,
    true_label: int,
    sigma: float,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Antithetic two-point NES estimate of the loss gradient at x.

    The loss is the cross-entropy implied by the oracle's probability
    vector: L(q) = -log p_true(q). Uses exactly 2 * n_samples oracle
    queries; on a constant loss the antithetic pairs cancel exactly.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    est = np.zeros_like(x)
    for _ in range(n_samples):
        u = rng.standard_normal(x.shape)
        loss_plus = _oracle_loss(prob_oracle, x + sigma * u, true_label)
        loss_minus = _oracle_loss(prob_oracle, x - sigma * u, true_label)
        est += (loss_plus - loss_minus) * u
    return est / (2.0 * sigma * n_samples)


def _oracle_loss(prob_oracle, q: np.ndarray, label: int) -> float:
    p = float(np.asarray(prob_oracle(q))[label])
    return -float(np.log(max(p, 1e-300)))


def random_sign_step(
    label_oracle,
    state: AttackState,
    config: AttackConfig,
    rng: np.random.Generator,
) -> AttackState:
    """Label-only random-sign probe: keep the proposal only on a label flip."""
    s = rng.integers(0, 2, size=state.x_t.shape) * 2 - 1
    proposal = project(state.x_t + config.alpha * s, state.x0, config.eps)
    kept = proposal if label_oracle(proposal) != state.true_label else state.x_t
    return replace(state, x_t=kept, steps_taken=state.steps_taken + 1)


class PgdWhiteboxAttacker:
    """One PGD step per round, driven by the gradient in the last response.

    The first query of an episode is the clean input: the attacker needs a
    returned gradient before it can step.
    """

    def __init__(self, policy: AttackerPolicy, config: AttackConfig):
        self.config = config

    def begin_episode(self, x0, true_label, rng, probe=None):
        self.state = AttackState(np.asarray(x0, dtype=np.float64), np.asarray(x0, dtype=np.float64), true_label)
        self._last_grad = None

    def next_query(self) -> np.ndarray:
        if self._last_grad is not None:
            self.state = pgd_round_step(self.state, self._last_grad, self.config)
        return self.state.x_t

    def observe(self, view) -> None:
        if view.loss_gradient is None:
            raise ValueError("white-box attacker got a response without a gradient")
        self._last_grad = view.loss_gradient


class NesSoftboxAttacker:
    """Soft black-box attacker: NES gradient estimate, then a PGD step.

    Gradient estimation spends 2 * n_samples auxiliary probe queries against
    the defender each round; only the committed query counts as the round's
    move. Probes are clipped to the input box but not to the eps-ball (they
    are exploration, not candidate adversarial examples).
    """

    def __init__(self, policy: AttackerPolicy, config: AttackConfig):
        self.config = config
        self.sigma = policy.sigma
        self.n_samples = policy.n_samples

    def begin_episode(self, x0, true_label, rng, probe=None):
        if probe is None:
            raise ValueError("NES attacker needs a probe oracle")
        self.state = AttackState(np.asarray(x0, dtype=np.float64), np.asarray(x0, dtype=np.float64), true_label)
        self.rng = rng
        self._probe = probe
        self._started = False

    def _probe_probs(self, q: np.ndarray) -> np.ndarray:
        view = self._probe(np.clip(q, 0.0, 1.0))
        if view.probs is None:
            raise ValueError("NES attacker needs probability outputs")
        return view.probs

    def next_query(self) -> np.ndarray:
        if self._started:
            est = nes_gradient_estimate(
                self._probe_probs,
                self.state.x_t,
                self.state.true_label,
                self.sigma,
                self.n_samples,
                self.rng,
            )
            self.state = pgd_round_step(self.state, est, self.config)
        self._started = True
        return self.state.x_t

    def observe(self, view) -> None:
        pass  # all information comes from probes


class RandomSignHardboxAttacker:
    """Hard black-box attacker: random sign proposals, kept only on label flips.

    Deliberately weak; it exercises the label-only threat model rather than
    chasing state-of-the-art black-box strength.
    """

    def __init__(self, policy: AttackerPolicy, config: AttackConfig):
        self.config = config

    def begin_episode(self, x0, true_label, rng, probe=None):
        self.state = AttackState(np.asarray(x0, dtype=np.float64), np.asarray(x0, dtype=np.float64), true_label)
        self.rng = rng
        self._pending: np.ndarray | None = None
        self._started = False

    def next_query(self) -> np.ndarray:
        if not self._started:
            self._started = True
            return self.state.x_t
        s = self.rng.integers(0, 2, size=self.state.x_t.shape) * 2 - 1
        proposal = project(self.state.x_t + self.config.alpha * s, self.state.x0, self.config.eps)
        self._pending = proposal
        return proposal

    def observe(self, view) -> None:
        if self._pending is not None:
            if view.label != self.state.true_label:
                self.state = replace(self.state, x_t=self._pending)
            self._pending = None
        self.state = replace(self.state, steps_taken=self.state.steps_taken + 1)


_AGENTS = {
    PGD_WHITEBOX: PgdWhiteboxAttacker,
    NES_SOFTBOX: NesSoftboxAttacker,
    RANDOM_SIGN_HARDBOX: RandomSignHardboxAttacker,
}


def make_attacker(policy: AttackerPolicy, config: AttackConfig):
    """Build a fresh per-episode attacker agent for the given policy."""
    return _AGENTS[policy.kind](policy, config)
