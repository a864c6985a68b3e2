"""The defender agent: a model pool, a selection policy, and truthful
threat-model-gated query responses.

The response label is always the responding model's argmax, whether or not
probabilities are exposed; the defender never lies. Which model answered is
recorded for instrumentation but stripped from the view handed to attacker
policies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import nn
from .errors import ShapeMismatchError

STATIC = "static"
UNIFORM_RANDOM = "uniform_random"


class ThreatModel(str, Enum):
    WHITE_BOX = "white_box"
    SOFT_BLACK_BOX = "soft_black_box"
    HARD_BLACK_BOX = "hard_black_box"


@dataclass
class DefensePool:
    """Ordered, immutable-after-construction pool of classifiers.

    All models must agree on input dimension and class count.
    """

    models: list[nn.ModelParams]

    def __post_init__(self):
        if not self.models:
            raise ValueError("defense pool must be nonempty")
        dims = {m.spec.input_dim for m in self.models}
        classes = {m.spec.num_classes for m in self.models}
        if len(dims) != 1 or len(classes) != 1:
            raise ValueError(
                f"pool models disagree on input dim {dims} or class count {classes}"
            )

    def __len__(self) -> int:
        return len(self.models)

    @property
    def names(self) -> list[str]:
        return [m.spec.name for m in self.models]

    @property
    def input_dim(self) -> int:
        return self.models[0].spec.input_dim

    @property
    def num_classes(self) -> int:
        return self.models[0].spec.num_classes


@dataclass(frozen=True)
class DefenderPolicy:
    """static(index): always the same model. uniform_random: fresh uniform
    pick per query (the moving-target defense)."""

    kind: str = UNIFORM_RANDOM
    index: int = 0

    def __post_init__(self):
        if self.kind not in (STATIC, UNIFORM_RANDOM):
            raise ValueError(f"unknown defender policy kind {self.kind!r}")
        if self.index < 0:
            raise ValueError("static index must be >= 0")


@dataclass(frozen=True)
class AttackerView:
    """The slice of a response that attacker policies are allowed to see."""

    label: int
    probs: np.ndarray | None
    loss_gradient: np.ndarray | None


@dataclass(frozen=True)
class QueryResponse:
    label: int
    probs: np.ndarray | None
    loss_gradient: np.ndarray | None
    responder_index: int  # instrumentation only, never shown to attackers

    def attacker_view(self) -> AttackerView:
        return AttackerView(self.label, self.probs, self.loss_gradient)


def select_model(policy: DefenderPolicy, pool: DefensePool, rng: np.random.Generator) -> int:
    """Pick the responding model; uniform_random consumes exactly one draw."""
    if policy.kind == STATIC:
        if policy.index >= len(pool):
            raise ValueError(f"static index {policy.index} >= pool size {len(pool)}")
        return policy.index
    return int(rng.integers(len(pool)))


def respond(
    pool: DefensePool,
    policy: DefenderPolicy,
    threat_model: ThreatModel,
    x: np.ndarray,
    true_label: int,
    rng: np.random.Generator,
) -> QueryResponse:
    """Answer one attacker query truthfully, gating fields by threat model.

    The white-box gradient is the loss gradient of the *selected* model at
    the episode's true label.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (pool.input_dim,):
        raise ShapeMismatchError(
            f"query shape {x.shape} != ({pool.input_dim},)"
        )
    idx = select_model(policy, pool, rng)
    params = pool.models[idx]
    logits, _ = nn.forward(params, x)
    label = int(np.argmax(logits))
    probs = None
    gradient = None
    if threat_model in (ThreatModel.WHITE_BOX, ThreatModel.SOFT_BLACK_BOX):
        probs = nn.softmax(logits)
    if threat_model == ThreatModel.WHITE_BOX:
        gradient = nn.input_gradient(params, x, true_label)
    return QueryResponse(label, probs, gradient, idx)


def classifies_correctly_all(pool: DefensePool, x: np.ndarray, true_label: int) -> bool:
    """True iff every model in the pool predicts the true label for x."""
    return all(nn.predict(m, x) == true_label for m in pool.models)


def all_correct_mask(pool: DefensePool, X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vectorized eligibility mask: samples every pool model gets right."""
    mask = np.ones(len(X), dtype=bool)
    for m in pool.models:
        mask &= nn.batch_predict(m, X) == labels
    return mask
