"""Aggregate statistics and the gradient-transferability analysis.

Round-level similarity compares the loss gradients of a designated model
pair at every query of an episode, regardless of which model actually
answered; trial-level similarity compares total perturbations between two
episodes on the same sample. Undefined cosines (zero vectors) are surfaced,
never silently coerced to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .defenses import DefensePool
from .errors import UndefinedSimilarityError

Z_95 = 1.96  # normal-approximation 95% quantile, pinned for reproducibility
_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class StatSummary:
    n: int
    mean: float
    sample_std: float
    ci95_half_width: float


@dataclass
class SimilarityRecord:
    pair: tuple[int, int]
    per_round_cosines: list[float]
    round_avg: float | None
    undefined_rounds: int = 0
    final_perturbation_cosine: float | None = None


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a| |b|), clamped into [-1, 1]. Raises on (near-)zero vectors."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < _NORM_FLOOR or nb < _NORM_FLOOR:
        raise UndefinedSimilarityError(
            f"cosine undefined for vector norms ({na:g}, {nb:g})"
        )
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


def mean_ci95(values) -> StatSummary:
    """Mean, sample (n-1) std, and 1.96 * s / sqrt(n) half-width."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("mean_ci95 needs at least one value")
    n = int(values.size)
    mean = float(values.mean())
    if n < 2:
        return StatSummary(n, mean, 0.0, 0.0)
    std = float(values.std(ddof=1))
    return StatSummary(n, mean, std, Z_95 * std / math.sqrt(n))


def instrument_episode_gradients(pool: DefensePool, pair: tuple[int, int], episode) -> SimilarityRecord:
    """Per-round loss-gradient cosine between `pair` models over an episode.

    Both gradients are evaluated defender-side at every recorded query and
    the episode's true label. Rounds where either gradient vanishes are
    excluded from the average and counted.
    """
    ia, ib = pair
    if not (0 <= ia < len(pool) and 0 <= ib < len(pool)):
        raise ValueError(f"pair {pair} out of range for pool of {len(pool)}")
    cosines: list[float] = []
    undefined = 0
    for record in episode.rounds:
        ga = nn.input_gradient(pool.models[ia], record.query, episode.true_label)
        gb = nn.input_gradient(pool.models[ib], record.query, episode.true_label)
        try:
            cosines.append(cosine_similarity(ga, gb))
        except UndefinedSimilarityError:
            undefined += 1
    round_avg = float(np.mean(cosines)) if cosines else None
    return SimilarityRecord((ia, ib), cosines, round_avg, undefined)


def final_perturbation_similarity(result_a, result_b) -> float:
    """Cosine between two episodes' total perturbations from the same clean input."""
    if not np.array_equal(result_a.x0, result_b.x0) or result_a.true_label != result_b.true_label:
        raise ValueError("episodes must share the same clean input and label")
    return cosine_similarity(result_a.final_x - result_a.x0, result_b.final_x - result_b.x0)


def adversarial_accuracy(results) -> float:
    """Fraction of episodes the defender survived (attacker failed)."""
    if not results:
        raise ValueError("adversarial_accuracy needs at least one episode")
    wins = sum(1 for r in results if r.winner == "defender")
    return wins / len(results)
