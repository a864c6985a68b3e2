"""The turn-based wargame: episode loop, end states, and multi-trial
experiments.

Protocol per round: the attacker commits one query of record, the defender
answers it under the scenario's threat model, and the engine checks the win
condition. The first query of an episode is the clean input (the attacker
needs a response before it can step), so rounds-to-win counts queries.

Every per-trial random stream is derived from (master_seed, trial_index)
via numpy's SeedSequence spawn keys, so trials are order-independent and
safe to run concurrently.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import nn
from .analysis import mean_ci95
from .attacks import (
    BUDGET_TOL,
    AttackConfig,
    AttackerPolicy,
    NES_SOFTBOX,
    PGD_WHITEBOX,
    RANDOM_SIGN_HARDBOX,
    make_attacker,
    project,
)
from .data import Dataset
from .defenses import (
    DefensePool,
    DefenderPolicy,
    ThreatModel,
    all_correct_mask,
    respond,
)
from .errors import BudgetViolationError, ScenarioError

ATTACKER = "attacker"
DEFENDER = "defender"

# spawn-key roles under (master_seed, trial_index, role)
_ROLE_ATTACKER = 0
_ROLE_DEFENDER = 1
# sample selection draws from its own lane, away from any trial index
_SELECTION_KEY = (2**32,)

_COMPATIBLE = {
    PGD_WHITEBOX: {ThreatModel.WHITE_BOX},
    NES_SOFTBOX: {ThreatModel.WHITE_BOX, ThreatModel.SOFT_BLACK_BOX},
    RANDOM_SIGN_HARDBOX: set(ThreatModel),
}


class WinCondition(str, Enum):
    RESPONDER_MISCLASSIFIES = "responder_misclassifies"
    ALL_MODELS_MISCLASSIFY = "all_models_misclassify"


@dataclass(frozen=True)
class ScenarioConfig:
    threat_model: ThreatModel
    attack: AttackConfig
    max_rounds: int = 20
    num_trials: int = 100
    win_condition: WinCondition = WinCondition.RESPONDER_MISCLASSIFIES
    master_seed: int = 0
    strict_budget: bool = False

    def __post_init__(self):
        if self.max_rounds < 1 or self.num_trials < 1:
            raise ValueError("max_rounds and num_trials must be >= 1")


@dataclass
class RoundRecord:
    round_index: int  # 1-based
    responder_index: int
    attacker_query_linf: float
    response_label: int
    misclassified: bool  # responding model's label != true label
    query: np.ndarray  # committed query, kept for gradient instrumentation
    budget_projected: bool = False
    probes_used: int = 0


@dataclass
class EpisodeResult:
    winner: str
    rounds_used: int
    final_x: np.ndarray
    x0: np.ndarray
    true_label: int
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def attacker_reward(self) -> int:
        return -self.rounds_used

    @property
    def defender_reward(self) -> int:
        return self.rounds_used


@dataclass
class ExperimentReport:
    mean_rounds: float | None  # over attacker-win episodes; None if no wins
    ci95_half_width: float | None
    attacker_win_rate: float
    adversarial_accuracy: float
    timeouts: int
    episodes: list[EpisodeResult]
    scenario: ScenarioConfig


def selection_rng(master_seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=_SELECTION_KEY))


def episode_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Order-free per-trial seed: child (master_seed, spawn_key=(trial,))."""
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index,))


def _episode_streams(seed) -> tuple[np.random.Generator, np.random.Generator]:
    if isinstance(seed, (int, np.integer)):
        seed = np.random.SeedSequence(int(seed))
    entropy = seed.entropy
    key = seed.spawn_key
    make = lambda role: np.random.default_rng(
        np.random.SeedSequence(entropy, spawn_key=key + (role,))
    )
    return make(_ROLE_ATTACKER), make(_ROLE_DEFENDER)


def select_eval_samples(
    dataset: Dataset, pool: DefensePool, num_trials: int, rng: np.random.Generator
) -> list[tuple[np.ndarray, int]]:
    """Uniform (without replacement) over samples every pool model classifies
    correctly."""
    mask = all_correct_mask(pool, dataset.inputs, dataset.labels)
    eligible = np.flatnonzero(mask)
    if len(eligible) < num_trials:
        raise ScenarioError(
            f"need {num_trials} samples correct under all pool models, found {len(eligible)}"
        )
    chosen = rng.choice(eligible, size=num_trials, replace=False)
    return [(dataset.inputs[i].copy(), int(dataset.labels[i])) for i in chosen]


def run_episode(
    attacker_policy,
    pool: DefensePool,
    defender_policy: DefenderPolicy,
    scenario: ScenarioConfig,
    sample: tuple[np.ndarray, int],
    seed,
) -> EpisodeResult:
    """Play one game on one sample. The attacker moves first each round; the
    defender answers truthfully. The episode ends on the win condition or
    after max_rounds (defender win).

    `attacker_policy` is normally an AttackerPolicy; an already-built agent
    (anything with begin_episode/next_query/observe) is accepted too, which
    lets tests play stub attackers. Out-of-budget attacker queries are
    projected back and flagged; in strict mode they abort the episode
    instead.
    """
    if isinstance(attacker_policy, AttackerPolicy):
        if scenario.threat_model not in _COMPATIBLE[attacker_policy.kind]:
            raise ScenarioError(
                f"attacker {attacker_policy.kind!r} is incompatible with "
                f"threat model {scenario.threat_model.value!r}"
            )
        attack = attacker_policy.attack or scenario.attack
        attacker = make_attacker(attacker_policy, attack)
    else:
        attacker = attacker_policy
    x0, true_label = sample
    x0 = np.asarray(x0, dtype=np.float64)
    attacker_rng, defender_rng = _episode_streams(seed)

    probe_count = [0]

    def probe(x: np.ndarray):
        probe_count[0] += 1
        return respond(
            pool, defender_policy, scenario.threat_model, x, true_label, defender_rng
        ).attacker_view()

    attacker.begin_episode(x0, true_label, attacker_rng, probe=probe)

    eps = scenario.attack.eps
    rounds: list[RoundRecord] = []
    winner = DEFENDER
    rounds_used = scenario.max_rounds
    final_x = x0
    for round_index in range(1, scenario.max_rounds + 1):
        probe_count[0] = 0
        q = np.asarray(attacker.next_query(), dtype=np.float64)
        linf = float(np.max(np.abs(q - x0)))
        flagged = linf > eps + BUDGET_TOL or q.min() < 0.0 or q.max() > 1.0
        if flagged:
            if scenario.strict_budget:
                raise BudgetViolationError(
                    f"round {round_index}: query linf {linf:g} exceeds eps {eps:g}"
                )
            q = project(q, x0, eps)
            linf = float(np.max(np.abs(q - x0)))
        response = respond(
            pool, defender_policy, scenario.threat_model, q, true_label, defender_rng
        )
        mis = response.label != true_label
        rounds.append(
            RoundRecord(
                round_index=round_index,
                responder_index=response.responder_index,
                attacker_query_linf=linf,
                response_label=response.label,
                misclassified=mis,
                query=q,
                budget_projected=flagged,
                probes_used=probe_count[0],
            )
        )
        final_x = q
        if scenario.win_condition == WinCondition.RESPONDER_MISCLASSIFIES:
            won = mis
        else:
            won = all(nn.predict(m, q) != true_label for m in pool.models)
        if won:
            winner = ATTACKER
            rounds_used = round_index
            break
        attacker.observe(response.attacker_view())
    return EpisodeResult(winner, rounds_used, final_x, x0, true_label, rounds)


def run_experiment(
    scenario: ScenarioConfig,
    dataset: Dataset,
    pool: DefensePool,
    attacker_policy: AttackerPolicy,
    defender_policy: DefenderPolicy,
    threads: int = 1,
) -> ExperimentReport:
    """num_trials independent episodes on all-correct samples, aggregated.

    Mean rounds (with its 95% CI) is taken over attacker-win episodes only;
    defender wins are reported separately as timeouts. Reports are identical
    for any thread count because every trial's randomness is derived from
    (master_seed, trial_index) alone.
    """
    samples = select_eval_samples(
        dataset, pool, scenario.num_trials, selection_rng(scenario.master_seed)
    )

    def one_trial(i: int) -> EpisodeResult:
        return run_episode(
            attacker_policy,
            pool,
            defender_policy,
            scenario,
            samples[i],
            episode_seed(scenario.master_seed, i),
        )

    indices = range(scenario.num_trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pex:
            episodes = list(pex.map(one_trial, indices))
    else:
        episodes = [one_trial(i) for i in indices]

    win_rounds = [e.rounds_used for e in episodes if e.winner == ATTACKER]
    timeouts = len(episodes) - len(win_rounds)
    if win_rounds:
        stats = mean_ci95(win_rounds)
        mean_rounds, ci = stats.mean, stats.ci95_half_width
    else:
        mean_rounds, ci = None, None
    win_rate = len(win_rounds) / len(episodes)
    return ExperimentReport(
        mean_rounds=mean_rounds,
        ci95_half_width=ci,
        attacker_win_rate=win_rate,
        adversarial_accuracy=1.0 - win_rate,
        timeouts=timeouts,
        episodes=episodes,
        scenario=scenario,
    )
