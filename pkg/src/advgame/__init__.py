"""advgame: a turn-based adversarial-ML wargame at desk scale.

An attacker agent (white-box PGD, soft black-box NES, or label-only random
search) plays rounds against a defender that answers queries from a pool of
small dense classifiers, optionally as a moving-target defense. The package
covers the full loop: data, training (natural and adversarial), attacks,
truthful threat-model-gated responses, the game engine, and the gradient
transferability analysis.
"""

from .analysis import (
    SimilarityRecord,
    StatSummary,
    adversarial_accuracy,
    cosine_similarity,
    final_perturbation_similarity,
    instrument_episode_gradients,
    mean_ci95,
)
from .attacks import (
    AttackConfig,
    AttackState,
    AttackerPolicy,
    nes_gradient_estimate,
    pgd_attack_batch,
    pgd_full,
    pgd_round_step,
    project,
    random_sign_step,
    sign_step,
)
from .data import Dataset, generate_blobs, load_idx_pair, split, write_idx_pair
from .defenses import (
    AttackerView,
    DefensePool,
    DefenderPolicy,
    QueryResponse,
    ThreatModel,
    classifies_correctly_all,
    respond,
    select_model,
)
from .engine import (
    EpisodeResult,
    ExperimentReport,
    RoundRecord,
    ScenarioConfig,
    WinCondition,
    run_episode,
    run_experiment,
    select_eval_samples,
)
from .errors import (
    AdvgameError,
    BudgetViolationError,
    ConfigError,
    DatasetError,
    IdxFormatError,
    ModelFormatError,
    ModelVersionError,
    ScenarioError,
    ShapeMismatchError,
    TrainingDivergenceError,
    UndefinedSimilarityError,
)
from .models import (
    EvalReport,
    TrainingConfig,
    evaluate,
    init_params,
    load_model,
    save_model,
    train,
)
from .nn import (
    ForwardTrace,
    LayerSpec,
    ModelParams,
    ModelSpec,
    Tensor,
    dense_mlp,
    forward,
    input_gradient,
    param_gradients,
    softmax_cross_entropy,
)

__version__ = "0.1.0"
