"""Training, evaluation, and persistence of the small classifiers that
populate defender pools.

Training is plain SGD, deterministic in (seed, dataset, config): the
per-epoch shuffle and any adversarial random starts come from generators
derived from the config seed. Adversarial mode is Madry-style: each batch
is replaced by PGD examples crafted against the current parameters before
the SGD step.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .attacks import AttackConfig, pgd_attack_batch
from .data import Dataset
from .errors import ModelFormatError, ModelVersionError, TrainingDivergenceError

MODEL_MAGIC = b"ARESMDL1"
_KIND_CODES = {nn.DENSE: 0, nn.RELU: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

NATURAL = "natural"
ADVERSARIAL = "adversarial"


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.5
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    mode: str = NATURAL
    adv_eps: float = 0.1
    adv_alpha: float = 0.025
    adv_steps: int = 10
    adv_random_start: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.mode not in (NATURAL, ADVERSARIAL):
            raise ValueError(f"unknown training mode {self.mode!r}")
        if self.adv_eps < 0 or self.adv_alpha <= 0 or self.adv_steps < 1:
            raise ValueError("need adv_eps >= 0, adv_alpha > 0, adv_steps >= 1")


@dataclass(frozen=True)
class EvalReport:
    natural_accuracy: float
    adversarial_accuracy: float | None
    num_samples: int


def init_params(spec: nn.ModelSpec, seed: int) -> nn.ModelParams:
    """Zero-mean Gaussian weights scaled by 1/sqrt(in_dim); zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for layer in spec.dense_layers:
        scale = 1.0 / np.sqrt(layer.in_dim)
        weights.append(rng.normal(0.0, scale, size=(layer.out_dim, layer.in_dim)))
        biases.append(np.zeros(layer.out_dim))
    return nn.ModelParams(spec, weights, biases)


def train(
    spec: nn.ModelSpec, dataset: Dataset, config: TrainingConfig
) -> tuple[nn.ModelParams, list[float]]:
    """SGD-train a classifier; returns (params, per-epoch mean losses).

    Adversarial mode crafts a fixed-start (optionally random-start) PGD
    batch against the current parameters before every step; adv_eps == 0
    degenerates to natural training exactly.
    """
    if np.any(dataset.labels >= spec.num_classes):
        raise ValueError("dataset labels exceed the model's class count")
    params = init_params(spec, config.seed)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(1,)))
    start_rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(2,)))
    adversarial = config.mode == ADVERSARIAL

    n = len(dataset)
    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        perm = shuffle_rng.permutation(n)
        total_loss = 0.0
        for batch_idx, lo in enumerate(range(0, n, config.batch_size)):
            take = perm[lo : lo + config.batch_size]
            X, y = dataset.inputs[take], dataset.labels[take]
            if adversarial:
                X = pgd_attack_batch(
                    params,
                    X,
                    y,
                    config.adv_eps,
                    config.adv_alpha,
                    config.adv_steps,
                    rng=start_rng,
                    use_random_start=config.adv_random_start,
                )
            grads, loss = nn.param_gradients(params, X, y)
            if not np.isfinite(loss):
                raise TrainingDivergenceError("training loss became non-finite", epoch, batch_idx)
            new_w = [w - config.learning_rate * g for w, g in zip(params.weights, grads.weights)]
            new_b = [b - config.learning_rate * g for b, g in zip(params.biases, grads.biases)]
            if not all(np.all(np.isfinite(a)) for a in new_w + new_b):
                raise TrainingDivergenceError("parameters became non-finite", epoch, batch_idx)
            params = nn.ModelParams(spec, new_w, new_b)
            total_loss += loss * len(take)
        epoch_losses.append(total_loss / n)
    return params, epoch_losses


def evaluate(
    params: nn.ModelParams,
    dataset: Dataset,
    attack: AttackConfig | None = None,
    rng: np.random.Generator | None = None,
) -> EvalReport:
    """Natural accuracy, plus accuracy after a full PGD attack if given one."""
    preds = nn.batch_predict(params, dataset.inputs)
    natural = float(np.mean(preds == dataset.labels))
    adversarial = None
    if attack is not None:
        X_adv = pgd_attack_batch(
            params,
            dataset.inputs,
            dataset.labels,
            attack.eps,
            attack.alpha,
            attack.max_steps,
            rng=rng,
            use_random_start=attack.random_start,
        )
        adv_preds = nn.batch_predict(params, X_adv)
        adversarial = float(np.mean(adv_preds == dataset.labels))
    return EvalReport(natural, adversarial, len(dataset))


# --- model files -----------------------------------------------------------
#
# Layout (all integers little-endian int32, all reals little-endian float64):
#   magic "ARESMDL1"
#   layer_count, then per layer: kind (0=dense, 1=relu), in_dim, out_dim
#   num_classes
#   per dense layer in declaration order: weight matrix (row-major), bias


def save_model(params: nn.ModelParams, spec: nn.ModelSpec, path) -> None:
    if params.spec.layers != spec.layers or params.spec.num_classes != spec.num_classes:
        raise ValueError("params were built for a different spec")
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<i", len(spec.layers)))
        for layer in spec.layers:
            dims = (layer.in_dim, layer.out_dim) if layer.kind == nn.DENSE else (0, 0)
            f.write(struct.pack("<iii", _KIND_CODES[layer.kind], *dims))
        f.write(struct.pack("<i", spec.num_classes))
        for w, b in zip(params.weights, params.biases):
            f.write(w.astype("<f8").tobytes())
            f.write(b.astype("<f8").tobytes())


def load_model(path, name: str | None = None) -> tuple[nn.ModelSpec, nn.ModelParams]:
    """Read a model file back; bit-exact inverse of save_model.

    The wire format carries no name, so the model is named after the file
    stem unless one is given.
    """
    blob = Path(path).read_bytes()
    if len(blob) < len(MODEL_MAGIC):
        raise ModelFormatError("file too short for magic", len(blob))
    magic = blob[: len(MODEL_MAGIC)]
    if magic != MODEL_MAGIC:
        if magic[:7] == MODEL_MAGIC[:7]:
            raise ModelVersionError(f"unsupported model version tag {magic!r}")
        raise ModelFormatError(f"bad magic {magic!r}", 0)
    offset = len(MODEL_MAGIC)

    def read_i32() -> int:
        nonlocal offset
        if offset + 4 > len(blob):
            raise ModelFormatError("truncated header", offset)
        (value,) = struct.unpack_from("<i", blob, offset)
        offset += 4
        return value

    layer_count = read_i32()
    if layer_count < 1:
        raise ModelFormatError(f"bad layer count {layer_count}", offset - 4)
    layers = []
    for _ in range(layer_count):
        kind_code, in_dim, out_dim = read_i32(), read_i32(), read_i32()
        if kind_code not in _KIND_NAMES:
            raise ModelFormatError(f"unknown layer kind code {kind_code}", offset - 12)
        kind = _KIND_NAMES[kind_code]
        layers.append(
            nn.LayerSpec.dense(in_dim, out_dim) if kind == nn.DENSE else nn.LayerSpec.relu()
        )
    num_classes = read_i32()
    spec = nn.ModelSpec(tuple(layers), num_classes, name or Path(path).stem)

    weights, biases = [], []
    for layer in spec.dense_layers:
        for shape in ((layer.out_dim, layer.in_dim), (layer.out_dim,)):
            count = int(np.prod(shape))
            end = offset + 8 * count
            if end > len(blob):
                raise ModelFormatError("truncated parameter tensor", offset)
            arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
            (weights if len(shape) == 2 else biases).append(
                arr.astype(np.float64).reshape(shape)
            )
            offset = end
    if offset != len(blob):
        raise ModelFormatError(f"{len(blob) - offset} trailing bytes", offset)
    return spec, nn.ModelParams(spec, weights, biases)
