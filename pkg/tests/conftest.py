"""Session-scoped fixtures: the frozen desk-scale datasets and model pairs
used across the suite and by the acceptance tests.

Training is deterministic in (seed, dataset, config), so these fixtures
always produce bit-identical models; the expected behaviors asserted
against them were verified once and hold for good.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from advgame import attacks, data, models, nn


@dataclass
class ModelPairFixture:
    dataset: data.Dataset
    train_ds: data.Dataset
    test_ds: data.Dataset
    natural: nn.ModelParams
    adversarial: nn.ModelParams
    natural2: nn.ModelParams | None = None
    train_seconds: float = 0.0
    extras: dict = field(default_factory=dict)


@pytest.fixture(scope="session")
def blob64():
    """10-class d=64 blobs with a brittle natural net (hot lr) and a robust
    adversarially trained one."""
    t0 = time.perf_counter()
    ds = data.generate_blobs(10, 64, 60, 0.3, 0.05, seed=11)
    train_ds, test_ds = data.split(ds, 0.7, seed=3)
    nat, _ = models.train(
        nn.dense_mlp(64, [32], 10, "nat"),
        train_ds,
        models.TrainingConfig(epochs=30, seed=1, learning_rate=0.5),
    )
    adv, _ = models.train(
        nn.dense_mlp(64, [32], 10, "adv"),
        train_ds,
        models.TrainingConfig(
            epochs=30, seed=2, learning_rate=0.2,
            mode="adversarial", adv_eps=0.07, adv_alpha=0.0175, adv_steps=10,
        ),
    )
    return ModelPairFixture(ds, train_ds, test_ds, nat, adv,
                            train_seconds=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def digits16(tmp_path_factory):
    """Real image task: sklearn's 8x8 digits upscaled to 16x16, routed
    through the IDX file format, with natural / adversarial / second-natural
    dense nets."""
    t0 = time.perf_counter()
    from sklearn.datasets import load_digits

    raw = load_digits()
    up = np.repeat(np.repeat(raw.images / 16.0, 2, axis=1), 2, axis=2)
    built = data.Dataset(
        up.reshape(len(up), -1), raw.target.astype(np.int64), 10,
        name="digits16", image_shape=(16, 16),
    )
    idx_dir = tmp_path_factory.mktemp("digits16-idx")
    images, labels = idx_dir / "images.idx", idx_dir / "labels.idx"
    data.write_idx_pair(built, images, labels)
    ds = data.load_idx_pair(images, labels)
    train_ds, test_ds = data.split(ds, 0.7, seed=3)

    nat, _ = models.train(
        nn.dense_mlp(256, [32], 10, "nat"),
        train_ds,
        models.TrainingConfig(epochs=30, seed=1, learning_rate=0.2),
    )
    adv, _ = models.train(
        nn.dense_mlp(256, [32], 10, "adv"),
        train_ds,
        models.TrainingConfig(
            epochs=30, seed=2, learning_rate=0.2,
            mode="adversarial", adv_eps=0.09, adv_alpha=0.0225, adv_steps=10,
        ),
    )
    nat2, _ = models.train(
        nn.dense_mlp(256, [32], 10, "nat2"),
        train_ds,
        models.TrainingConfig(epochs=30, seed=7, learning_rate=0.2),
    )
    return ModelPairFixture(ds, train_ds, test_ds, nat, adv, nat2,
                            train_seconds=time.perf_counter() - t0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible PASS/FAIL line per acceptance criterion."""
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call" or "test_acceptance" not in item.nodeid:
        return
    tr = item.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None:
        return
    label = item.name.replace("test_", "", 1)
    status = "PASS" if rep.passed else "FAIL"
    tr.write_line(f"ACCEPTANCE {label}: {status} ({rep.duration:.2f}s)")


GAME_ATTACK = attacks.AttackConfig(eps=0.1, alpha=0.025, max_steps=20)
EVAL_ATTACK = attacks.AttackConfig(eps=0.1, alpha=0.025, max_steps=10)
