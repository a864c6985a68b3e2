"""Declarative JSON run configs: parsing, strict validation, defaulting.

A config document has sections:

  dataset     required  blobs parameters or an IDX file pair
  split       optional  train/game split (games use the held-out side)
  models      required  list of named models, each trained here or loaded
  evaluation  optional  PGD used for per-model accuracy reports
  scenario    wargame   threat model, attack, pools, seeds, win condition
  analysis    similarity list of model pairs plus a round cap (default 10)
  output      optional  directory and formats ("json", "csv")

Every field is validated against a whitelist so typos fail fast, and the
fully defaulted document (the "resolved" echo) is embedded in every report,
making reports self-describing and re-runnable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .attacks import AttackConfig, AttackerPolicy
from .defenses import DefenderPolicy, ThreatModel
from .engine import ScenarioConfig, WinCondition
from .errors import ConfigError
from .models import TrainingConfig

DEFAULT_EPS = 8 / 255
DEFAULT_ALPHA = 2 / 255
DEFAULT_MAX_ROUNDS = 20
DEFAULT_NUM_TRIALS = 100
DEFAULT_ANALYSIS_ROUNDS = 10


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return section[key]


@dataclass
class PoolConfig:
    name: str
    model_names: list[str]


@dataclass
class ModelConfig:
    name: str
    hidden: list[int]
    train: TrainingConfig | None
    load_path: Path | None
    mode: str  # "natural" / "adversarial" / "loaded"


@dataclass
class RunConfig:
    base_dir: Path
    dataset: dict
    split: dict | None
    models: list[ModelConfig]
    evaluation: AttackConfig | None
    scenario: ScenarioConfig | None
    attacker: AttackerPolicy | None
    defender: DefenderPolicy | None
    pools: list[PoolConfig]
    analysis_pairs: list[tuple[str, str]]
    analysis_rounds: int
    output_dir: Path
    output_formats: list[str]
    resolved: dict = field(default_factory=dict)


def load_config(
    path, output_override: str | None = None, strict_budget: bool = False
) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _check_keys(
        raw,
        {"dataset", "split", "models", "evaluation", "scenario", "analysis", "output"},
        str(path),
    )

    base_dir = path.parent
    dataset = _parse_dataset(raw.get("dataset"), base_dir)
    split = _parse_split(raw.get("split"))
    models = _parse_models(raw.get("models"), base_dir)
    evaluation = _parse_evaluation(raw.get("evaluation"))
    output_dir, formats = _parse_output(raw.get("output"), base_dir, output_override)

    scenario = attacker = defender = None
    pools: list[PoolConfig] = []
    if "scenario" in raw:
        scenario, attacker, defender, pools = _parse_scenario(
            raw["scenario"], [m.name for m in models], strict_budget
        )

    pairs: list[tuple[str, str]] = []
    analysis_rounds = DEFAULT_ANALYSIS_ROUNDS
    if "analysis" in raw:
        pairs, analysis_rounds = _parse_analysis(raw["analysis"], [m.name for m in models])

    cfg = RunConfig(
        base_dir=base_dir,
        dataset=dataset,
        split=split,
        models=models,
        evaluation=evaluation,
        scenario=scenario,
        attacker=attacker,
        defender=defender,
        pools=pools,
        analysis_pairs=pairs,
        analysis_rounds=analysis_rounds,
        output_dir=output_dir,
        output_formats=formats,
    )
    cfg.resolved = _resolved_echo(cfg)
    return cfg


def _parse_dataset(section, base_dir: Path) -> dict:
    if section is None:
        raise ConfigError("config needs exactly one dataset section")
    kind = _require(section, "kind", "dataset")
    if kind == "blobs":
        _check_keys(
            section,
            {"kind", "num_classes", "dim", "samples_per_class", "center_spread", "noise_std", "seed"},
            "dataset",
        )
        return {
            "kind": "blobs",
            "num_classes": int(_require(section, "num_classes", "dataset")),
            "dim": int(_require(section, "dim", "dataset")),
            "samples_per_class": int(_require(section, "samples_per_class", "dataset")),
            "center_spread": float(section.get("center_spread", 0.3)),
            "noise_std": float(section.get("noise_std", 0.05)),
            "seed": int(section.get("seed", 0)),
        }
    if kind == "idx":
        _check_keys(section, {"kind", "images", "labels"}, "dataset")
        return {
            "kind": "idx",
            "images": str(base_dir / _require(section, "images", "dataset")),
            "labels": str(base_dir / _require(section, "labels", "dataset")),
        }
    raise ConfigError(f"dataset: unknown kind {kind!r}")


def _parse_split(section) -> dict | None:
    if section is None:
        return None
    _check_keys(section, {"train_fraction", "seed"}, "split")
    return {
        "train_fraction": float(_require(section, "train_fraction", "split")),
        "seed": int(section.get("seed", 0)),
    }


def _parse_models(section, base_dir: Path) -> list[ModelConfig]:
    if not section or not isinstance(section, list):
        raise ConfigError("models: need a nonempty list")
    out: list[ModelConfig] = []
    seen: set[str] = set()
    for i, entry in enumerate(section):
        where = f"models[{i}]"
        _check_keys(entry, {"name", "hidden", "train", "load"}, where)
        name = str(_require(entry, "name", where))
        if name in seen:
            raise ConfigError(f"{where}: duplicate model name {name!r}")
        seen.add(name)
        hidden = [int(h) for h in entry.get("hidden", [])]
        if "load" in entry:
            out.append(ModelConfig(name, hidden, None, base_dir / entry["load"], "loaded"))
            continue
        tsec = entry.get("train", {})
        _check_keys(
            tsec,
            {"mode", "learning_rate", "epochs", "batch_size", "seed",
             "adv_eps", "adv_alpha", "adv_steps", "adv_random_start"},
            f"{where}.train",
        )
        try:
            tc = TrainingConfig(
                learning_rate=float(tsec.get("learning_rate", 0.5)),
                epochs=int(tsec.get("epochs", 20)),
                batch_size=int(tsec.get("batch_size", 32)),
                seed=int(tsec.get("seed", 0)),
                mode=str(tsec.get("mode", "natural")),
                adv_eps=float(tsec.get("adv_eps", 0.1)),
                adv_alpha=float(tsec.get("adv_alpha", 0.025)),
                adv_steps=int(tsec.get("adv_steps", 10)),
                adv_random_start=bool(tsec.get("adv_random_start", False)),
            )
        except ValueError as exc:
            raise ConfigError(f"{where}.train: {exc}") from exc
        out.append(ModelConfig(name, hidden, tc, None, tc.mode))
    return out


def _parse_attack(section, where: str) -> AttackConfig:
    _check_keys(section, {"eps", "alpha", "max_steps", "random_start"}, where)
    try:
        return AttackConfig(
            eps=float(section.get("eps", DEFAULT_EPS)),
            alpha=float(section.get("alpha", DEFAULT_ALPHA)),
            max_steps=int(section.get("max_steps", DEFAULT_MAX_ROUNDS)),
            random_start=bool(section.get("random_start", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_evaluation(section) -> AttackConfig | None:
    if section is None:
        return None
    cfg = dict(section)
    cfg.setdefault("max_steps", 10)
    return _parse_attack(cfg, "evaluation")


def _parse_scenario(section, model_names: list[str], strict_budget: bool):
    _check_keys(
        section,
        {"threat_model", "max_rounds", "num_trials", "attack", "win_condition",
         "master_seed", "attacker", "defender", "pools"},
        "scenario",
    )
    try:
        threat = ThreatModel(section.get("threat_model", "white_box"))
    except ValueError as exc:
        raise ConfigError(f"scenario: unknown threat_model {section.get('threat_model')!r}") from exc
    try:
        win = WinCondition(section.get("win_condition", "responder_misclassifies"))
    except ValueError as exc:
        raise ConfigError(f"scenario: unknown win_condition {section.get('win_condition')!r}") from exc
    attack = _parse_attack(section.get("attack", {}), "scenario.attack")
    try:
        scenario = ScenarioConfig(
            threat_model=threat,
            attack=attack,
            max_rounds=int(section.get("max_rounds", DEFAULT_MAX_ROUNDS)),
            num_trials=int(section.get("num_trials", DEFAULT_NUM_TRIALS)),
            win_condition=win,
            master_seed=int(section.get("master_seed", 0)),
            strict_budget=strict_budget,
        )
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc

    asec = section.get("attacker", {})
    _check_keys(asec, {"kind", "sigma", "n_samples"}, "scenario.attacker")
    try:
        attacker = AttackerPolicy(
            kind=str(asec.get("kind", "pgd_whitebox")),
            sigma=float(asec.get("sigma", 1e-3)),
            n_samples=int(asec.get("n_samples", 20)),
        )
    except ValueError as exc:
        raise ConfigError(f"scenario.attacker: {exc}") from exc

    dsec = section.get("defender", {})
    _check_keys(dsec, {"policy", "index"}, "scenario.defender")
    try:
        defender = DefenderPolicy(
            kind=str(dsec.get("policy", "uniform_random")),
            index=int(dsec.get("index", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"scenario.defender: {exc}") from exc

    pools_raw = section.get("pools")
    if pools_raw is None:
        pools = [PoolConfig("all", list(model_names))]
    else:
        pools = []
        seen: set[str] = set()
        for i, entry in enumerate(pools_raw):
            where = f"scenario.pools[{i}]"
            _check_keys(entry, {"name", "models"}, where)
            name = str(_require(entry, "name", where))
            if name in seen:
                raise ConfigError(f"{where}: duplicate pool name {name!r}")
            seen.add(name)
            members = [str(m) for m in _require(entry, "models", where)]
            if not members:
                raise ConfigError(f"{where}: pool must list at least one model")
            for m in members:
                if m not in model_names:
                    raise ConfigError(f"{where}: undefined model {m!r}")
            pools.append(PoolConfig(name, members))
    return scenario, attacker, defender, pools


def _parse_analysis(section, model_names: list[str]):
    _check_keys(section, {"pairs", "max_rounds"}, "analysis")
    pairs_raw = _require(section, "pairs", "analysis")
    pairs: list[tuple[str, str]] = []
    for i, entry in enumerate(pairs_raw):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ConfigError(f"analysis.pairs[{i}]: expected a [a, b] pair")
        a, b = str(entry[0]), str(entry[1])
        for m in (a, b):
            if m not in model_names:
                raise ConfigError(f"analysis.pairs[{i}]: undefined model {m!r}")
        pairs.append((a, b))
    if not pairs:
        raise ConfigError("analysis: need at least one pair")
    rounds = int(section.get("max_rounds", DEFAULT_ANALYSIS_ROUNDS))
    if rounds < 1:
        raise ConfigError("analysis.max_rounds must be >= 1")
    return pairs, rounds


def _parse_output(section, base_dir: Path, override: str | None):
    section = section or {}
    _check_keys(section, {"directory", "formats"}, "output")
    directory = Path(override) if override else base_dir / section.get("directory", "out")
    formats = [str(f) for f in section.get("formats", ["json", "csv"])]
    for f in formats:
        if f not in ("json", "csv"):
            raise ConfigError(f"output.formats: unknown format {f!r}")
    return directory, formats


def _attack_echo(attack: AttackConfig) -> dict:
    return {
        "eps": attack.eps,
        "alpha": attack.alpha,
        "max_steps": attack.max_steps,
        "random_start": attack.random_start,
    }


def _resolved_echo(cfg: RunConfig) -> dict:
    """The fully defaulted config document embedded in each report."""
    doc: dict = {"dataset": dict(cfg.dataset)}
    if cfg.split is not None:
        doc["split"] = dict(cfg.split)
    doc["models"] = []
    for m in cfg.models:
        entry: dict = {"name": m.name, "hidden": list(m.hidden)}
        if m.load_path is not None:
            entry["load"] = str(m.load_path)
        else:
            tc = m.train
            entry["train"] = {
                "mode": tc.mode,
                "learning_rate": tc.learning_rate,
                "epochs": tc.epochs,
                "batch_size": tc.batch_size,
                "seed": tc.seed,
                "adv_eps": tc.adv_eps,
                "adv_alpha": tc.adv_alpha,
                "adv_steps": tc.adv_steps,
                "adv_random_start": tc.adv_random_start,
            }
        doc["models"].append(entry)
    if cfg.evaluation is not None:
        doc["evaluation"] = _attack_echo(cfg.evaluation)
    if cfg.scenario is not None:
        doc["scenario"] = {
            "threat_model": cfg.scenario.threat_model.value,
            "max_rounds": cfg.scenario.max_rounds,
            "num_trials": cfg.scenario.num_trials,
            "attack": _attack_echo(cfg.scenario.attack),
            "win_condition": cfg.scenario.win_condition.value,
            "master_seed": cfg.scenario.master_seed,
            "strict_budget": cfg.scenario.strict_budget,
            "attacker": {
                "kind": cfg.attacker.kind,
                "sigma": cfg.attacker.sigma,
                "n_samples": cfg.attacker.n_samples,
            },
            "defender": {"policy": cfg.defender.kind, "index": cfg.defender.index},
            "pools": [{"name": p.name, "models": list(p.model_names)} for p in cfg.pools],
        }
    if cfg.analysis_pairs:
        doc["analysis"] = {
            "pairs": [[a, b] for a, b in cfg.analysis_pairs],
            "max_rounds": cfg.analysis_rounds,
        }
    doc["output"] = {"directory": str(cfg.output_dir), "formats": list(cfg.output_formats)}
    return doc
