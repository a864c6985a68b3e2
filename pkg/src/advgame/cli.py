"""Command-line front end: train model pools, run wargame experiments, and
run gradient-similarity analyses from a single JSON config.

Verbs:
  advgame train      --config cfg.json [--out DIR]
  advgame wargame    --config cfg.json [--out DIR] [--threads N] [--strict-budget]
  advgame similarity --config cfg.json [--out DIR]

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from . import analysis, attacks, data, defenses, engine, models, nn
from .config import RunConfig, load_config
from .errors import AdvgameError, ConfigError, UndefinedSimilarityError
from .report import TOOL_VERSION, write_csv, write_json


def _build_datasets(cfg: RunConfig) -> tuple[data.Dataset, data.Dataset]:
    """Returns (training side, game/eval side)."""
    d = cfg.dataset
    if d["kind"] == "blobs":
        full = data.generate_blobs(
            d["num_classes"],
            d["dim"],
            d["samples_per_class"],
            d["center_spread"],
            d["noise_std"],
            d["seed"],
        )
    else:
        full = data.load_idx_pair(d["images"], d["labels"])
    if cfg.split is None:
        return full, full
    return data.split(full, cfg.split["train_fraction"], cfg.split["seed"])


def _build_models(cfg: RunConfig, train_ds: data.Dataset) -> dict[str, nn.ModelParams]:
    """Load models with a load path; train the rest deterministically."""
    out: dict[str, nn.ModelParams] = {}
    for mc in cfg.models:
        if mc.load_path is not None:
            _, params = models.load_model(mc.load_path, name=mc.name)
            out[mc.name] = params
        else:
            spec = nn.dense_mlp(train_ds.input_dim, mc.hidden, train_ds.num_classes, mc.name)
            params, _ = models.train(spec, train_ds, mc.train)
            out[mc.name] = params
    return out


def _eval_attack(cfg: RunConfig) -> attacks.AttackConfig:
    if cfg.evaluation is not None:
        return cfg.evaluation
    base = cfg.scenario.attack if cfg.scenario is not None else None
    if base is not None:
        return attacks.AttackConfig(base.eps, base.alpha, max_steps=10)
    return attacks.AttackConfig(8 / 255, 2 / 255, max_steps=10)


def cmd_train(cfg: RunConfig) -> None:
    """Train every model lacking a load path; write model files and a
    per-model accuracy table (natural + adversarial)."""
    train_ds, eval_ds = _build_datasets(cfg)
    built = _build_models(cfg, train_ds)
    attack = _eval_attack(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    model_docs = []
    for mc in cfg.models:
        params = built[mc.name]
        path = None
        if mc.load_path is None:
            path = cfg.output_dir / f"{mc.name}.mdl"
            models.save_model(params, params.spec, path)
        report = models.evaluate(params, eval_ds, attack)
        rows.append([mc.name, mc.mode, report.natural_accuracy, report.adversarial_accuracy])
        model_docs.append(
            {
                "name": mc.name,
                "train_method": mc.mode,
                "natural_accuracy": report.natural_accuracy,
                "adversarial_accuracy": report.adversarial_accuracy,
                "num_samples": report.num_samples,
                "file": str(path) if path else str(mc.load_path),
            }
        )

    doc = {"tool_version": TOOL_VERSION, "config": cfg.resolved, "models": model_docs}
    if "json" in cfg.output_formats:
        write_json(cfg.output_dir / "train_report.json", doc)
    if "csv" in cfg.output_formats:
        write_csv(
            cfg.output_dir / "models_eval.csv",
            ["model", "train_method", "natural_accuracy", "adversarial_accuracy"],
            rows,
        )


def _require_scenario(cfg: RunConfig) -> None:
    if cfg.scenario is None:
        raise ConfigError("this command needs a scenario section")


def cmd_wargame(cfg: RunConfig, threads: int = 1) -> None:
    """Run the configured experiment for every pool composition."""
    _require_scenario(cfg)
    train_ds, game_ds = _build_datasets(cfg)
    built = _build_models(cfg, train_ds)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    pool_docs = []
    rows = []
    for pc in cfg.pools:
        pool = defenses.DefensePool([built[name] for name in pc.model_names])
        report = engine.run_experiment(
            cfg.scenario, game_ds, pool, cfg.attacker, cfg.defender, threads=threads
        )
        episodes = [
            {"trial": i, "winner": e.winner, "rounds_used": e.rounds_used}
            for i, e in enumerate(report.episodes)
        ]
        pool_docs.append(
            {
                "pool": pc.name,
                "models": list(pc.model_names),
                "mean_rounds": report.mean_rounds,
                "ci95_half_width": report.ci95_half_width,
                "attacker_win_rate": report.attacker_win_rate,
                "adversarial_accuracy": report.adversarial_accuracy,
                "timeouts": report.timeouts,
                "episodes": episodes,
            }
        )
        rows.append(
            [
                pc.name,
                report.mean_rounds,
                report.ci95_half_width,
                report.attacker_win_rate,
                report.adversarial_accuracy,
                report.timeouts,
            ]
        )

    doc = {"tool_version": TOOL_VERSION, "config": cfg.resolved, "pools": pool_docs}
    if "json" in cfg.output_formats:
        write_json(cfg.output_dir / "wargame_report.json", doc)
    if "csv" in cfg.output_formats:
        write_csv(
            cfg.output_dir / "wargame_report.csv",
            ["pool", "mean_rounds", "ci95", "attacker_win_rate", "adversarial_accuracy", "timeouts"],
            rows,
        )


def cmd_similarity(cfg: RunConfig) -> None:
    """For each configured model pair: two short instrumented games on one
    shared sample (trials differ only in defender selection seed), reporting
    the per-round gradient cosine average and the final-perturbation cosine
    between the trials."""
    _require_scenario(cfg)
    if not cfg.analysis_pairs:
        raise ConfigError("similarity needs an analysis section with pairs")
    train_ds, game_ds = _build_datasets(cfg)
    built = _build_models(cfg, train_ds)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    base = cfg.scenario
    scenario = engine.ScenarioConfig(
        threat_model=base.threat_model,
        attack=base.attack,
        max_rounds=cfg.analysis_rounds,
        num_trials=1,
        win_condition=base.win_condition,
        master_seed=base.master_seed,
        strict_budget=base.strict_budget,
    )

    pair_docs = []
    rows = []
    for a_name, b_name in cfg.analysis_pairs:
        pool = defenses.DefensePool([built[a_name], built[b_name]])
        sample = engine.select_eval_samples(
            game_ds, pool, 1, engine.selection_rng(scenario.master_seed)
        )[0]
        trial_a = engine.run_episode(
            cfg.attacker, pool, cfg.defender, scenario, sample,
            engine.episode_seed(scenario.master_seed, 0),
        )
        trial_b = engine.run_episode(
            cfg.attacker, pool, cfg.defender, scenario, sample,
            engine.episode_seed(scenario.master_seed, 1),
        )
        record = analysis.instrument_episode_gradients(pool, (0, 1), trial_a)
        try:
            final_cos = analysis.final_perturbation_similarity(trial_a, trial_b)
        except UndefinedSimilarityError:
            final_cos = None
        pair_docs.append(
            {
                "pair": [a_name, b_name],
                "winner_trial0": trial_a.winner,
                "winner_trial1": trial_b.winner,
                "rounds_trial0": trial_a.rounds_used,
                "per_round_cosines": record.per_round_cosines,
                "round_avg": record.round_avg,
                "undefined_rounds": record.undefined_rounds,
                "final_image_cosine": final_cos,
            }
        )
        rows.append(
            [
                a_name,
                b_name,
                trial_a.winner,
                trial_b.winner,
                trial_a.rounds_used,
                record.round_avg,
                record.undefined_rounds,
                final_cos,
            ]
        )

    doc = {"tool_version": TOOL_VERSION, "config": cfg.resolved, "pairs": pair_docs}
    if "json" in cfg.output_formats:
        write_json(cfg.output_dir / "similarity_report.json", doc)
    if "csv" in cfg.output_formats:
        write_csv(
            cfg.output_dir / "similarity_report.csv",
            ["pair_a", "pair_b", "winner_trial0", "winner_trial1", "rounds_trial0",
             "round_avg_cosine", "undefined_rounds", "final_image_cosine"],
            rows,
        )


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advgame", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "wargame", "similarity"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
        p.add_argument(
            "--strict-budget",
            action="store_true",
            help="abort episodes on out-of-budget attacker queries instead of projecting",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, output_override=args.out, strict_budget=args.strict_budget)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "train":
            cmd_train(cfg)
        elif args.command == "wargame":
            cmd_wargame(cfg, threads=args.threads)
        else:
            cmd_similarity(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AdvgameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
