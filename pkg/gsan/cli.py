"""``gsan`` command line: generate, train, eval, propcheck.

Exit codes: 0 success, 1 failure, 2 invalid config or a vacuous property run.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .checkpoint import check_compatible, load_checkpoint, save_checkpoint
from .config import TASKS, RunConfig, config_dict, load_run_config
from .datasets import TaskDataset, generate_for_config, load_archive, save_archive
from .errors import ConfigError, EmptyOrder, GsanError
from .evaluation import attention_histograms, evaluate
from .logger import logger, setup_logging
from .models import SimplicialModel
from .operators import betti_number
from .propcheck import CHECKS, FAULTS, run_propcheck
from .settings import get_settings
from .training import Trainer

FORMAT_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2

_log = logging.getLogger(__name__)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def _betti_numbers(dataset: TaskDataset) -> list[int | None]:
    out = []
    for k in range(dataset.complex.max_order + 1):
        try:
            out.append(betti_number(dataset.complex, k))
        except EmptyOrder:
            out.append(None)
    return out


def _run_dir(config: RunConfig) -> Path:
    return Path(config.resolved_out())


def cmd_generate(config: RunConfig) -> Path:
    dataset = generate_for_config(config)
    out = save_archive(dataset, _run_dir(config) / "dataset")
    summary = {**dataset.summary(), "betti": _betti_numbers(dataset)}
    _log.info("dataset generated task=%s sizes=%s betti=%s", config.task, summary["sizes"], summary["betti"])
    print(json.dumps(summary, sort_keys=True))
    return out


def _archive_mismatch(dataset: TaskDataset, config: RunConfig) -> str | None:
    expected = config.dataset.model_dump(exclude={"kind"})
    for field, found, wanted in (
        ("task", dataset.task, config.task),
        ("seed", dataset.seed, config.seed),
        ("params", dataset.params, expected),
    ):
        if found != wanted:
            return f"archive {field}={found!r}, config {field}={wanted!r}"
    return None


def _dataset_for(config: RunConfig) -> TaskDataset:
    archive = _run_dir(config) / "dataset"
    if not (archive / "meta.json").exists():
        _log.info("no archive at %s; generating", archive)
        cmd_generate(config)
        return load_archive(archive)
    dataset = load_archive(archive)
    mismatch = _archive_mismatch(dataset, config)
    if mismatch is not None:
        _log.warning("stale archive at %s (%s); regenerating", archive, mismatch)
        cmd_generate(config)
        dataset = load_archive(archive)
    return dataset


def cmd_train(config: RunConfig) -> dict:
    run_dir = _run_dir(config)
    dataset = _dataset_for(config)
    model = SimplicialModel(config.model, dataset.complex.max_order, dataset.inputs[0].width)
    model.init(np.random.default_rng(config.seed))

    trainer = Trainer(model, config.training, seed=config.seed)
    history = trainer.fit(dataset)
    test = evaluate(model, dataset, "test")

    save_checkpoint(model, config, run_dir / "checkpoint")
    history.to_csv(run_dir / "metrics.csv", index=False)
    metrics = {
        "format_version": FORMAT_VERSION,
        "task": config.task,
        "seed": config.seed,
        "config": config_dict(config),
        "history": history.to_dict(orient="records"),
        "test": test,
        "parameter_count": model.published_parameter_count(),
        "parameter_store_size": model.parameter_store_size(),
        "filter_parameter_size": model.filter_parameter_size(),
        "parameter_breakdown": model.parameter_breakdown(),
        "wall_time_seconds": trainer.wall_time,
    }
    _write_json(run_dir / "metrics.json", metrics)
    if config.model.attention and config.model.family != "gsccn":
        attention_histograms(model, dataset).to_csv(run_dir / "attention_histograms.csv", index=False)
    _log.info("run written path=%s test=%s", run_dir, test)
    return metrics


def cmd_eval(config: RunConfig, checkpoint: str | None = None, dataset_dir: str | None = None) -> dict:
    run_dir = _run_dir(config)
    ckpt_config, model = load_checkpoint(checkpoint or run_dir / "checkpoint")
    dataset = load_archive(dataset_dir or run_dir / "dataset")
    if dataset_dir is None:
        mismatch = _archive_mismatch(dataset, ckpt_config)
        if mismatch is not None:
            raise ConfigError(f"run archive does not belong to the checkpoint: {mismatch}")
    check_compatible(model, dataset.complex.max_order, dataset.inputs[0].width)
    metrics = evaluate(model, dataset, "test")
    _write_json(run_dir / "eval.json", {
        "format_version": FORMAT_VERSION,
        "seed": ckpt_config.seed,
        "config": config_dict(ckpt_config),
        "test": metrics,
    })
    print(json.dumps(metrics, sort_keys=True))
    return metrics


def cmd_propcheck(
    seed: int,
    n_trials: int,
    fault: str | None = None,
    checks: list[str] | None = None,
    out: str | None = None,
) -> dict:
    report = run_propcheck(seed=seed, n_trials=n_trials, fault=fault, checks=checks)
    if out:
        _write_json(Path(out) / "propcheck.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsan", description="Simplicial attention networks on synthetic complexes.")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="JSON run config")
        p.add_argument("--task", default=None, choices=TASKS)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="run directory")

    run_args(sub.add_parser("generate", help="build and archive a dataset"))
    run_args(sub.add_parser("train", help="train a model and write metrics"))
    ev = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    run_args(ev)
    ev.add_argument("--checkpoint", default=None)
    ev.add_argument("--dataset", default=None)

    pc = sub.add_parser("propcheck", help="run the property suite")
    pc.add_argument("--seed", type=int, default=None)
    pc.add_argument("--trials", type=int, default=5)
    pc.add_argument("--check", action="append", choices=sorted(CHECKS), default=None)
    pc.add_argument("--fault", choices=FAULTS, default=None, help="inject a known defect (negative control)")
    pc.add_argument("--out", default=None)
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "propcheck":
        seed = args.seed if args.seed is not None else get_settings().DEFAULT_SEED
        report = cmd_propcheck(seed, args.trials, args.fault, args.check, args.out)
        return {"passed": EXIT_OK, "failed": EXIT_FAILED}.get(report["status"], EXIT_INVALID)

    config = load_run_config(args.config, {"task": args.task, "seed": args.seed, "out": args.out})
    if args.command == "generate":
        cmd_generate(config)
    elif args.command == "train":
        cmd_train(config)
    else:
        cmd_eval(config, args.checkpoint, args.dataset)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else None)
    try:
        return _run(args)
    except ConfigError as exc:
        logger.error(json.dumps(exc.to_dict()))
        return EXIT_INVALID
    except GsanError as exc:
        logger.error(json.dumps(exc.to_dict()))
        return EXIT_FAILED
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
