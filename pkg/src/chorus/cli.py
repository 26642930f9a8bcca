"""Command line entry point.

Subcommands: serve (HTTP service), train (scorer from a corpus), hpsearch
(random search over training settings), eval (Recall@k), split (article-level
dataset split), stats (corpus report), simulate (scripted-user driver).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

POLICY_ALIASES = {"rule": "rule_based", "rule_based": "rule_based",
                  "argmax": "argmax", "sampled": "sampled"}


def _policy_kind(name: str) -> str:
    if name not in POLICY_ALIASES:
        raise SystemExit(f"unknown policy {name!r}; pick rule, argmax, or sampled")
    return POLICY_ALIASES[name]


def _load_records(path: str):
    from chorus.data import read_corpus

    try:
        records = read_corpus(path)
    except OSError as exc:
        raise SystemExit(f"cannot read corpus at {path}: {exc}") from exc
    if not records:
        raise SystemExit(f"no transition records found at {path}")
    return records


def _eval_resources(embedding_dim: int, seed: int):
    from chorus.responders import load_resources

    return load_resources(embedding_dim=embedding_dim, train_topic=False, seed=seed)


def _scorer_from_checkpoint(path: str, seed: int):
    from chorus.scoring.checkpoint import load_checkpoint
    from chorus.scoring.scorers import ModelScorer

    ckpt = load_checkpoint(path)
    emb_dim = int(ckpt.manifest.get("embedding_dim", 64))
    resources = _eval_resources(emb_dim, seed)
    scorer = ModelScorer.from_checkpoint(
        ckpt, resources.store, resources.lexicons, resources.tagger
    )
    return scorer, resources


# ------------------------------------------------------------------ serve


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from chorus.service import ServiceConfig, build_service, create_app

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    overrides = {}
    for key in ("host", "port", "corpus_dir", "records_dir", "checkpoint",
                "policy", "engine_seed", "response_deadline"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.reveal_models:
        overrides["reveal_models"] = True
    if overrides:
        config = dataclasses.replace(config, **overrides)
    app = create_app(build_service(config))
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


# ------------------------------------------------------------------ train


def _train_config(args: argparse.Namespace):
    from chorus.scoring.train import DEFAULT_CONFIGS, TrainConfig

    base = DEFAULT_CONFIGS.get((args.objective, args.arch), TrainConfig())
    overrides = {"seed": args.seed}
    for key in ("optimizer", "learning_rate", "activation", "init", "dropout",
                "batch_size", "max_episodes", "patience", "gamma"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return dataclasses.replace(base, **overrides)


def cmd_train(args: argparse.Namespace) -> int:
    from chorus.scoring.pipeline import train_from_records

    records = _load_records(args.corpus)
    resources = _eval_resources(args.embedding_dim, args.seed)
    cfg = _train_config(args)
    model = train_from_records(
        records,
        resources,
        objective=args.objective,
        arch=args.arch,
        cfg=cfg,
        split_seed=args.seed,
        oversample=not args.no_oversample,
    )
    path = model.save(args.out)
    metric_name = "valid F1" if args.objective == "reward" else "valid loss"
    print(
        f"trained {args.objective}/{args.arch} on {len(records)} records "
        f"({len(model.split.train)} train / {len(model.split.valid)} valid); "
        f"{metric_name} {model.result.best_metric:.4f} "
        f"after {model.result.episodes} episodes"
    )
    print(f"checkpoint written to {path}")
    return 0


# ---------------------------------------------------------------- hpsearch


def cmd_hpsearch(args: argparse.Namespace) -> int:
    from chorus.data.splits import split_by_article
    from chorus.scoring.pipeline import config_with, train_from_records
    from chorus.scoring.search import hyperparameter_search
    from chorus.scoring.train import TrainConfig

    records = _load_records(args.corpus)
    resources = _eval_resources(args.embedding_dim, args.seed)
    split = split_by_article(records, seed=args.seed)
    base = TrainConfig(seed=args.seed, max_episodes=args.max_episodes or 50, patience=5)

    def objective(cfg_dict: dict) -> float:
        model = train_from_records(
            records,
            resources,
            objective=args.objective,
            arch=args.arch,
            cfg=config_with(base, cfg_dict),
            split=split,
        )
        metric = model.result.best_metric
        return metric if args.objective == "reward" else -metric

    result = hyperparameter_search(
        objective, trials=args.trials, seed=args.seed, out_path=args.out
    )
    failed = sum(1 for r in result.records if r.get("status") != "ok")
    print(f"ran {args.trials} trials ({failed} failed)")
    if result.ranked:
        best = result.ranked[0]
        print(f"best metric {best['metric']:.4f} with {best['config']}")
    if args.out:
        print(f"trial log written to {args.out}")
    return 0


# -------------------------------------------------------------------- eval


def cmd_eval(args: argparse.Namespace) -> int:
    from chorus.data import evaluate_recall, format_report, recall_csv
    from chorus.selection import SelectionPolicy, Selector

    records = _load_records(args.corpus)
    if args.checkpoint:
        scorer, resources = _scorer_from_checkpoint(args.checkpoint, args.seed)
    else:
        scorer, resources = None, _eval_resources(64, args.seed)
    selector = Selector(
        resources.lexicons, resources.tagger, resources.topic_question_patterns
    )
    policy = SelectionPolicy(kind=_policy_kind(args.policy), seed=args.seed)
    report = evaluate_recall(
        records, scorer, policy, selector=selector, max_k=args.k, workers=args.workers
    )
    print(format_report(report), end="")
    if args.csv:
        Path(args.csv).write_text(recall_csv(report), encoding="utf-8")
        print(f"R@k curve written to {args.csv}")
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        print(f"report written to {args.json}")
    return 0


# ------------------------------------------------------------------- split


def cmd_split(args: argparse.Namespace) -> int:
    from chorus.data import oversample_positives, split_by_article, write_transitions

    records = _load_records(args.corpus)
    fractions = (args.train_fraction, args.valid_fraction,
                 1.0 - args.train_fraction - args.valid_fraction)
    split = split_by_article(records, fractions=fractions, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", split.train), ("valid", split.valid), ("test", split.test)):
        write_transitions(out / f"{name}.jsonl", part)
    if args.oversample:
        balanced = oversample_positives(list(split.train), seed=args.seed)
        write_transitions(out / "train_oversampled.jsonl", balanced)
    (out / "manifest.json").write_text(
        json.dumps(split.manifest, indent=2, sort_keys=True), encoding="utf-8"
    )
    counts = split.counts()
    print(
        f"split {len(records)} records over {len(split.manifest)} articles: "
        f"{counts['train']} train / {counts['valid']} valid / {counts['test']} test"
    )
    print(f"files written to {out}")
    return 0


# ------------------------------------------------------------------- stats


def cmd_stats(args: argparse.Namespace) -> int:
    from chorus.data import corpus_stats, format_stats

    stats = corpus_stats(_load_records(args.corpus))
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print(format_stats(stats), end="")
    return 0


# ---------------------------------------------------------------- simulate


def _parse_fault(text: str) -> tuple[str, str, float]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise SystemExit(f"fault must look like responder:kind[:delay], got {text!r}")
    delay = float(parts[2]) if len(parts) == 3 else 0.0
    return parts[0], parts[1], delay


def cmd_simulate(args: argparse.Namespace) -> int:
    from chorus.simulate import SimulationSpec, run_simulation

    spec = SimulationSpec(
        conversations=args.conversations,
        turns=args.turns,
        mode=args.mode,
        concurrency=args.concurrency,
        seed=args.seed,
        rating=args.rating,
        response_deadline=args.deadline,
        ping_timeout=args.ping_timeout,
        faults=tuple(_parse_fault(f) for f in args.fault),
    )
    result = run_simulation(spec, out_path=args.out)
    print(
        f"simulated {spec.conversations} {spec.mode} conversations x {spec.turns} turns; "
        f"max turn {result.max_turn_seconds * 1000:.0f} ms"
    )
    if result.records:
        print(f"exported {len(result.records)} transition records"
              + (f" to {args.out}" if args.out else ""))
    if result.events:
        by_kind: dict[str, int] = {}
        for e in result.events:
            by_kind[e.kind] = by_kind.get(e.kind, 0) + 1
        print("engine events: " + ", ".join(f"{k} x{v}" for k, v in sorted(by_kind.items())))
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chorus")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--corpus-dir", dest="corpus_dir", default=None,
                   help="directory of article .txt files")
    p.add_argument("--records-dir", dest="records_dir", default=None,
                   help="where finished conversations are written")
    p.add_argument("--checkpoint", default=None, help="scorer checkpoint (.npz)")
    p.add_argument("--policy", default=None, choices=sorted(set(POLICY_ALIASES.values())))
    p.add_argument("--engine-seed", dest="engine_seed", type=int, default=None)
    p.add_argument("--response-deadline", dest="response_deadline", type=float, default=None)
    p.add_argument("--reveal-models", action="store_true",
                   help="include model names and scores in candidate payloads")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("train", help="train a scorer on a transition corpus")
    p.add_argument("--corpus", required=True, help="corpus file or directory")
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.add_argument("--objective", choices=("reward", "q"), default="reward")
    p.add_argument("--arch", choices=("small", "deep"), default="small")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedding-dim", dest="embedding_dim", type=int, default=64)
    p.add_argument("--optimizer", default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--activation", default=None)
    p.add_argument("--init", default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--max-episodes", dest="max_episodes", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--no-oversample", action="store_true",
                   help="skip positive-class oversampling for the reward objective")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("hpsearch", help="random search over training settings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--objective", choices=("reward", "q"), default="reward")
    p.add_argument("--arch", choices=("small", "deep"), default="small")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedding-dim", dest="embedding_dim", type=int, default=64)
    p.add_argument("--max-episodes", dest="max_episodes", type=int, default=None)
    p.add_argument("--out", default=None, help="JSONL trial log (resumable)")
    p.set_defaults(fn=cmd_hpsearch)

    p = sub.add_parser("eval", help="Recall@k over a logged corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", default="argmax", choices=sorted(POLICY_ALIASES))
    p.add_argument("--k", type=int, default=None, help="largest k to report")
    p.add_argument("--checkpoint", default=None,
                   help="scorer checkpoint; without it the logged scores are replayed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None, help="write the R@k curve here")
    p.add_argument("--json", default=None, help="write the full report here")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("split", help="article-level train/valid/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.8)
    p.add_argument("--valid-fraction", dest="valid_fraction", type=float, default=0.1)
    p.add_argument("--oversample", action="store_true",
                   help="also write a class-balanced training file")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("stats", help="corpus report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("simulate", help="scripted-user driver")
    p.add_argument("--conversations", type=int, default=2)
    p.add_argument("--turns", type=int, default=5)
    p.add_argument("--mode", choices=("collect", "live"), default="collect")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rating", type=int, default=None,
                   help="fixed final rating; default draws one per conversation")
    p.add_argument("--deadline", type=float, default=7.0)
    p.add_argument("--ping-timeout", dest="ping_timeout", type=float, default=60.0)
    p.add_argument("--fault", action="append", default=[],
                   metavar="RESPONDER:KIND[:DELAY]",
                   help="inject slow/hang/crash behavior (repeatable)")
    p.add_argument("--out", default=None, help="write the collect-mode corpus here")
    p.set_defaults(fn=cmd_simulate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
