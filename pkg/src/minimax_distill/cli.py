"""Command-line surface: reproducible runs over datasets and repositories.

Every run resolves its configuration (flags > config file > defaults),
writes a key=value manifest plus metrics files into --out, and exits 0 on
success, 1 on validation failures, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .analysis import augmentation_report, distance_distribution, suggest_epsilon
from .data import (
    Dataset,
    load_dataset,
    load_repository,
    load_sentences,
    read_embeddings,
    save_dataset,
    write_embeddings,
)
from .embedder import HashedNgramEmbedder
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    DistillError,
    InputError,
    TrainingDivergenceError,
)
from .flops import (
    CostParams,
    backward_flops,
    delta_flops,
    efficiency_condition,
    forward_flops,
    measure_run,
    minimax_flops,
    sort_flops,
    vanilla_flops,
)
from .index import SentenceRepository, build_index, knn_query
from .models import MLPClassifier
from .selection import AugmentationPool
from .synth import make_synthetic_task
from .training import (
    AUGMENTED_MODES,
    DistillConfig,
    EpochRecord,
    MODE_KD_ONLY,
    MODE_MINIMAX,
    MODE_NO_AUG,
    MODE_RANDOM,
    MODE_VANILLA,
    build_augmentation_pool,
    default_embedder,
    distill,
    evaluate_accuracy,
    featurize,
    few_shot_subsample,
    labels_of,
    run_ablation,
    train_teacher,
)

THREADS_ENV = "MINIMAX_DISTILL_THREADS"

CLI_MODES = {
    "no_aug": MODE_NO_AUG,
    "kd_only": MODE_KD_ONLY,
    "vanilla": MODE_VANILLA,
    "minimax": MODE_MINIMAX,
    "random": MODE_RANDOM,
}

_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_STRINGS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {text!r}") from None


CONFIG_FIELDS: dict[str, type | object] = {
    "kd_weight": float,
    "temperature": float,
    "k": int,
    "n": int,
    "epsilon": float,
    "aug_start_epoch": int,
    "max_epochs": int,
    "early_stop_patience": int,
    "base_lr": float,
    "warmup_fraction": float,
    "batch_size": int,
    "seed": int,
    "mode": str,
    "rerank_by_teacher": _parse_bool,
    "score_temperature": float,
    "reforward_selected": _parse_bool,
    "reselect_every_step": _parse_bool,
    "threads": int,
}


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_config(args: argparse.Namespace) -> DistillConfig:
    """Resolve DistillConfig with precedence: CLI flags > config file > defaults."""
    file_cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in file_cfg:
        if key not in CONFIG_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
    values: dict = {}
    for name, convert in CONFIG_FIELDS.items():
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            values[name] = cli_value
        elif name in file_cfg:
            values[name] = convert(file_cfg[name])
    if "mode" in values:
        if values["mode"] not in CLI_MODES and values["mode"] not in CLI_MODES.values():
            raise ConfigError(f"unknown mode {values['mode']!r}")
        values["mode"] = CLI_MODES.get(values["mode"], values["mode"])
    if "threads" not in values and os.environ.get(THREADS_ENV):
        values["threads"] = int(os.environ[THREADS_ENV])
    return DistillConfig(**values)


def _out_dir(args: argparse.Namespace, command: str) -> Path:
    out = Path(args.out) if getattr(args, "out", None) else Path("runs") / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(path: Path, entries: dict) -> None:
    lines = [f"{key}={entries[key]}" for key in sorted(entries)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_manifest(path: Path) -> dict[str, str]:
    if not path.exists():
        raise InputError(f"manifest not found: {path}")
    entries: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, value = line.split("=", 1)
            entries[key] = value
    return entries


def _config_manifest(config: DistillConfig) -> dict:
    return asdict(config)


def _load_repo(args: argparse.Namespace, embedder: HashedNgramEmbedder) -> SentenceRepository:
    if getattr(args, "repo_embeddings", None):
        repo = load_repository(args.repo_sentences, args.repo_embeddings)
        if repo.dim != embedder.dim:
            raise ConfigError(
                f"repository embeddings have dim {repo.dim} but the featurizer"
                f" produces dim {embedder.dim}; rebuild one side to match"
            )
        return repo
    sentences = load_sentences(args.repo_sentences)
    return SentenceRepository(sentences=sentences, embeddings=embedder.embed_batch(sentences))


def _write_metrics(path: Path, records: list[EpochRecord]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")


def _read_metrics(path: str) -> list[EpochRecord]:
    records = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(EpochRecord(**json.loads(line)))
        except (json.JSONDecodeError, TypeError) as exc:
            raise DataError(f"{path}:{line_no}: bad metrics row: {exc}") from exc
    if not records:
        raise DataError(f"{path}: no metrics rows")
    return records


def _build_pool_for(
    dataset: Dataset,
    repo: SentenceRepository,
    teacher: MLPClassifier,
    embedder: HashedNgramEmbedder,
    config: DistillConfig,
) -> AugmentationPool:
    features = featurize(dataset.train, embedder)
    source_mode = MODE_VANILLA if config.mode == MODE_MINIMAX else config.mode
    return build_augmentation_pool(
        dataset.train,
        features,
        features,
        repo,
        teacher,
        embedder,
        replace(config, mode=source_mode),
    )


def _get_teacher(
    args: argparse.Namespace,
    dataset: Dataset,
    config: DistillConfig,
    embedder: HashedNgramEmbedder,
    out: Path,
) -> tuple[MLPClassifier, str]:
    if getattr(args, "teacher", None):
        return MLPClassifier.load(args.teacher), args.teacher
    teacher, records = train_teacher(
        dataset.train, dataset.dev, config, embedder=embedder, num_classes=dataset.num_classes
    )
    path = out / "teacher.mdl"
    teacher.save(path)
    _write_metrics(out / "teacher_metrics.jsonl", records)
    return teacher, str(path)


def cmd_synth_data(args: argparse.Namespace) -> int:
    out = _out_dir(args, "synth-data")
    embedder = default_embedder(args.embed_dim)
    task = make_synthetic_task(
        num_classes=args.num_classes,
        train_size=args.train_size,
        dev_size=args.dev_size,
        test_size=args.test_size,
        repo_size=args.repo_size,
        seed=args.seed,
        embedder=embedder,
    )
    save_dataset(task.dataset, out)
    sentences_path = out / "sentences.txt"
    sentences_path.write_text("\n".join(task.repo.sentences) + "\n", encoding="utf-8")
    write_embeddings(task.repo.embeddings, out / "embeddings.bin")
    _write_manifest(
        out / "manifest.txt",
        {
            "command": "synth-data",
            "num_classes": args.num_classes,
            "train_size": args.train_size,
            "dev_size": args.dev_size,
            "test_size": args.test_size,
            "repo_size": args.repo_size,
            "seed": args.seed,
            "embed_dim": args.embed_dim,
        },
    )
    print(f"wrote synthetic task to {out}")
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    out = _out_dir(args, "build-index")
    embedder = default_embedder(args.embed_dim)
    repo = _load_repo(args, embedder)
    build_index(repo)
    write_embeddings(repo.embeddings, out / "embeddings.bin")
    (out / "sentences.txt").write_text("\n".join(repo.sentences) + "\n", encoding="utf-8")
    _write_manifest(
        out / "manifest.txt",
        {
            "command": "build-index",
            "sentences": args.repo_sentences,
            "size": repo.size,
            "dim": repo.dim,
        },
    )
    print(f"indexed {repo.size} sentences (dim {repo.dim}) into {out}")
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    out = _out_dir(args, "retrieve")
    embedder = default_embedder(args.embed_dim)
    repo = _load_repo(args, embedder)
    index = build_index(repo)
    if args.text:
        queries = [args.text]
    elif args.query_file:
        queries = [q for q in Path(args.query_file).read_text(encoding="utf-8").splitlines() if q]
    else:
        raise InputError("retrieve needs --text or --query-file")
    results_path = out / "neighbors.jsonl"
    with results_path.open("w", encoding="utf-8") as fh:
        for qid, query in enumerate(queries):
            neighbors = knn_query(index, embedder.embed(query), args.k, query_id=qid)
            for cand in neighbors.candidates:
                fh.write(
                    json.dumps(
                        {
                            "query_id": qid,
                            "query": query,
                            "repo_id": cand.repo_id,
                            "similarity": round(cand.cosine_similarity, 6),
                            "sentence": repo.sentences[cand.repo_id],
                        }
                    )
                    + "\n"
                )
    _write_manifest(
        out / "manifest.txt",
        {"command": "retrieve", "k": args.k, "queries": len(queries), "sentences": args.repo_sentences},
    )
    print(f"wrote {results_path}")
    return 0


def cmd_train_teacher(args: argparse.Namespace) -> int:
    out = _out_dir(args, "train-teacher")
    config = build_config(args)
    embedder = default_embedder(args.embed_dim)
    dataset = load_dataset(args.data)
    teacher, records = train_teacher(
        dataset.train, dataset.dev, config, embedder=embedder, num_classes=dataset.num_classes
    )
    teacher.save(out / "teacher.mdl")
    _write_metrics(out / "metrics.jsonl", records)
    manifest = _config_manifest(config)
    manifest.update({"command": "train-teacher", "data": args.data, "embed_dim": args.embed_dim})
    _write_manifest(out / "manifest.txt", manifest)
    best = max((r.dev_accuracy for r in records), default=float("nan"))
    print(f"teacher trained: best dev accuracy {best:.4f} over {len(records)} epochs -> {out}")
    return 0


def cmd_distill(args: argparse.Namespace) -> int:
    out = _out_dir(args, "distill")
    config = build_config(args)
    embedder = default_embedder(args.embed_dim)
    dataset = load_dataset(args.data)
    teacher = None
    teacher_path = ""
    pool = None
    if config.mode != MODE_NO_AUG:
        teacher, teacher_path = _get_teacher(args, dataset, config, embedder, out)
    if config.mode in AUGMENTED_MODES:
        repo = _load_repo(args, embedder)
        pool = _build_pool_for(dataset, repo, teacher, embedder, config)
    trace: list[dict] = []
    student, records = distill(
        teacher, dataset.train, dataset.dev, pool, config, embedder=embedder, trace=trace
    )
    student.save(out / "student.mdl")
    _write_metrics(out / "metrics.jsonl", records)
    if trace:
        with (out / "trace.jsonl").open("w", encoding="utf-8") as fh:
            for row in trace:
                fh.write(json.dumps(row) + "\n")
    manifest = _config_manifest(config)
    manifest.update(
        {
            "command": "distill",
            "data": args.data,
            "repo_sentences": getattr(args, "repo_sentences", "") or "",
            "repo_embeddings": getattr(args, "repo_embeddings", "") or "",
            "teacher": teacher_path,
            "embed_dim": args.embed_dim,
        }
    )
    _write_manifest(out / "manifest.txt", manifest)
    best = max((r.dev_accuracy for r in records), default=float("nan"))
    if dataset.test:
        test_acc = evaluate_accuracy(student, featurize(dataset.test, embedder), labels_of(dataset.test))
        print(f"student: best dev {best:.4f}, test {test_acc:.4f}, {len(records)} epochs -> {out}")
    else:
        print(f"student: best dev {best:.4f}, {len(records)} epochs -> {out}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    out = _out_dir(args, "ablate")
    config = build_config(args)
    embedder = default_embedder(args.embed_dim)
    dataset = load_dataset(args.data)
    repo = _load_repo(args, embedder)
    rows = run_ablation(dataset, repo, config, embedder=embedder)
    with (out / "ablation.jsonl").open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    manifest = _config_manifest(config)
    manifest.update({"command": "ablate", "data": args.data, "embed_dim": args.embed_dim})
    _write_manifest(out / "manifest.txt", manifest)
    for row in rows:
        test = f" test {row['test_accuracy']:.4f}" if "test_accuracy" in row else ""
        print(
            f"{row['row']:>18}: dev {row['dev_accuracy']:.4f}{test}"
            f"  aug_fwd {row['aug_forward_count']} aug_bwd {row['aug_backward_count']}"
        )
    return 0


def cmd_flops(args: argparse.Namespace) -> int:
    out = _out_dir(args, "flops")
    layer_dims = [int(d) for d in args.layer_dims.split(",")]
    F = forward_flops(layer_dims)
    B = backward_flops(layer_dims)
    S = sort_flops(args.k2)  # the sort runs over the k2 candidate scores
    params = CostParams(
        F=F, B=B, S=S, k1=args.k1, k2=args.k2, n=args.n, reforward_selected=args.reforward
    )
    lines = [
        f"F={F:.0f} B={B:.0f} S={S:.2f} (layer_dims={layer_dims})",
        f"vanilla_flops={vanilla_flops(params):.0f}",
        f"minimax_flops={minimax_flops(params):.0f}",
    ]
    exact, approx = delta_flops(params)
    lines.append(f"delta_exact={exact:.0f} delta_approx={approx:.0f}")
    lines.append(f"efficiency_condition={efficiency_condition(params)}")
    lines.append(f"sort_cost_negligible={params.sort_cost_negligible}")
    if args.metrics:
        if not args.baseline:
            raise InputError("--metrics needs --baseline for comparison")
        report = measure_run(_read_metrics(args.metrics), _read_metrics(args.baseline), params)
        lines.append("")
        lines.extend(report.summary_lines())
    text = "\n".join(lines) + "\n"
    (out / "flops.txt").write_text(text, encoding="utf-8")
    _write_manifest(
        out / "manifest.txt",
        {
            "command": "flops",
            "layer_dims": args.layer_dims,
            "k1": args.k1,
            "k2": args.k2,
            "n": args.n,
            "reforward": args.reforward,
            "metrics": args.metrics or "",
            "baseline": args.baseline or "",
        },
    )
    print(text, end="")
    return 0


def cmd_dist_report(args: argparse.Namespace) -> int:
    out = _out_dir(args, "dist-report")
    config = build_config(args)
    embedder = default_embedder(args.embed_dim)
    dataset = load_dataset(args.data)
    teacher, teacher_path = _get_teacher(args, dataset, config, embedder, out)
    repo = _load_repo(args, embedder)
    # the histogram must see every candidate, so no epsilon filtering here
    pool_config = replace(config, mode=MODE_VANILLA, epsilon=math.inf)
    pool = _build_pool_for(dataset, repo, teacher, embedder, pool_config)
    hist = distance_distribution(dataset.train, pool, teacher, embedder=embedder, num_buckets=args.buckets)
    epsilon = suggest_epsilon(hist, overlap_threshold=args.overlap_threshold)
    lines = ["midpoint\tmatched\tmismatched"]
    for (mid, matched), (_, mismatched) in zip(hist.table("matched"), hist.table("mismatched")):
        lines.append(f"{mid:.4f}\t{matched}\t{mismatched}")
    lines.append(f"suggested_epsilon={epsilon}")
    (out / "distances.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = _config_manifest(config)
    manifest.update(
        {
            "command": "dist-report",
            "data": args.data,
            "teacher": teacher_path,
            "buckets": args.buckets,
            "overlap_threshold": args.overlap_threshold,
            "embed_dim": args.embed_dim,
        }
    )
    _write_manifest(out / "manifest.txt", manifest)
    print(f"matched={int(hist.matched_counts.sum())} mismatched={int(hist.mismatched_counts.sum())}")
    print(f"suggested epsilon: {epsilon}")
    return 0


def cmd_fewshot_sample(args: argparse.Namespace) -> int:
    out = _out_dir(args, "fewshot-sample")
    dataset = load_dataset(args.data)
    small_train, small_dev = few_shot_subsample(
        dataset.train, dataset.dev, args.per_label, args.dev_cap, args.seed
    )
    small = Dataset(
        name=f"{dataset.name}-fewshot",
        train=small_train,
        dev=small_dev,
        test=list(dataset.test),
        label_names=list(dataset.label_names),
    )
    save_dataset(small, out)
    _write_manifest(
        out / "manifest.txt",
        {
            "command": "fewshot-sample",
            "data": args.data,
            "per_label": args.per_label,
            "dev_cap": args.dev_cap,
            "seed": args.seed,
            "train_size": len(small_train),
            "dev_size": len(small_dev),
        },
    )
    print(f"sampled {len(small_train)} train / {len(small_dev)} dev examples -> {out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    manifest = _read_manifest(run_dir / "manifest.txt")
    trace_path = run_dir / "trace.jsonl"
    if not trace_path.exists():
        raise InputError(f"no selection trace found at {trace_path} (minimax runs write one)")
    traces = [json.loads(line) for line in trace_path.read_text(encoding="utf-8").splitlines() if line]
    embed_dim = int(manifest.get("embed_dim", 64))
    embedder = default_embedder(embed_dim)
    dataset = load_dataset(manifest["data"])
    teacher = MLPClassifier.load(manifest["teacher"])
    config = DistillConfig(
        k=int(manifest["k"]),
        n=int(manifest["n"]),
        epsilon=float(manifest["epsilon"]),
        mode=manifest["mode"],
        rerank_by_teacher=_parse_bool(manifest["rerank_by_teacher"]),
        seed=int(manifest["seed"]),
    )

    class RepoArgs:
        repo_sentences = manifest["repo_sentences"]
        repo_embeddings = manifest["repo_embeddings"] or None

    repo = _load_repo(RepoArgs, embedder)
    pool = _build_pool_for(dataset, repo, teacher, embedder, config)
    rows, text = augmentation_report(dataset.train, pool, teacher, traces, embedder=embedder)
    out = _out_dir(args, "report")
    (out / "augmentations.tsv").write_text(text, encoding="utf-8")
    _write_manifest(out / "manifest.txt", {"command": "report", "run": str(run_dir), "rows": len(rows)})
    print(f"{len(rows)} candidate rows -> {out / 'augmentations.tsv'}")
    return 0


def _add_common(parser: argparse.ArgumentParser, repo: bool = False, data: bool = False) -> None:
    parser.add_argument("--out", help="output directory (default runs/<command>)")
    parser.add_argument("--embed-dim", type=int, default=64, help="featurizer dimension")
    if data:
        parser.add_argument("--data", required=True, help="dataset file or directory")
    if repo:
        parser.add_argument("--repo-sentences", help="repository sentences, one per line")
        parser.add_argument("--repo-embeddings", help="optional repository embedding file")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file (flags win)")
    parser.add_argument("--lambda", dest="kd_weight", type=float, help="KD mixing weight in [0,1]")
    parser.add_argument("--temperature", type=float, help="KD softmax temperature")
    parser.add_argument("--k", type=int, help="retrieved neighbours per example")
    parser.add_argument("--n", type=int, help="selected neighbours per example (minimax)")
    parser.add_argument("--epsilon", type=float, help="angular distance radius (inf disables)")
    parser.add_argument("--aug-start-epoch", dest="aug_start_epoch", type=int)
    parser.add_argument("--max-epochs", dest="max_epochs", type=int)
    parser.add_argument("--patience", dest="early_stop_patience", type=int)
    parser.add_argument("--base-lr", dest="base_lr", type=float)
    parser.add_argument("--warmup-fraction", dest="warmup_fraction", type=float)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--rerank", dest="rerank_by_teacher", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument("--score-temperature", dest="score_temperature", type=float)
    parser.add_argument(
        "--reforward", dest="reforward_selected", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument(
        "--reselect-every-step",
        dest="reselect_every_step",
        action=argparse.BooleanOptionalAction,
        default=None,
    )
    parser.add_argument("--threads", type=int, help=f"worker threads (env {THREADS_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minimax-distill",
        description="kNN-augmented knowledge distillation with minimax sample selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="generate the bundled synthetic task")
    _add_common(p)
    p.add_argument("--num-classes", type=int, default=3)
    p.add_argument("--train-size", type=int, default=600)
    p.add_argument("--dev-size", type=int, default=200)
    p.add_argument("--test-size", type=int, default=400)
    p.add_argument("--repo-size", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("build-index", help="validate and materialize a repository index")
    _add_common(p, repo=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", help="query nearest neighbours")
    _add_common(p, repo=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--text", help="single query sentence")
    p.add_argument("--query-file", help="file of query sentences, one per line")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("train-teacher", help="fit the teacher on cross-entropy")
    _add_common(p, data=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_teacher)

    p = sub.add_parser("distill", help="train a student with optional augmentation")
    _add_common(p, repo=True, data=True)
    _add_config_flags(p)
    p.add_argument("--mode", choices=sorted(CLI_MODES), help="augmentation mode")
    p.add_argument("--teacher", help="teacher checkpoint (trained here when omitted)")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("ablate", help="run the component ablation grid")
    _add_common(p, repo=True, data=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("flops", help="cost model report, optionally against measured runs")
    _add_common(p)
    p.add_argument("--layer-dims", default="64,8,3", help="comma-separated model dims")
    p.add_argument("--k1", type=int, default=8)
    p.add_argument("--k2", type=int, default=8)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--reforward", action="store_true")
    p.add_argument("--metrics", help="metrics.jsonl of the run to price")
    p.add_argument("--baseline", help="metrics.jsonl of the vanilla baseline")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("dist-report", help="matched/mismatched distance histogram + epsilon")
    _add_common(p, repo=True, data=True)
    _add_config_flags(p)
    p.add_argument("--teacher", help="teacher checkpoint (trained here when omitted)")
    p.add_argument("--buckets", type=int, default=50)
    p.add_argument("--overlap-threshold", type=float, default=0.05)
    p.set_defaults(func=cmd_dist_report)

    p = sub.add_parser("fewshot-sample", help="balanced few-shot subsample of a dataset")
    _add_common(p, data=True)
    p.add_argument("--per-label", type=int, required=True)
    p.add_argument("--dev-cap", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fewshot_sample)

    p = sub.add_parser("report", help="qualitative augmentation report from a distill run")
    _add_common(p)
    p.add_argument("--run", required=True, help="distill output directory with trace + manifest")
    p.set_defaults(func=cmd_report)

    return parser


_ERROR_CATEGORIES = [
    (ConfigError, "config"),
    (DimensionError, "dimension"),
    (DataError, "data"),
    (TrainingDivergenceError, "divergence"),
    (InputError, "input"),
    (DistillError, "internal"),
]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DistillError as exc:
        for klass, label in _ERROR_CATEGORIES:
            if isinstance(exc, klass):
                print(f"error ({label}): {exc}", file=sys.stderr)
                return 1
        raise
    except FileNotFoundError as exc:
        print(f"error (missing-file): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
