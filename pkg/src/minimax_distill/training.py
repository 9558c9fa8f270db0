"""Training orchestration: teacher fitting, student distillation, ablations.

The teacher trains on cross-entropy alone and the best dev-accuracy
checkpoint wins. Distillation then minimizes the combined loss on
originals and the KD term alone on augmented examples, with augmentation
candidates chosen per mode: all retrieved neighbours (vanilla), random
repository draws, or the minimax selection that keeps the n candidates
with the highest teacher-student KL each round.

Selection granularity: by default candidates are re-scored once per epoch
and the selected ones are fed to the student again inside the batch step
(``reforward_selected=True``, the straightforward implementation). With
``reselect_every_step=True`` scoring happens immediately before each
optimizer step, so the scoring activations are still valid and
``reforward_selected=False`` can reuse them, trading memory for the
redundant forward pass.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .data import Dataset, LabeledExample
from .embedder import HashedNgramEmbedder
from .errors import ConfigError, InputError, TrainingDivergenceError
from .index import (
    NeighborSet,
    SentenceRepository,
    angular_distance,
    build_index,
    filter_by_epsilon,
    knn_query,
    random_candidates,
    rerank_by_teacher,
)
from .losses import (
    KDHyperparams,
    augmented_example_loss,
    combined_loss,
    combined_loss_grad,
    cross_entropy,
    cross_entropy_grad,
    kd_loss_grad,
    kl_divergence,
    softmax_with_temperature,
)
from .models import AdamOptimizer, MLPClassifier
from .selection import (
    AugmentationPool,
    PoolCandidate,
    SelectionResult,
    minimax_round,
    select_top_n,
)

MODE_NO_AUG = "no_aug"
MODE_KD_ONLY = "kd_only"
MODE_VANILLA = "vanilla_knn"
MODE_MINIMAX = "minimax_knn"
MODE_RANDOM = "random_aug"
MODES = (MODE_NO_AUG, MODE_KD_ONLY, MODE_VANILLA, MODE_MINIMAX, MODE_RANDOM)
AUGMENTED_MODES = (MODE_VANILLA, MODE_MINIMAX, MODE_RANDOM)

DEFAULT_TEACHER_HIDDEN = (64, 64)
DEFAULT_STUDENT_HIDDEN = (8,)


@dataclass
class DistillConfig:
    """All knobs of one training run; validated on construction."""

    kd_weight: float = 0.5
    temperature: float = 5.0
    k: int = 8
    n: int = 4
    epsilon: float = math.inf
    aug_start_epoch: int = 0
    max_epochs: int = 100
    early_stop_patience: int = 10
    base_lr: float = 0.01
    warmup_fraction: float = 0.1
    batch_size: int = 16
    seed: int = 0
    mode: str = MODE_MINIMAX
    rerank_by_teacher: bool = True
    score_temperature: float = 1.0
    reforward_selected: bool = True
    reselect_every_step: bool = False
    threads: int = 1

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if not 0.0 <= self.kd_weight <= 1.0:
            raise ConfigError(f"kd_weight must be in [0, 1], got {self.kd_weight}")
        if not self.temperature > 0.0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not self.score_temperature > 0.0:
            raise ConfigError(f"score_temperature must be > 0, got {self.score_temperature}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.n <= self.k:
            raise ConfigError(f"n must satisfy 0 <= n <= k, got n={self.n}, k={self.k}")
        if self.epsilon < 0.0:
            raise ConfigError(f"epsilon must be >= 0 or inf, got {self.epsilon}")
        if self.aug_start_epoch < 0:
            raise ConfigError("aug_start_epoch must be >= 0")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1")
        if not self.base_lr > 0.0:
            raise ConfigError("base_lr must be > 0")
        if not 0.0 < self.warmup_fraction < 1.0:
            raise ConfigError(f"warmup_fraction must be in (0, 1), got {self.warmup_fraction}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def hyperparams(self) -> KDHyperparams:
        return KDHyperparams(kd_weight=self.kd_weight, temperature=self.temperature)


@dataclass
class EpochRecord:
    """Per-epoch bookkeeping; pass counts are exact instrumented integers."""

    epoch: int
    train_loss: float
    dev_accuracy: float
    forward_pass_count: int
    backward_pass_count: int
    wall_time: float
    aug_forward_count: int = 0
    aug_backward_count: int = 0
    aug_wall_time: float = 0.0
    selection_sorts: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def lr_at(step: int, total_steps: int, warmup_fraction: float, base_lr: float) -> float:
    """Linear warmup from 0 to ``base_lr``, then linear decay to 0 at ``total_steps``."""
    if total_steps <= 0:
        raise ConfigError("total_steps must be positive")
    if not 0 <= step <= total_steps:
        raise ConfigError(f"step {step} outside [0, {total_steps}]")
    warmup_steps = warmup_fraction * total_steps
    if step <= warmup_steps:
        return base_lr * step / warmup_steps if warmup_steps > 0 else base_lr
    return base_lr * (total_steps - step) / (total_steps - warmup_steps)


def default_embedder(dim: int = 64) -> HashedNgramEmbedder:
    """The shared deterministic featurizer used for both retrieval and models."""
    return HashedNgramEmbedder(dim=dim, seed=0)


def featurize(examples: list[LabeledExample], embedder: HashedNgramEmbedder) -> np.ndarray:
    return embedder.embed_batch([ex.text for ex in examples])


def labels_of(examples: list[LabeledExample]) -> np.ndarray:
    return np.asarray([ex.label for ex in examples], dtype=np.int64)


def evaluate_accuracy(model: MLPClassifier, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of argmax predictions matching the labels."""
    if features.shape[0] == 0:
        return float("nan")
    logits = model.forward(features)
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def build_teacher_student(
    input_dim: int,
    num_classes: int,
    seed: int,
    teacher_hidden: tuple[int, ...] = DEFAULT_TEACHER_HIDDEN,
    student_hidden: tuple[int, ...] = DEFAULT_STUDENT_HIDDEN,
) -> tuple[MLPClassifier, MLPClassifier]:
    """Build the capacity-ordered pair: the teacher must be strictly larger."""
    teacher = MLPClassifier([input_dim, *teacher_hidden, num_classes], seed=seed)
    student = MLPClassifier([input_dim, *student_hidden, num_classes], seed=seed)
    if teacher.num_params <= student.num_params:
        raise ConfigError(
            f"teacher ({teacher.num_params} params) must exceed student"
            f" ({student.num_params} params)"
        )
    return teacher, student


def build_augmentation_pool(
    examples: list[LabeledExample],
    features: np.ndarray,
    query_embeddings: np.ndarray,
    repo: SentenceRepository,
    teacher: MLPClassifier,
    embedder: HashedNgramEmbedder,
    config: DistillConfig,
) -> AugmentationPool:
    """Retrieve, rerank, and epsilon-filter candidates, caching teacher outputs.

    The teacher is frozen, so its logits, penultimate representations, and
    angular distances are computed once here. Candidates arrive from the
    encoder index (or uniformly at random in random mode), optionally
    reordered by teacher-space distance, then pruned at ``epsilon``.
    """
    if config.mode not in AUGMENTED_MODES:
        raise ConfigError(f"mode {config.mode} does not use an augmentation pool")
    index = build_index(repo)
    feature_cache: dict[int, np.ndarray] = {}
    teacher_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def candidate_arrays(repo_id: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if repo_id not in feature_cache:
            feats = embedder.embed(repo.sentences[repo_id])
            feature_cache[repo_id] = feats
            teacher_cache[repo_id] = (teacher.forward(feats), teacher.penultimate_repr(feats))
        logits, repr_ = teacher_cache[repo_id]
        return feature_cache[repo_id], logits, repr_

    pool = AugmentationPool()
    for row, example in enumerate(examples):
        if config.mode == MODE_RANDOM:
            neighbors = random_candidates(
                repo, config.k, seed=config.seed * 1_000_003 + example.id, query_id=example.id
            )
        else:
            neighbors = knn_query(index, query_embeddings[row], config.k, query_id=example.id)
        encoder_rank = {c.repo_id: rank for rank, c in enumerate(neighbors.candidates, start=1)}
        cand_data = [candidate_arrays(c.repo_id) for c in neighbors.candidates]
        query_repr = teacher.penultimate_repr(features[row])
        if config.rerank_by_teacher:
            neighbors = rerank_by_teacher(neighbors, query_repr, [d[2] for d in cand_data])
        else:
            neighbors = NeighborSet(
                query_id=neighbors.query_id,
                candidates=[
                    replace(c, teacher_angular_distance=angular_distance(query_repr, cand_data[j][2]))
                    for j, c in enumerate(neighbors.candidates)
                ],
            )
        neighbors = filter_by_epsilon(neighbors, config.epsilon)
        entry = []
        for cand in neighbors.candidates:
            feats, logits, repr_ = candidate_arrays(cand.repo_id)
            entry.append(
                PoolCandidate(
                    text=repo.sentences[cand.repo_id],
                    repo_id=cand.repo_id,
                    features=feats,
                    teacher_logits=logits,
                    teacher_repr=repr_,
                    teacher_angular_distance=cand.teacher_angular_distance,
                    encoder_rank=encoder_rank[cand.repo_id],
                )
            )
        pool.entries[example.id] = entry
    return pool


class _EarlyStopper:
    """Tracks the best dev accuracy and the parameters that achieved it."""

    def __init__(self, patience: int) -> None:
        self.patience = patience
        self.best_accuracy = -math.inf
        self.best_params: MLPClassifier | None = None
        self.best_epoch = -1
        self.stale_epochs = 0

    def update(self, model: MLPClassifier, accuracy: float, epoch: int) -> bool:
        """Record this epoch; returns True when training should stop."""
        if accuracy > self.best_accuracy:
            self.best_accuracy = accuracy
            self.best_params = model.copy()
            self.best_epoch = epoch
            self.stale_epochs = 0
        else:
            self.stale_epochs += 1
        return self.stale_epochs >= self.patience


def _check_finite_loss(value: float) -> float:
    if not math.isfinite(value):
        raise TrainingDivergenceError(f"training loss became {value}")
    return value


def _check_finite_logits(logits: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(logits)):
        raise TrainingDivergenceError("model produced non-finite logits; training diverged")
    return logits


def _train_model(
    model: MLPClassifier,
    features: np.ndarray,
    labels: np.ndarray,
    example_ids: list[int],
    dev_features: np.ndarray,
    dev_labels: np.ndarray,
    config: DistillConfig,
    orig_teacher_logits: np.ndarray | None = None,
    pool: AugmentationPool | None = None,
    trace: list[dict] | None = None,
) -> tuple[MLPClassifier, list[EpochRecord]]:
    """Shared optimization loop for every mode; returns best model and records.

    Without dev examples there is no early stopping and the final
    parameters are returned.
    """
    num_examples = features.shape[0]
    if num_examples == 0:
        raise InputError("cannot train on an empty training set")
    uses_aug = config.mode in AUGMENTED_MODES
    uses_teacher = config.mode != MODE_NO_AUG
    if uses_teacher and orig_teacher_logits is None:
        raise ConfigError(f"mode {config.mode} requires teacher logits for originals")
    if uses_aug and pool is None:
        raise ConfigError(f"mode {config.mode} requires an augmentation pool")
    if config.mode == MODE_MINIMAX and not config.reforward_selected and not config.reselect_every_step:
        raise ConfigError(
            "reforward_selected=False needs reselect_every_step=True: per-epoch"
            " selections must re-feed chosen examples once parameters move"
        )

    hp = config.hyperparams()
    optimizer = AdamOptimizer(model, config.base_lr)
    steps_per_epoch = math.ceil(num_examples / config.batch_size)
    total_steps = steps_per_epoch * config.max_epochs
    rng = np.random.default_rng(config.seed)
    stopper = _EarlyStopper(config.early_stop_patience)
    records: list[EpochRecord] = []
    global_step = 0
    has_dev = dev_features.shape[0] > 0

    for epoch in range(config.max_epochs):
        epoch_start = time.perf_counter()
        aug_seconds = 0.0
        aug_active = uses_aug and epoch >= config.aug_start_epoch
        fwd = bwd = aug_fwd = aug_bwd = sorts = 0
        loss_sum = 0.0
        loss_terms = 0

        epoch_selection: dict[int, SelectionResult] = {}
        if aug_active and config.mode == MODE_MINIMAX and not config.reselect_every_step:
            t0 = time.perf_counter()
            epoch_selection, scored = minimax_round(
                example_ids,
                pool,
                model,
                config.n,
                epsilon=math.inf,  # pool is already epsilon-filtered at build time
                score_temperature=config.score_temperature,
                epoch=epoch,
                threads=config.threads,
            )
            aug_fwd += scored
            fwd += scored
            sorts += len(example_ids)
            aug_seconds += time.perf_counter() - t0

        order = rng.permutation(num_examples)
        for start in range(0, num_examples, config.batch_size):
            batch_rows = order[start : start + config.batch_size]

            step_selection = epoch_selection
            scoring_caches: dict[int, list] = {}
            if aug_active and config.mode == MODE_MINIMAX and config.reselect_every_step:
                t0 = time.perf_counter()
                step_selection = {}
                for row in batch_rows:
                    example_id = example_ids[row]
                    candidates = pool.candidates_for(example_id)
                    caches = []
                    scores = np.zeros(len(candidates))
                    for j, cand in enumerate(candidates):
                        logits, cache = model.forward_cached(cand.features)
                        aug_fwd += 1
                        fwd += 1
                        caches.append((logits, cache))
                        scores[j] = kl_divergence(
                            softmax_with_temperature(cand.teacher_logits, config.score_temperature),
                            softmax_with_temperature(logits, config.score_temperature),
                        )
                    chosen = select_top_n(
                        scores,
                        config.n,
                        np.ones(len(candidates), dtype=bool),
                        repo_ids=[c.repo_id for c in candidates],
                    )
                    step_selection[example_id] = SelectionResult(
                        example_id=example_id,
                        selected_indices=chosen,
                        kl_scores=scores,
                        epoch=epoch,
                    )
                    scoring_caches[example_id] = caches
                    sorts += 1
                aug_seconds += time.perf_counter() - t0

            grad_acc = None
            contributions = 0
            for row in batch_rows:
                example_id = example_ids[row]
                x = features[row]
                logits, cache = model.forward_cached(x)
                _check_finite_logits(logits)
                fwd += 1
                if uses_teacher:
                    loss = combined_loss(labels[row], logits, orig_teacher_logits[row], hp)
                    grad_logits = combined_loss_grad(
                        labels[row], logits, orig_teacher_logits[row], hp
                    )
                else:
                    probs = softmax_with_temperature(logits, 1.0)
                    loss = cross_entropy(int(labels[row]), probs)
                    grad_logits = cross_entropy_grad(int(labels[row]), logits)
                loss_sum += _check_finite_loss(loss)
                loss_terms += 1
                grads = model.backward(cache, grad_logits)
                bwd += 1
                if grad_acc is None:
                    grad_acc = grads
                else:
                    for gi, (dw, db) in enumerate(grads):
                        grad_acc[gi] = (grad_acc[gi][0] + dw, grad_acc[gi][1] + db)
                contributions += 1

                if not aug_active:
                    continue
                t_aug = time.perf_counter()
                candidates = pool.candidates_for(example_id)
                if config.mode == MODE_MINIMAX:
                    selected = sorted(step_selection[example_id].selected_indices)
                else:
                    selected = list(range(len(candidates)))
                for j in selected:
                    cand = candidates[j]
                    if (
                        config.mode == MODE_MINIMAX
                        and not config.reforward_selected
                        and example_id in scoring_caches
                    ):
                        aug_logits, aug_cache = scoring_caches[example_id][j]
                    else:
                        aug_logits, aug_cache = model.forward_cached(cand.features)
                        _check_finite_logits(aug_logits)
                        aug_fwd += 1
                        fwd += 1
                    loss = augmented_example_loss(aug_logits, cand.teacher_logits, hp.temperature)
                    loss_sum += _check_finite_loss(loss)
                    loss_terms += 1
                    grad_logits = kd_loss_grad(aug_logits, cand.teacher_logits, hp.temperature)
                    grads = model.backward(aug_cache, grad_logits)
                    aug_bwd += 1
                    bwd += 1
                    for gi, (dw, db) in enumerate(grads):
                        grad_acc[gi] = (grad_acc[gi][0] + dw, grad_acc[gi][1] + db)
                    contributions += 1
                aug_seconds += time.perf_counter() - t_aug

            scale = 1.0 / contributions
            mean_grads = [(dw * scale, db * scale) for dw, db in grad_acc]
            global_step += 1
            optimizer.step(model, mean_grads, lr_at(global_step, total_steps, config.warmup_fraction, config.base_lr))

        wall_time = time.perf_counter() - epoch_start
        dev_accuracy = evaluate_accuracy(model, dev_features, dev_labels) if has_dev else float("nan")
        records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / loss_terms,
                dev_accuracy=dev_accuracy,
                forward_pass_count=fwd,
                backward_pass_count=bwd,
                wall_time=wall_time,
                aug_forward_count=aug_fwd,
                aug_backward_count=aug_bwd,
                aug_wall_time=aug_seconds,
                selection_sorts=sorts,
            )
        )
        if trace is not None and aug_active and config.mode == MODE_MINIMAX:
            selection_for_trace = step_selection if config.reselect_every_step else epoch_selection
            for example_id in example_ids:
                result = selection_for_trace.get(example_id)
                if result is None:
                    continue
                candidates = pool.candidates_for(example_id)
                trace.append(
                    {
                        "epoch": epoch,
                        "example_id": example_id,
                        "repo_ids": [c.repo_id for c in candidates],
                        "scores": [float(s) for s in result.kl_scores],
                        "selected_indices": list(result.selected_indices),
                        "selected_repo_ids": [
                            candidates[j].repo_id for j in result.selected_indices
                        ],
                    }
                )
        if has_dev and stopper.update(model, dev_accuracy, epoch):
            break

    if has_dev and stopper.best_params is not None:
        return stopper.best_params, records
    return model, records


def train_teacher(
    train: list[LabeledExample],
    dev: list[LabeledExample],
    config: DistillConfig,
    embedder: HashedNgramEmbedder | None = None,
    hidden_dims: tuple[int, ...] = DEFAULT_TEACHER_HIDDEN,
    num_classes: int | None = None,
) -> tuple[MLPClassifier, list[EpochRecord]]:
    """Fit the teacher on cross-entropy alone; best dev checkpoint wins."""
    if not train:
        raise InputError("teacher training needs a non-empty train set")
    embedder = embedder or default_embedder()
    classes = num_classes or int(max(ex.label for ex in train)) + 1
    features = featurize(train, embedder)
    dev_features = featurize(dev, embedder) if dev else np.zeros((0, embedder.dim))
    model = MLPClassifier([embedder.dim, *hidden_dims, classes], seed=config.seed)
    ce_config = replace(config, mode=MODE_NO_AUG)
    return _train_model(
        model,
        features,
        labels_of(train),
        [ex.id for ex in train],
        dev_features,
        labels_of(dev) if dev else np.zeros(0, dtype=np.int64),
        ce_config,
    )


def distill(
    teacher: MLPClassifier | None,
    train: list[LabeledExample],
    dev: list[LabeledExample],
    pool: AugmentationPool | None,
    config: DistillConfig,
    embedder: HashedNgramEmbedder | None = None,
    student_hidden: tuple[int, ...] = DEFAULT_STUDENT_HIDDEN,
    trace: list[dict] | None = None,
) -> tuple[MLPClassifier, list[EpochRecord]]:
    """Distill a student from the frozen teacher on originals plus augmentations."""
    if not train:
        raise InputError("distillation needs a non-empty train set")
    if config.mode != MODE_NO_AUG and teacher is None:
        raise ConfigError(f"mode {config.mode} requires a trained teacher")
    embedder = embedder or default_embedder()
    features = featurize(train, embedder)
    dev_features = featurize(dev, embedder) if dev else np.zeros((0, embedder.dim))
    if teacher is not None:
        num_classes = teacher.num_classes
        orig_teacher_logits = teacher.forward(features)
    else:
        num_classes = int(max(ex.label for ex in train)) + 1
        orig_teacher_logits = None
    student = MLPClassifier([embedder.dim, *student_hidden, num_classes], seed=config.seed)
    return _train_model(
        student,
        features,
        labels_of(train),
        [ex.id for ex in train],
        dev_features,
        labels_of(dev) if dev else np.zeros(0, dtype=np.int64),
        config,
        orig_teacher_logits=orig_teacher_logits,
        pool=pool if config.mode in AUGMENTED_MODES else None,
        trace=trace,
    )


def few_shot_subsample(
    train: list[LabeledExample],
    dev: list[LabeledExample],
    per_label: int,
    dev_cap: int,
    seed: int,
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Balanced with-replacement subsample of train plus a ratio-preserving dev cut.

    The sampled train set holds exactly ``per_label`` examples for every
    class, re-identified sequentially (with-replacement draws can repeat a
    source example). Dev shrinks to ``dev_cap`` examples via largest-remainder
    allocation over the class shares.
    """
    num_classes = max(ex.label for ex in train) + 1 if train else 0
    if per_label * num_classes > len(train):
        raise InputError(
            f"{per_label} per label x {num_classes} classes exceeds train size {len(train)}"
        )
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[LabeledExample]] = {c: [] for c in range(num_classes)}
    for ex in train:
        by_class[ex.label].append(ex)
    small_train: list[LabeledExample] = []
    next_id = 0
    for label in range(num_classes):
        members = by_class[label]
        if not members:
            raise InputError(f"class {label} absent from train set")
        draws = rng.integers(0, len(members), size=per_label)
        for d in draws:
            source = members[int(d)]
            small_train.append(LabeledExample(id=next_id, text=source.text, label=source.label))
            next_id += 1

    if dev_cap >= len(dev):
        return small_train, list(dev)
    dev_by_class: dict[int, list[LabeledExample]] = {}
    for ex in dev:
        dev_by_class.setdefault(ex.label, []).append(ex)
    quotas: dict[int, int] = {}
    remainders: list[tuple[float, int]] = []
    for label, members in sorted(dev_by_class.items()):
        exact = dev_cap * len(members) / len(dev)
        quotas[label] = int(exact)
        remainders.append((exact - int(exact), label))
    shortfall = dev_cap - sum(quotas.values())
    for _, label in sorted(remainders, key=lambda t: (-t[0], t[1]))[:shortfall]:
        quotas[label] += 1
    small_dev: list[LabeledExample] = []
    for label, members in sorted(dev_by_class.items()):
        take = min(quotas[label], len(members))
        chosen = rng.choice(len(members), size=take, replace=False)
        small_dev.extend(members[int(i)] for i in sorted(chosen))
    return small_train, small_dev


ABLATION_ROWS: list[dict] = [
    {"row": "no_aug", "mode": MODE_NO_AUG},
    {"row": "kd", "mode": MODE_KD_ONLY},
    {"row": "random", "mode": MODE_RANDOM, "rerank": False, "use_epsilon": False},
    {"row": "random_rerank", "mode": MODE_RANDOM, "rerank": True, "use_epsilon": False},
    {"row": "random_rerank_eps", "mode": MODE_RANDOM, "rerank": True, "use_epsilon": True},
    {"row": "knn", "mode": MODE_VANILLA, "rerank": False, "use_epsilon": False},
    {"row": "knn_rerank", "mode": MODE_VANILLA, "rerank": True, "use_epsilon": False},
    {"row": "knn_rerank_eps", "mode": MODE_VANILLA, "rerank": True, "use_epsilon": True},
    {"row": "minimax", "mode": MODE_MINIMAX, "rerank": True, "use_epsilon": True},
]


def run_ablation(
    dataset: Dataset,
    repo: SentenceRepository,
    config: DistillConfig,
    embedder: HashedNgramEmbedder | None = None,
) -> list[dict]:
    """Run the nine-row component ablation over one shared teacher and data.

    Rows toggle the candidate source (none / random / kNN), teacher
    reranking, the epsilon radius (``config.epsilon`` when finite), and
    the minimax selection. Candidate pools are shared between rows with
    identical retrieval settings, so e.g. the vanilla and minimax rows
    see exactly the same candidates.
    """
    embedder = embedder or default_embedder()
    teacher, _ = train_teacher(dataset.train, dataset.dev, config, embedder=embedder)
    features = featurize(dataset.train, embedder)
    query_embeddings = features  # same embedder on both sides at desk scale
    test_features = featurize(dataset.test, embedder) if dataset.test else None
    test_labels = labels_of(dataset.test) if dataset.test else None

    pools: dict[tuple, AugmentationPool] = {}

    def pool_for(row_config: DistillConfig) -> AugmentationPool:
        source = MODE_VANILLA if row_config.mode == MODE_MINIMAX else row_config.mode
        key = (source, row_config.rerank_by_teacher, row_config.epsilon, row_config.k)
        if key not in pools:
            build_cfg = replace(row_config, mode=source)
            pools[key] = build_augmentation_pool(
                dataset.train, features, query_embeddings, repo, teacher, embedder, build_cfg
            )
        return pools[key]

    results = []
    for row in ABLATION_ROWS:
        row_config = replace(
            config,
            mode=row["mode"],
            rerank_by_teacher=row.get("rerank", False),
            epsilon=config.epsilon if row.get("use_epsilon", False) else math.inf,
        )
        pool = pool_for(row_config) if row_config.mode in AUGMENTED_MODES else None
        student, records = distill(
            teacher if row_config.mode != MODE_NO_AUG else None,
            dataset.train,
            dataset.dev,
            pool,
            row_config,
            embedder=embedder,
        )
        entry = {
            "row": row["row"],
            "mode": row_config.mode,
            "rerank_by_teacher": row_config.rerank_by_teacher,
            "epsilon": row_config.epsilon,
            "dev_accuracy": max((r.dev_accuracy for r in records), default=float("nan")),
            "epochs_run": len(records),
            "aug_forward_count": sum(r.aug_forward_count for r in records),
            "aug_backward_count": sum(r.aug_backward_count for r in records),
        }
        if test_features is not None:
            entry["test_accuracy"] = evaluate_accuracy(student, test_features, test_labels)
        results.append(entry)
    return results
