"""kNN-augmented knowledge distillation with minimax sample selection.

Retrieve nearest-neighbour sentences for each training example, keep the
ones the teacher maps close to the original, and at training time select
the subset on which teacher and student disagree the most. The student
learns from originals with the combined CE+KD loss and from selected
augmentations with the KD term alone, at a fraction of the backward
passes full augmentation would cost.
"""
from .analysis import (
    DistanceHistogram,
    augmentation_report,
    distance_distribution,
    suggest_epsilon,
)
from .data import (
    Dataset,
    LabeledExample,
    load_dataset,
    load_repository,
    load_sentences,
    load_split,
    read_embeddings,
    save_dataset,
    save_split,
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
    FlopsReport,
    backward_flops,
    delta_flops,
    efficiency_condition,
    forward_flops,
    measure_run,
    minimax_flops,
    sort_flops,
    vanilla_flops,
)
from .index import (
    Candidate,
    Index,
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
    cross_entropy,
    kd_loss,
    kl_divergence,
    softmax_with_temperature,
)
from .models import AdamOptimizer, MLPClassifier
from .selection import (
    AugmentationPool,
    PoolCandidate,
    SelectionResult,
    minimax_round,
    score_candidates,
    select_top_n,
)
from .synth import SynthTask, make_synthetic_task
from .training import (
    DistillConfig,
    EpochRecord,
    MODE_KD_ONLY,
    MODE_MINIMAX,
    MODE_NO_AUG,
    MODE_RANDOM,
    MODE_VANILLA,
    build_augmentation_pool,
    build_teacher_student,
    default_embedder,
    distill,
    evaluate_accuracy,
    few_shot_subsample,
    lr_at,
    run_ablation,
    train_teacher,
)

__version__ = "0.1.0"

__all__ = [
    "AdamOptimizer",
    "AugmentationPool",
    "Candidate",
    "ConfigError",
    "CostParams",
    "DataError",
    "Dataset",
    "DimensionError",
    "DistanceHistogram",
    "DistillConfig",
    "DistillError",
    "EpochRecord",
    "FlopsReport",
    "HashedNgramEmbedder",
    "Index",
    "InputError",
    "KDHyperparams",
    "LabeledExample",
    "MLPClassifier",
    "MODE_KD_ONLY",
    "MODE_MINIMAX",
    "MODE_NO_AUG",
    "MODE_RANDOM",
    "MODE_VANILLA",
    "NeighborSet",
    "PoolCandidate",
    "SelectionResult",
    "SentenceRepository",
    "SynthTask",
    "TrainingDivergenceError",
    "angular_distance",
    "augmentation_report",
    "augmented_example_loss",
    "backward_flops",
    "build_augmentation_pool",
    "build_index",
    "build_teacher_student",
    "combined_loss",
    "cross_entropy",
    "default_embedder",
    "delta_flops",
    "distance_distribution",
    "distill",
    "efficiency_condition",
    "evaluate_accuracy",
    "few_shot_subsample",
    "filter_by_epsilon",
    "forward_flops",
    "kd_loss",
    "kl_divergence",
    "knn_query",
    "load_dataset",
    "load_repository",
    "load_sentences",
    "load_split",
    "lr_at",
    "make_synthetic_task",
    "measure_run",
    "minimax_flops",
    "minimax_round",
    "random_candidates",
    "read_embeddings",
    "rerank_by_teacher",
    "run_ablation",
    "save_dataset",
    "save_split",
    "score_candidates",
    "select_top_n",
    "softmax_with_temperature",
    "sort_flops",
    "suggest_epsilon",
    "train_teacher",
    "vanilla_flops",
    "write_embeddings",
]
