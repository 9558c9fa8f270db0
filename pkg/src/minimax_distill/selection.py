"""Maximization phase of the minimax augmentation loop.

Each training iteration scores every augmentation candidate by the
KL-divergence between the frozen teacher's softmax output and the current
student's, then keeps the top n per example. Teacher logits are cached in
the pool (the teacher never moves during distillation); student logits are
recomputed against a frozen snapshot of the student.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .losses import kl_divergence, softmax_with_temperature
from .models import MLPClassifier


@dataclass
class PoolCandidate:
    """One augmentation candidate with everything cached from the frozen teacher."""

    text: str
    repo_id: int
    features: np.ndarray
    teacher_logits: np.ndarray
    teacher_repr: np.ndarray
    teacher_angular_distance: float | None = None
    encoder_rank: int = -1


@dataclass
class AugmentationPool:
    """Per-example candidate lists keyed by original example id."""

    entries: dict[int, list[PoolCandidate]] = field(default_factory=dict)

    def candidates_for(self, example_id: int) -> list[PoolCandidate]:
        if example_id not in self.entries:
            raise InputError(f"no augmentation candidates for example {example_id}")
        return self.entries[example_id]

    def __contains__(self, example_id: int) -> bool:
        return example_id in self.entries

    def total_candidates(self) -> int:
        return sum(len(v) for v in self.entries.values())


@dataclass
class SelectionResult:
    """Chosen candidate indices and the scores that ranked them, for one example."""

    example_id: int
    selected_indices: list[int]
    kl_scores: np.ndarray
    epoch: int


def score_candidates(
    candidates: list[PoolCandidate],
    student: MLPClassifier,
    score_temperature: float = 1.0,
) -> np.ndarray:
    """KL(teacher || student) on each candidate's softmax outputs.

    Candidates are unlabelled here; only the two models' output
    distributions matter. Scores are finite and >= 0.
    """
    scores = np.zeros(len(candidates), dtype=np.float64)
    for j, cand in enumerate(candidates):
        if len(cand.teacher_logits) != student.num_classes:
            raise InputError(
                f"teacher has {len(cand.teacher_logits)} classes, student {student.num_classes}"
            )
        student_logits = student.forward(cand.features)
        teacher_probs = softmax_with_temperature(cand.teacher_logits, score_temperature)
        student_probs = softmax_with_temperature(student_logits, score_temperature)
        scores[j] = kl_divergence(teacher_probs, student_probs)
    return scores


def select_top_n(
    kl_scores: np.ndarray,
    n: int,
    eps_mask: np.ndarray,
    repo_ids: list[int] | None = None,
) -> list[int]:
    """Indices of the n highest-scoring candidates among those passing the mask.

    Sorted by score descending, ties by ascending repo id (candidate index
    when ids are not given). n = 0 or an all-false mask selects nothing.
    """
    scores = np.asarray(kl_scores, dtype=np.float64)
    mask = np.asarray(eps_mask, dtype=bool)
    if scores.shape != mask.shape:
        raise InputError(f"scores shape {scores.shape} vs mask shape {mask.shape}")
    if n <= 0:
        return []
    ids = repo_ids if repo_ids is not None else list(range(len(scores)))
    passing = [i for i in range(len(scores)) if mask[i]]
    passing.sort(key=lambda i: (-scores[i], ids[i]))
    return passing[: min(n, len(passing))]


def _epsilon_mask(candidates: list[PoolCandidate], epsilon: float) -> np.ndarray:
    if epsilon == np.inf:
        return np.ones(len(candidates), dtype=bool)
    mask = np.zeros(len(candidates), dtype=bool)
    for j, cand in enumerate(candidates):
        if cand.teacher_angular_distance is None:
            raise InputError(
                f"candidate {cand.repo_id} lacks a teacher distance; finite epsilon needs one"
            )
        mask[j] = cand.teacher_angular_distance <= epsilon
    return mask


def minimax_round(
    example_ids: list[int],
    pool: AugmentationPool,
    student: MLPClassifier,
    n: int,
    epsilon: float = np.inf,
    score_temperature: float = 1.0,
    epoch: int = 0,
    threads: int = 1,
) -> tuple[dict[int, SelectionResult], int]:
    """Score, epsilon-filter, and pick top n for every example in the batch.

    Returns per-example selections plus the number of student forward
    passes spent scoring. Scoring fans out over a frozen student when
    ``threads`` > 1; results merge by example id so the outcome is
    identical to the sequential run.
    """
    for example_id in example_ids:
        if example_id not in pool:
            raise InputError(f"augmentation pool does not cover example {example_id}")

    def run_one(example_id: int) -> tuple[int, SelectionResult, int]:
        candidates = pool.candidates_for(example_id)
        scores = score_candidates(candidates, student, score_temperature)
        mask = _epsilon_mask(candidates, epsilon)
        chosen = select_top_n(scores, n, mask, repo_ids=[c.repo_id for c in candidates])
        result = SelectionResult(
            example_id=example_id,
            selected_indices=chosen,
            kl_scores=scores,
            epoch=epoch,
        )
        return example_id, result, len(candidates)

    results: dict[int, SelectionResult] = {}
    forward_passes = 0
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            outcomes = list(pool_exec.map(run_one, example_ids))
    else:
        outcomes = [run_one(i) for i in example_ids]
    for example_id, result, count in outcomes:
        results[example_id] = result
        forward_passes += count
    return results, forward_passes
