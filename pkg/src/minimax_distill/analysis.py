"""Diagnostics over augmentation pools: distance distributions, epsilon tuning.

A candidate counts as label-matched when the teacher's argmax on the
candidate equals its argmax on the original example (ties to the lowest
class index). The histogram of teacher-space angular distances for the
two groups drives the epsilon suggestion: when almost no mismatched mass
sits below the matched maximum, that maximum is a safe filtering radius;
otherwise filtering would distort the label distribution and the
suggestion falls back to infinity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledExample
from .embedder import HashedNgramEmbedder
from .errors import InputError
from .models import MLPClassifier
from .selection import AugmentationPool

DEFAULT_BUCKETS = 50


@dataclass
class DistanceHistogram:
    """Bucketed matched/mismatched distance counts over [0, 1]."""

    bucket_edges: np.ndarray
    matched_counts: np.ndarray
    mismatched_counts: np.ndarray

    def __post_init__(self) -> None:
        self.bucket_edges = np.asarray(self.bucket_edges, dtype=float)
        self.matched_counts = np.asarray(self.matched_counts, dtype=np.int64)
        self.mismatched_counts = np.asarray(self.mismatched_counts, dtype=np.int64)
        if not np.all(np.diff(self.bucket_edges) > 0):
            raise InputError("bucket edges must be strictly ascending")
        if len(self.matched_counts) != len(self.bucket_edges) - 1:
            raise InputError("matched counts must have one entry per bucket")
        if len(self.mismatched_counts) != len(self.bucket_edges) - 1:
            raise InputError("mismatched counts must have one entry per bucket")

    @property
    def total(self) -> int:
        return int(self.matched_counts.sum() + self.mismatched_counts.sum())

    def table(self, group: str) -> list[tuple[float, int]]:
        """Plot-ready (bucket midpoint, count) rows for 'matched' or 'mismatched'."""
        if group == "matched":
            counts = self.matched_counts
        elif group == "mismatched":
            counts = self.mismatched_counts
        else:
            raise InputError(f"unknown group {group!r}")
        midpoints = (self.bucket_edges[:-1] + self.bucket_edges[1:]) / 2.0
        return [(float(m), int(c)) for m, c in zip(midpoints, counts)]


def distance_distribution(
    examples: list[LabeledExample],
    pool: AugmentationPool,
    teacher: MLPClassifier,
    embedder: HashedNgramEmbedder | None = None,
    num_buckets: int = DEFAULT_BUCKETS,
) -> DistanceHistogram:
    """Histogram candidate distances, split by teacher label agreement.

    Distances are the teacher-space angular distances cached in the pool.
    """
    if num_buckets < 1:
        raise InputError("num_buckets must be >= 1")
    embedder = embedder or HashedNgramEmbedder(dim=64, seed=0)
    edges = np.linspace(0.0, 1.0, num_buckets + 1)
    matched_d: list[float] = []
    mismatched_d: list[float] = []
    for ex in examples:
        if ex.id not in pool:
            continue
        original_label = int(np.argmax(teacher.forward(embedder.embed(ex.text))))
        for cand in pool.candidates_for(ex.id):
            if cand.teacher_angular_distance is None:
                raise InputError(
                    f"candidate {cand.repo_id} for example {ex.id} has no teacher distance"
                )
            cand_label = int(np.argmax(cand.teacher_logits))
            target = matched_d if cand_label == original_label else mismatched_d
            target.append(cand.teacher_angular_distance)
    if not matched_d and not mismatched_d:
        raise InputError("no candidates to report: every pool entry is empty")
    matched_counts, _ = np.histogram(matched_d, bins=edges)
    mismatched_counts, _ = np.histogram(mismatched_d, bins=edges)
    return DistanceHistogram(edges, matched_counts, mismatched_counts)


def suggest_epsilon(hist: DistanceHistogram, overlap_threshold: float = 0.05) -> float:
    """Matched-maximum distance if mismatched overlap below it is negligible, else inf.

    Overlap is the fraction of mismatched candidates falling in buckets at
    or below the last bucket holding matched candidates. Returns inf when
    no matched candidates exist (nothing to anchor the radius to).
    """
    if overlap_threshold < 0:
        raise InputError("overlap_threshold must be >= 0")
    nonzero = np.nonzero(hist.matched_counts)[0]
    if len(nonzero) == 0:
        return float("inf")
    last_matched = int(nonzero[-1])
    matched_max = float(hist.bucket_edges[last_matched + 1])
    total_mismatched = int(hist.mismatched_counts.sum())
    if total_mismatched == 0:
        return matched_max
    below = int(hist.mismatched_counts[: last_matched + 1].sum())
    if below / total_mismatched < overlap_threshold:
        return matched_max
    return float("inf")


@dataclass
class ReportRow:
    example_id: int
    original_text: str
    repo_id: int
    candidate_text: str
    encoder_rank: int
    teacher_rank: int
    teacher_label: int
    kl_score: float | None
    selected: bool
    label_mismatch: bool


_REPORT_HEADER = (
    "example_id\trepo_id\tencoder_rank\tteacher_rank\tteacher_label"
    "\tkl_score\tselected\tlabel_mismatch\tcandidate_text"
)


def augmentation_report(
    examples: list[LabeledExample],
    pool: AugmentationPool,
    teacher: MLPClassifier,
    traces: list[dict],
    embedder: HashedNgramEmbedder | None = None,
) -> tuple[list[ReportRow], str]:
    """Qualitative per-candidate report of the latest traced selection round.

    One row per candidate of every traced example: retrieval rank, teacher
    rank, the teacher's predicted label, the KL score from the trace, and
    flags for selection and label mismatch. Returns the rows and a
    tab-separated rendering (header only when the trace is empty).
    """
    embedder = embedder or HashedNgramEmbedder(dim=64, seed=0)
    latest: dict[int, dict] = {}
    for record in traces:
        current = latest.get(record["example_id"])
        if current is None or record["epoch"] >= current["epoch"]:
            latest[record["example_id"]] = record
    by_id = {ex.id: ex for ex in examples}
    rows: list[ReportRow] = []
    for example_id in sorted(latest):
        record = latest[example_id]
        if example_id not in by_id:
            raise InputError(f"trace references unknown example {example_id}")
        ex = by_id[example_id]
        original_label = int(np.argmax(teacher.forward(embedder.embed(ex.text))))
        candidates = pool.candidates_for(example_id)
        selected = set(record["selected_indices"])
        scores = record["scores"]
        for rank, cand in enumerate(candidates, start=1):
            cand_label = int(np.argmax(cand.teacher_logits))
            rows.append(
                ReportRow(
                    example_id=example_id,
                    original_text=ex.text,
                    repo_id=cand.repo_id,
                    candidate_text=cand.text,
                    encoder_rank=cand.encoder_rank,
                    teacher_rank=rank,
                    teacher_label=cand_label,
                    kl_score=float(scores[rank - 1]) if rank - 1 < len(scores) else None,
                    selected=(rank - 1) in selected,
                    label_mismatch=cand_label != original_label,
                )
            )
    lines = [_REPORT_HEADER]
    for r in rows:
        score = f"{r.kl_score:.6f}" if r.kl_score is not None else "-"
        lines.append(
            f"{r.example_id}\t{r.repo_id}\t{r.encoder_rank}\t{r.teacher_rank}"
            f"\t{r.teacher_label}\t{score}\t{int(r.selected)}\t{int(r.label_mismatch)}"
            f"\t{r.candidate_text}"
        )
    return rows, "\n".join(lines) + "\n"
