"""Exact nearest-neighbour retrieval over unit-normalized sentence embeddings.

Search is a flat scan (exact by construction); desk-scale repositories do
not need an approximate index. Ties on the ranking key break by ascending
repository id so results are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, InputError

UNIT_NORM_TOL = 1e-5

RANK_ENCODER = "encoder"
RANK_TEACHER = "teacher"
RANK_RANDOM = "random"


def normalize(vector: np.ndarray | list[float]) -> np.ndarray:
    """Scale a vector to unit L2 norm, preserving direction."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite entries")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InputError("cannot normalize a zero vector")
    return v / norm


def angular_distance(a: np.ndarray | list[float], b: np.ndarray | list[float]) -> float:
    """Angle between two vectors scaled to [0, 1]: arccos(cos_sim) / pi.

    Norms are divided out, so inputs need not be unit vectors.  Computed as
    2*atan2(|u - v|, |u + v|) on the normalized vectors rather than arccos of
    the dot product: arccos loses ~sqrt(eps) of precision near parallel and
    antiparallel inputs, which would break the exact 0 / 0.5 / 1 anchors.
    """
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape or av.ndim != 1:
        raise DimensionError(f"vector shapes differ: {av.shape} vs {bv.shape}")
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise InputError("angular distance undefined for zero vectors")
    u = av / na
    v = bv / nb
    angle = 2.0 * math.atan2(float(np.linalg.norm(u - v)), float(np.linalg.norm(u + v)))
    return angle / math.pi


@dataclass(frozen=True)
class Candidate:
    """One retrieved neighbour of a query example."""

    repo_id: int
    cosine_similarity: float
    teacher_angular_distance: float | None = None
    rank_source: str = RANK_ENCODER


@dataclass
class NeighborSet:
    """Ranked candidate list for a single query example."""

    query_id: int
    candidates: list[Candidate] = field(default_factory=list)

    def repo_ids(self) -> list[int]:
        return [c.repo_id for c in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass
class SentenceRepository:
    """Unlabelled sentences with row-aligned unit embeddings; row index is the id."""

    sentences: list[str]
    embeddings: np.ndarray

    def __post_init__(self) -> None:
        emb = np.asarray(self.embeddings, dtype=np.float64)
        if emb.ndim != 2:
            raise DimensionError(f"embeddings must be 2-D, got shape {emb.shape}")
        if len(self.sentences) != emb.shape[0]:
            raise InputError(
                f"{len(self.sentences)} sentences but {emb.shape[0]} embedding rows"
            )
        if not np.all(np.isfinite(emb)):
            raise InputError("embeddings contain non-finite entries")
        norms = np.linalg.norm(emb, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            if np.any(norms == 0.0):
                raise InputError("repository contains a zero embedding row")
            emb = emb / norms[:, None]
        self.embeddings = emb

    @property
    def size(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


class Index:
    """Immutable flat index over a repository; queries are exact scans."""

    def __init__(self, repo: SentenceRepository) -> None:
        self._repo = repo
        self._matrix = repo.embeddings

    @property
    def size(self) -> int:
        return self._matrix.shape[0]

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    @property
    def repository(self) -> SentenceRepository:
        return self._repo

    def sentence(self, repo_id: int) -> str:
        return self._repo.sentences[repo_id]


def build_index(repo: SentenceRepository) -> Index:
    """Wrap a repository for querying; ids keep their row order."""
    if repo.size == 0:
        raise InputError("cannot index an empty repository")
    return Index(repo)


def knn_query(index: Index, query: np.ndarray | list[float], k: int, query_id: int = -1) -> NeighborSet:
    """Top-k rows by cosine similarity, descending; ties by ascending repo id."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != index.dim:
        raise DimensionError(f"query shape {q.shape} does not match index dim {index.dim}")
    sims = index._matrix @ q
    # lexsort: last key is primary, so sort by -similarity then id.
    order = np.lexsort((np.arange(index.size), -sims))[: min(k, index.size)]
    candidates = [
        Candidate(repo_id=int(i), cosine_similarity=float(sims[i])) for i in order
    ]
    return NeighborSet(query_id=query_id, candidates=candidates)


def rerank_by_teacher(
    neighbors: NeighborSet,
    teacher_query_repr: np.ndarray,
    teacher_candidate_reprs: list[np.ndarray] | np.ndarray,
) -> NeighborSet:
    """Re-sort candidates by angular distance to the query in teacher space.

    The sort is stable, so candidates at equal distance keep their
    encoder order. Distances are recorded on the returned candidates.
    """
    reprs = list(teacher_candidate_reprs)
    if len(reprs) != len(neighbors.candidates):
        raise InputError(
            f"{len(neighbors.candidates)} candidates but {len(reprs)} teacher representations"
        )
    distances = [angular_distance(teacher_query_repr, r) for r in reprs]
    order = sorted(range(len(distances)), key=lambda i: distances[i])
    reranked = [
        replace(
            neighbors.candidates[i],
            teacher_angular_distance=distances[i],
            rank_source=RANK_TEACHER,
        )
        for i in order
    ]
    return NeighborSet(query_id=neighbors.query_id, candidates=reranked)


def filter_by_epsilon(neighbors: NeighborSet, epsilon: float) -> NeighborSet:
    """Keep candidates with teacher angular distance <= epsilon, order preserved.

    ``epsilon = inf`` is the no-filter case and does not require distances.
    """
    if epsilon == np.inf:
        return NeighborSet(query_id=neighbors.query_id, candidates=list(neighbors.candidates))
    kept = []
    for cand in neighbors.candidates:
        if cand.teacher_angular_distance is None:
            raise InputError(
                f"candidate {cand.repo_id} has no teacher distance; rerank before filtering"
            )
        if cand.teacher_angular_distance <= epsilon:
            kept.append(cand)
    return NeighborSet(query_id=neighbors.query_id, candidates=kept)


def random_candidates(
    repo: SentenceRepository, count: int, seed: int, query_id: int = -1
) -> NeighborSet:
    """Uniform sample of ``count`` repository rows without replacement."""
    if count > repo.size:
        raise InputError(f"cannot sample {count} from repository of {repo.size}")
    rng = np.random.default_rng(seed)
    ids = rng.choice(repo.size, size=count, replace=False)
    candidates = [
        Candidate(repo_id=int(i), cosine_similarity=0.0, rank_source=RANK_RANDOM)
        for i in ids
    ]
    return NeighborSet(query_id=query_id, candidates=candidates)
