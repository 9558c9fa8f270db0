"""Analysis tests: distance histograms, radius suggestion, candidate reports."""

import math

import numpy as np
import pytest

from minimax_distill.analysis import (
    DistanceHistogram,
    ReportRow,
    augmentation_report,
    distance_distribution,
    suggest_epsilon,
)
from minimax_distill.data import LabeledExample
from minimax_distill.errors import InputError
from minimax_distill.models import MLPClassifier
from minimax_distill.selection import AugmentationPool, PoolCandidate
from minimax_distill.training import default_embedder

EMBED_DIM = 16


@pytest.fixture(scope="module")
def embedder():
    return default_embedder(dim=EMBED_DIM)


@pytest.fixture(scope="module")
def teacher():
    return MLPClassifier([EMBED_DIM, 8, 3], seed=0)


def make_candidate(repo_id, text, embedder, teacher, distance, rank=1):
    features = embedder.embed(text)
    return PoolCandidate(
        text=text,
        repo_id=repo_id,
        features=features,
        teacher_logits=teacher.forward(features),
        teacher_repr=np.zeros(1),
        teacher_angular_distance=distance,
        encoder_rank=rank,
    )


class TestDistanceHistogram:
    def test_edges_must_ascend(self):
        with pytest.raises(InputError):
            DistanceHistogram(np.array([0.0, 0.5, 0.5]), np.zeros(2), np.zeros(2))

    def test_count_lengths_must_match(self):
        with pytest.raises(InputError):
            DistanceHistogram(np.array([0.0, 0.5, 1.0]), np.zeros(3), np.zeros(2))

    def test_total(self):
        hist = DistanceHistogram(
            np.array([0.0, 0.5, 1.0]), np.array([3, 1]), np.array([0, 2])
        )
        assert hist.total == 6

    def test_table_midpoints(self):
        hist = DistanceHistogram(
            np.array([0.0, 0.5, 1.0]), np.array([3, 1]), np.array([0, 2])
        )
        assert hist.table("matched") == [(0.25, 3), (0.75, 1)]
        assert hist.table("mismatched") == [(0.25, 0), (0.75, 2)]
        with pytest.raises(InputError):
            hist.table("other")


class TestDistanceDistribution:
    def test_identical_candidates_land_in_first_bucket(self, embedder, teacher):
        """A candidate that is its own original has distance 0 and matches."""
        ex = LabeledExample(id=0, text="some original sentence", label=0)
        cand = make_candidate(0, ex.text, embedder, teacher, distance=0.0)
        pool = AugmentationPool(entries={0: [cand]})
        hist = distance_distribution([ex], pool, teacher, embedder=embedder, num_buckets=10)
        assert hist.matched_counts[0] == 1
        assert hist.matched_counts.sum() == 1
        assert hist.mismatched_counts.sum() == 0

    def test_recount_oracle_on_random_pool(self, embedder, teacher):
        """Bucketed counts equal a direct per-candidate recount."""
        rng = np.random.default_rng(0)
        examples = [
            LabeledExample(id=i, text=f"original number {i}", label=0) for i in range(8)
        ]
        entries = {}
        repo_id = 0
        for ex in examples:
            cands = []
            for j in range(6):
                cands.append(
                    make_candidate(
                        repo_id,
                        f"candidate {repo_id} text {j}",
                        embedder,
                        teacher,
                        distance=float(rng.uniform(0, 1)),
                    )
                )
                repo_id += 1
            entries[ex.id] = cands
        pool = AugmentationPool(entries=entries)
        num_buckets = 7
        hist = distance_distribution(examples, pool, teacher, embedder=embedder, num_buckets=num_buckets)

        edges = np.linspace(0.0, 1.0, num_buckets + 1)
        matched, mismatched = np.zeros(num_buckets, dtype=int), np.zeros(num_buckets, dtype=int)
        for ex in examples:
            own = int(np.argmax(teacher.forward(embedder.embed(ex.text))))
            for cand in pool.candidates_for(ex.id):
                b = min(int(np.searchsorted(edges, cand.teacher_angular_distance, side="right")) - 1,
                        num_buckets - 1)
                if int(np.argmax(cand.teacher_logits)) == own:
                    matched[b] += 1
                else:
                    mismatched[b] += 1
        np.testing.assert_array_equal(hist.matched_counts, matched)
        np.testing.assert_array_equal(hist.mismatched_counts, mismatched)

    def test_mass_conserved_across_bucket_counts(self, embedder, teacher):
        rng = np.random.default_rng(1)
        examples = [LabeledExample(id=i, text=f"text {i}", label=0) for i in range(5)]
        entries = {
            ex.id: [
                make_candidate(i * 10 + j, f"cand {i} {j}", embedder, teacher,
                               distance=float(rng.uniform(0, 1)))
                for j in range(4)
            ]
            for i, ex in enumerate(examples)
        }
        pool = AugmentationPool(entries=entries)
        totals = {
            nb: distance_distribution(examples, pool, teacher, embedder=embedder, num_buckets=nb).total
            for nb in (5, 13, 50)
        }
        assert len(set(totals.values())) == 1
        assert totals[5] == 20

    def test_missing_distance_rejected(self, embedder, teacher):
        ex = LabeledExample(id=0, text="original", label=0)
        cand = make_candidate(0, "candidate", embedder, teacher, distance=None)
        pool = AugmentationPool(entries={0: [cand]})
        with pytest.raises(InputError):
            distance_distribution([ex], pool, teacher, embedder=embedder)

    def test_empty_pool_rejected(self, embedder, teacher):
        ex = LabeledExample(id=0, text="original", label=0)
        pool = AugmentationPool(entries={0: []})
        with pytest.raises(InputError):
            distance_distribution([ex], pool, teacher, embedder=embedder)


def hist_from_counts(matched, mismatched, num_buckets=10):
    edges = np.linspace(0.0, 1.0, num_buckets + 1)
    return DistanceHistogram(edges, np.asarray(matched), np.asarray(mismatched))


class TestSuggestEpsilon:
    def test_clean_separation_returns_matched_max(self):
        """Matched mass ends at 0.3; mismatched only above: radius = 0.3."""
        matched = [5, 8, 2, 0, 0, 0, 0, 0, 0, 0]
        mismatched = [0, 0, 0, 0, 6, 9, 4, 2, 1, 0]
        assert suggest_epsilon(hist_from_counts(matched, mismatched)) == pytest.approx(0.3)

    def test_full_overlap_returns_inf(self):
        matched = [5, 8, 2, 0, 0, 0, 0, 0, 0, 0]
        mismatched = [6, 9, 4, 0, 0, 0, 0, 0, 0, 0]
        assert suggest_epsilon(hist_from_counts(matched, mismatched)) == math.inf

    def test_small_overlap_tolerated(self):
        """One mismatched candidate in 100 below the cut stays under 5%."""
        matched = [5, 8, 2, 0, 0, 0, 0, 0, 0, 0]
        mismatched = [1, 0, 0, 0, 50, 30, 19, 0, 0, 0]
        assert suggest_epsilon(hist_from_counts(matched, mismatched)) == pytest.approx(0.3)

    def test_no_matched_returns_inf(self):
        matched = [0] * 10
        mismatched = [1] * 10
        assert suggest_epsilon(hist_from_counts(matched, mismatched)) == math.inf

    def test_no_mismatched_returns_matched_max(self):
        matched = [0, 0, 4, 1, 0, 0, 0, 0, 0, 0]
        mismatched = [0] * 10
        assert suggest_epsilon(hist_from_counts(matched, mismatched)) == pytest.approx(0.4)

    def test_threshold_monotonicity(self):
        """Raising the tolerance can only move the answer from inf to finite."""
        matched = [5, 5, 0, 0, 0, 0, 0, 0, 0, 0]
        mismatched = [2, 0, 0, 0, 48, 0, 0, 0, 0, 0]
        strict = suggest_epsilon(hist_from_counts(matched, mismatched), overlap_threshold=0.01)
        loose = suggest_epsilon(hist_from_counts(matched, mismatched), overlap_threshold=0.10)
        assert strict == math.inf
        assert loose == pytest.approx(0.2)

    def test_negative_threshold_rejected(self):
        with pytest.raises(InputError):
            suggest_epsilon(hist_from_counts([1] + [0] * 9, [0] * 10), overlap_threshold=-0.1)

    def test_fine_buckets_give_fine_radius(self):
        """With 50 buckets the suggested radius lands on a 0.02 grid edge."""
        matched = np.zeros(50, dtype=int)
        matched[:11] = 3  # mass through bucket [0.20, 0.22)
        mismatched = np.zeros(50, dtype=int)
        mismatched[20:] = 5
        hist = DistanceHistogram(np.linspace(0, 1, 51), matched, mismatched)
        assert suggest_epsilon(hist) == pytest.approx(0.22)


class TestAugmentationReport:
    def _setup(self, embedder, teacher, num_examples=3, k=4):
        examples = [
            LabeledExample(id=i, text=f"report original {i}", label=0)
            for i in range(num_examples)
        ]
        entries = {}
        repo_id = 0
        for ex in examples:
            entries[ex.id] = [
                make_candidate(repo_id + j, f"report candidate {repo_id + j}", embedder,
                               teacher, distance=0.1 * j, rank=j + 1)
                for j in range(k)
            ]
            repo_id += k
        return examples, AugmentationPool(entries=entries)

    def _trace_row(self, pool, example_id, epoch, selected):
        cands = pool.candidates_for(example_id)
        return {
            "epoch": epoch,
            "example_id": example_id,
            "repo_ids": [c.repo_id for c in cands],
            "scores": [float(i) for i in range(len(cands))],
            "selected_indices": selected,
            "selected_repo_ids": [cands[i].repo_id for i in selected],
        }

    def test_one_row_per_candidate(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher)
        traces = [self._trace_row(pool, ex.id, 0, [0]) for ex in examples]
        rows, text = augmentation_report(examples, pool, teacher, traces, embedder=embedder)
        assert len(rows) == 3 * 4
        assert len(text.strip().splitlines()) == 1 + 12

    def test_selected_flags_follow_trace(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher, num_examples=1)
        traces = [self._trace_row(pool, 0, 0, [1, 3])]
        rows, _ = augmentation_report(examples, pool, teacher, traces, embedder=embedder)
        assert [r.selected for r in rows] == [False, True, False, True]

    def test_latest_epoch_wins(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher, num_examples=1)
        traces = [
            self._trace_row(pool, 0, 0, [0]),
            self._trace_row(pool, 0, 3, [2]),
            self._trace_row(pool, 0, 1, [1]),
        ]
        rows, _ = augmentation_report(examples, pool, teacher, traces, embedder=embedder)
        assert [r.selected for r in rows] == [False, False, True, False]

    def test_kl_scores_copied_from_trace(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher, num_examples=1)
        traces = [self._trace_row(pool, 0, 0, [0])]
        rows, _ = augmentation_report(examples, pool, teacher, traces, embedder=embedder)
        assert [r.kl_score for r in rows] == [0.0, 1.0, 2.0, 3.0]

    def test_label_mismatch_flag(self, embedder, teacher):
        ex = LabeledExample(id=0, text="original text here", label=0)
        own_label = int(np.argmax(teacher.forward(embedder.embed(ex.text))))
        cands = [
            make_candidate(j, f"wildly varied candidate text {j} {'x' * j}", embedder,
                           teacher, distance=0.1, rank=j + 1)
            for j in range(6)
        ]
        pool = AugmentationPool(entries={0: cands})
        traces = [self._trace_row(pool, 0, 0, [0])]
        rows, _ = augmentation_report([ex], pool, teacher, traces, embedder=embedder)
        for row, cand in zip(rows, cands):
            expected = int(np.argmax(cand.teacher_logits)) != own_label
            assert row.label_mismatch == expected
            assert isinstance(row, ReportRow)

    def test_empty_trace_gives_header_only(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher)
        rows, text = augmentation_report(examples, pool, teacher, [], embedder=embedder)
        assert rows == []
        assert text.startswith("example_id\t")
        assert len(text.strip().splitlines()) == 1

    def test_unknown_example_in_trace_rejected(self, embedder, teacher):
        examples, pool = self._setup(embedder, teacher)
        bogus = self._trace_row(pool, 0, 0, [0])
        bogus["example_id"] = 99
        with pytest.raises(InputError):
            augmentation_report(examples, pool, teacher, [bogus], embedder=embedder)
