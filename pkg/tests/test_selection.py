"""Selection tests: divergence scoring, top-n picking, per-round orchestration."""

import math

import numpy as np
import pytest

from minimax_distill.errors import InputError
from minimax_distill.losses import kl_divergence, softmax_with_temperature
from minimax_distill.models import MLPClassifier
from minimax_distill.selection import (
    AugmentationPool,
    PoolCandidate,
    SelectionResult,
    minimax_round,
    score_candidates,
    select_top_n,
)


def make_candidate(repo_id, features, teacher_logits, distance=None, rank=-1):
    return PoolCandidate(
        text=f"cand {repo_id}",
        repo_id=repo_id,
        features=np.asarray(features, dtype=np.float64),
        teacher_logits=np.asarray(teacher_logits, dtype=np.float64),
        teacher_repr=np.zeros(1),
        teacher_angular_distance=distance,
        encoder_rank=rank,
    )


def make_pool(entries):
    return AugmentationPool(entries=entries)


class TestScoreCandidates:
    def test_matches_manual_kl(self):
        rng = np.random.default_rng(0)
        model = MLPClassifier([4, 5, 3], seed=1)
        candidates = [
            make_candidate(i, rng.normal(size=4), rng.normal(size=3)) for i in range(6)
        ]
        scores = score_candidates(candidates, model, score_temperature=1.0)
        for cand, score in zip(candidates, scores):
            pt = softmax_with_temperature(cand.teacher_logits, 1.0)
            ps = softmax_with_temperature(model.forward(cand.features), 1.0)
            assert score == pytest.approx(kl_divergence(pt, ps), abs=1e-12)

    def test_score_temperature_tempers_both_sides(self):
        rng = np.random.default_rng(1)
        model = MLPClassifier([4, 5, 3], seed=2)
        cand = make_candidate(0, rng.normal(size=4), rng.normal(size=3))
        scores = score_candidates([cand], model, score_temperature=4.0)
        pt = softmax_with_temperature(cand.teacher_logits, 4.0)
        ps = softmax_with_temperature(model.forward(cand.features), 4.0)
        assert scores[0] == pytest.approx(kl_divergence(pt, ps), abs=1e-12)

    def test_no_temperature_squared_factor(self):
        """Selection scores rank by raw KL; the T^2 factor belongs to the loss."""
        rng = np.random.default_rng(2)
        model = MLPClassifier([4, 5, 3], seed=3)
        cand = make_candidate(0, rng.normal(size=4), rng.normal(size=3))
        t = 5.0
        score = score_candidates([cand], model, score_temperature=t)[0]
        pt = softmax_with_temperature(cand.teacher_logits, t)
        ps = softmax_with_temperature(model.forward(cand.features), t)
        assert score == pytest.approx(kl_divergence(pt, ps), abs=1e-12)
        assert score != pytest.approx(t * t * kl_divergence(pt, ps), abs=1e-9)

    def test_all_scores_nonnegative(self):
        rng = np.random.default_rng(3)
        model = MLPClassifier([4, 5, 3], seed=4)
        candidates = [
            make_candidate(i, rng.normal(size=4), rng.normal(size=3)) for i in range(50)
        ]
        assert np.all(score_candidates(candidates, model) >= 0)

    def test_class_count_mismatch_rejected(self):
        model = MLPClassifier([4, 5, 3], seed=0)
        cand = make_candidate(0, np.ones(4), np.ones(5))
        with pytest.raises(InputError):
            score_candidates([cand], model)


def oracle_top_n(scores, n, mask, repo_ids):
    """Full sort by (-score, repo_id) then take the first n unmasked."""
    order = sorted(
        (i for i in range(len(scores)) if mask[i]),
        key=lambda i: (-scores[i], repo_ids[i]),
    )
    return sorted(order[:n], key=lambda i: (-scores[i], repo_ids[i]))


class TestSelectTopN:
    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            size = int(rng.integers(1, 30))
            scores = rng.uniform(0, 5, size=size)
            if rng.uniform() < 0.3:
                scores = np.round(scores, 1)  # force ties
            n = int(rng.integers(0, size + 2))
            mask = rng.uniform(size=size) < 0.8
            repo_ids = list(rng.choice(10_000, size=size, replace=False))
            got = select_top_n(scores, n, mask, repo_ids=repo_ids)
            assert got == oracle_top_n(scores, n, mask, repo_ids)

    def test_ties_break_by_ascending_repo_id(self):
        scores = np.array([1.0, 1.0, 1.0])
        mask = np.array([True, True, True])
        got = select_top_n(scores, 2, mask, repo_ids=[30, 10, 20])
        assert got == [1, 2]

    def test_n_zero_selects_nothing(self):
        assert select_top_n(np.array([1.0, 2.0]), 0, np.array([True, True])) == []

    def test_all_masked_selects_nothing(self):
        assert select_top_n(np.array([1.0, 2.0]), 2, np.array([False, False])) == []

    def test_n_exceeding_unmasked_returns_all_unmasked(self):
        scores = np.array([3.0, 1.0, 2.0])
        mask = np.array([True, False, True])
        assert select_top_n(scores, 5, mask) == [0, 2]


class TestMinimaxRound:
    def _setup(self, num_examples=4, k=6, seed=0):
        rng = np.random.default_rng(seed)
        model = MLPClassifier([4, 5, 3], seed=seed)
        entries = {}
        next_repo_id = 0
        for ex_id in range(num_examples):
            cands = []
            for _ in range(k):
                cands.append(
                    make_candidate(
                        next_repo_id,
                        rng.normal(size=4),
                        rng.normal(size=3),
                        distance=float(rng.uniform(0, 1)),
                    )
                )
                next_repo_id += 1
            entries[ex_id] = cands
        return model, make_pool(entries)

    def test_selects_top_n_per_example(self):
        model, pool = self._setup()
        results, _ = minimax_round([0, 1, 2, 3], pool, model, n=2)
        for ex_id in (0, 1, 2, 3):
            cands = pool.candidates_for(ex_id)
            scores = score_candidates(cands, model)
            mask = np.ones(len(cands), dtype=bool)
            expected = oracle_top_n(scores, 2, mask, [c.repo_id for c in cands])
            assert results[ex_id].selected_indices == expected
            np.testing.assert_allclose(results[ex_id].kl_scores, scores, atol=1e-12)

    def test_forward_pass_count_is_total_candidates(self):
        model, pool = self._setup(num_examples=5, k=7)
        _, forwards = minimax_round([0, 1, 2, 3, 4], pool, model, n=3)
        assert forwards == 5 * 7

    def test_epsilon_filters_before_ranking(self):
        model = MLPClassifier([2, 3, 2], seed=0)
        cands = [
            make_candidate(0, [1.0, 0.0], [4.0, -4.0], distance=0.9),
            make_candidate(1, [0.0, 1.0], [-4.0, 4.0], distance=0.1),
        ]
        pool = make_pool({7: cands})
        results, _ = minimax_round([7], pool, model, n=1, epsilon=0.5)
        assert results[7].selected_indices == [1]

    def test_threads_match_single_thread(self):
        model, pool = self._setup(num_examples=6, k=5, seed=9)
        ids = list(range(6))
        serial, f1 = minimax_round(ids, pool, model, n=2, threads=1)
        threaded, f4 = minimax_round(ids, pool, model, n=2, threads=4)
        assert f1 == f4
        for ex_id in ids:
            assert serial[ex_id].selected_indices == threaded[ex_id].selected_indices
            np.testing.assert_array_equal(serial[ex_id].kl_scores, threaded[ex_id].kl_scores)

    def test_missing_example_rejected(self):
        model, pool = self._setup(num_examples=2)
        with pytest.raises(InputError):
            minimax_round([0, 1, 99], pool, model, n=1)

    def test_epoch_recorded(self):
        model, pool = self._setup(num_examples=1)
        results, _ = minimax_round([0], pool, model, n=1, epoch=3)
        assert results[0].epoch == 3
        assert isinstance(results[0], SelectionResult)


class TestAugmentationPool:
    def test_candidates_for_unknown_id(self):
        pool = make_pool({0: []})
        with pytest.raises(InputError):
            pool.candidates_for(5)

    def test_contains_and_total(self):
        model = MLPClassifier([2, 3, 2], seed=0)
        cands = [make_candidate(i, np.ones(2), np.zeros(2)) for i in range(3)]
        pool = make_pool({0: cands, 1: cands[:2]})
        assert 0 in pool and 1 in pool and 2 not in pool
        assert pool.total_candidates() == 5
