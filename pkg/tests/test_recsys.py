"""Recommendation scoring formulas against independent oracles, plus
candidate filtering, ranking and clustering."""

import math
import random
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import rel_entr

from topicbridge.recsys import (
    ALGORITHM_IT,
    ALGORITHM_KLD,
    RecConfig,
    cluster,
    fscore,
    intermediary_profile,
    jit,
    kld_symmetric,
    normalize_distances,
    recommend,
)
from topicbridge.topicgraph import WEIGHTED_CLOSENESS, IntermediaryTopicSet
from topicbridge.topics import TopicVector
from conftest import REFERENCE_TS, hand_model


def tv(probs, user_id: str = "u") -> TopicVector:
    return TopicVector(user_id, np.asarray(probs, dtype=np.float64))


def itset_of(topic_ids, epsilon: float = 0.2) -> IntermediaryTopicSet:
    return IntermediaryTopicSet(
        topic_ids=frozenset(topic_ids),
        centrality={},
        threshold=0.0,
        method=WEIGHTED_CLOSENESS,
        epsilon=epsilon,
    )


def random_distribution(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.dirichlet(rng.uniform(0.2, 3.0, size=k))


# -- independent oracles ------------------------------------------------------


def kld_oracle(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p||q) + KL(q||p) via scipy's rel_entr."""
    return float(rel_entr(p, q).sum() + rel_entr(q, p).sum())


def normalize_oracle(ds: list[float]) -> list[float]:
    top = sorted(ds)[-1]
    return [0.0] * len(ds) if top == 0 else [d / top for d in ds]


def jaccard_oracle(a: set, b: set) -> float:
    overlap = sum(1 for x in a if x in b)
    union = len(a) + len(b) - overlap
    return overlap / union if union else 0.0


def fscore_oracle(s: float, d: float, gamma: float) -> float:
    """Reciprocal (harmonic) arrangement of the same balance formula."""
    closeness = 1.0 - d
    if s == 0.0 or closeness == 0.0:
        return 0.0
    g2 = gamma * gamma
    return (1.0 + g2) / (g2 / s + 1.0 / closeness)


# -- kld_symmetric --------------------------------------------------------------


class TestKldSymmetric:
    def test_identical_vectors_zero(self):
        assert kld_symmetric(tv([0.6, 0.4]), tv([0.6, 0.4])) == 0.0

    def test_hand_value_ln3(self):
        d = kld_symmetric(tv([0.75, 0.25]), tv([0.25, 0.75]))
        assert d == pytest.approx(math.log(3.0), abs=1e-12)

    def test_symmetry_on_random_pairs(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            k = int(rng.integers(2, 12))
            p, q = tv(random_distribution(rng, k)), tv(random_distribution(rng, k))
            assert kld_symmetric(p, q) == pytest.approx(kld_symmetric(q, p), abs=1e-12)

    def test_positive_for_distinct_vectors(self):
        assert kld_symmetric(tv([0.7, 0.3]), tv([0.3, 0.7])) > 0.0

    def test_mismatched_k_rejected(self):
        with pytest.raises(ValueError):
            kld_symmetric(tv([0.5, 0.5]), tv([0.4, 0.3, 0.3]))

    def test_nonpositive_entries_rejected(self):
        with pytest.raises(ValueError):
            kld_symmetric(tv([1.0, 0.0]), tv([0.5, 0.5]))

    def test_matches_rel_entr_oracle_on_1000_random_inputs(self):
        rng = np.random.default_rng(42)
        for trial in range(1000):
            k = int(rng.integers(2, 16))
            p = random_distribution(rng, k)
            q = random_distribution(rng, k)
            assert kld_symmetric(tv(p), tv(q)) == pytest.approx(
                kld_oracle(p, q), abs=1e-9
            ), f"trial {trial}"


# -- normalize_distances --------------------------------------------------------


class TestNormalizeDistances:
    def test_hand_values(self):
        assert normalize_distances([0.0, 2.0, 4.0]) == pytest.approx([0.0, 0.5, 1.0])

    def test_all_zero_degenerate(self):
        assert normalize_distances([0.0, 0.0, 0.0]) == [0.0, 0.0, 0.0]

    def test_singleton_self_maximum(self):
        assert normalize_distances([7.0]) == [1.0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize_distances([])

    def test_matches_oracle_on_1000_random_inputs(self):
        rng = np.random.default_rng(7)
        for trial in range(1000):
            n = int(rng.integers(1, 30))
            ds = rng.uniform(0.0, 10.0, size=n).tolist()
            mine = normalize_distances(ds)
            expected = normalize_oracle(ds)
            assert mine == pytest.approx(expected, abs=1e-9), f"trial {trial}"
            assert all(0.0 <= x <= 1.0 for x in mine)
            assert max(mine) == pytest.approx(1.0) or max(ds) == 0.0


# -- jit -------------------------------------------------------------------------


class TestJit:
    def test_equal_nonempty_sets(self):
        assert jit({1, 2}, {1, 2}) == 1.0

    def test_disjoint_sets(self):
        assert jit({1, 2}, {3, 4}) == 0.0

    def test_hand_overlap(self):
        assert jit({1, 2, 3}, {2, 3, 4}) == pytest.approx(0.5)

    def test_both_empty(self):
        assert jit(set(), set()) == 0.0

    def test_matches_counting_oracle_on_1000_random_inputs(self):
        rng = random.Random(5)
        for trial in range(1000):
            a = {rng.randrange(12) for _ in range(rng.randrange(8))}
            b = {rng.randrange(12) for _ in range(rng.randrange(8))}
            assert jit(a, b) == pytest.approx(jaccard_oracle(a, b), abs=1e-9), f"trial {trial}"

    @given(
        st.sets(st.integers(min_value=0, max_value=20), max_size=10),
        st.sets(st.integers(min_value=0, max_value=20), max_size=10),
    )
    def test_symmetric_and_bounded(self, a, b):
        value = jit(a, b)
        assert 0.0 <= value <= 1.0
        assert value == jit(b, a)


# -- fscore ----------------------------------------------------------------------


class TestFscore:
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_perfect_score(self, gamma):
        assert fscore(1.0, 0.0, gamma) == pytest.approx(1.0)

    @pytest.mark.parametrize("distance", [0.0, 0.5, 1.0])
    def test_zero_similarity_annihilates(self, distance):
        assert fscore(0.0, distance, 1.0) == 0.0

    def test_hand_value(self):
        assert fscore(0.5, 0.5, 1.0) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize(
        "s,d,g",
        [(-0.01, 0.5, 1.0), (1.01, 0.5, 1.0), (0.5, -0.01, 1.0), (0.5, 1.01, 1.0),
         (0.5, 0.5, 0.0), (0.5, 0.5, -1.0), (0.5, 0.5, math.inf)],
    )
    def test_out_of_range_rejected(self, s, d, g):
        with pytest.raises(ValueError):
            fscore(s, d, g)

    def test_gamma_limits(self):
        interior = [x / 10 for x in range(1, 10)]
        for s in interior:
            for d in interior:
                assert fscore(s, d, 1e-4) == pytest.approx(1.0 - d, abs=1e-6)
                assert fscore(s, d, 1e4) == pytest.approx(s, abs=1e-6)

    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_monotone_on_grid(self, gamma):
        grid = [x / 20 for x in range(21)]
        for d in grid:
            values = [fscore(s, d, gamma) for s in grid]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        for s in grid:
            values = [fscore(s, d, gamma) for d in grid]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_matches_reciprocal_oracle_on_1000_random_inputs(self):
        rng = random.Random(11)
        for trial in range(1000):
            s = rng.choice([0.0, 1.0, rng.random(), rng.random()])
            d = rng.choice([0.0, 1.0, rng.random(), rng.random()])
            gamma = 10.0 ** rng.uniform(-2, 2)
            assert fscore(s, d, gamma) == pytest.approx(
                fscore_oracle(s, d, gamma), abs=1e-9
            ), f"trial {trial}"


# -- intermediary profile ----------------------------------------------------------


class TestIntermediaryProfile:
    def test_intersection_with_itset(self):
        vector = tv([0.5, 0.3, 0.2])
        profile = intermediary_profile(vector, itset_of({0, 2}, epsilon=0.25))
        assert profile == {0}

    def test_uses_itset_epsilon(self):
        vector = tv([0.5, 0.3, 0.2])
        assert intermediary_profile(vector, itset_of({0, 1, 2}, epsilon=0.15)) == {0, 1, 2}


# -- recommend ----------------------------------------------------------------------


def two_block_model(n_per_block: int = 4, spread: int = 8):
    """Users who concentrate mass on either topics {0,1} or topics {2,3}."""
    doc_topic: dict[str, list[int]] = {}
    for i in range(n_per_block):
        doc_topic[f"izq{i}"] = [spread + i, spread, 1, 0]
        doc_topic[f"der{i}"] = [0, 1, spread, spread + i]
    return hand_model(doc_topic)


class TestRecommend:
    def test_unknown_target_raises(self):
        model = hand_model({"u1": [2, 1]})
        with pytest.raises(KeyError):
            recommend("fantasma", ["u1"], RecConfig(), model, itset_of({0, 1}))

    def test_empty_candidates_empty_list(self):
        model = hand_model({"u1": [2, 1]})
        assert recommend("u1", [], RecConfig(), model, itset_of({0, 1})) == []

    def test_singleton_candidate_kld_score_zero_still_returned(self):
        model = hand_model({"t": [5, 1], "c": [1, 5]})
        recs = recommend("t", ["c"], RecConfig(algorithm=ALGORITHM_KLD), model, itset_of({0, 1}))
        assert [r.candidate_id for r in recs] == ["c"]
        assert recs[0].distance_norm == pytest.approx(1.0)
        assert recs[0].score == pytest.approx(0.0)

    def test_target_and_follows_excluded(self):
        model = hand_model({"t": [5, 1], "c1": [4, 2], "c2": [2, 4]})
        recs = recommend(
            "t", ["t", "c1", "c2"], RecConfig(), model, itset_of({0, 1}), follows={"c1"}
        )
        assert [r.candidate_id for r in recs] == ["c2"]

    def test_candidate_window_filters_stale_users(self):
        stale = REFERENCE_TS - timedelta(hours=49)
        edge = REFERENCE_TS - timedelta(hours=48)
        model = hand_model(
            {"t": [5, 1], "fresca": [4, 2], "borde": [3, 3], "vieja": [2, 4]},
            last_active={"vieja": stale, "borde": edge},
        )
        recs = recommend(
            "t", ["fresca", "borde", "vieja"], RecConfig(), model,
            itset_of({0, 1}), reference_time=REFERENCE_TS,
        )
        ids = {r.candidate_id for r in recs}
        assert ids == {"fresca", "borde"}  # 48 h boundary inclusive, 49 h out

    def test_default_reference_time_is_latest_activity(self):
        model = hand_model(
            {"t": [5, 1], "activa": [4, 2], "vieja": [2, 4]},
            last_active={
                "t": REFERENCE_TS,
                "activa": REFERENCE_TS,
                "vieja": REFERENCE_TS - timedelta(hours=72),
            },
        )
        recs = recommend("t", ["activa", "vieja"], RecConfig(), model, itset_of({0, 1}))
        assert [r.candidate_id for r in recs] == ["activa"]

    def test_zero_shared_intermediary_topics_score_zero(self):
        model = two_block_model()
        itset = itset_of({0, 1, 2, 3}, epsilon=0.25)
        recs = recommend("izq0", ["izq1", "der0"], RecConfig(algorithm=ALGORITHM_IT), model, itset)
        by_id = {r.candidate_id: r for r in recs}
        assert by_id["der0"].score == 0.0
        assert by_id["der0"].shared_intermediary_topics == frozenset()
        assert by_id["izq1"].score > 0.0
        assert recs[0].candidate_id == "izq1"

    def test_ties_break_by_candidate_id(self):
        model = hand_model({"t": [5, 5], "bb": [3, 3], "aa": [3, 3]})
        recs = recommend("t", ["bb", "aa"], RecConfig(), model, itset_of({0, 1}))
        assert [r.candidate_id for r in recs] == ["aa", "bb"]
        assert recs[0].score == recs[1].score

    def test_top_n_cutoff(self):
        doc_topic = {"t": [6, 2]}
        doc_topic.update({f"c{i:02d}": [6 - (i % 3), 2 + (i % 3)] for i in range(10)})
        model = hand_model(doc_topic)
        recs = recommend("t", [f"c{i:02d}" for i in range(10)], RecConfig(top_n=4), model, itset_of({0, 1}))
        assert len(recs) == 4

    def test_kld_top1_attains_minimum_raw_distance(self):
        rng = np.random.default_rng(3)
        doc_topic = {"t": [7, 3, 1, 1]}
        doc_topic.update({f"c{i:02d}": rng.integers(0, 9, size=4).tolist() for i in range(20)})
        model = hand_model(doc_topic)
        recs = recommend(
            "t", [u for u in doc_topic if u != "t"],
            RecConfig(algorithm=ALGORITHM_KLD, top_n=20), model, itset_of({0, 1}),
        )
        target_vec = model.user_vector("t")
        raw = {c: kld_symmetric(target_vec, model.user_vector(c)) for c in doc_topic if c != "t"}
        assert raw[recs[0].candidate_id] == pytest.approx(min(raw.values()), abs=1e-12)

    def test_dominant_topic_is_argmax(self):
        model = two_block_model()
        recs = recommend("izq0", ["der0", "izq1"], RecConfig(algorithm=ALGORITHM_KLD), model, itset_of({0, 1, 2, 3}))
        for rec in recs:
            assert rec.dominant_topic == model.user_vector(rec.candidate_id).dominant_topic

    @pytest.mark.parametrize("algorithm", [ALGORITHM_KLD, ALGORITHM_IT])
    def test_matches_brute_force_oracle_on_50_candidates(self, algorithm):
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            doc_topic = {"t": rng.integers(0, 12, size=6).tolist()}
            candidates = [f"c{i:02d}" for i in range(50)]
            for c in candidates:
                counts = rng.integers(0, 12, size=6).tolist()
                doc_topic[c] = counts if sum(counts) else [1, 0, 0, 0, 0, 0]
            model = hand_model(doc_topic)
            itset = itset_of(set(rng.choice(6, size=3, replace=False).tolist()), epsilon=0.12)
            gamma = float(rng.uniform(0.3, 3.0))
            cfg = RecConfig(algorithm=algorithm, gamma=gamma, top_n=50)
            recs = recommend("t", candidates, cfg, model, itset)

            # Oracle: recompute every score with the independent formula
            # oracles and sort with the same deterministic tie-break.
            tvec = model.user_vector("t")
            tprof = {
                i for i in range(6) if tvec.probs[i] >= itset.epsilon
            } & set(itset.topic_ids)
            raw = {c: kld_oracle(tvec.probs, model.user_vector(c).probs) for c in candidates}
            top = max(raw.values())
            expected = []
            for c in candidates:
                d_norm = raw[c] / top if top else 0.0
                cvec = model.user_vector(c)
                cprof = {
                    i for i in range(6) if cvec.probs[i] >= itset.epsilon
                } & set(itset.topic_ids)
                if algorithm == ALGORITHM_IT:
                    score = fscore_oracle(jaccard_oracle(tprof, cprof), d_norm, gamma)
                else:
                    score = 1.0 - d_norm
                expected.append((c, score))
            expected.sort(key=lambda pair: (-pair[1], pair[0]))

            assert [r.candidate_id for r in recs] == [c for c, _ in expected], f"seed {seed}"
            for rec, (_, score) in zip(recs, expected):
                assert rec.score == pytest.approx(score, abs=1e-9)


class TestRecConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gamma": 0.0},
            {"gamma": -1.0},
            {"gamma": math.inf},
            {"top_n": 0},
            {"candidate_window_hours": 0},
            {"algorithm": "PAGERANK"},
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            RecConfig(**kwargs)


# -- cluster -------------------------------------------------------------------------


def peaked_topic_word(k: int) -> np.ndarray:
    rows = np.full((k, k), 0.5 / (k - 1))
    np.fill_diagonal(rows, 0.5)
    return rows


class TestCluster:
    def make_recs(self, model, ids):
        return recommend("t", ids, RecConfig(algorithm=ALGORITHM_KLD, top_n=50), model, itset_of({0, 1}))

    def test_single_group(self):
        model = hand_model({"t": [5, 1], "c1": [4, 1], "c2": [6, 1]})
        clusters = cluster(self.make_recs(model, ["c1", "c2"]), model)
        assert len(clusters) == 1
        assert {m.candidate_id for m in clusters[0].members} == {"c1", "c2"}

    def test_hand_grouping_3_3_7(self):
        k = 8
        doc_topic = {
            "t": [9] + [0] * 7,
            "c1": [0, 0, 0, 9, 0, 0, 0, 0],
            "c2": [0, 0, 0, 9, 0, 0, 0, 1],
            "c3": [0, 0, 0, 0, 0, 0, 0, 9],
        }
        model = hand_model(
            doc_topic,
            vocabulary=[f"w{i}" for i in range(k)],
            topic_word=peaked_topic_word(k),
        )
        clusters = cluster(self.make_recs(model, ["c1", "c2", "c3"]), model)
        assert [(c.cluster_topic, len(c.members)) for c in clusters] == [(3, 2), (7, 1)]
        assert clusters[0].label[0] == "w3"

    def test_empty_list(self):
        model = hand_model({"t": [1, 1]})
        assert cluster([], model) == []

    def test_equal_sizes_order_by_topic_id(self):
        doc_topic = {"t": [9, 0, 0], "c1": [0, 9, 0], "c2": [0, 0, 9]}
        model = hand_model(doc_topic)
        clusters = cluster(self.make_recs(model, ["c2", "c1"]), model)
        assert [c.cluster_topic for c in clusters] == [1, 2]

    def test_partition_property(self):
        rng = np.random.default_rng(23)
        doc_topic = {"t": [3, 3, 3, 3]}
        ids = [f"c{i:02d}" for i in range(30)]
        for c in ids:
            counts = rng.integers(0, 10, size=4).tolist()
            doc_topic[c] = counts if sum(counts) else [1, 0, 0, 0]
        model = hand_model(doc_topic)
        recs = self.make_recs(model, ids)
        clusters = cluster(recs, model)
        seen = [m.candidate_id for c in clusters for m in c.members]
        assert sorted(seen) == sorted(r.candidate_id for r in recs)
        assert sum(len(c.members) for c in clusters) == len(recs)
        for c in clusters:
            assert all(m.dominant_topic == c.cluster_topic for m in c.members)

    def test_label_is_top5_words(self):
        k = 6
        model = hand_model(
            {"t": [9, 0, 0, 0, 0, 0], "c1": [0, 9, 0, 0, 0, 0]},
            vocabulary=[f"w{i}" for i in range(k)],
            topic_word=peaked_topic_word(k),
        )
        clusters = cluster(self.make_recs(model, ["c1"]), model)
        assert list(clusters[0].label) == model.top_words(1, 5)
        assert len(clusters[0].label) == 5
