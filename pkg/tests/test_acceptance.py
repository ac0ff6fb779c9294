"""Acceptance gate: one test per primary criterion, at the stated tolerances.

Run with `pytest -v tests/test_acceptance.py` for one pass/fail line per
criterion. Each test also prints its measured values for inspection.
Oracles here are written independently of the implementation routes:
Floyd-Warshall vs Dijkstra, scipy rel_entr vs direct KLD, reciprocal-form
F-score, counting-loop Jaccard.
"""

import json
import math
import statistics
from collections import Counter
from datetime import timedelta

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy.special import rel_entr

from conftest import REFERENCE_TS, tweet_line
from topicbridge.cli import main
from topicbridge.corpus import Corpus, ingest
from topicbridge.portrait import build_portrait, sturges_bins
from topicbridge.recsys import TopicVector, fscore, jit, kld_symmetric, normalize_distances
from topicbridge.service import (
    CONDITIONS,
    EventStore,
    create_app,
    engagement_summary,
)
from topicbridge.synth import run_diversity_eval
from topicbridge.topicgraph import (
    TopicGraph,
    intermediary_topics,
    load_graph_bundle,
    weighted_closeness,
)
from topicbridge.topics import ModelConfig, TopicModel, train

RUNTIME_BUDGET_SECONDS = 300.0
SEPARATION_FLOOR = 0.15


# -- criterion 1: diversity separation on the default synthetic corpus --------


def test_criterion_01_diversity_separation():
    result = run_diversity_eval()
    assert len(result["seeds"]) == 10
    separation = result["separation"]
    elapsed = result["elapsed_seconds"]
    print(
        f"criterion 1: separation={separation:.4f} (floor {SEPARATION_FLOOR}), "
        f"mean IT={result['mean_it']:.4f}, mean KLD={result['mean_kld']:.4f}, "
        f"elapsed={elapsed:.1f}s (budget {RUNTIME_BUDGET_SECONDS:.0f}s)"
    )
    assert separation >= SEPARATION_FLOOR, (
        f"IT-KLD separation {separation:.4f} below {SEPARATION_FLOOR}"
    )
    assert elapsed < RUNTIME_BUDGET_SECONDS, f"harness took {elapsed:.1f}s"


# -- criterion 2: formula implementations vs independent oracles --------------


def _tv(probs):
    arr = np.asarray(probs, dtype=np.float64)
    return TopicVector(user_id="u", probs=arr / arr.sum())


def _kld_oracle(p, q):
    return float(rel_entr(p, q).sum() + rel_entr(q, p).sum())


def _fscore_oracle(similarity, distance, gamma):
    closeness = 1.0 - distance
    if similarity == 0.0 or closeness == 0.0:
        return 0.0
    return (1.0 + gamma * gamma) / (gamma * gamma / similarity + 1.0 / closeness)


def test_criterion_02_formula_oracles():
    rng = np.random.default_rng(20221020)

    worst_kld = worst_norm = worst_jit = worst_f = 0.0
    for _ in range(1000):
        k = int(rng.integers(2, 16))
        p = rng.dirichlet(np.full(k, 0.7))
        q = rng.dirichlet(np.full(k, 0.7))
        got = kld_symmetric(_tv(p), _tv(q))
        worst_kld = max(worst_kld, abs(got - _kld_oracle(_tv(p).probs, _tv(q).probs)))

        distances = list(rng.uniform(0.0, 10.0, size=int(rng.integers(1, 40))))
        got_norm = normalize_distances(distances)
        biggest = sorted(distances)[-1]
        expected = [0.0] * len(distances) if biggest == 0 else [d / biggest for d in distances]
        worst_norm = max(
            worst_norm, max(abs(g - e) for g, e in zip(got_norm, expected))
        )

        a = set(rng.integers(0, 12, size=int(rng.integers(0, 9))).tolist())
        b = set(rng.integers(0, 12, size=int(rng.integers(0, 9))).tolist())
        union = len(a | b)
        inter = sum(1 for x in a if x in b)
        expected_jit = 0.0 if union == 0 else inter / union
        worst_jit = max(worst_jit, abs(jit(a, b) - expected_jit))

        s = float(rng.choice([0.0, 1.0, rng.uniform()]))
        d = float(rng.choice([0.0, 1.0, rng.uniform()]))
        gamma = float(10 ** rng.uniform(-2, 2))
        worst_f = max(worst_f, abs(fscore(s, d, gamma) - _fscore_oracle(s, d, gamma)))

    print(
        f"criterion 2: worst |err| over 1000 random inputs: "
        f"kld={worst_kld:.2e} norm={worst_norm:.2e} jit={worst_jit:.2e} fscore={worst_f:.2e}"
    )
    assert worst_kld <= 1e-9
    assert worst_norm <= 1e-9
    assert worst_jit <= 1e-9
    assert worst_f <= 1e-9

    # boundary cases, exact
    same = _tv([0.4, 0.6])
    assert kld_symmetric(same, same) == 0.0
    with pytest.raises(ValueError):
        kld_symmetric(_tv([0.5, 0.5]), _tv([0.2, 0.3, 0.5]))
    with pytest.raises(ValueError):
        kld_symmetric(
            TopicVector("u", np.array([1.0, 0.0])), TopicVector("v", np.array([0.5, 0.5]))
        )
    assert normalize_distances([0.0, 2.0, 4.0]) == [0.0, 0.5, 1.0]
    assert normalize_distances([0.0, 0.0]) == [0.0, 0.0]
    assert normalize_distances([7.0]) == [1.0]
    with pytest.raises(ValueError):
        normalize_distances([])
    assert jit({1, 2}, {1, 2}) == 1.0
    assert jit({1}, {2}) == 0.0
    assert jit({1, 2, 3}, {2, 3, 4}) == 0.5
    assert jit(set(), set()) == 0.0
    assert fscore(0.0, 0.3, 1.0) == 0.0
    assert fscore(1.0, 0.0, 1.0) == 1.0
    assert fscore(0.7, 1.0, 1.0) == 0.0  # zero denominator guard
    assert fscore(0.5, 0.5, 1.0) == pytest.approx(0.5, abs=1e-12)
    for bad in ((1.2, 0.5, 1.0), (0.5, -0.1, 1.0), (0.5, 0.5, 0.0), (0.5, 0.5, math.inf)):
        with pytest.raises(ValueError):
            fscore(*bad)


# -- criterion 3: centrality vs brute force, median intermediary set ----------


def _floyd_warshall_closeness(graph: TopicGraph) -> dict[int, float]:
    n = graph.k
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for (i, j), w in graph.edges.items():
        dist[i][j] = dist[j][i] = 1.0 / w
    for m in range(n):
        for i in range(n):
            for j in range(n):
                via = dist[i][m] + dist[m][j]
                if via < dist[i][j]:
                    dist[i][j] = via
    scores = {}
    for i in range(n):
        finite = [d for j, d in enumerate(dist[i]) if j != i and math.isfinite(d)]
        reach = len(finite)
        if n <= 1 or reach < 1 or sum(finite) == 0.0:
            scores[i] = 0.0
        else:
            scores[i] = (reach / sum(finite)) * (reach / (n - 1))
    return scores


def _median_set(scores: dict[int, float]) -> set[int]:
    med = statistics.median(scores.values())
    return {t for t, c in scores.items() if c >= med}


def _random_graph(rng) -> TopicGraph:
    n = int(rng.integers(2, 13))
    edges = {}
    if rng.uniform() < 0.5:  # connected half the time
        order = rng.permutation(n)
        for a, b in zip(order, order[1:]):
            i, j = min(a, b), max(a, b)
            edges[(int(i), int(j))] = float(rng.uniform(0.1, 1.0))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < 0.35:
                edges.setdefault((i, j), float(rng.uniform(0.1, 1.0)))
    return TopicGraph(k=n, epsilon=0.1, n_users=10, edges=edges)


def test_criterion_03_centrality_oracle():
    rng = np.random.default_rng(777)
    worst = 0.0
    for _ in range(100):
        graph = _random_graph(rng)
        got = weighted_closeness(graph)
        expected = _floyd_warshall_closeness(graph)
        assert set(got) == set(expected)
        worst = max(worst, max(abs(got[t] - expected[t]) for t in got))
        itset = intermediary_topics(graph)
        assert set(itset.topic_ids) == _median_set(expected), (
            f"intermediary set mismatch on k={graph.k} edges={graph.edges}"
        )
    print(f"criterion 3: worst |err| over 100 random graphs = {worst:.2e}")
    assert worst <= 1e-9


# -- criterion 4: Gibbs sampler sanity on a separable fixture -----------------


def _disjoint_corpus(tmp_path):
    texts = {"g1": "alfa bravo charly", "g2": "xilo yanqui zulu"}
    lines = []
    for g, text in texts.items():
        for u in range(5):
            for i in range(5):
                lines.append(
                    tweet_line(
                        f"{g}u{u}-{i}",
                        f"{g}u{u}",
                        text,
                        created_at=f"2022-10-{10 + i:02d}T12:00:00Z",
                    )
                )
    path = tmp_path / "disjoint.ndjson"
    path.write_text("\n".join(lines) + "\n")
    return ingest(path, stopwords=frozenset())


def test_criterion_04_sampler_sanity(tmp_path):
    corpus = _disjoint_corpus(tmp_path)
    purities = []
    for seed in (1, 2, 3, 4, 5):
        cfg = ModelConfig(k=2, alpha=0.5, iterations=200, burn_in=50, rng_seed=seed)
        model = train(corpus, cfg)

        total = sum(doc.total_tokens for doc in corpus.documents.values())
        assert len(model.assignment_totals) == cfg.iterations
        assert all(t == total for t in model.assignment_totals), "tokens leaked"

        by_group = {"g1": set(), "g2": set()}
        for user in model.user_ids:
            by_group[user[:2]].add(model.user_vector(user).dominant_topic)
        pure = (
            len(by_group["g1"]) == 1
            and len(by_group["g2"]) == 1
            and by_group["g1"] != by_group["g2"]
        )
        purities.append(pure)
    assert all(purities), f"purity by seed: {purities}"

    cfg = ModelConfig(k=2, alpha=0.5, iterations=200, burn_in=50, rng_seed=9)
    a = train(corpus, cfg)
    b = train(corpus, cfg)
    assert a.topic_word.tobytes() == b.topic_word.tobytes()
    assert a.log_likelihood == b.log_likelihood
    for user in a.user_ids:
        assert (a.doc_topic_counts[user] == b.doc_topic_counts[user]).all()
    print("criterion 4: purity 5/5 seeds, counts conserved, reruns bit-identical")


# -- criterion 5: portrait arithmetic ------------------------------------------


def test_criterion_05_portrait_arithmetic(tmp_path):
    assert [sturges_bins(n) for n in (1, 2, 10, 100, 1000)] == [1, 2, 5, 8, 11]

    for n in (1, 2, 10, 100):
        lines = []
        base = REFERENCE_TS
        for i in range(n):
            when = (base + timedelta(hours=i * 7)).isoformat().replace("+00:00", "Z")
            lines.append(tweet_line(f"t{i:04d}", "ana", "hola mundo", created_at=when))
        path = tmp_path / f"c{n}.ndjson"
        path.write_text("\n".join(lines) + "\n")
        corpus = ingest(path)
        portrait = build_portrait(corpus.documents["ana"], corpus, frozenset())
        assert len(portrait.bins) == sturges_bins(n)
        assert sum(b.count for b in portrait.bins) == n

    political_lines = [
        tweet_line("p0", "ana", "gobierno elecciones", created_at="2022-10-01T12:00:00Z")
    ]
    neutral_lines = [
        tweet_line("n0", "ana", "playa montaña", created_at="2022-10-01T12:00:00Z")
    ]
    keywords = frozenset({"gobierno"})
    for lines, expected in ((political_lines, True), (neutral_lines, False)):
        path = tmp_path / f"pol{expected}.ndjson"
        path.write_text("\n".join(lines) + "\n")
        corpus = ingest(path)
        portrait = build_portrait(corpus.documents["ana"], corpus, keywords)
        assert portrait.political_content is expected
    print("criterion 5: Sturges [1,2,5,8,11], counts conserved, political flag both ways")


# -- criterion 6: experiment plumbing ------------------------------------------


def test_criterion_06_experiment_plumbing(tmp_path):
    store = EventStore(tmp_path / "signups")
    for i in range(10_000):
        store.assign(f"user{i:05d}", seed=42)
    counts = Counter((c.ui, c.rec) for c in store.conditions().values())
    shares = {cond: counts[cond] / 10_000 for cond in CONDITIONS}
    assert set(counts) == set(CONDITIONS)
    for cond, share in shares.items():
        assert abs(share - 0.25) <= 0.03, f"{cond} share {share:.4f}"

    events_store = EventStore(tmp_path / "events")
    t0 = REFERENCE_TS
    for offset in (0, 10, 20):
        events_store.append("alice", "page_view", t0 + timedelta(seconds=offset))
    events_store.append("alice", "rec_explore_click", t0 + timedelta(days=1))
    events_store.append("alice", "rec_accept", t0 + timedelta(days=1, seconds=40), target="bob")
    original = engagement_summary("alice", events_store.events_for("alice"))
    assert original.dwell_seconds == pytest.approx(20.0 + 40.0)

    dwell_only = engagement_summary(
        "alice", events_store.events_for("alice")[:3]
    )
    assert dwell_only.dwell_seconds == 20.0  # (t, t+10, t+20) spans exactly 20s

    replayed = EventStore(tmp_path / "events")
    assert engagement_summary("alice", replayed.events_for("alice")) == original
    print(
        f"criterion 6: shares={ {f'{ui}/{rec}': round(s, 4) for (ui, rec), s in shares.items()} }, "
        "dwell exact, replay identical"
    )


# -- criterion 7: end-to-end pipeline without the secondary component ----------

E2E_SPEC = {
    "users_per_community": 6,
    "tweets_per_user": 10,
    "tokens_per_tweet": 6,
    "n_themes": 4,
    "theme_vocab_size": 10,
    "issues_per_community": 2,
    "issue_vocab_size": 10,
    "rng_seed": 17,
}

RECS_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["user_id", "condition", "algorithm", "recommendations", "clusters"],
    "properties": {
        "algorithm": {"enum": ["KLD", "IT"]},
        "condition": {
            "type": "object",
            "required": ["user_id", "ui", "rec", "assigned_at"],
        },
        "recommendations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "candidate_id",
                    "score",
                    "distance_norm",
                    "jit",
                    "dominant_topic",
                    "shared_intermediary_topics",
                ],
            },
        },
        "clusters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cluster_topic", "members", "label"],
            },
        },
    },
}


def test_criterion_07_end_to_end(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(E2E_SPEC))
    synth = tmp_path / "synth"
    corpus_dir = tmp_path / "corpus"
    model_path = tmp_path / "model.json"
    graph_path = tmp_path / "graph.json"
    recs_path = tmp_path / "recs.json"

    assert main(["simulate", "--spec", str(spec_path), "--out", str(synth)]) == 0
    assert main(
        ["ingest", "--input", str(synth / "corpus.ndjson"), "--out", str(corpus_dir)]
    ) == 0
    assert main(
        [
            "train", "--corpus", str(corpus_dir), "--k", "6", "--iters", "60",
            "--seed", "5", "--epsilon", "0.12", "--out", str(model_path),
        ]
    ) == 0
    assert main(["graph", "--model", str(model_path), "--out", str(graph_path)]) == 0
    assert main(
        [
            "recommend", "--model", str(model_path), "--graph", str(graph_path),
            "--target", "a0", "--algorithm", "IT", "--out", str(recs_path),
        ]
    ) == 0
    assert json.loads(recs_path.read_text())["recommendations"]

    corpus = Corpus.load(corpus_dir)
    model = TopicModel.load(model_path)
    _, itset, _ = load_graph_bundle(graph_path)
    store = EventStore(tmp_path / "events")
    client = TestClient(create_app(corpus, model, itset, store, seed=42))

    signup = client.post("/users", json={"user_id": "a0"})
    assert signup.status_code == 200
    assigned = signup.json()["condition"]

    response = client.get("/recommendations/a0")
    assert response.status_code == 200
    body = response.json()
    jsonschema.validate(body, RECS_RESPONSE_SCHEMA)
    assert body["algorithm"] == assigned["rec"]
    assert body["condition"]["ui"] == assigned["ui"]
    repeat = client.get("/recommendations/a0").json()
    assert repeat["algorithm"] == body["algorithm"]
    assert repeat["recommendations"] == body["recommendations"]
    print(
        f"criterion 7: pipeline complete; served {len(body['recommendations'])} recs "
        f"under condition {assigned['ui']}/{assigned['rec']}"
    )
