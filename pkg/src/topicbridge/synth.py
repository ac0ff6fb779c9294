"""Planted-community synthetic corpora and the diversity evaluation harness.

Two communities share a ring of theme vocabularies but tweet about disjoint
community-specific issues. Each user holds a pair of adjacent themes; each
tweet mixes its theme vocabulary (probability shared_weight) with the
community's rotating issue vocabulary. Ground-truth labels let the harness
measure how often each recommender crosses community lines.
"""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass, replace
from datetime import timedelta
from pathlib import Path

from .corpus import Corpus, format_timestamp, ingest, parse_timestamp
from .recsys import ALGORITHM_IT, ALGORITHM_KLD, RecConfig, recommend
from .topicgraph import WEIGHTED_CLOSENESS, build_graph, intermediary_topics
from .topics import ModelConfig, train

logger = logging.getLogger(__name__)

COMMUNITIES = ("A", "B")


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; defaults complete a full harness run at desk scale."""

    users_per_community: int = 100
    tweets_per_user: int = 50
    tokens_per_tweet: int = 8
    n_themes: int = 10
    theme_vocab_size: int = 60
    issues_per_community: int = 5
    issue_vocab_size: int = 60
    shared_weight: float = 0.4
    lean_weight: float = 0.6
    mention_prob: float = 0.05
    retweet_prob: float = 0.15
    reference_time: str = "2022-10-20T12:00:00Z"
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if self.users_per_community < 1 or self.tweets_per_user < 1:
            raise ValueError("users_per_community and tweets_per_user must be >= 1")
        if self.tokens_per_tweet < 1:
            raise ValueError("tokens_per_tweet must be >= 1")
        if self.n_themes < 1 or self.theme_vocab_size < 1:
            raise ValueError("need at least one theme with a non-empty vocabulary")
        if self.issues_per_community < 1 or self.issue_vocab_size < 1:
            raise ValueError("need at least one issue with a non-empty vocabulary")
        if not 0.0 <= self.shared_weight <= 1.0:
            raise ValueError("shared_weight must be in [0, 1]")
        if not 0.0 <= self.lean_weight <= 1.0:
            raise ValueError("lean_weight must be in [0, 1]")
        if not 0.0 <= self.mention_prob <= 1.0 or not 0.0 <= self.retweet_prob <= 1.0:
            raise ValueError("probabilities must be in [0, 1]")
        parse_timestamp(self.reference_time)  # validate eagerly

    def to_dict(self) -> dict:
        return {
            "users_per_community": self.users_per_community,
            "tweets_per_user": self.tweets_per_user,
            "tokens_per_tweet": self.tokens_per_tweet,
            "n_themes": self.n_themes,
            "theme_vocab_size": self.theme_vocab_size,
            "issues_per_community": self.issues_per_community,
            "issue_vocab_size": self.issue_vocab_size,
            "shared_weight": self.shared_weight,
            "lean_weight": self.lean_weight,
            "mention_prob": self.mention_prob,
            "retweet_prob": self.retweet_prob,
            "reference_time": self.reference_time,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SynthSpec":
        return cls(**raw)


def _theme_word(theme: int, i: int) -> str:
    return f"tema{theme}x{i}"


def _issue_word(community: str, issue: int, i: int) -> str:
    return f"asunto{community.lower()}{issue}x{i}"


def _theme_pairs(n_themes: int) -> list[tuple[int, int]]:
    """Allowed theme pairs: ring neighbors at offsets 1 and 2.

    Every theme appears in several pairs, so the theme co-contribution
    graph is connected and symmetric across themes.
    """
    if n_themes == 1:
        return [(0, 0)]
    if n_themes == 2:
        return [(0, 1)]
    pairs = [(t, (t + 1) % n_themes) for t in range(n_themes)]
    pairs += [(t, (t + 2) % n_themes) for t in range(n_themes)]
    return pairs


def generate(spec: SynthSpec) -> tuple[list[str], dict[str, dict]]:
    """Generate NDJSON corpus lines plus ground-truth labels, reproducibly.

    Labels map user_id -> {"community", "themes": [t1, t2], "lean": issue}.
    Each user leans toward one community issue (lean_weight of issue tweets)
    with the remainder cycling over the other issues, so issue mixtures vary
    between users of the same community. Every tweet with shared_weight > 0
    carries at least one theme token.
    """
    rng = random.Random(spec.rng_seed)
    reference = parse_timestamp(spec.reference_time)
    pairs = _theme_pairs(spec.n_themes)
    width = len(str(spec.users_per_community - 1))
    spacing = (44 * 3600) / spec.tweets_per_user
    n_issues = spec.issues_per_community
    lean_slots = max(1, round(spec.lean_weight * n_issues)) if n_issues > 1 else 1

    lines: list[str] = []
    labels: dict[str, dict] = {}
    user_ids = {
        c: [f"{c.lower()}{i:0{width}d}" for i in range(spec.users_per_community)]
        for c in COMMUNITIES
    }

    for community in COMMUNITIES:
        for i, user_id in enumerate(user_ids[community]):
            pair = pairs[i % len(pairs)]
            lean = (i // len(pairs)) % n_issues
            labels[user_id] = {
                "community": community,
                "themes": sorted(set(pair)),
                "lean": lean,
            }
            jitter = rng.uniform(0.0, 1800.0)
            followers = rng.randint(10, 5000)
            following = rng.randint(10, 2000)
            minor_count = 0
            for j in range(spec.tweets_per_user):
                theme = pair[j % 2]
                if n_issues == 1 or j % n_issues < lean_slots:
                    issue = lean
                else:
                    issue = (lean + 1 + minor_count % (n_issues - 1)) % n_issues
                    minor_count += 1
                words = []
                for _ in range(spec.tokens_per_tweet):
                    if rng.random() < spec.shared_weight:
                        words.append(_theme_word(theme, rng.randrange(spec.theme_vocab_size)))
                    else:
                        words.append(
                            _issue_word(community, issue, rng.randrange(spec.issue_vocab_size))
                        )
                if spec.shared_weight > 0 and not any(w.startswith("tema") for w in words):
                    words[0] = _theme_word(theme, rng.randrange(spec.theme_vocab_size))
                text = " ".join(words)
                if rng.random() < spec.mention_prob:
                    text += f" @{rng.choice(user_ids[community])}"
                created = reference - timedelta(seconds=3600.0 + j * spacing + jitter)
                record = {
                    "tweet_id": f"{user_id}-{j:04d}",
                    "user_id": user_id,
                    "text": text,
                    "created_at": format_timestamp(created),
                    "retweet_count": rng.randint(0, 40),
                    "favorite_count": rng.randint(0, 80),
                    "is_retweet": rng.random() < spec.retweet_prob,
                }
                if j == 0:
                    record["display_name"] = f"Usuario {user_id}"
                    record["bio"] = f"Cuenta sintética, comunidad {community}"
                    record["followers_count"] = followers
                    record["following_count"] = following
                    record["account_created_at"] = format_timestamp(
                        reference - timedelta(days=rng.randint(200, 800))
                    )
                lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    return lines, labels


def write_corpus(spec: SynthSpec, out_dir: str | Path) -> tuple[Path, Path]:
    """Write corpus.ndjson + labels.json (+ spec.json) under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines, labels = generate(spec)
    corpus_path = out / "corpus.ndjson"
    labels_path = out / "labels.json"
    corpus_path.write_text("\n".join(lines) + "\n", "utf-8")
    labels_path.write_text(json.dumps(labels, sort_keys=True, separators=(",", ":")), "utf-8")
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), sort_keys=True, indent=2), "utf-8")
    return corpus_path, labels_path


def cross_community_fraction(recs_per_user: dict[str, list], labels: dict[str, dict]) -> float:
    """Mean fraction of recommendations drawn from the opposite community.

    Users with empty recommendation lists are skipped (nothing to measure).
    Accepts lists of candidate ids or of objects with a candidate_id field.
    """
    fractions: list[float] = []
    for user_id, recs in recs_per_user.items():
        if not recs:
            continue
        own = labels[user_id]["community"]
        cross = 0
        for rec in recs:
            candidate = rec if isinstance(rec, str) else rec.candidate_id
            if labels[candidate]["community"] != own:
                cross += 1
        fractions.append(cross / len(recs))
    if not fractions:
        return 0.0
    return sum(fractions) / len(fractions)


# ---------------------------------------------------------------------------
# Diversity evaluation harness
# ---------------------------------------------------------------------------

HARNESS_MODEL_K = 20
HARNESS_ALPHA = 0.5
HARNESS_ITERATIONS = 200
HARNESS_BURN_IN = 50
HARNESS_MIN_DOC_FREQ = 10
HARNESS_EPSILON = 0.15
HARNESS_RESTARTS = 5


@dataclass(frozen=True)
class HarnessConfig:
    """Hyperparameters of the KLD-vs-IT evaluation harness.

    epsilon = 0.15 sits above the minor-issue mass (~0.06 per user under
    the default SynthSpec) and below the theme mass (~0.18 each), so a
    user's significant set is their two themes plus their leaning issue;
    issue topics then connect to the graph only through weak issue-theme
    edges and the centrality median keeps themes alone intermediary.
    """

    gamma: float = 1.0
    top_n: int = 10
    epsilon: float = HARNESS_EPSILON
    k: int = HARNESS_MODEL_K
    alpha: float = HARNESS_ALPHA
    iterations: int = HARNESS_ITERATIONS
    burn_in: int = HARNESS_BURN_IN
    min_doc_freq: int = HARNESS_MIN_DOC_FREQ
    restarts: int = HARNESS_RESTARTS
    method: str = WEIGHTED_CLOSENESS


def evaluate_corpus(
    corpus: Corpus,
    labels: dict[str, dict],
    harness: HarnessConfig,
    rng_seed: int,
) -> dict:
    """Train on one corpus and measure both algorithms' cross-community fractions.

    Trains `restarts` independent chains (sub-seeded from rng_seed) and
    keeps the one with the best final joint log-likelihood: collapsed Gibbs
    occasionally sticks in a badly merged mode, and those modes sit far
    below the good ones in likelihood.
    """
    model = None
    for chain in range(max(1, harness.restarts)):
        config = ModelConfig(
            k=harness.k,
            alpha=harness.alpha,
            iterations=harness.iterations,
            burn_in=harness.burn_in,
            epsilon=harness.epsilon,
            rng_seed=rng_seed * 1000 + chain,
            min_doc_freq=harness.min_doc_freq,
        )
        candidate = train(corpus, config)
        if model is None or candidate.log_likelihood[-1] > model.log_likelihood[-1]:
            model = candidate
    graph = build_graph(model.all_vectors(), harness.epsilon)
    itset = intermediary_topics(graph, harness.method)
    users = model.user_ids
    result: dict = {"seed": rng_seed, "n_users": len(users), "n_intermediary": len(itset.topic_ids)}
    for algorithm in (ALGORITHM_KLD, ALGORITHM_IT):
        cfg = RecConfig(gamma=harness.gamma, top_n=harness.top_n, algorithm=algorithm)
        recs = {u: recommend(u, users, cfg, model, itset) for u in users}
        result[algorithm] = cross_community_fraction(recs, labels)
    return result


def run_diversity_eval(
    seeds: list[int] | range = range(10),
    spec: SynthSpec | None = None,
    harness: HarnessConfig | None = None,
) -> dict:
    """Run the full generate→train→recommend harness once per seed.

    Each seed drives both corpus generation and model training. Returns the
    per-seed table plus mean fractions and their separation (IT − KLD).
    """
    base_spec = spec or SynthSpec()
    harness = harness or HarnessConfig()
    started = time.perf_counter()
    rows: list[dict] = []
    for seed in seeds:
        seed_started = time.perf_counter()
        lines, labels = generate(replace(base_spec, rng_seed=seed))
        corpus = ingest(lines)
        row = evaluate_corpus(corpus, labels, harness, rng_seed=seed)
        row["elapsed_seconds"] = round(time.perf_counter() - seed_started, 3)
        rows.append(row)
        logger.info(
            "seed %d: KLD=%.4f IT=%.4f (%.1fs)",
            seed, row[ALGORITHM_KLD], row[ALGORITHM_IT], row["elapsed_seconds"],
        )
    mean_kld = sum(r[ALGORITHM_KLD] for r in rows) / len(rows)
    mean_it = sum(r[ALGORITHM_IT] for r in rows) / len(rows)
    return {
        "seeds": rows,
        "mean_kld": mean_kld,
        "mean_it": mean_it,
        "separation": mean_it - mean_kld,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "harness": {
            "gamma": harness.gamma,
            "top_n": harness.top_n,
            "epsilon": harness.epsilon,
            "k": harness.k,
            "alpha": harness.alpha,
            "iterations": harness.iterations,
            "min_doc_freq": harness.min_doc_freq,
            "restarts": harness.restarts,
            "method": harness.method,
        },
    }
