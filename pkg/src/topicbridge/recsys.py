"""Candidate scoring for people recommendation.

Two algorithms over the same candidate pool: the KLD baseline ranks by
topical similarity alone (1 - normalized symmetric KL distance), and the
IT method balances distance against shared intermediary topics with an
F-score controlled by gamma.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .topicgraph import IntermediaryTopicSet
from .topics import TopicModel, TopicVector, significant_topics

logger = logging.getLogger(__name__)

ALGORITHM_KLD = "KLD"
ALGORITHM_IT = "IT"
ALGORITHMS = (ALGORITHM_KLD, ALGORITHM_IT)


@dataclass(frozen=True)
class RecConfig:
    gamma: float = 1.0
    top_n: int = 20
    candidate_window_hours: int = 48
    algorithm: str = ALGORITHM_IT

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be finite and > 0")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.candidate_window_hours < 1:
            raise ValueError("candidate_window_hours must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")


@dataclass(frozen=True)
class Recommendation:
    candidate_id: str
    score: float
    distance_norm: float
    jit: float
    dominant_topic: int
    shared_intermediary_topics: frozenset[int]

    def to_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "score": self.score,
            "distance_norm": self.distance_norm,
            "jit": self.jit,
            "dominant_topic": self.dominant_topic,
            "shared_intermediary_topics": sorted(self.shared_intermediary_topics),
        }


@dataclass(frozen=True)
class RecommendationCluster:
    cluster_topic: int
    members: tuple[Recommendation, ...]
    label: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "cluster_topic": self.cluster_topic,
            "members": [m.to_dict() for m in self.members],
            "label": list(self.label),
        }


def kld_symmetric(u1: TopicVector, u2: TopicVector) -> float:
    """Symmetric KL distance sum((p - q) * ln(p/q)); natural log.

    Requires strictly positive vectors of equal length (smoothed LDA
    vectors always are).
    """
    p = u1.probs
    q = u2.probs
    if p.shape != q.shape:
        raise ValueError(f"mismatched k: {p.shape[0]} vs {q.shape[0]}")
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValueError("topic vectors must be strictly positive")
    return float(np.sum((p - q) * np.log(p / q)))


def normalize_distances(distances: list[float]) -> list[float]:
    """Divide each distance by the maximum; all-zero input stays all zero."""
    if not distances:
        raise ValueError("at least one distance is required")
    top = max(distances)
    if top == 0:
        return [0.0 for _ in distances]
    return [d / top for d in distances]


def jit(set1: set[int], set2: set[int]) -> float:
    """Jaccard similarity of two intermediary-topic sets; both empty -> 0."""
    union = set1 | set2
    if not union:
        return 0.0
    return len(set1 & set2) / len(union)


def fscore(similarity: float, distance: float, gamma: float) -> float:
    """(1 + g^2) * S(1-D) / (g^2 (1-D) + S); zero denominator -> 0."""
    if not 0.0 <= similarity <= 1.0:
        raise ValueError(f"similarity out of range: {similarity}")
    if not 0.0 <= distance <= 1.0:
        raise ValueError(f"distance out of range: {distance}")
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError("gamma must be finite and > 0")
    g2 = gamma * gamma
    closeness = 1.0 - distance
    denominator = g2 * closeness + similarity
    if denominator == 0.0:
        return 0.0
    return (1.0 + g2) * (similarity * closeness) / denominator


def intermediary_profile(vector: TopicVector, itset: IntermediaryTopicSet) -> set[int]:
    """IT(u): the user's significant topics restricted to intermediary ones."""
    return significant_topics(vector, itset.epsilon) & set(itset.topic_ids)


def recommend(
    target: str,
    candidates: list[str],
    cfg: RecConfig,
    model: TopicModel,
    itset: IntermediaryTopicSet,
    follows: set[str] | None = None,
    reference_time: datetime | None = None,
) -> list[Recommendation]:
    """Rank candidates for the target user.

    Candidates are filtered to those last active within
    cfg.candidate_window_hours of reference_time (default: the most recent
    activity in the model), excluding the target and already-followed
    accounts. KLD scores 1 - normalized distance; IT scores
    fscore(jit, normalized distance, gamma). Descending score, ties broken
    by candidate_id; at most cfg.top_n results.
    """
    if target not in model.doc_topic_counts:
        raise KeyError(f"unknown target user: {target}")
    if reference_time is None:
        reference_time = max(model.user_last_active.values())
    window = timedelta(hours=cfg.candidate_window_hours)
    excluded = {target} | (follows or set())
    pool = [
        c
        for c in candidates
        if c not in excluded
        and c in model.doc_topic_counts
        and reference_time - model.user_last_active[c] <= window
    ]
    if not pool:
        return []

    target_vec = model.user_vector(target)
    target_profile = intermediary_profile(target_vec, itset)
    vectors = {c: model.user_vector(c) for c in pool}
    distances = [kld_symmetric(target_vec, vectors[c]) for c in pool]
    normalized = normalize_distances(distances)

    recs: list[Recommendation] = []
    for c, d_norm in zip(pool, normalized):
        profile = intermediary_profile(vectors[c], itset)
        shared = target_profile & profile
        similarity = jit(target_profile, profile)
        if cfg.algorithm == ALGORITHM_IT:
            score = fscore(similarity, d_norm, cfg.gamma)
        else:
            score = 1.0 - d_norm
        recs.append(
            Recommendation(
                candidate_id=c,
                score=score,
                distance_norm=d_norm,
                jit=similarity,
                dominant_topic=vectors[c].dominant_topic,
                shared_intermediary_topics=frozenset(shared),
            )
        )
    recs.sort(key=lambda r: (-r.score, r.candidate_id))
    return recs[: cfg.top_n]


def cluster(recs: list[Recommendation], model: TopicModel) -> list[RecommendationCluster]:
    """Partition recommendations by dominant topic, largest cluster first.

    Each cluster is labeled with the model's top-5 words for its topic;
    equal-size clusters order by topic id.
    """
    groups: dict[int, list[Recommendation]] = {}
    for rec in recs:
        groups.setdefault(rec.dominant_topic, []).append(rec)
    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    return [
        RecommendationCluster(
            cluster_topic=topic,
            members=tuple(members),
            label=tuple(model.top_words(topic, 5)),
        )
        for topic, members in ordered
    ]
