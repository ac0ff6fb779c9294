"""Shared fixtures: hand-built NDJSON tweet lines, corpora and models."""

import json
from datetime import datetime, timezone

import numpy as np
import pytest

from topicbridge.corpus import ingest
from topicbridge.topics import ModelConfig, TopicModel

REFERENCE_TS = datetime(2022, 10, 20, 12, 0, tzinfo=timezone.utc)


def tweet_line(
    tweet_id: str,
    user_id: str,
    text: str,
    created_at: str = "2022-10-01T12:00:00Z",
    retweet_count: int = 0,
    favorite_count: int = 0,
    is_retweet: bool = False,
    **extra,
) -> str:
    """One NDJSON tweet line with sane defaults."""
    raw = {
        "tweet_id": tweet_id,
        "user_id": user_id,
        "text": text,
        "created_at": created_at,
        "retweet_count": retweet_count,
        "favorite_count": favorite_count,
        "is_retweet": is_retweet,
    }
    raw.update(extra)
    return json.dumps(raw, ensure_ascii=False)


@pytest.fixture
def two_user_lines() -> list[str]:
    """Ten tweets by two users with distinct, hand-countable vocabularies."""
    lines = []
    for i in range(5):
        lines.append(
            tweet_line(
                f"a{i}",
                "alice",
                "gatos felinos #mascotas",
                created_at=f"2022-10-0{i + 1}T08:00:00Z",
                favorite_count=i,
            )
        )
        lines.append(
            tweet_line(
                f"b{i}",
                "bob",
                "perros caninos @alice",
                created_at=f"2022-10-0{i + 1}T09:00:00Z",
                retweet_count=i,
            )
        )
    return lines


@pytest.fixture
def two_user_corpus(two_user_lines):
    return ingest(two_user_lines)


def hand_model(
    doc_topic: dict[str, list[int]],
    alpha: float = 0.5,
    vocabulary: list[str] | None = None,
    topic_word: np.ndarray | None = None,
    last_active: dict[str, datetime] | None = None,
) -> TopicModel:
    """TopicModel assembled straight from per-user topic counts (no training)."""
    k = len(next(iter(doc_topic.values())))
    vocab = vocabulary if vocabulary is not None else [f"palabra{i}" for i in range(k)]
    rows = topic_word if topic_word is not None else np.full((k, len(vocab)), 1.0 / len(vocab))
    return TopicModel(
        config=ModelConfig(k=k, alpha=alpha, iterations=2, burn_in=1),
        vocabulary=vocab,
        topic_word=rows,
        doc_topic_counts={u: np.asarray(c, dtype=np.int64) for u, c in doc_topic.items()},
        doc_lengths={u: int(sum(c)) for u, c in doc_topic.items()},
        user_last_active={u: (last_active or {}).get(u, REFERENCE_TS) for u in doc_topic},
        log_likelihood=[],
        assignment_totals=[],
    )
