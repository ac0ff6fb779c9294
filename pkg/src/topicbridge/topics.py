"""LDA user modeling via collapsed Gibbs sampling.

One document per user timeline. Training runs a seeded, bit-reproducible
collapsed Gibbs sampler (numba-compiled inner loop) and exposes smoothed
per-user topic distributions P(t|u) = (n_ut + alpha) / (N_u + k*alpha).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np
from numba import njit

from .corpus import Corpus, UserDocument, format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
FOLD_IN_SWEEPS = 50


@dataclass(frozen=True)
class ModelConfig:
    """Training configuration.

    alpha defaults to 50/k and beta to 0.01 (classical heuristics); epsilon
    is the topical-significance threshold used downstream. epsilon < 1/k is
    NOT required: with heavy smoothing every topic of a short document can
    sit above a small epsilon. min_doc_freq prunes the training vocabulary
    by document frequency (1 = keep everything).
    """

    k: int = 100
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 500
    burn_in: int = 100
    epsilon: float = 0.01
    rng_seed: int = 42
    min_doc_freq: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.k)
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if self.min_doc_freq < 1:
            raise ValueError("min_doc_freq must be >= 1")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "epsilon": self.epsilon,
            "rng_seed": self.rng_seed,
            "min_doc_freq": self.min_doc_freq,
        }


@dataclass(frozen=True)
class TopicVector:
    """Smoothed topic distribution of one user; strictly positive, sums to 1."""

    user_id: str
    probs: np.ndarray
    oov_fallback: bool = False

    @property
    def dominant_topic(self) -> int:
        return int(np.argmax(self.probs))


def significant_topics(vector: TopicVector, epsilon: float) -> set[int]:
    """Topics with P(t|u) >= epsilon."""
    return set(np.flatnonzero(vector.probs >= epsilon).tolist())


# ---------------------------------------------------------------------------
# Seeded sampler kernels. splitmix64 gives a self-contained, bit-stable
# uniform stream; numba uint64 arithmetic wraps like C.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _next_uniform(state):
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _joint_log_likelihood(n_dk, n_kw, n_k, n_d, alpha, beta):
    n_docs, k = n_dk.shape
    v = n_kw.shape[1]
    ll = 0.0
    lg_alpha = math.lgamma(alpha)
    lg_beta = math.lgamma(beta)
    for d in range(n_docs):
        ll += math.lgamma(k * alpha) - math.lgamma(n_d[d] + k * alpha)
        for t in range(k):
            ll += math.lgamma(n_dk[d, t] + alpha) - lg_alpha
    for t in range(k):
        ll += math.lgamma(v * beta) - math.lgamma(n_k[t] + v * beta)
        for w in range(v):
            ll += math.lgamma(n_kw[t, w] + beta) - lg_beta
    return ll


@njit(cache=True)
def _run_gibbs(doc_ids, word_ids, z, n_dk, n_kw, n_k, n_d, alpha, beta, iterations, state, ll_out, totals_out):
    k = n_dk.shape[1]
    v = n_kw.shape[1]
    v_beta = v * beta
    probs = np.empty(k, dtype=np.float64)
    for it in range(iterations):
        for i in range(doc_ids.shape[0]):
            d = doc_ids[i]
            w = word_ids[i]
            t = z[i]
            n_dk[d, t] -= 1
            n_kw[t, w] -= 1
            n_k[t] -= 1
            total = 0.0
            for tt in range(k):
                p = (n_dk[d, tt] + alpha) * (n_kw[tt, w] + beta) / (n_k[tt] + v_beta)
                probs[tt] = p
                total += p
            u = _next_uniform(state) * total
            acc = 0.0
            t_new = k - 1
            for tt in range(k):
                acc += probs[tt]
                if u < acc:
                    t_new = tt
                    break
            z[i] = t_new
            n_dk[d, t_new] += 1
            n_kw[t_new, w] += 1
            n_k[t_new] += 1
        ll_out[it] = _joint_log_likelihood(n_dk, n_kw, n_k, n_d, alpha, beta)
        totals_out[it] = n_k.sum()


@njit(cache=True)
def _fold_in(word_ids, topic_word, alpha, sweeps, state):
    k = topic_word.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    n = word_ids.shape[0]
    z = np.empty(n, dtype=np.int32)
    probs = np.empty(k, dtype=np.float64)
    for i in range(n):
        w = word_ids[i]
        total = 0.0
        for t in range(k):
            probs[t] = topic_word[t, w]
            total += probs[t]
        u = _next_uniform(state) * total
        acc = 0.0
        t_new = k - 1
        for t in range(k):
            acc += probs[t]
            if u < acc:
                t_new = t
                break
        z[i] = t_new
        counts[t_new] += 1
    for _ in range(sweeps):
        for i in range(n):
            w = word_ids[i]
            counts[z[i]] -= 1
            total = 0.0
            for t in range(k):
                probs[t] = (counts[t] + alpha) * topic_word[t, w]
                total += probs[t]
            u = _next_uniform(state) * total
            acc = 0.0
            t_new = k - 1
            for t in range(k):
                acc += probs[t]
                if u < acc:
                    t_new = t
                    break
            z[i] = t_new
            counts[t_new] += 1
    return counts


def _seed_state(seed: int) -> np.ndarray:
    return np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)


class TopicModel:
    """A trained LDA model: topic-word distributions plus per-user counts."""

    def __init__(
        self,
        config: ModelConfig,
        vocabulary: list[str],
        topic_word: np.ndarray,
        doc_topic_counts: dict[str, np.ndarray],
        doc_lengths: dict[str, int],
        user_last_active: dict[str, datetime],
        log_likelihood: list[float],
        assignment_totals: list[int],
    ):
        self.config = config
        self.vocabulary = vocabulary
        self.token_index = {s: i for i, s in enumerate(vocabulary)}
        self.topic_word = topic_word
        self.doc_topic_counts = doc_topic_counts
        self.doc_lengths = doc_lengths
        self.user_last_active = user_last_active
        self.log_likelihood = log_likelihood
        self.assignment_totals = assignment_totals

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def user_ids(self) -> list[str]:
        return sorted(self.doc_topic_counts)

    def user_vector(self, user_id: str) -> TopicVector:
        counts = self.doc_topic_counts[user_id]
        return self._smoothed(user_id, counts, self.doc_lengths[user_id])

    def _smoothed(self, user_id: str, counts: np.ndarray, n_tokens: int, oov: bool = False) -> TopicVector:
        cfg = self.config
        probs = (counts + cfg.alpha) / (n_tokens + cfg.k * cfg.alpha)
        return TopicVector(user_id=user_id, probs=probs, oov_fallback=oov)

    def infer(self, doc: UserDocument) -> TopicVector:
        """Topic vector for a document.

        Known users reuse their training assignments. Unseen documents are
        folded in with the trained topic-word distributions held fixed
        (seeded, deterministic per user_id). Out-of-vocabulary tokens are
        dropped; a document with zero in-vocabulary tokens gets the uniform
        vector 1/k and is flagged via oov_fallback.
        """
        if doc.user_id in self.doc_topic_counts:
            return self.user_vector(doc.user_id)
        pairs = sorted(
            (self.token_index[i.surface], i.frequency)
            for i in doc.interests
            if i.surface in self.token_index
        )
        word_ids = [w for w, freq in pairs for _ in range(freq)]
        if not word_ids:
            logger.warning("document %s has no in-vocabulary tokens; uniform fallback", doc.user_id)
            return TopicVector(
                user_id=doc.user_id,
                probs=np.full(self.k, 1.0 / self.k),
                oov_fallback=True,
            )
        digest = hashlib.sha256(f"{self.config.rng_seed}:{doc.user_id}".encode()).digest()
        state = _seed_state(int.from_bytes(digest[:8], "big"))
        counts = _fold_in(
            np.asarray(word_ids, dtype=np.int32),
            self.topic_word,
            self.config.alpha,
            FOLD_IN_SWEEPS,
            state,
        )
        return self._smoothed(doc.user_id, counts, len(word_ids))

    def all_vectors(self) -> list[TopicVector]:
        return [self.user_vector(uid) for uid in self.user_ids]

    def top_words(self, topic: int, n: int = 5) -> list[str]:
        row = self.topic_word[topic]
        order = sorted(range(len(self.vocabulary)), key=lambda w: (-row[w], self.vocabulary[w]))
        return [self.vocabulary[w] for w in order[:n]]

    # -- persistence ----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        bundle = {
            "format_version": MODEL_FORMAT_VERSION,
            "config": self.config.to_dict(),
            "vocabulary": self.vocabulary,
            "topic_word": self.topic_word.tolist(),
            "doc_topic_counts": {u: c.tolist() for u, c in sorted(self.doc_topic_counts.items())},
            "doc_lengths": dict(sorted(self.doc_lengths.items())),
            "user_last_active": {
                u: format_timestamp(ts) for u, ts in sorted(self.user_last_active.items())
            },
            "log_likelihood": self.log_likelihood,
            "assignment_totals": self.assignment_totals,
        }
        Path(path).write_text(json.dumps(bundle, separators=(",", ":"), ensure_ascii=False), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TopicModel":
        bundle = json.loads(Path(path).read_text("utf-8"))
        if bundle.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format: {bundle.get('format_version')}")
        return cls(
            config=ModelConfig(**bundle["config"]),
            vocabulary=bundle["vocabulary"],
            topic_word=np.asarray(bundle["topic_word"], dtype=np.float64),
            doc_topic_counts={
                u: np.asarray(c, dtype=np.int64) for u, c in bundle["doc_topic_counts"].items()
            },
            doc_lengths={u: int(n) for u, n in bundle["doc_lengths"].items()},
            user_last_active={
                u: parse_timestamp(ts) for u, ts in bundle["user_last_active"].items()
            },
            log_likelihood=bundle["log_likelihood"],
            assignment_totals=bundle["assignment_totals"],
        )


def train(corpus: Corpus, config: ModelConfig) -> TopicModel:
    """Train an LDA model over the corpus with collapsed Gibbs sampling.

    Deterministic given config.rng_seed: documents are processed in sorted
    user order and tokens in vocabulary order, so the sampled chain is a
    pure function of the seed.

    Raises:
        ValueError: empty corpus, or a document left without tokens after
            min_doc_freq pruning.
    """
    if corpus.n_users == 0:
        raise ValueError("cannot train on an empty corpus")

    df = corpus.document_frequency()
    kept = [t for t in range(len(corpus.vocabulary)) if df.get(t, 0) >= config.min_doc_freq]
    if not kept:
        raise ValueError("vocabulary empty after min_doc_freq pruning")
    vocabulary = [corpus.vocabulary[t] for t in kept]
    remap = {t: i for i, t in enumerate(kept)}
    v = len(vocabulary)
    if config.k > v:
        logger.warning("k=%d exceeds %d distinct tokens; proceeding", config.k, v)

    user_ids = sorted(corpus.documents)
    doc_ids: list[int] = []
    word_ids: list[int] = []
    doc_lengths: dict[str, int] = {}
    for d, uid in enumerate(user_ids):
        doc = corpus.documents[uid]
        n_doc = 0
        for token in sorted(doc.token_counts):
            w = remap.get(token)
            if w is None:
                continue
            count = doc.token_counts[token]
            doc_ids.extend([d] * count)
            word_ids.extend([w] * count)
            n_doc += count
        if n_doc == 0:
            raise ValueError(f"document {uid} has no tokens after min_doc_freq={config.min_doc_freq}")
        doc_lengths[uid] = n_doc

    n_docs = len(user_ids)
    doc_arr = np.asarray(doc_ids, dtype=np.int32)
    word_arr = np.asarray(word_ids, dtype=np.int32)
    n_tokens = doc_arr.shape[0]

    state = _seed_state(config.rng_seed)
    z = np.empty(n_tokens, dtype=np.int32)
    n_dk = np.zeros((n_docs, config.k), dtype=np.int64)
    n_kw = np.zeros((config.k, v), dtype=np.int64)
    n_k = np.zeros(config.k, dtype=np.int64)
    n_d = np.zeros(n_docs, dtype=np.int64)
    _shuffle_tokens(doc_arr, word_arr, state)
    _init_assignments(doc_arr, word_arr, z, n_dk, n_kw, n_k, n_d, config.k, state)

    ll = np.zeros(config.iterations, dtype=np.float64)
    totals = np.zeros(config.iterations, dtype=np.int64)
    _run_gibbs(
        doc_arr, word_arr, z, n_dk, n_kw, n_k, n_d,
        config.alpha, config.beta, config.iterations, state, ll, totals,
    )

    topic_word = (n_kw + config.beta) / (n_k[:, None] + v * config.beta)
    model = TopicModel(
        config=config,
        vocabulary=vocabulary,
        topic_word=topic_word,
        doc_topic_counts={uid: n_dk[d].copy() for d, uid in enumerate(user_ids)},
        doc_lengths=doc_lengths,
        user_last_active={uid: corpus.last_active(uid) for uid in user_ids},
        log_likelihood=ll.tolist(),
        assignment_totals=totals.tolist(),
    )
    logger.info(
        "trained k=%d model over %d docs, %d tokens, V=%d", config.k, n_docs, n_tokens, v
    )
    return model


@njit(cache=True)
def _shuffle_tokens(doc_ids, word_ids, state):
    # Fisher-Yates over the token stream; a fixed scan order of grouped
    # identical words mixes poorly, so visit tokens in seeded random order.
    n = doc_ids.shape[0]
    for i in range(n - 1, 0, -1):
        j = int(_next_uniform(state) * (i + 1))
        if j > i:
            j = i
        doc_ids[i], doc_ids[j] = doc_ids[j], doc_ids[i]
        word_ids[i], word_ids[j] = word_ids[j], word_ids[i]


@njit(cache=True)
def _init_assignments(doc_ids, word_ids, z, n_dk, n_kw, n_k, n_d, k, state):
    for i in range(doc_ids.shape[0]):
        t = int(_next_uniform(state) * k)
        if t >= k:
            t = k - 1
        z[i] = t
        n_dk[doc_ids[i], t] += 1
        n_kw[t, word_ids[i]] += 1
        n_k[t] += 1
        n_d[doc_ids[i]] += 1


def infer(model: TopicModel, doc: UserDocument) -> TopicVector:
    """Module-level alias for TopicModel.infer."""
    return model.infer(doc)
