"""Corpus ingestion and tokenization for short-text user timelines.

Reads NDJSON tweet files (one JSON object per line), normalizes text into
classified interest tokens (hashtags, mentions, plain words and word n-grams),
and assembles one bag-of-words document per user.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

CORPUS_FORMAT_VERSION = 1

HASHTAG_RE = re.compile(r"#\w+")
MENTION_RE = re.compile(r"@\w+")
URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
EDGE_PUNCT_RE = re.compile(r"^\W+|\W+$")
MAX_NGRAM = 3


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Accepts a trailing 'Z' (fromisoformat only learned it in 3.11) and
    treats naive timestamps as already being UTC.
    """
    if not isinstance(value, str) or not value:
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stopword file (one word per line, '#' starts a comment).

    Without a path, returns the bundled Spanish + English defaults.
    Stopwords only ever filter plain-word tokens, so '#'-comments cannot
    collide with hashtag tokens.
    """
    if path is None:
        words: set[str] = set()
        for name in ("stopwords_es.txt", "stopwords_en.txt"):
            text = resources.files("topicbridge.data").joinpath(name).read_text("utf-8")
            words.update(_parse_wordlist(text))
        return frozenset(words)
    return frozenset(_parse_wordlist(Path(path).read_text("utf-8")))


def _parse_wordlist(text: str) -> Iterator[str]:
    for line in text.splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            yield word.lower()


@dataclass(frozen=True)
class InterestToken:
    """A classified token surface with its frequency in a user document."""

    surface: str
    kind: str  # "hashtag" | "mention" | "word"
    frequency: int

    @staticmethod
    def kind_of(surface: str) -> str:
        if surface.startswith("#"):
            return "hashtag"
        if surface.startswith("@"):
            return "mention"
        return "word"


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    user_id: str
    text: str
    created_at: datetime
    retweet_count: int
    favorite_count: int
    is_retweet: bool
    mentions: tuple[str, ...]
    hashtags: tuple[str, ...]
    urls: tuple[str, ...]

    @property
    def popularity(self) -> int:
        return self.retweet_count + self.favorite_count

    def to_dict(self) -> dict:
        return {
            "tweet_id": self.tweet_id,
            "user_id": self.user_id,
            "text": self.text,
            "created_at": format_timestamp(self.created_at),
            "retweet_count": self.retweet_count,
            "favorite_count": self.favorite_count,
            "is_retweet": self.is_retweet,
            "mentions": list(self.mentions),
            "hashtags": list(self.hashtags),
            "urls": list(self.urls),
        }


@dataclass
class UserProfile:
    """Optional per-user profile data carried on tweet lines."""

    display_name: str = ""
    avatar_url: str = ""
    bio: str = ""
    followers_count: int = 0
    following_count: int = 0
    account_created_at: datetime | None = None


@dataclass
class UserDocument:
    """One bag-of-words document per user, plus ranked interests."""

    user_id: str
    token_counts: dict[int, int]
    tweet_ids: list[str]
    interests: list[InterestToken]
    follower_count: int = 0
    following_count: int = 0
    account_age_days: float = 1.0

    @property
    def total_tokens(self) -> int:
        return sum(self.token_counts.values())

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "token_counts": {str(t): c for t, c in sorted(self.token_counts.items())},
            "tweet_ids": list(self.tweet_ids),
            "interests": [[i.surface, i.kind, i.frequency] for i in self.interests],
            "follower_count": self.follower_count,
            "following_count": self.following_count,
            "account_age_days": self.account_age_days,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class Tokenizer:
    """Deterministic tweet tokenizer.

    Emits, in text order: hashtags and mentions verbatim (lowercased), URLs
    reduced to domain plus first path segment, and per run of plain words
    the stopword-filtered unigrams followed by bigrams and trigrams joined
    with '_'. n-grams never span hashtags, mentions, or URLs.
    """

    def __init__(self, stopwords: frozenset[str] | None = None):
        self.stopwords = stopwords if stopwords is not None else load_stopwords()

    def tokenize(self, text: str) -> list[str]:
        if not text:
            return []
        normalized = unicodedata.normalize("NFC", text).lower()
        tokens: list[str] = []
        run: list[str] = []

        def flush_run() -> None:
            if run:
                tokens.extend(_ngrams(run))
                run.clear()

        for raw in normalized.split():
            if URL_RE.match(raw):
                flush_run()
                reduced = reduce_url(raw)
                if reduced:
                    tokens.append(reduced)
                continue
            if raw.startswith("@"):
                match = MENTION_RE.match(raw)
                if match:
                    flush_run()
                    tokens.append(match.group(0))
                    continue
            if raw.startswith("#"):
                match = HASHTAG_RE.match(raw)
                if match:
                    flush_run()
                    tokens.append(match.group(0))
                    continue
            word = EDGE_PUNCT_RE.sub("", raw)
            # Bare punctuation vanishes without breaking the n-gram run.
            if word and word not in self.stopwords:
                run.append(word)
        flush_run()
        return tokens


def _ngrams(words: list[str]) -> list[str]:
    out = list(words)
    for n in range(2, MAX_NGRAM + 1):
        out.extend("_".join(words[i : i + n]) for i in range(len(words) - n + 1))
    return out


def reduce_url(raw: str) -> str:
    """Reduce a URL to domain plus first path segment, e.g.
    'https://www.Example.com/News/article?x=1' -> 'example.com/news'."""
    trimmed = re.sub(r"^https?://", "", raw.strip().rstrip(".,;:!?)('\"").lower())
    trimmed = re.sub(r"^www\.", "", trimmed)
    trimmed = trimmed.split("?", 1)[0].split("#", 1)[0]
    parts = [p for p in trimmed.split("/") if p]
    if not parts:
        return ""
    domain = parts[0]
    if len(parts) > 1:
        return f"{domain}/{parts[1]}"
    return domain


def extract_entities(text: str) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Extract (mentions, hashtags, urls) from raw text, deterministically.

    Mentions and hashtags are lowercased without their sigil; URLs are kept
    as found. Order of first appearance, duplicates dropped.
    """
    normalized = unicodedata.normalize("NFC", text)
    urls = tuple(dict.fromkeys(m.group(0).rstrip(".,;:!?)('\"") for m in URL_RE.finditer(normalized)))
    stripped = URL_RE.sub(" ", normalized)
    mentions = tuple(dict.fromkeys(m.group(0)[1:].lower() for m in MENTION_RE.finditer(stripped)))
    hashtags = tuple(dict.fromkeys(m.group(0)[1:].lower() for m in HASHTAG_RE.finditer(stripped)))
    return mentions, hashtags, urls


class Corpus:
    """Immutable-after-ingest collection of tweets, documents and vocabulary."""

    def __init__(self) -> None:
        self.vocabulary: list[str] = []
        self.token_index: dict[str, int] = {}
        self.documents: dict[str, UserDocument] = {}
        self.tweets: dict[str, TweetRecord] = {}
        self.tweet_tokens: dict[str, list[int]] = {}
        self.profiles: dict[str, UserProfile] = {}
        self.skipped: int = 0

    # -- lookups ------------------------------------------------------------

    @property
    def n_users(self) -> int:
        return len(self.documents)

    @property
    def n_tweets(self) -> int:
        return len(self.tweets)

    def token_id(self, surface: str) -> int | None:
        return self.token_index.get(surface)

    def surface(self, token_id: int) -> str:
        return self.vocabulary[token_id]

    def user_tweets(self, user_id: str) -> list[TweetRecord]:
        doc = self.documents[user_id]
        return [self.tweets[tid] for tid in doc.tweet_ids]

    def last_active(self, user_id: str) -> datetime:
        return max(t.created_at for t in self.user_tweets(user_id))

    def document_frequency(self) -> dict[int, int]:
        df: dict[int, int] = {}
        for doc in self.documents.values():
            for token in doc.token_counts:
                df[token] = df.get(token, 0) + 1
        return df

    # -- persistence ----------------------------------------------------------

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "format_version": CORPUS_FORMAT_VERSION,
            "n_users": self.n_users,
            "n_tweets": self.n_tweets,
            "skipped": self.skipped,
        }
        (out / "meta.json").write_text(json.dumps(meta, sort_keys=True), "utf-8")
        (out / "vocabulary.json").write_text(
            json.dumps(self.vocabulary, separators=(",", ":"), ensure_ascii=False), "utf-8"
        )
        with (out / "users.json").open("w", encoding="utf-8") as fh:
            docs = {uid: self.documents[uid].to_dict() for uid in sorted(self.documents)}
            json.dump(docs, fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        with (out / "profiles.json").open("w", encoding="utf-8") as fh:
            profs = {
                uid: {
                    "display_name": p.display_name,
                    "avatar_url": p.avatar_url,
                    "bio": p.bio,
                    "followers_count": p.followers_count,
                    "following_count": p.following_count,
                    "account_created_at": format_timestamp(p.account_created_at)
                    if p.account_created_at
                    else None,
                }
                for uid, p in sorted(self.profiles.items())
            }
            json.dump(profs, fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        with (out / "tweets.ndjson").open("w", encoding="utf-8") as fh:
            for tid in sorted(self.tweets):
                record = self.tweets[tid].to_dict()
                record["token_ids"] = self.tweet_tokens[tid]
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
                fh.write("\n")

    @classmethod
    def load(cls, corpus_dir: str | Path) -> "Corpus":
        src = Path(corpus_dir)
        corpus = cls()
        meta = json.loads((src / "meta.json").read_text("utf-8"))
        if meta.get("format_version") != CORPUS_FORMAT_VERSION:
            raise ValueError(f"unsupported corpus format: {meta.get('format_version')}")
        corpus.skipped = meta.get("skipped", 0)
        corpus.vocabulary = json.loads((src / "vocabulary.json").read_text("utf-8"))
        corpus.token_index = {s: i for i, s in enumerate(corpus.vocabulary)}
        for uid, raw in json.loads((src / "users.json").read_text("utf-8")).items():
            corpus.documents[uid] = UserDocument(
                user_id=uid,
                token_counts={int(t): c for t, c in raw["token_counts"].items()},
                tweet_ids=list(raw["tweet_ids"]),
                interests=[InterestToken(s, k, f) for s, k, f in raw["interests"]],
                follower_count=raw["follower_count"],
                following_count=raw["following_count"],
                account_age_days=raw["account_age_days"],
            )
        profiles = json.loads((src / "profiles.json").read_text("utf-8"))
        for uid, raw in profiles.items():
            corpus.profiles[uid] = UserProfile(
                display_name=raw["display_name"],
                avatar_url=raw["avatar_url"],
                bio=raw["bio"],
                followers_count=raw["followers_count"],
                following_count=raw["following_count"],
                account_created_at=parse_timestamp(raw["account_created_at"])
                if raw["account_created_at"]
                else None,
            )
        with (src / "tweets.ndjson").open("r", encoding="utf-8") as fh:
            for line in fh:
                raw = json.loads(line)
                token_ids = raw.pop("token_ids")
                record = _record_from_dict(raw)
                corpus.tweets[record.tweet_id] = record
                corpus.tweet_tokens[record.tweet_id] = token_ids
        return corpus


def _record_from_dict(raw: dict) -> TweetRecord:
    return TweetRecord(
        tweet_id=str(raw["tweet_id"]),
        user_id=str(raw["user_id"]),
        text=raw["text"],
        created_at=parse_timestamp(raw["created_at"]),
        retweet_count=int(raw["retweet_count"]),
        favorite_count=int(raw["favorite_count"]),
        is_retweet=bool(raw["is_retweet"]),
        mentions=tuple(raw.get("mentions") or ()),
        hashtags=tuple(raw.get("hashtags") or ()),
        urls=tuple(raw.get("urls") or ()),
    )


REQUIRED_FIELDS = (
    "tweet_id",
    "user_id",
    "text",
    "created_at",
    "retweet_count",
    "favorite_count",
    "is_retweet",
)


def _parse_line(raw: dict) -> tuple[TweetRecord, dict]:
    """Validate one NDJSON object; raises ValueError on malformed input.

    Returns the record plus any optional profile fields found on the line.
    """
    for name in REQUIRED_FIELDS:
        if name not in raw:
            raise ValueError(f"missing field {name}")
    text = raw["text"]
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    created_at = parse_timestamp(raw["created_at"])
    retweets = int(raw["retweet_count"])
    favorites = int(raw["favorite_count"])
    if retweets < 0 or favorites < 0:
        raise ValueError("negative counts")
    mentions, hashtags, urls = extract_entities(text)
    if raw.get("mentions") is not None:
        mentions = tuple(str(m).lstrip("@").lower() for m in raw["mentions"])
    if raw.get("hashtags") is not None:
        hashtags = tuple(str(h).lstrip("#").lower() for h in raw["hashtags"])
    if raw.get("urls") is not None:
        urls = tuple(str(u) for u in raw["urls"])
    record = TweetRecord(
        tweet_id=str(raw["tweet_id"]),
        user_id=str(raw["user_id"]),
        text=text,
        created_at=created_at,
        retweet_count=retweets,
        favorite_count=favorites,
        is_retweet=bool(raw["is_retweet"]),
        mentions=mentions,
        hashtags=hashtags,
        urls=urls,
    )
    profile_fields = {
        name: raw[name]
        for name in (
            "display_name",
            "avatar_url",
            "bio",
            "followers_count",
            "following_count",
            "account_created_at",
        )
        if raw.get(name) is not None
    }
    return record, profile_fields


def ingest(
    source: str | Path | Iterable[str],
    format: str = "ndjson",
    stopwords: frozenset[str] | None = None,
) -> Corpus:
    """Ingest an NDJSON tweet file (or iterable of lines) into a Corpus.

    Malformed lines and duplicate tweet_ids are skipped and counted in
    corpus.skipped; an unreadable file raises.

    Args:
        source: path to an NDJSON file, or an iterable of JSON lines.
        format: only "ndjson" is supported.
        stopwords: stopword set for tokenization (bundled defaults if None).

    Returns:
        A populated Corpus with per-user documents and ranked interests.
    """
    if format != "ndjson":
        raise ValueError(f"unsupported corpus format: {format}")
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text("utf-8").splitlines()
    else:
        lines = source

    tokenizer = Tokenizer(stopwords)
    corpus = Corpus()
    per_user_tweets: dict[str, list[TweetRecord]] = {}
    profiles: dict[str, UserProfile] = {}

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            if not isinstance(raw, dict):
                raise ValueError("line is not an object")
            record, profile_fields = _parse_line(raw)
            if record.tweet_id in corpus.tweets:
                raise ValueError(f"duplicate tweet_id {record.tweet_id}")
        except (ValueError, TypeError, KeyError) as exc:
            corpus.skipped += 1
            logger.warning("skipping line %d: %s", lineno, exc)
            continue
        corpus.tweets[record.tweet_id] = record
        per_user_tweets.setdefault(record.user_id, []).append(record)
        profile = profiles.setdefault(record.user_id, UserProfile())
        _merge_profile(profile, profile_fields)

    for user_id in sorted(per_user_tweets):
        records = sorted(per_user_tweets[user_id], key=lambda r: (r.created_at, r.tweet_id))
        counts: dict[int, int] = {}
        tweet_ids = []
        for record in records:
            tokens = tokenizer.tokenize(record.text)
            ids = []
            for surface in tokens:
                token = corpus.token_index.get(surface)
                if token is None:
                    token = len(corpus.vocabulary)
                    corpus.token_index[surface] = token
                    corpus.vocabulary.append(surface)
                ids.append(token)
                counts[token] = counts.get(token, 0) + 1
            corpus.tweet_tokens[record.tweet_id] = ids
            tweet_ids.append(record.tweet_id)
        profile = profiles[user_id]
        corpus.documents[user_id] = UserDocument(
            user_id=user_id,
            token_counts=counts,
            tweet_ids=tweet_ids,
            interests=rank_interests(counts, corpus.vocabulary),
            follower_count=profile.followers_count,
            following_count=profile.following_count,
            account_age_days=_account_age_days(profile, records),
        )
        corpus.profiles[user_id] = profile

    if corpus.skipped:
        logger.warning("ingest finished with %d skipped lines", corpus.skipped)
    return corpus


def _merge_profile(profile: UserProfile, fields: dict) -> None:
    if "display_name" in fields:
        profile.display_name = str(fields["display_name"])
    if "avatar_url" in fields:
        profile.avatar_url = str(fields["avatar_url"])
    if "bio" in fields:
        profile.bio = str(fields["bio"])
    if "followers_count" in fields:
        profile.followers_count = max(0, int(fields["followers_count"]))
    if "following_count" in fields:
        profile.following_count = max(0, int(fields["following_count"]))
    if "account_created_at" in fields:
        profile.account_created_at = parse_timestamp(fields["account_created_at"])


def _account_age_days(profile: UserProfile, records: list[TweetRecord]) -> float:
    latest = max(r.created_at for r in records)
    if profile.account_created_at is not None:
        age = (latest - profile.account_created_at).total_seconds() / 86400.0
    else:
        earliest = min(r.created_at for r in records)
        age = (latest - earliest).total_seconds() / 86400.0 + 1.0
    return max(age, 1.0)


def rank_interests(counts: dict[int, int], vocabulary: list[str]) -> list[InterestToken]:
    """Rank a token bag by frequency descending, ties by surface ascending."""
    ranked = sorted(
        ((vocabulary[token], freq) for token, freq in counts.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return [InterestToken(surface, InterestToken.kind_of(surface), freq) for surface, freq in ranked]


def extract_interests(doc: UserDocument, limit: int = 300) -> list[InterestToken]:
    """Top-`limit` interests of a document, frequency-descending.

    The default limit of 300 matches the served portrait size.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    return doc.interests[:limit]


def behavior_stats(corpus: Corpus, user_id: str) -> dict:
    """Behavioral covariates for the engagement summary.

    mention/url fractions consider non-retweet tweets only; with zero
    non-retweet tweets both are 0.0. hub_ratio is None when followers == 0.
    """
    doc = corpus.documents[user_id]
    records = corpus.user_tweets(user_id)
    total = len(records)
    retweets = sum(1 for r in records if r.is_retweet)
    own = [r for r in records if not r.is_retweet]
    mentioning = sum(1 for r in own if r.mentions)
    with_url = sum(1 for r in own if r.urls)
    followers = doc.follower_count
    return {
        "tweet_ratio": total / doc.account_age_days,
        "hub_ratio": (doc.following_count / followers) if followers > 0 else None,
        "hub_ratio_defined": followers > 0,
        "rt_fraction": retweets / total if total else 0.0,
        "mention_fraction": mentioning / len(own) if own else 0.0,
        "url_fraction": with_url / len(own) if own else 0.0,
    }
