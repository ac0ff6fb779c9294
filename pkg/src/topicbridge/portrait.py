"""Data portraits: a user's interests, activity histogram and their links.

A portrait is a self-contained renderable document: ranked interest tokens
(word cloud input), a tweet-activity histogram with per-bin exemplar tweets,
and interest<->bin links so a client can highlight when-was-this-said. The
referenced tweets travel with the document so rendering needs no further
corpus access.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

from .corpus import (
    Corpus,
    InterestToken,
    TweetRecord,
    UserDocument,
    UserProfile,
    extract_interests,
    format_timestamp,
)

logger = logging.getLogger(__name__)

# Colorbrewer Dark2 assignments, fixed so every rendering agrees.
KIND_COLORS = {"hashtag": "#7570b3", "mention": "#d95f02", "word": "#1b9e77"}
ROTATION_DEGREES = -7

INTEREST_LIMIT = 300
POLITICAL_TOP = 50


def load_political_keywords(path: str | Path | None = None) -> frozenset[str]:
    """Load political keywords (one per line, case-folded on load).

    Entries may legitimately start with '#' (hashtag surfaces), so unlike
    stopword files a comment line is '#' followed by whitespace.
    """
    if path is None:
        text = resources.files("topicbridge.data").joinpath("political_keywords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words: set[str] = set()
    for line in text.splitlines():
        entry = line.strip()
        if not entry or entry == "#" or (entry.startswith("#") and entry[1].isspace()):
            continue
        words.add(entry.casefold())
    return frozenset(words)


def sturges_bins(n: int) -> int:
    """Sturges' rule: ceil(log2(n) + 1) bins for n observations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.ceil(math.log2(n) + 1)


@dataclass(frozen=True)
class HistogramBin:
    """One time bin: [start, end), last bin closed on the right."""

    start: datetime
    end: datetime
    count: int
    top_tweet_id: str | None  # most popular tweet in the bin; None when empty
    top_popularity: int
    circle_radius_hint: float  # in (0, 1], relative to the busiest bin

    def to_dict(self) -> dict:
        return {
            "start": format_timestamp(self.start),
            "end": format_timestamp(self.end),
            "count": self.count,
            "top_tweet_id": self.top_tweet_id,
            "top_popularity": self.top_popularity,
            "circle_radius_hint": self.circle_radius_hint,
        }


@dataclass(frozen=True)
class PortraitLink:
    """Interest i occurs in at least one tweet of bin b."""

    interest_index: int
    bin_index: int
    top_tweet_id: str  # most popular tweet in the bin containing the interest

    def to_dict(self) -> dict:
        return {
            "interest_index": self.interest_index,
            "bin_index": self.bin_index,
            "top_tweet_id": self.top_tweet_id,
        }


@dataclass
class Portrait:
    """Everything a client needs to render one user's portrait."""

    user_id: str
    display_name: str
    avatar_url: str
    bio: str
    interests: list[InterestToken]
    bins: list[HistogramBin]
    links: list[PortraitLink]
    political_content: bool
    generated_at: datetime
    tweets: dict[str, dict] = field(default_factory=dict)

    def interest_index(self, surface: str) -> int | None:
        for i, interest in enumerate(self.interests):
            if interest.surface == surface:
                return i
        return None

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "avatar_url": self.avatar_url,
            "bio": self.bio,
            "interests": [
                {"surface": i.surface, "kind": i.kind, "frequency": i.frequency}
                for i in self.interests
            ],
            "bins": [b.to_dict() for b in self.bins],
            "links": [link.to_dict() for link in self.links],
            "political_content": self.political_content,
            "generated_at": format_timestamp(self.generated_at),
            "tweets": {tid: dict(info) for tid, info in sorted(self.tweets.items())},
            "kind_colors": dict(KIND_COLORS),
            "rotation_degrees": ROTATION_DEGREES,
        }


def _top_tweet(records: list[TweetRecord]) -> TweetRecord:
    # Ties on popularity resolve to the smallest tweet id, deterministically.
    return min(records, key=lambda r: (-r.popularity, r.tweet_id))


def _bin_spans(earliest: datetime, latest: datetime, bin_count: int) -> list[tuple[datetime, datetime]]:
    span = (latest - earliest).total_seconds()
    if span <= 0.0:
        # All tweets share one timestamp: widen to one second per bin so the
        # bins stay distinct; everything lands in bin 0.
        span = float(bin_count)
    width = span / bin_count
    edges = [earliest + timedelta(seconds=width * i) for i in range(bin_count)]
    edges.append(earliest + timedelta(seconds=span))
    return [(edges[i], edges[i + 1]) for i in range(bin_count)]


def _bin_index(ts: datetime, earliest: datetime, width: float, bin_count: int) -> int:
    offset = (ts - earliest).total_seconds()
    return min(int(offset / width), bin_count - 1)  # last bin right-closed


def build_portrait(
    doc: UserDocument,
    corpus: Corpus,
    political_keywords: frozenset[str] | None = None,
    limit: int = INTEREST_LIMIT,
    generated_at: datetime | None = None,
) -> Portrait:
    """Assemble a portrait for one user document.

    Raises ValueError for a user with zero tweets: there is nothing to bin.
    """
    records = [corpus.tweets[tid] for tid in doc.tweet_ids]
    if not records:
        raise ValueError(f"user {doc.user_id!r} has no tweets to portray")
    if political_keywords is None:
        political_keywords = load_political_keywords()

    n = len(records)
    bin_count = sturges_bins(n)
    earliest = min(r.created_at for r in records)
    latest = max(r.created_at for r in records)
    spans = _bin_spans(earliest, latest, bin_count)
    width = (spans[0][1] - spans[0][0]).total_seconds()

    members: list[list[TweetRecord]] = [[] for _ in range(bin_count)]
    for record in records:
        members[_bin_index(record.created_at, earliest, width, bin_count)].append(record)

    tops = [_top_tweet(group) if group else None for group in members]
    max_pop = max((t.popularity for t in tops if t is not None), default=0)
    bins: list[HistogramBin] = []
    for (start, end), group, top in zip(spans, members, tops):
        popularity = top.popularity if top else 0
        hint = 1.0 if max_pop == 0 else 0.5 + 0.5 * (popularity / max_pop)
        bins.append(
            HistogramBin(
                start=start,
                end=end,
                count=len(group),
                top_tweet_id=top.tweet_id if top else None,
                top_popularity=popularity,
                circle_radius_hint=hint,
            )
        )

    interests = extract_interests(doc, limit=limit)
    tweet_token_sets = {
        r.tweet_id: frozenset(corpus.tweet_tokens.get(r.tweet_id, ())) for r in records
    }
    links: list[PortraitLink] = []
    for i, interest in enumerate(interests):
        token = corpus.token_id(interest.surface)
        if token is None:  # interests come from the vocabulary, but stay safe
            continue
        for b, group in enumerate(members):
            matching = [r for r in group if token in tweet_token_sets[r.tweet_id]]
            if matching:
                links.append(PortraitLink(i, b, _top_tweet(matching).tweet_id))

    political = any(
        interest.surface.casefold() in political_keywords
        for interest in interests[:POLITICAL_TOP]
    )

    referenced = {t.tweet_id for t in tops if t is not None}
    referenced.update(link.top_tweet_id for link in links)
    tweets = {
        tid: {
            "text": corpus.tweets[tid].text,
            "created_at": format_timestamp(corpus.tweets[tid].created_at),
            "popularity": corpus.tweets[tid].popularity,
        }
        for tid in sorted(referenced)
    }

    profile = corpus.profiles.get(doc.user_id, UserProfile())
    return Portrait(
        user_id=doc.user_id,
        display_name=profile.display_name,
        avatar_url=profile.avatar_url,
        bio=profile.bio,
        interests=interests,
        bins=bins,
        links=links,
        political_content=political,
        generated_at=generated_at or datetime.now(timezone.utc),
        tweets=tweets,
    )


def bin_top_tweet(portrait: Portrait, bin_index: int, keyword: str | None = None) -> str | None:
    """Exemplar tweet id for a bin, optionally scoped to one interest keyword.

    Without a keyword: the bin's most popular tweet (None for an empty bin).
    With a keyword: the most popular tweet in the bin that contains the
    keyword, None when no tweet in the bin does.
    """
    if not 0 <= bin_index < len(portrait.bins):
        raise ValueError(f"bin_index {bin_index} out of range")
    if keyword is None:
        return portrait.bins[bin_index].top_tweet_id
    interest = portrait.interest_index(keyword)
    if interest is None:
        return None
    for link in portrait.links:
        if link.interest_index == interest and link.bin_index == bin_index:
            return link.top_tweet_id
    return None
