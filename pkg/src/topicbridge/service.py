"""Experiment-instrumented serving: conditions, event log, engagement metrics.

The store is the durable half (append-only NDJSON logs, reloadable); the
FastAPI app is a thin stateless layer over corpus + model + graph + store.
Every behavioral quantity is derived from the event log on demand, so a
replayed log reproduces the same summaries bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .corpus import Corpus, behavior_stats, format_timestamp, parse_timestamp
from .portrait import Portrait, build_portrait, load_political_keywords
from .recsys import RecConfig, cluster, recommend
from .topicgraph import IntermediaryTopicSet
from .topics import TopicModel

logger = logging.getLogger(__name__)

UI_VARIANTS = ("baseline", "circle_pack")
REC_VARIANTS = ("KLD", "IT")
# Assignment index -> condition; order is part of the persisted contract.
CONDITIONS: tuple[tuple[str, str], ...] = (
    ("baseline", "KLD"),
    ("baseline", "IT"),
    ("circle_pack", "KLD"),
    ("circle_pack", "IT"),
)

EVENT_KINDS = frozenset(
    {
        "rec_explore_click",
        "rec_accept",
        "portrait_word_click",
        "portrait_bin_click",
        "portrait_reset",
        "page_view",
        "heartbeat",
    }
)

SESSION_GAP_SECONDS = 30 * 60.0  # inactivity longer than this splits sessions
DWELL_FLOOR_SECONDS = 5.0
TWEET_RATIO_FLOOR = 1.0
DWELL_TOP_QUANTILE = 0.9


def assign_condition(user_id: str, seed: int) -> tuple[str, str]:
    """Deterministic uniform condition for a user under an experiment seed."""
    digest = hashlib.sha256(f"{seed}:{user_id}".encode("utf-8")).digest()
    return CONDITIONS[int.from_bytes(digest, "big") % len(CONDITIONS)]


@dataclass(frozen=True)
class ExperimentCondition:
    user_id: str
    ui: str
    rec: str
    assigned_at: datetime

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "ui": self.ui,
            "rec": self.rec,
            "assigned_at": format_timestamp(self.assigned_at),
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentCondition":
        return ExperimentCondition(
            user_id=data["user_id"],
            ui=data["ui"],
            rec=data["rec"],
            assigned_at=parse_timestamp(data["assigned_at"]),
        )


@dataclass(frozen=True)
class InteractionEvent:
    user_id: str
    kind: str
    client_ts: datetime
    server_ts: datetime
    target: str | None = None  # candidate id for rec_accept, else free-form

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "kind": self.kind,
            "client_ts": format_timestamp(self.client_ts),
            "server_ts": format_timestamp(self.server_ts),
            "target": self.target,
        }

    @staticmethod
    def from_dict(data: dict) -> "InteractionEvent":
        return InteractionEvent(
            user_id=data["user_id"],
            kind=data["kind"],
            client_ts=parse_timestamp(data["client_ts"]),
            server_ts=parse_timestamp(data["server_ts"]),
            target=data.get("target"),
        )


def validate_event(data: object) -> tuple[str, str, datetime, str | None]:
    """Check one raw event payload; raises ValueError with a client message."""
    if not isinstance(data, dict):
        raise ValueError("event must be a JSON object")
    user_id = data.get("user_id")
    if not isinstance(user_id, str) or not user_id:
        raise ValueError("event requires a non-empty user_id")
    kind = data.get("kind")
    if kind not in EVENT_KINDS:
        raise ValueError(f"unknown event kind: {kind!r}")
    raw_ts = data.get("client_ts")
    if isinstance(raw_ts, datetime):
        client_ts = raw_ts
    elif isinstance(raw_ts, str):
        try:
            client_ts = parse_timestamp(raw_ts)
        except ValueError as exc:
            raise ValueError(f"unparseable client_ts: {raw_ts!r}") from exc
    else:
        raise ValueError("event requires a client_ts timestamp")
    target = data.get("target")
    if target is not None and not isinstance(target, str):
        raise ValueError("target must be a string when present")
    if kind == "rec_accept" and not target:
        raise ValueError("rec_accept events require a target candidate id")
    return user_id, kind, client_ts, target


class EventStore:
    """Append-only NDJSON logs for events and condition assignments.

    events.ndjson and conditions.ndjson are the durable record; reopening a
    store on the same directory replays both. snapshot() additionally writes
    a conditions.json summary for offline inspection.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.events_path = self.root / "events.ndjson"
        self.conditions_path = self.root / "conditions.ndjson"
        self._events: list[InteractionEvent] = []
        self._by_user: dict[str, list[InteractionEvent]] = {}
        self._conditions: dict[str, ExperimentCondition] = {}
        self._last_server_ts: datetime | None = None
        self._lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        if self.events_path.exists():
            with self.events_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._remember(InteractionEvent.from_dict(json.loads(line)))
        if self.conditions_path.exists():
            with self.conditions_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        cond = ExperimentCondition.from_dict(json.loads(line))
                        # first record wins: assignments are immutable
                        self._conditions.setdefault(cond.user_id, cond)

    def _remember(self, event: InteractionEvent) -> None:
        self._events.append(event)
        self._by_user.setdefault(event.user_id, []).append(event)
        if self._last_server_ts is None or event.server_ts > self._last_server_ts:
            self._last_server_ts = event.server_ts

    def _next_server_ts(self) -> datetime:
        now = datetime.now(timezone.utc)
        if self._last_server_ts is not None and now <= self._last_server_ts:
            now = self._last_server_ts + timedelta(microseconds=1)
        self._last_server_ts = now
        return now

    # -- events ---------------------------------------------------------------

    def append(
        self,
        user_id: str,
        kind: str,
        client_ts: datetime,
        target: str | None = None,
    ) -> InteractionEvent:
        return self.append_batch(
            [{"user_id": user_id, "kind": kind, "client_ts": client_ts, "target": target}]
        )[0]

    def append_batch(self, payloads: list[object]) -> list[InteractionEvent]:
        """Validate every payload, then append all of them (all-or-nothing)."""
        validated = [validate_event(p) for p in payloads]
        with self._lock:
            events = [
                InteractionEvent(user_id, kind, client_ts, self._next_server_ts(), target)
                for user_id, kind, client_ts, target in validated
            ]
            with self.events_path.open("a", encoding="utf-8") as fh:
                for event in events:
                    fh.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")
            for event in events:
                self._remember(event)
        return events

    def events(self) -> list[InteractionEvent]:
        return list(self._events)

    def events_for(self, user_id: str) -> list[InteractionEvent]:
        return list(self._by_user.get(user_id, ()))

    # -- conditions -----------------------------------------------------------

    def assign(self, user_id: str, seed: int) -> ExperimentCondition:
        """Assign (or return the pinned) condition for a user. Idempotent."""
        with self._lock:
            existing = self._conditions.get(user_id)
            if existing is not None:
                return existing
            ui, rec = assign_condition(user_id, seed)
            cond = ExperimentCondition(user_id, ui, rec, datetime.now(timezone.utc))
            with self.conditions_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(cond.to_dict(), ensure_ascii=False) + "\n")
            self._conditions[user_id] = cond
            return cond

    def condition(self, user_id: str) -> ExperimentCondition | None:
        return self._conditions.get(user_id)

    def conditions(self) -> dict[str, ExperimentCondition]:
        return dict(self._conditions)

    def snapshot(self) -> Path:
        """Write a conditions.json snapshot; returns its path."""
        path = self.root / "conditions.json"
        payload = {u: c.to_dict() for u, c in sorted(self._conditions.items())}
        path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path


# -- engagement ---------------------------------------------------------------


@dataclass
class EngagementSummary:
    user_id: str
    exploration_count: int
    accepted_any: bool
    n_days: int
    dwell_seconds: float
    covariates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "exploration_count": self.exploration_count,
            "accepted_any": self.accepted_any,
            "n_days": self.n_days,
            "dwell_seconds": self.dwell_seconds,
            "covariates": dict(self.covariates),
        }


def sessionize(events: list[InteractionEvent]) -> list[list[InteractionEvent]]:
    """Group events into sessions split on client-side inactivity gaps.

    A gap strictly greater than SESSION_GAP_SECONDS starts a new session.
    """
    ordered = sorted(events, key=lambda e: e.client_ts)
    sessions: list[list[InteractionEvent]] = []
    for event in ordered:
        if (
            sessions
            and (event.client_ts - sessions[-1][-1].client_ts).total_seconds()
            <= SESSION_GAP_SECONDS
        ):
            sessions[-1].append(event)
        else:
            sessions.append([event])
    return sessions


def engagement_summary(
    user_id: str,
    events: list[InteractionEvent],
    corpus: Corpus | None = None,
) -> EngagementSummary:
    """Summarize one user's engagement from their event log.

    dwell is the summed span of each session (a single-event session adds 0);
    n_days counts distinct UTC dates with any event. All quantities derive
    from client timestamps so replaying a log reproduces them exactly.
    """
    sessions = sessionize(events)
    dwell = sum(
        (session[-1].client_ts - session[0].client_ts).total_seconds()
        for session in sessions
    )
    days = {e.client_ts.astimezone(timezone.utc).date() for e in events}
    covariates: dict = {}
    if corpus is not None and user_id in corpus.documents:
        covariates = behavior_stats(corpus, user_id)
    return EngagementSummary(
        user_id=user_id,
        exploration_count=sum(1 for e in events if e.kind == "rec_explore_click"),
        accepted_any=any(e.kind == "rec_accept" for e in events),
        n_days=len(days),
        dwell_seconds=dwell,
        covariates=covariates,
    )


def export_rows(store: EventStore, corpus: Corpus | None = None) -> list[dict]:
    """One flat row per assigned user: condition, summary, screening flags.

    dwell_top_decile marks users at or above the 0.9 dwell quantile (and with
    nonzero dwell); the other flags mark likely-too-low engagement or bot-like
    posting cadence for downstream exclusion decisions.
    """
    users = sorted(store.conditions())
    summaries = {u: engagement_summary(u, store.events_for(u), corpus) for u in users}
    dwells = sorted(s.dwell_seconds for s in summaries.values())
    threshold = math.inf
    if dwells:
        index = max(0, math.ceil(DWELL_TOP_QUANTILE * len(dwells)) - 1)
        threshold = dwells[index]
    rows = []
    for user_id in users:
        cond = store.condition(user_id)
        summary = summaries[user_id]
        tweet_ratio = summary.covariates.get("tweet_ratio")
        rows.append(
            {
                "user_id": user_id,
                "ui": cond.ui,
                "rec": cond.rec,
                "exploration_count": summary.exploration_count,
                "accepted_any": summary.accepted_any,
                "n_days": summary.n_days,
                "dwell_seconds": summary.dwell_seconds,
                "covariates": dict(summary.covariates),
                "flags": {
                    "dwell_top_decile": summary.dwell_seconds >= threshold
                    and summary.dwell_seconds > 0,
                    "below_min_dwell_5s": summary.dwell_seconds < DWELL_FLOOR_SECONDS,
                    "below_tweet_ratio_1": tweet_ratio is not None
                    and tweet_ratio < TWEET_RATIO_FLOOR,
                },
            }
        )
    return rows


# -- HTTP layer ---------------------------------------------------------------


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    corpus: Corpus,
    model: TopicModel,
    itset: IntermediaryTopicSet,
    store: EventStore,
    seed: int,
    gamma: float = 1.0,
    top_n: int = 20,
    political_keywords: frozenset[str] | None = None,
) -> FastAPI:
    """Wire corpus + model + intermediary set + store into the JSON API."""
    app = FastAPI(title="topicbridge", docs_url=None, redoc_url=None)
    keywords = political_keywords if political_keywords is not None else load_political_keywords()
    portraits: dict[str, Portrait] = {}

    app.state.store = store
    app.state.seed = seed

    def portrait_for(user_id: str) -> Portrait:
        if user_id not in portraits:
            portraits[user_id] = build_portrait(
                corpus.documents[user_id], corpus, keywords
            )
        return portraits[user_id]

    @app.post("/users")
    async def sign_up(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        if not isinstance(body, dict) or not isinstance(body.get("user_id"), str):
            return _error(400, "bad_request", "body requires a user_id string")
        user_id = body["user_id"]
        if user_id not in corpus.documents:
            return _error(404, "unknown_user", f"no such user: {user_id}")
        cond = store.assign(user_id, seed)
        portrait_for(user_id)  # built synchronously; small corpora only
        return {"user_id": user_id, "condition": cond.to_dict(), "portrait_ready": True}

    @app.get("/portrait/{user_id}")
    def get_portrait(user_id: str):
        if user_id not in corpus.documents:
            return _error(404, "unknown_user", f"no such user: {user_id}")
        return portrait_for(user_id).to_dict()

    @app.get("/recommendations/{user_id}")
    def get_recommendations(user_id: str):
        if user_id not in model.doc_topic_counts:
            return _error(404, "unknown_user", f"no such user: {user_id}")
        cond = store.assign(user_id, seed)
        cfg = RecConfig(algorithm=cond.rec, gamma=gamma, top_n=top_n)
        recs = recommend(user_id, model.user_ids, cfg, model, itset)
        groups = cluster(recs, model)
        payload = []
        for rec in recs:
            entry = rec.to_dict()
            profile = corpus.profiles.get(rec.candidate_id)
            entry["display_name"] = profile.display_name if profile else ""
            entry["bio"] = profile.bio if profile else ""
            payload.append(entry)
        return {
            "user_id": user_id,
            "condition": cond.to_dict(),
            "algorithm": cond.rec,
            "recommendations": payload,
            "clusters": [g.to_dict() for g in groups],
        }

    @app.post("/events")
    async def post_events(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        payloads = body if isinstance(body, list) else [body]
        if not payloads:
            return _error(400, "bad_request", "empty event batch")
        try:
            events = store.append_batch(payloads)
        except ValueError as exc:
            return _error(400, "invalid_event", str(exc))
        return {"accepted": len(events)}

    @app.get("/metrics/export")  # static path must register before /metrics/{user_id}
    def metrics_export():
        rows = export_rows(store, corpus)
        store.snapshot()
        body = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
        return Response(content=body, media_type="application/x-ndjson")

    @app.get("/metrics/{user_id}")
    def get_metrics(user_id: str):
        known = user_id in corpus.documents or store.condition(user_id) is not None
        if not known:
            return _error(404, "unknown_user", f"no such user: {user_id}")
        cond = store.condition(user_id)
        summary = engagement_summary(user_id, store.events_for(user_id), corpus)
        result = summary.to_dict()
        result["condition"] = cond.to_dict() if cond else None
        return result

    return app
