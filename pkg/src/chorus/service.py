"""Session service: live chat and collect-mode annotation over the engine.

The domain logic lives in CollectionService, which is framework-free and
directly testable; create_app wraps it in HTTP endpoints plus a WebSocket
event stream carrying the same payload schema as the REST responses.
"""

from __future__ import annotations

import json
import queue
import random
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml
from fastapi import Body, FastAPI, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from chorus.core import Article
from chorus.data.records import ConversationLog, TurnLog, export_transitions, write_transitions
from chorus.orchestrator import Engine, TurnBudget
from chorus.responders import load_resources
from chorus.responders.base import instance_seed
from chorus.selection import SelectionPolicy, SelectionThresholds

MIN_INTERACTIONS = 5
MODES = ("live", "collect")


class ServiceError(Exception):
    """A request the protocol does not allow; status picks the HTTP code."""

    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    corpus_dir: Optional[str] = None
    records_dir: Optional[str] = None
    checkpoint: Optional[str] = None
    policy: str = "rule_based"
    policy_seed: int = 0
    engine_seed: int = 0
    service_seed: int = 0
    response_deadline: float = 7.0
    ping_timeout: float = 60.0
    enabled: Optional[tuple[str, ...]] = None
    reveal_models: bool = False
    embedding_dim: int = 64
    topic_buckets: int = 2**14
    # directory with a built browser client; served at / when set
    ui_dir: Optional[str] = None
    thresholds: SelectionThresholds = field(default_factory=SelectionThresholds)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ServiceConfig":
        data = dict(raw)
        if "thresholds" in data and isinstance(data["thresholds"], dict):
            data["thresholds"] = SelectionThresholds(**data["thresholds"])
        if data.get("enabled") is not None:
            data["enabled"] = tuple(data["enabled"])
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        text = Path(path).read_text(encoding="utf-8")
        raw = yaml.safe_load(text) or {}
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a mapping")
        return cls.from_dict(raw)


class ArticleCorpus:
    """Directory of plain-text paragraphs, one file per article."""

    def __init__(self, articles: Sequence[Article]):
        if not articles:
            raise ValueError("article corpus is empty")
        self._articles = tuple(articles)
        self._by_id = {a.article_id: a for a in self._articles}

    @classmethod
    def load(cls, directory: str | Path) -> "ArticleCorpus":
        root = Path(directory)
        articles = []
        for path in sorted(root.glob("*.txt")):
            text = path.read_text(encoding="utf-8").strip()
            if text:
                articles.append(Article(article_id=path.stem, text=text))
        return cls(articles)

    def __len__(self) -> int:
        return len(self._articles)

    @property
    def articles(self) -> tuple[Article, ...]:
        return self._articles

    def get(self, article_id: str) -> Article:
        if article_id not in self._by_id:
            raise ServiceError(f"unknown article {article_id!r}", status=404)
        return self._by_id[article_id]

    def random(self, rng: random.Random) -> Article:
        return self._articles[rng.randrange(len(self._articles))]


@dataclass
class Session:
    session_id: str
    mode: str
    article: Article
    status: str = "active"
    rating: Optional[int] = None
    interactions: int = 0
    turns: list[TurnLog] = field(default_factory=list)
    pending: dict[str, Any] = field(default_factory=dict)
    pending_order: list[str] = field(default_factory=list)
    pending_state: Any = None
    selected_id: Optional[str] = None
    used_ids: set[str] = field(default_factory=set)
    lock: threading.Lock = field(default_factory=threading.Lock)


class CollectionService:
    """Session lifecycle, collect-mode voting protocol, and persistence."""

    def __init__(self, engine: Engine, corpus: ArticleCorpus, config: ServiceConfig):
        self.engine = engine
        self.corpus = corpus
        self.config = config
        self._sessions: dict[str, Session] = {}
        self._store_lock = threading.Lock()
        self._rng = random.Random(config.service_seed)
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._recorded = 0

    # ------------------------------------------------------------- sessions

    def _session(self, session_id: str) -> Session:
        with self._store_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(f"unknown session {session_id!r}", status=404)
        return session

    def _session_rng(self, session_id: str) -> random.Random:
        return random.Random(instance_seed(self.config.service_seed, "service", session_id))

    def create_session(self, mode: str, article_id: Optional[str] = None) -> dict[str, Any]:
        if mode not in MODES:
            raise ServiceError(f"mode must be one of {MODES}, got {mode!r}", status=422)
        with self._store_lock:
            article = (
                self.corpus.get(article_id)
                if article_id is not None
                else self.corpus.random(self._rng)
            )
            session_id = str(uuid.uuid4())
            session = Session(session_id=session_id, mode=mode, article=article)
            self._sessions[session_id] = session

        start = self.engine.start_conversation(
            article, conversation_id=session_id, commit_opener=(mode == "live")
        )
        if mode == "collect":
            self._stage_candidates(session, start.candidates, start.state)
        view = self.session_view(session_id)
        self._publish(session_id, {"type": "session_created", **view})
        return view

    def session_view(self, session_id: str) -> dict[str, Any]:
        session = self._session(session_id)
        if session.status == "active":
            state = self.engine.conversation_state(session_id)
            messages = [m.to_dict() for m in state.history]
        else:
            messages = [m.to_dict() for m in session.pending_state.history] if session.pending_state else []
        view: dict[str, Any] = {
            "session_id": session.session_id,
            "mode": session.mode,
            "status": session.status,
            "article": session.article.to_dict(),
            "messages": messages,
            "interactions": session.interactions,
            "can_finish": session.status == "active"
            and (session.mode == "live" or session.interactions >= MIN_INTERACTIONS),
            "rating": session.rating,
            "selection_pending": session.selected_id is not None,
            "candidates": self._candidate_views(session) if session.mode == "collect" else None,
        }
        return view

    def _candidate_views(self, session: Session) -> list[dict[str, Any]]:
        views = []
        for candidate_id in session.pending_order:
            candidate = session.pending[candidate_id]
            row = {"candidate_id": candidate_id, "text": candidate.text}
            if self.config.reveal_models:
                row["model_name"] = candidate.model_name
                row["score"] = candidate.score
            views.append(row)
        return views

    def _stage_candidates(self, session: Session, candidates, state) -> None:
        """Assign fresh unguessable ids and a served order shuffled per turn."""
        rng = self._session_rng(f"{session.session_id}:{session.interactions}")
        order = list(candidates)
        rng.shuffle(order)
        session.pending = {}
        session.pending_order = []
        for candidate in order:
            candidate_id = uuid.uuid4().hex
            session.pending[candidate_id] = candidate
            session.pending_order.append(candidate_id)
        session.pending_state = state
        session.selected_id = None

    # ---------------------------------------------------------------- turns

    def post_message(self, session_id: str, text: str) -> dict[str, Any]:
        if not text or not text.strip():
            raise ServiceError("message text must be non-empty", status=422)
        session = self._session(session_id)
        with session.lock:
            if session.status != "active":
                raise ServiceError("session is finished", status=409)
            if session.mode == "live":
                result = self.engine.handle_turn(session_id, text)
                session.interactions += 1
                payload = {
                    "type": "reply",
                    "session_id": session_id,
                    "reply": {"text": result.reply.text},
                    "interactions": session.interactions,
                }
                if self.config.reveal_models:
                    payload["reply"]["model_name"] = result.reply.model_name
                    payload["reply"]["score"] = result.reply.score
                self._publish(session_id, payload)
                return payload
            if session.selected_id is None:
                raise ServiceError(
                    "a candidate must be selected before the next message", status=409
                )
            return self._complete_turn(session, text)

    def select_candidate(
        self, session_id: str, candidate_id: str, reply: Optional[str] = None
    ) -> dict[str, Any]:
        session = self._session(session_id)
        with session.lock:
            if session.status != "active":
                raise ServiceError("session is finished", status=409)
            if session.mode != "collect":
                raise ServiceError("candidate selection only exists in collect mode", status=400)
            if candidate_id in session.used_ids:
                raise ServiceError("candidate already selected", status=409)
            if candidate_id not in session.pending:
                raise ServiceError(f"unknown candidate {candidate_id!r}", status=404)
            if session.selected_id is not None:
                raise ServiceError("a selection is already recorded for this turn", status=409)
            if reply is not None and not reply.strip():
                raise ServiceError("reply text must be non-empty", status=422)
            session.selected_id = candidate_id
            self._publish(
                session_id,
                {"type": "selection", "session_id": session_id, "candidate_id": candidate_id},
            )
            if reply is None:
                return {
                    "type": "selection",
                    "session_id": session_id,
                    "candidate_id": candidate_id,
                }
            return self._complete_turn(session, reply)

    def _complete_turn(self, session: Session, reply_text: str) -> dict[str, Any]:
        chosen_id = session.selected_id
        assert chosen_id is not None
        chosen = session.pending[chosen_id]
        selected_index = session.pending_order.index(chosen_id)
        session.turns.append(
            TurnLog(
                state=session.pending_state,
                candidates=tuple(session.pending[cid] for cid in session.pending_order),
                selected=selected_index,
            )
        )
        session.used_ids.update(session.pending_order)
        self.engine.commit_reply(session.session_id, chosen)
        result = self.engine.collect_candidates(session.session_id, reply_text)
        session.interactions += 1
        self._stage_candidates(session, result.candidates, result.state)
        view = self.session_view(session.session_id)
        payload = {"type": "candidates", **view}
        self._publish(session.session_id, payload)
        return payload

    def finish_session(self, session_id: str, rating: Optional[int]) -> dict[str, Any]:
        session = self._session(session_id)
        with session.lock:
            if session.status != "active":
                raise ServiceError("session already finished", status=409)
            if session.mode == "collect":
                if session.interactions < MIN_INTERACTIONS:
                    raise ServiceError(
                        f"finish requires at least {MIN_INTERACTIONS} interactions, "
                        f"have {session.interactions}",
                        status=409,
                    )
                if rating is None:
                    raise ServiceError("collect mode requires a rating", status=422)
            if rating is not None and not (
                isinstance(rating, int) and not isinstance(rating, bool) and 1 <= rating <= 5
            ):
                raise ServiceError("rating must be an integer in 1..5", status=422)

            exported = 0
            path: Optional[str] = None
            if session.mode == "collect":
                log = ConversationLog(
                    conversation_id=session.session_id,
                    article=session.article,
                    turns=tuple(session.turns),
                    final_rating=rating,
                )
                records = export_transitions(log)
                exported = len(records)
                if self.config.records_dir is not None:
                    directory = Path(self.config.records_dir)
                    directory.mkdir(parents=True, exist_ok=True)
                    path = str(directory / f"{session.session_id}.jsonl")
                    write_transitions(path, records)
                self._recorded += 1
            session.status = "finished"
            session.rating = rating
            # keep the final transcript visible on finished-session reads
            session.pending_state = self.engine.conversation_state(session_id)
            session.pending = {}
            session.pending_order = []
            session.selected_id = None
            self.engine.end_conversation(session_id)
            payload = {
                "type": "finished",
                "session_id": session_id,
                "rating": rating,
                "records": exported,
                "path": path,
            }
            self._publish(session_id, payload)
            return payload

    # ---------------------------------------------------------------- misc

    def stats(self) -> dict[str, Any]:
        with self._store_lock:
            sessions = list(self._sessions.values())
        by_status: dict[str, int] = {}
        for s in sessions:
            by_status[s.status] = by_status.get(s.status, 0) + 1
        return {
            "sessions": by_status,
            "recorded_conversations": self._recorded,
            "engine": {
                "health": self.engine.health(),
                "events": [
                    {"kind": e.kind, "worker": e.worker, "detail": e.detail}
                    for e in self.engine.events()[-20:]
                ],
            },
        }

    def subscribe(self, session_id: str) -> queue.Queue:
        self._session(session_id)
        q: queue.Queue = queue.Queue()
        with self._store_lock:
            self._subscribers.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        with self._store_lock:
            subscribers = self._subscribers.get(session_id, [])
            if q in subscribers:
                subscribers.remove(q)

    def _publish(self, session_id: str, payload: dict[str, Any]) -> None:
        with self._store_lock:
            subscribers = list(self._subscribers.get(session_id, []))
        for q in subscribers:
            q.put(payload)

    def stop(self) -> None:
        self.engine.stop()


def build_service(config: ServiceConfig) -> CollectionService:
    """Load resources, optionally a scorer checkpoint, and assemble the stack."""
    resources = load_resources(
        embedding_dim=config.embedding_dim,
        topic_buckets=config.topic_buckets,
        seed=config.engine_seed,
    )
    scorer = None
    if config.checkpoint is not None:
        from chorus.scoring.scorers import ModelScorer

        scorer = ModelScorer.from_checkpoint(
            config.checkpoint, resources.store, resources.lexicons, resources.tagger
        )
    corpus_dir = (
        Path(config.corpus_dir)
        if config.corpus_dir is not None
        else Path(__file__).parent / "resources" / "articles"
    )
    engine = Engine(
        resources,
        scorer=scorer,
        policy=SelectionPolicy(
            kind=config.policy, seed=config.policy_seed, thresholds=config.thresholds
        ),
        budget=TurnBudget(
            response_deadline=config.response_deadline, ping_timeout=config.ping_timeout
        ),
        enabled=config.enabled,
        engine_seed=config.engine_seed,
    )
    return CollectionService(engine, ArticleCorpus.load(corpus_dir), config)


def create_app(service: CollectionService):
    """HTTP facade; every route delegates to the service object."""
    app = FastAPI(title="chorus collection service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error(request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"error": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(default={})):
        return service.create_session(
            mode=body.get("mode", "live"), article_id=body.get("article_id")
        )

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str):
        return service.session_view(session_id)

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, body: dict = Body(...)):
        return service.post_message(session_id, body.get("text", ""))

    @app.post("/sessions/{session_id}/select")
    def select_candidate(session_id: str, body: dict = Body(...)):
        if "candidate_id" not in body:
            raise ServiceError("candidate_id is required", status=422)
        return service.select_candidate(
            session_id, body["candidate_id"], reply=body.get("reply")
        )

    @app.post("/sessions/{session_id}/finish")
    def finish_session(session_id: str, body: dict = Body(default={})):
        return service.finish_session(session_id, body.get("rating"))

    @app.get("/stats")
    def stats():
        return service.stats()

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            q = service.subscribe(session_id)
        except ServiceError as exc:
            await websocket.send_text(json.dumps({"type": "error", "error": str(exc)}))
            await websocket.close()
            return
        try:
            await websocket.send_text(
                json.dumps({"type": "view", **service.session_view(session_id)})
            )
            while True:
                # short poll so task cancellation never waits on a parked thread
                try:
                    payload = await run_in_threadpool(q.get, True, 0.25)
                except queue.Empty:
                    continue
                await websocket.send_text(json.dumps(payload))
        except WebSocketDisconnect:
            pass
        finally:
            service.unsubscribe(session_id, q)

    # mounted last so the API routes above always win
    if service.config.ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/", StaticFiles(directory=service.config.ui_dir, html=True), name="ui"
        )

    return app
