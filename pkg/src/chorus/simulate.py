"""Scripted-user load driver: runs whole conversations against an in-process
engine, optionally injecting misbehaving workers, and writes standard corpora.

This is the headless stand-in for human annotators: collect mode votes on
candidates and rates the conversation, live mode just chats. Content is
deterministic under the spec seed even with concurrent conversations because
every per-conversation stream is derived, never shared.
"""

from __future__ import annotations

import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from chorus.core import Article, TransitionTuple
from chorus.data.records import ConversationLog, TurnLog, export_corpus, write_transitions
from chorus.orchestrator import Engine, HealthEvent, TurnBudget
from chorus.responders import EnsembleResources, load_resources, responder_factories
from chorus.responders.base import Responder, instance_seed
from chorus.selection import SelectionPolicy

USER_LINES = (
    "What is this article about ?",
    "What's your name ?",
    "That is quite interesting.",
    "Where did this happen ?",
    "ok",
    "Tell me more about it.",
    "Who is involved in this ?",
    "I enjoy reading about such things.",
    "Why does it matter ?",
    "sure",
)

FAULT_KINDS = ("slow", "hang", "crash")


class FaultyResponder(Responder):
    """Wraps a real responder and misbehaves on respond().

    slow: sleeps before delegating; hang: blocks until released (never, by
    default); crash: raises every time.
    """

    def __init__(self, inner: Responder, kind: str, delay: float = 0.0,
                 release: Optional[threading.Event] = None):
        if kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {kind!r}")
        self.name = inner.name
        self.inner = inner
        self.kind = kind
        self.delay = delay
        self.release = release if release is not None else threading.Event()

    def wake_up(self, article: Article) -> None:
        self.inner.wake_up(article)

    def respond(self, state) -> Optional[str]:
        if self.kind == "crash":
            raise RuntimeError(f"injected crash in {self.name}")
        if self.kind == "hang":
            self.release.wait()
            return None
        time.sleep(self.delay)
        return self.inner.respond(state)


class ScriptedUser:
    """Deterministic message and vote stream for one conversation."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def next_line(self) -> str:
        return USER_LINES[self._rng.randrange(len(USER_LINES))]

    def pick(self, n_candidates: int) -> int:
        return self._rng.randrange(n_candidates)

    def rating(self) -> int:
        return self._rng.randint(1, 5)


@dataclass(frozen=True)
class SimulationSpec:
    conversations: int = 2
    turns: int = 5
    mode: str = "collect"
    concurrency: int = 1
    seed: int = 0
    rating: Optional[int] = None
    response_deadline: float = 7.0
    ping_timeout: float = 60.0
    faults: tuple[tuple[str, str, float], ...] = ()  # (responder, kind, delay)

    def __post_init__(self) -> None:
        if self.mode not in ("live", "collect"):
            raise ValueError(f"mode must be live or collect, got {self.mode!r}")
        if self.conversations < 1 or self.turns < 1 or self.concurrency < 1:
            raise ValueError("conversations, turns, and concurrency must be >= 1")
        for _, kind, delay in self.faults:
            if kind not in FAULT_KINDS:
                raise ValueError(f"unknown fault kind {kind!r}")
            if delay < 0:
                raise ValueError("fault delay must be >= 0")


@dataclass
class SimulationResult:
    logs: list[ConversationLog] = field(default_factory=list)
    records: list[TransitionTuple] = field(default_factory=list)
    replies: dict[str, list[str]] = field(default_factory=dict)
    turn_seconds: dict[str, list[float]] = field(default_factory=dict)
    events: tuple[HealthEvent, ...] = ()

    @property
    def max_turn_seconds(self) -> float:
        return max((t for turns in self.turn_seconds.values() for t in turns), default=0.0)


def _user_for(spec: SimulationSpec, conversation_id: str) -> ScriptedUser:
    return ScriptedUser(instance_seed(spec.seed, "sim-user", conversation_id))


def _apply_faults(factories, spec: SimulationSpec):
    """Wrap faulted factories; returns (factories, release events).

    The fault follows the worker thread that first builds an instance, so a
    replacement spawned by a revive gets clean instances: an injected hang is
    a transient fault that one revive cures, while slow and crash workers
    (which are never respawned) stay faulty for the whole run.
    """
    wrapped = dict(factories)
    releases: list[threading.Event] = []
    guard = threading.Lock()
    for name, kind, delay in spec.faults:
        if name not in wrapped:
            raise ValueError(f"cannot inject fault into unknown responder {name!r}")
        inner_factory = wrapped[name]
        release = threading.Event()
        releases.append(release)
        owner: dict[str, Optional[int]] = {"thread": None}

        def build(cid, inner_factory=inner_factory, kind=kind, delay=delay,
                  release=release, owner=owner):
            inner = inner_factory(cid)
            me = threading.get_ident()
            with guard:
                if owner["thread"] is None:
                    owner["thread"] = me
                faulty = owner["thread"] == me
            return FaultyResponder(inner, kind, delay, release=release) if faulty else inner

        wrapped[name] = build
    return wrapped, releases


def _run_collect(engine: Engine, spec: SimulationSpec, article: Article,
                 cid: str, result: SimulationResult, lock: threading.Lock) -> None:
    user = _user_for(spec, cid)
    start = engine.start_conversation(article, conversation_id=cid, commit_opener=False)
    candidates, state = start.candidates, start.state
    turns: list[TurnLog] = []
    seconds: list[float] = []
    for _ in range(spec.turns):
        if not candidates:
            break
        pick = user.pick(len(candidates))
        turns.append(TurnLog(state=state, candidates=candidates, selected=pick))
        engine.commit_reply(cid, candidates[pick])
        began = time.monotonic()
        collected = engine.collect_candidates(cid, user.next_line())
        seconds.append(time.monotonic() - began)
        candidates, state = collected.candidates, collected.state
    log = ConversationLog(
        conversation_id=cid,
        article=article,
        turns=tuple(turns),
        final_rating=spec.rating if spec.rating is not None else user.rating(),
    )
    engine.end_conversation(cid)
    with lock:
        result.logs.append(log)
        result.turn_seconds[cid] = seconds


def _run_live(engine: Engine, spec: SimulationSpec, article: Article,
              cid: str, result: SimulationResult, lock: threading.Lock) -> None:
    user = _user_for(spec, cid)
    engine.start_conversation(article, conversation_id=cid)
    replies: list[str] = []
    seconds: list[float] = []
    for _ in range(spec.turns):
        began = time.monotonic()
        turn = engine.handle_turn(cid, user.next_line())
        seconds.append(time.monotonic() - began)
        replies.append(turn.reply.text)
    engine.end_conversation(cid)
    with lock:
        result.replies[cid] = replies
        result.turn_seconds[cid] = seconds


def run_simulation(
    spec: SimulationSpec,
    resources: Optional[EnsembleResources] = None,
    articles: Optional[Sequence[Article]] = None,
    out_path: Optional[str | Path] = None,
) -> SimulationResult:
    """Drive the engine with scripted users and return logs, records, events.

    Collect-mode corpora land in out_path (standard JSONL) when given.
    """
    if resources is None:
        resources = load_resources(embedding_dim=32, topic_buckets=2**12, seed=spec.seed)
    if articles is None:
        from chorus.service import ArticleCorpus

        corpus = ArticleCorpus.load(Path(__file__).parent / "resources" / "articles")
        # round-robin over a seeded shuffle: balanced coverage, still deterministic
        pool = list(corpus.articles)
        random.Random(spec.seed).shuffle(pool)
        articles = [pool[i % len(pool)] for i in range(spec.conversations)]
    factories, releases = _apply_faults(
        responder_factories(resources, engine_seed=spec.seed), spec
    )
    engine = Engine(
        resources,
        policy=SelectionPolicy(kind="rule_based", seed=spec.seed),
        budget=TurnBudget(
            response_deadline=spec.response_deadline, ping_timeout=spec.ping_timeout
        ),
        factories=factories,
        engine_seed=spec.seed,
    )
    result = SimulationResult()
    lock = threading.Lock()
    runner = _run_collect if spec.mode == "collect" else _run_live
    try:
        jobs = [
            (engine, spec, articles[i % len(articles)], f"sim-{i}", result, lock)
            for i in range(spec.conversations)
        ]
        if spec.concurrency == 1:
            for job in jobs:
                runner(*job)
        else:
            with ThreadPoolExecutor(max_workers=spec.concurrency) as pool:
                futures = [pool.submit(runner, *job) for job in jobs]
                for f in futures:
                    f.result()
        result.events = engine.events()
    finally:
        engine.stop()
        for release in releases:
            release.set()  # free any thread still parked in an injected hang

    result.logs.sort(key=lambda log: log.conversation_id)
    result.records = export_corpus(result.logs)
    if out_path is not None and result.records:
        write_transitions(out_path, result.records)
    return result
