"""Turn engine: fans each user message out to responder workers under a
deadline, scores candidates inside the workers, aggregates, selects, and
supervises worker health.

Workers are threads with FIFO mailboxes, one per responder family. A worker
owns its per-conversation responder instances, so wake-up ordering and
isolation come from queue order alone. Out-of-process workers plug in through
the same factory seam: a factory returning socket bridge clients makes the
engine remote without further changes.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from chorus.core import Article, Candidate, ConversationState, Message, Speaker
from chorus.responders import (
    OPENER_RESPONDERS,
    RESPONDER_NAMES,
    EnsembleResources,
    responder_factories,
)
from chorus.responders.base import Responder
from chorus.selection import (
    RankedCandidates,
    SelectionPolicy,
    Selector,
    update_bored_counter,
)

APOLOGY = (
    "I am sorry, I do not have a good answer to that. "
    "What did you think about the article?"
)

MAX_CONSECUTIVE_FAILURES = 3


class EngineError(RuntimeError):
    """Raised when the engine cannot serve a request at all."""


@dataclass(frozen=True)
class TurnBudget:
    response_deadline: float = 7.0
    ping_timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.response_deadline <= 0 or self.ping_timeout <= 0:
            raise ValueError("budgets must be positive")
        if self.response_deadline >= self.ping_timeout:
            raise ValueError("response_deadline must be below ping_timeout")


@dataclass
class WorkerHandle:
    name: str
    inbox: "queue.Queue"
    thread: threading.Thread
    health: str = "alive"  # alive | suspect | dead
    failures: int = 0
    pending_ping: Optional[float] = None
    ping_nonce: int = 0


@dataclass(frozen=True)
class HealthEvent:
    kind: str
    worker: str
    detail: str = ""


@dataclass(frozen=True)
class StartResult:
    conversation_id: str
    greeting: str
    opener: Optional[Candidate]
    candidates: tuple[Candidate, ...]
    state: ConversationState


@dataclass(frozen=True)
class TurnResult:
    conversation_id: str
    reply: Candidate
    ranking: RankedCandidates
    candidates: tuple[Candidate, ...]
    missed: tuple[str, ...]
    state: ConversationState

    @property
    def fired_rule(self) -> Optional[int]:
        return self.ranking.fired_rule


@dataclass(frozen=True)
class CollectResult:
    conversation_id: str
    candidates: tuple[Candidate, ...]
    missed: tuple[str, ...]
    state: ConversationState


def _worker_loop(
    name: str,
    factory: Callable[[str], Responder],
    inbox: "queue.Queue",
    scorer,
    emit: Callable[[HealthEvent], None],
) -> None:
    instances: dict[str, Responder] = {}
    while True:
        msg = inbox.get()
        kind = msg[0]
        if kind == "stop":
            return
        if kind == "ping":
            msg[1].put((name, msg[2]))
            continue
        if kind == "forget":
            instances.pop(msg[1], None)
            continue
        if kind == "wakeup":
            _, cid, article = msg
            for attempt in (0, 1):
                try:
                    instance = factory(cid)
                    instance.wake_up(article)
                    instances[cid] = instance
                    break
                except Exception as exc:  # noqa: BLE001 - worker must survive
                    emit(HealthEvent("wakeup_error", name, f"{type(exc).__name__}: {exc}"))
            continue
        if kind == "respond":
            _, cid, state, out = msg
            instance = instances.get(cid)
            if instance is None:
                out.put((name, None))
                continue
            try:
                text = instance.respond(state)
            except Exception as exc:  # noqa: BLE001
                emit(HealthEvent("respond_error", name, f"{type(exc).__name__}: {exc}"))
                out.put((name, None))
                continue
            if text is None:
                out.put((name, None))
                continue
            try:
                score = 0.0 if scorer is None else float(scorer.score(state, text))
            except Exception as exc:  # noqa: BLE001
                emit(HealthEvent("scoring_error", name, f"{type(exc).__name__}: {exc}"))
                score = 0.0
            out.put((name, Candidate(model_name=name, text=text, score=score)))


class Engine:
    """Owns conversations, workers, selection, and health supervision.

    Safe to call from multiple request-handling threads: conversation state
    lives behind per-conversation locks, worker bookkeeping behind one engine
    lock, and workers only ever see immutable snapshots.
    """

    def __init__(
        self,
        resources: EnsembleResources,
        scorer=None,
        policy: SelectionPolicy = SelectionPolicy(),
        budget: TurnBudget = TurnBudget(),
        enabled: Optional[Sequence[str]] = None,
        factories: Optional[dict[str, Callable[[str], Responder]]] = None,
        engine_seed: int = 0,
    ):
        self.resources = resources
        self.scorer = scorer
        self.policy = policy
        self.budget = budget
        if factories is None:
            factories = responder_factories(resources, engine_seed=engine_seed, enabled=enabled)
        elif enabled is not None:
            unknown = set(enabled) - set(factories)
            if unknown:
                raise ValueError(f"unknown responders enabled: {sorted(unknown)}")
            factories = {n: f for n, f in factories.items() if n in enabled}
        self._factories = factories
        self.selector = Selector(
            resources.lexicons,
            resources.tagger,
            resources.topic_question_patterns,
        )

        self._lock = threading.RLock()
        self._pongs: queue.Queue = queue.Queue()
        self._events: list[HealthEvent] = []
        self._workers: dict[str, WorkerHandle] = {}
        self._states: dict[str, ConversationState] = {}
        self._articles: dict[str, Article] = {}
        self._turn_locks: dict[str, threading.Lock] = {}
        self._emergency: dict[str, Responder] = {}
        self._stopped = False

        order = [n for n in RESPONDER_NAMES if n in factories]
        order += [n for n in factories if n not in order]
        self._order = tuple(order)
        for name in self._order:
            self._workers[name] = self._spawn(name)

    # ---------------------------------------------------------------- workers

    def _spawn(self, name: str) -> WorkerHandle:
        inbox: queue.Queue = queue.Queue()
        thread = threading.Thread(
            target=_worker_loop,
            args=(name, self._factories[name], inbox, self.scorer, self._emit),
            name=f"worker-{name}",
            daemon=True,
        )
        thread.start()
        return WorkerHandle(name=name, inbox=inbox, thread=thread)

    def _emit(self, event: HealthEvent) -> None:
        with self._lock:
            self._events.append(event)

    def events(self) -> tuple[HealthEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def health(self) -> dict[str, str]:
        with self._lock:
            return {name: h.health for name, h in self._workers.items()}

    def _live_handles(self) -> list[WorkerHandle]:
        with self._lock:
            return [h for h in self._workers.values() if h.health != "dead"]

    def supervise(self) -> list[HealthEvent]:
        """One non-blocking supervision pass, run at every interaction.

        Drains ping replies, revives workers whose ping has been unanswered
        past the budget, and sends the next round of pings. The timeout clock
        therefore runs across turns instead of stalling any single turn.
        """
        new_events: list[HealthEvent] = []
        now = time.monotonic()
        with self._lock:
            while True:
                try:
                    name, nonce = self._pongs.get_nowait()
                except queue.Empty:
                    break
                h = self._workers.get(name)
                if h is None or h.ping_nonce != nonce:
                    continue  # reply from an abandoned thread
                h.pending_ping = None
                h.failures = 0
                if h.health != "dead":
                    h.health = "alive"
            for h in self._workers.values():
                if h.health == "dead":
                    continue
                if h.pending_ping is not None:
                    if now - h.pending_ping > self.budget.ping_timeout:
                        new_events.extend(self._revive(h))
                    continue
                h.ping_nonce += 1
                h.pending_ping = now
                h.inbox.put(("ping", self._pongs, h.ping_nonce))
        return new_events

    def _revive(self, handle: WorkerHandle) -> list[HealthEvent]:
        events: list[HealthEvent] = []
        with self._lock:
            handle.failures += 1
            handle.pending_ping = None
            if handle.failures >= MAX_CONSECUTIVE_FAILURES:
                handle.health = "dead"
                event = HealthEvent(
                    "worker_dead", handle.name, f"{handle.failures} consecutive failures"
                )
                self._events.append(event)
                events.append(event)
                return events
            # abandon the stuck thread, hand the mailbox to a fresh one
            fresh = self._spawn(handle.name)
            handle.inbox = fresh.inbox
            handle.thread = fresh.thread
            handle.health = "suspect"
            wakeups = list(self._articles.items())
            event = HealthEvent("worker_revived", handle.name, f"failure {handle.failures}")
            self._events.append(event)
            events.append(event)
            for cid, article in wakeups:
                handle.inbox.put(("wakeup", cid, article))
        return events

    # ----------------------------------------------------------- conversation

    def start_conversation(
        self,
        article: Article,
        conversation_id: Optional[str] = None,
        commit_opener: bool = True,
    ) -> StartResult:
        """Register the conversation, wake every worker, and open the dialog.

        commit_opener=False leaves the opener out of the history so a
        collect-mode caller can let the human pick among the candidates and
        commit that choice instead.
        """
        if self._stopped:
            raise EngineError("engine is stopped")
        handles = self._live_handles()
        if not handles:
            raise EngineError("all responder workers are dead")
        cid = conversation_id if conversation_id is not None else str(uuid.uuid4())
        with self._lock:
            if cid in self._states:
                raise EngineError(f"conversation {cid!r} already exists")
            self._states[cid] = ConversationState(conversation_id=cid, article=article)
            self._articles[cid] = article
            self._turn_locks[cid] = threading.Lock()
        for h in handles:
            h.inbox.put(("wakeup", cid, article))

        state = self._states[cid]
        openers = [h for h in handles if h.name in OPENER_RESPONDERS]
        collected, missed = self._fan_out(openers, cid, state)
        for name in missed:
            self._emit(HealthEvent("deadline_missed", name, f"conversation {cid}"))
        greeting, opener = self.selector.greeting_and_opener(state, collected, self.policy)
        if opener is None and "fact" not in {c.model_name for c in collected}:
            fallback = self._emergency_candidate(cid, state)
            if fallback is not None:
                collected = collected + [fallback]
                _, opener = self.selector.greeting_and_opener(state, collected, self.policy)

        state = state.extended(Message(Speaker.BOT, greeting, 0))
        if opener is not None and commit_opener:
            state = state.extended(Message(Speaker.BOT, opener.text, 1))
        with self._lock:
            self._states[cid] = state
        self.supervise()
        return StartResult(
            conversation_id=cid,
            greeting=greeting,
            opener=opener,
            candidates=tuple(collected),
            state=state,
        )

    def _fan_out(
        self, handles: Sequence[WorkerHandle], cid: str, state: ConversationState
    ) -> tuple[list[Candidate], list[str]]:
        out: queue.Queue = queue.Queue()
        for h in handles:
            h.inbox.put(("respond", cid, state, out))
        arrived: dict[str, Optional[Candidate]] = {}
        deadline = time.monotonic() + self.budget.response_deadline
        while len(arrived) < len(handles):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            try:
                name, payload = out.get(timeout=remaining)
            except queue.Empty:
                break
            arrived[name] = payload
        ordered = [
            arrived[h.name]
            for h in sorted(handles, key=lambda h: self._order.index(h.name))
            if arrived.get(h.name) is not None
        ]
        missed = [h.name for h in handles if h.name not in arrived]
        return ordered, missed

    def _emergency_candidate(
        self, cid: str, state: ConversationState
    ) -> Optional[Candidate]:
        """Resident fact responder, the last resort when workers produce nothing.

        Runs on a disposable thread bounded by the response deadline so a
        misbehaving fallback can never wedge the engine itself.
        """
        result: dict[str, Optional[str]] = {}

        def run() -> None:
            try:
                with self._lock:
                    responder = self._emergency.get(cid)
                    article = self._articles.get(cid)
                if article is None:
                    return
                if responder is None:
                    factory = self._factories.get("fact")
                    if factory is None:
                        factory = responder_factories(
                            self.resources, enabled=["fact"]
                        )["fact"]
                    responder = factory(cid)
                    responder.wake_up(article)
                    with self._lock:
                        self._emergency[cid] = responder
                result["text"] = responder.respond(state)
            except Exception as exc:  # noqa: BLE001
                self._emit(
                    HealthEvent("incident", "fact", f"emergency responder failed: {exc}")
                )

        thread = threading.Thread(target=run, name="emergency-fact", daemon=True)
        thread.start()
        thread.join(self.budget.response_deadline)
        if thread.is_alive():
            self._emit(HealthEvent("incident", "fact", "emergency responder timed out"))
            return None
        text = result.get("text")
        if text is None:
            return None
        try:
            score = 0.0 if self.scorer is None else float(self.scorer.score(state, text))
        except Exception:  # noqa: BLE001
            score = 0.0
        return Candidate(model_name="fact", text=text, score=score)

    def collect_candidates(self, conversation_id: str, user_message: str) -> CollectResult:
        """Append the user message, fan out, and return the scored candidates.

        Does not pick a reply; collect-mode sessions let the human do that
        through commit_reply.
        """
        with self._lock:
            if conversation_id not in self._states:
                raise EngineError(f"unknown conversation {conversation_id!r}")
            turn_lock = self._turn_locks[conversation_id]
        with turn_lock:
            state = self._states[conversation_id]
            state = state.extended(
                Message(Speaker.HUMAN, user_message, len(state.history))
            )
            counter = update_bored_counter(
                state, user_message, self.resources.lexicons, self.policy.thresholds
            )
            state = state.with_bored(counter)
            with self._lock:
                self._states[conversation_id] = state

            handles = self._live_handles()
            if not handles:
                raise EngineError("all responder workers are dead")
            collected, missed = self._fan_out(handles, conversation_id, state)
            for name in missed:
                self._emit(
                    HealthEvent("deadline_missed", name, f"conversation {conversation_id}")
                )
            self.supervise()
            return CollectResult(
                conversation_id=conversation_id,
                candidates=tuple(collected),
                missed=tuple(missed),
                state=state,
            )

    def commit_reply(self, conversation_id: str, reply: Candidate) -> ConversationState:
        """Append the chosen bot reply to the conversation."""
        with self._lock:
            state = self._states.get(conversation_id)
            if state is None:
                raise EngineError(f"unknown conversation {conversation_id!r}")
            state = state.extended(Message(Speaker.BOT, reply.text, len(state.history)))
            self._states[conversation_id] = state
            return state

    def reset_bored_counter(self, conversation_id: str) -> None:
        with self._lock:
            state = self._states[conversation_id]
            self._states[conversation_id] = state.with_bored(0)

    def handle_turn(self, conversation_id: str, user_message: str) -> TurnResult:
        """Full live-mode turn: collect, select, commit, supervise."""
        collected = self.collect_candidates(conversation_id, user_message)
        state = collected.state
        candidates = list(collected.candidates)

        if not candidates:
            fallback = self._emergency_candidate(conversation_id, state)
            if fallback is not None:
                candidates = [fallback]
            else:
                self._emit(
                    HealthEvent(
                        "incident",
                        "engine",
                        f"no candidates for conversation {conversation_id}",
                    )
                )
                reply = Candidate(model_name="system", text=APOLOGY, score=0.0)
                new_state = self.commit_reply(conversation_id, reply)
                return TurnResult(
                    conversation_id=conversation_id,
                    reply=reply,
                    ranking=RankedCandidates([]),
                    candidates=(),
                    missed=collected.missed,
                    state=new_state,
                )

        ranking = self.selector.select(state, candidates, self.policy)
        if ranking.fired_rule == 4:
            self.reset_bored_counter(conversation_id)
        reply = ranking[0]
        new_state = self.commit_reply(conversation_id, reply)
        return TurnResult(
            conversation_id=conversation_id,
            reply=reply,
            ranking=ranking,
            candidates=tuple(candidates),
            missed=collected.missed,
            state=new_state,
        )

    def conversation_state(self, conversation_id: str) -> ConversationState:
        with self._lock:
            state = self._states.get(conversation_id)
        if state is None:
            raise EngineError(f"unknown conversation {conversation_id!r}")
        return state

    def end_conversation(self, conversation_id: str) -> None:
        with self._lock:
            self._states.pop(conversation_id, None)
            self._articles.pop(conversation_id, None)
            self._turn_locks.pop(conversation_id, None)
            self._emergency.pop(conversation_id, None)
            handles = list(self._workers.values())
        for h in handles:
            if h.health != "dead":
                h.inbox.put(("forget", conversation_id))

    def stop(self) -> None:
        self._stopped = True
        with self._lock:
            handles = list(self._workers.values())
        for h in handles:
            h.inbox.put(("stop",))
