"""Wire protocol for out-of-process generators.

Newline-delimited JSON over TCP. Requests:

    {"kind": "wakeup", "conversation_id": ..., "article": {"article_id", "text"}}
    {"kind": "respond", "conversation_id": ..., "context": [{"speaker", "text", "turn_index"}, ...]}

Each request gets exactly one reply line: {"text": ..., "model": ...} with
text null when the generator has nothing, or {"error": ...}. The client
treats timeouts, connection failures, and error replies as an absent
candidate and reports them through an optional health callback.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from typing import Callable, Optional

from chorus.core import Article, ConversationState, Message, Speaker
from chorus.responders.base import Responder


def _encode_request(kind: str, conversation_id: str, **payload) -> bytes:
    body = {"kind": kind, "conversation_id": conversation_id, **payload}
    return (json.dumps(body) + "\n").encode("utf-8")


class BridgeResponder(Responder):
    """Client side: forwards wake-up and respond calls to a remote generator."""

    def __init__(
        self,
        name: str,
        address: tuple[str, int],
        conversation_id: str,
        timeout: float = 1.0,
        on_health_event: Optional[Callable[[str, str], None]] = None,
    ):
        self.name = name
        self._address = address
        self._conversation_id = conversation_id
        self._timeout = timeout
        self._on_health_event = on_health_event
        self._sock: Optional[socket.socket] = None
        self._reader = None
        self._article: Optional[Article] = None

    def _report(self, event: str) -> None:
        if self._on_health_event is not None:
            self._on_health_event(self.name, event)

    def _connect(self) -> None:
        sock = socket.create_connection(self._address, timeout=self._timeout)
        sock.settimeout(self._timeout)
        self._sock = sock
        self._reader = sock.makefile("r", encoding="utf-8")

    def _close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        self._sock = None
        self._reader = None

    def _roundtrip(self, request: bytes) -> Optional[dict]:
        try:
            if self._sock is None:
                self._connect()
            assert self._sock is not None and self._reader is not None
            self._sock.sendall(request)
            line = self._reader.readline()
            if not line:
                raise ConnectionError("generator closed the connection")
            return json.loads(line)
        except (OSError, ConnectionError, json.JSONDecodeError, socket.timeout) as exc:
            self._close()
            self._report(f"transport failure: {type(exc).__name__}")
            return None

    def wake_up(self, article: Article) -> None:
        self._article = article
        request = _encode_request(
            "wakeup",
            self._conversation_id,
            article={"article_id": article.article_id, "text": article.text},
        )
        reply = self._roundtrip(request)
        if reply is not None and "error" in reply:
            self._report(f"remote error: {reply['error']}")

    def respond(self, state: ConversationState) -> Optional[str]:
        context = [
            {"speaker": m.speaker.value, "text": m.text, "turn_index": m.turn_index}
            for m in state.history
        ]
        reply = self._roundtrip(
            _encode_request("respond", self._conversation_id, context=context)
        )
        if reply is None:
            return None
        if "error" in reply:
            self._report(f"remote error: {reply['error']}")
            return None
        return reply.get("text")


class _BridgeHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        for raw in self.rfile:
            try:
                reply = self._dispatch(json.loads(raw.decode("utf-8")))
            except Exception as exc:
                reply = {"error": f"{type(exc).__name__}: {exc}"}
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()

    def _dispatch(self, request: dict) -> dict:
        server: "ResponderServer" = self.server  # type: ignore[assignment]
        kind = request.get("kind")
        cid = request.get("conversation_id")
        if not isinstance(cid, str):
            return {"error": "missing conversation_id"}
        if kind == "wakeup":
            art = request["article"]
            article = Article(article_id=art["article_id"], text=art["text"])
            responder = server.factory(cid)
            responder.wake_up(article)
            with server.lock:
                server.instances[cid] = (responder, article)
            return {"ok": True, "model": responder.name}
        if kind == "respond":
            with server.lock:
                entry = server.instances.get(cid)
            if entry is None:
                return {"error": f"no wakeup seen for conversation {cid!r}"}
            responder, article = entry
            history = tuple(
                Message(Speaker(m["speaker"]), m["text"], m["turn_index"])
                for m in request.get("context", [])
            )
            state = ConversationState(
                conversation_id=cid, article=article, history=history
            )
            return {"text": responder.respond(state), "model": responder.name}
        return {"error": f"unknown request kind {kind!r}"}


class ResponderServer(socketserver.ThreadingTCPServer):
    """Serves one responder family over the wire protocol.

    factory(conversation_id) builds a fresh instance per conversation.
    """

    allow_reuse_address = True
    daemon_threads = True

    def handle_error(self, request, client_address) -> None:
        # clients drop the connection on deadline; that is not server news
        pass

    def __init__(self, factory: Callable[[str], Responder], host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _BridgeHandler)
        self.factory = factory
        self.instances: dict[str, tuple[Responder, Article]] = {}
        self.lock = threading.Lock()

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[0], self.server_address[1]


def serve_responder(
    factory: Callable[[str], Responder], host: str = "127.0.0.1", port: int = 0
) -> ResponderServer:
    """Starts a background server; caller owns shutdown()."""
    server = ResponderServer(factory, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
