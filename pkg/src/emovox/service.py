"""Local streaming service: broadcasts prediction events to dashboard clients.

Transport is deliberately plain: a long-lived HTTP response carrying one
JSON event per line (NDJSON). Every subscriber receives the session from
event zero - subscribe atomically snapshots the history and tails the live
feed - so two clients always see byte-identical streams. A slow client
only ever hurts itself: its bounded queue drops oldest events and the gap
is reported with an explicit marker line.

Endpoints:
    GET /events   -> live NDJSON stream (history prefix + live tail)
    GET /history  -> JSON array of all events so far
    GET /         -> static dashboard files, when a directory is configured
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import dsp, nn
from .audio import CaptureSource
from .realtime import EVENT_SCHEMA_VERSION, run_realtime

log = logging.getLogger(__name__)

SUBSCRIBER_QUEUE_SIZE = 512


def gap_marker(dropped: int) -> str:
    return json.dumps(
        {"v": EVENT_SCHEMA_VERSION, "gap": True, "dropped": dropped},
        separators=(",", ":"),
    )


class _Subscription:
    def __init__(self, backlog, maxlen: int):
        self._cond = threading.Condition()
        self._queue = deque(backlog, maxlen=maxlen)
        self._dropped = 0
        self._closed = False

    def push(self, line: str) -> None:
        with self._cond:
            if len(self._queue) == self._queue.maxlen:
                self._queue.popleft()
                self._dropped += 1
            self._queue.append(line)
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify()

    def __iter__(self):
        while True:
            with self._cond:
                while not self._queue and not self._closed:
                    self._cond.wait(timeout=0.5)
                if self._queue:
                    if self._dropped:
                        dropped, self._dropped = self._dropped, 0
                        yield gap_marker(dropped)
                    yield self._queue.popleft()
                    continue
                if self._closed:
                    return


class EventBroadcaster:
    """Session history plus fan-out to any number of bounded subscribers."""

    def __init__(self, queue_size: int = SUBSCRIBER_QUEUE_SIZE):
        self._lock = threading.Lock()
        self._history: list = []
        self._subs: list = []
        self._queue_size = queue_size
        self._closed = False

    def publish(self, line: str) -> None:
        with self._lock:
            self._history.append(line)
            subs = list(self._subs)
        for sub in subs:
            sub.push(line)

    def subscribe(self) -> _Subscription:
        # History snapshot and registration happen under one lock, so the
        # subscriber misses nothing and duplicates nothing.
        with self._lock:
            sub = _Subscription(self._history, maxlen=self._queue_size)
            if self._closed:
                sub.close()
            else:
                self._subs.append(sub)
            return sub

    def unsubscribe(self, sub: _Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)
        sub.close()

    def history(self) -> list:
        with self._lock:
            return list(self._history)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            subs = list(self._subs)
            self._subs.clear()
        for sub in subs:
            sub.close()


def _make_handler(broadcaster: EventBroadcaster, static_dir):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.0"  # streamed bodies end when we close

        def log_message(self, fmt, *args):
            log.debug("http: " + fmt, *args)

        def _cors(self):
            self.send_header("Access-Control-Allow-Origin", "*")

        def do_GET(self):  # noqa: N802  http.server API
            path = self.path.split("?", 1)[0]
            if path == "/events":
                self._stream_events()
            elif path == "/history":
                self._send_history()
            elif static_dir is not None:
                self._send_static(path)
            else:
                self.send_error(404)

        def _stream_events(self):
            sub = broadcaster.subscribe()
            try:
                self.send_response(200)
                self._cors()
                self.send_header("Content-Type", "application/x-ndjson")
                self.send_header("Cache-Control", "no-store")
                self.end_headers()
                for line in sub:
                    self.wfile.write(line.encode("utf-8") + b"\n")
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass  # subscriber went away; the analysis loop never notices
            finally:
                broadcaster.unsubscribe(sub)

        def _send_history(self):
            lines = broadcaster.history()
            body = ("[" + ",".join(lines) + "]").encode("utf-8")
            self.send_response(200)
            self._cors()
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_static(self, path):
            rel = path.lstrip("/") or "index.html"
            full = os.path.realpath(os.path.join(static_dir, rel))
            root = os.path.realpath(static_dir)
            if not full.startswith(root + os.sep) and full != root:
                self.send_error(404)
                return
            if not os.path.isfile(full):
                self.send_error(404)
                return
            ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
            with open(full, "rb") as fh:
                body = fh.read()
            self.send_response(200)
            self._cors()
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


class PredictionService:
    """Analysis worker + HTTP fan-out around one capture source."""

    def __init__(
        self,
        model: nn.Model,
        source: CaptureSource,
        window_s: float,
        host: str = "127.0.0.1",
        port: int = 0,
        cfg: dsp.FeatureConfig = dsp.DEFAULT_FEATURES,
        include_mel: bool = True,
        static_dir=None,
    ):
        self.broadcaster = EventBroadcaster()
        self._model = model
        self._source = source
        self._window_s = window_s
        self._cfg = cfg
        self._include_mel = include_mel
        self._server = ThreadingHTTPServer(
            (host, port), _make_handler(self.broadcaster, static_dir)
        )
        self._server.daemon_threads = True
        self._threads: list = []

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def _analysis_loop(self):
        try:
            for event in run_realtime(
                self._source, self._window_s, self._model,
                cfg=self._cfg, include_mel=self._include_mel,
            ):
                self.broadcaster.publish(event.to_json_line())
        except Exception:
            log.exception("analysis loop died")
        finally:
            self.broadcaster.close()  # session over; let streams finish

    def start(self) -> "PredictionService":
        http_thread = threading.Thread(
            target=self._server.serve_forever, name="emovox-http", daemon=True
        )
        analysis_thread = threading.Thread(
            target=self._analysis_loop, name="emovox-analysis", daemon=True
        )
        self._threads = [http_thread, analysis_thread]
        http_thread.start()
        analysis_thread.start()
        return self

    def wait_for_session_end(self, timeout=None) -> None:
        self._threads[1].join(timeout)

    def stop(self) -> None:
        self.broadcaster.close()
        self._server.shutdown()
        self._server.server_close()


def serve(
    port: int,
    model_path,
    source: CaptureSource,
    window_s: float = 3.0,
    host: str = "127.0.0.1",
    static_dir=None,
    include_mel: bool = True,
) -> PredictionService:
    """Load a model and start the biofeedback service (caller stops it)."""
    model = nn.load_model(model_path)
    service = PredictionService(
        model, source, window_s, host=host, port=port,
        include_mel=include_mel, static_dir=static_dir,
    )
    return service.start()
