"""TCP ingest that emulates the insoles' wireless link.

Clients send CSV rows (the log format, header optional), one per line.  A
``#flush`` line, or the end of the connection, analyzes everything buffered
so far and writes a report; the server answers each flush with one line,
``OK <report file>`` or ``ERROR <message>``.  Malformed lines are diagnosed and
skipped without closing the connection.  Each connection is its own session.
"""

from __future__ import annotations

import itertools
import socketserver
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .config import Config
from .errors import BindFailure, GaitError
from .pipeline import analyze_session
from .report import render_report
from .signal_model import CSV_HEADER, Diagnostic, parse_row, session_from_rows

FLUSH_MARKER = "#flush"
MAX_BUFFERED_FRAMES = 1_000_000


@dataclass
class StreamSession:
    """Per-connection buffer of parsed rows plus the diagnostics collected so far."""

    max_frames: int = MAX_BUFFERED_FRAMES
    rows: list = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    dropped: int = 0
    lineno: int = 0

    def feed(self, line: str) -> bool:
        """Consume one line; returns True when it was the flush marker."""
        self.lineno += 1
        line = line.rstrip("\r\n")
        if line == FLUSH_MARKER:
            return True
        if not line or line == CSV_HEADER:
            return False
        try:
            foot, vals = parse_row(line, self.lineno)
        except GaitError as exc:
            self.diagnostics.append(Diagnostic("ProtocolError", str(exc), None, self.lineno))
            return False
        if len(self.rows) >= self.max_frames:
            if self.dropped == 0:
                self.diagnostics.append(Diagnostic("BufferFull", f"buffer holds {self.max_frames} frames; dropping", None, self.lineno))
            self.dropped += 1
            return False
        self.rows.append((foot, vals, self.lineno))
        return False

    def take(self):
        rows, diags, dropped = self.rows, self.diagnostics, self.dropped
        self.rows, self.diagnostics, self.dropped = [], [], 0
        if dropped:
            diags.append(Diagnostic("BufferFull", f"{dropped} frame(s) dropped", None, None))
        return rows, diags


def analyze_rows(rows, cfg: Config, extra: list[Diagnostic] | None = None) -> str:
    session = session_from_rows(rows)
    analysis = analyze_session(session, cfg)
    if extra:
        analysis.diagnostics[:0] = extra
    return render_report(analysis, session)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        srv: GaitStreamServer = self.server  # type: ignore[assignment]
        conn = srv.next_connection()
        state = StreamSession(srv.max_frames)
        batch = itertools.count(1)
        for raw in self.rfile:
            if state.feed(raw.decode("utf-8", errors="replace")):
                self.wfile.write((srv.process(conn, next(batch), state) + "\n").encode())
                self.wfile.flush()
        if state.rows or state.diagnostics:
            reply = srv.process(conn, next(batch), state)
            try:
                self.wfile.write((reply + "\n").encode())
            except OSError:
                pass


class GaitStreamServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], output_dir, cfg: Config | None = None,
                 max_frames: int = MAX_BUFFERED_FRAMES):
        self.output_dir = Path(output_dir)
        self.cfg = cfg or Config()
        self.max_frames = max_frames
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        try:
            super().__init__(address, _Handler)
        except OSError as exc:
            raise BindFailure(f"cannot listen on {address[0]}:{address[1]}: {exc}") from None

    def next_connection(self) -> int:
        with self._lock:
            return next(self._ids)

    def process(self, conn: int, batch: int, state: StreamSession) -> str:
        rows, diags = state.take()
        path = self.output_dir / f"session-{conn:04d}-{batch:03d}.yaml"
        try:
            text = analyze_rows(rows, self.cfg, diags)
        except GaitError as exc:
            return f"ERROR {exc}"
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return f"OK {path.name}"


def parse_address(spec: str) -> tuple[str, int]:
    host, sep, port = spec.rpartition(":")
    if not sep or not port.isdigit():
        raise BindFailure(f"listen address must be HOST:PORT, got {spec!r}")
    return host or "0.0.0.0", int(port)
