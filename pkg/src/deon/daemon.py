"""Newline-delimited wire protocol for the governor.

Client messages::

    load <spec-hash>             open a session on a preloaded spec
    load inline                  followed by spec lines, then a lone ``end``
    propose <action>             -> verdict approved|substituted|refused ...
    percept <symbol>             -> ack <completed cycles>

Any protocol violation is answered with ``error <code> <message>`` and
freezes the connection's session. Each connection gets its own session.
"""

from __future__ import annotations

import socketserver
import sys
import threading
from typing import IO, Iterable, Optional

from .errors import DeonError, ProtocolOrder, UnknownSymbol
from .governor import GovernorConfig, GovernorSession, open_session
from .speclang import Deontology, compile_text


class GovernorProtocol:
    """Per-connection protocol state machine (no I/O)."""

    def __init__(self, specs: dict[str, Deontology] | None = None,
                 cfg: GovernorConfig | None = None, default: Optional[str] = None):
        self.specs = dict(specs or {})
        self.default = default
        self.cfg = cfg or GovernorConfig()
        self.session: Optional[GovernorSession] = None
        self.frozen = False
        self._inline: Optional[list] = None

    def _fail(self, code: str, message: str) -> list[str]:
        self.frozen = True
        return [f"error {code} {message}"]

    def handle(self, line: str) -> list[str]:
        line = line.rstrip("\r\n")
        if self._inline is not None:
            if line.strip() == "end":
                text = "\n".join(self._inline)
                self._inline = None
                return self._open_inline(text)
            self._inline.append(line)
            return []
        if not line.strip():
            return []
        if self.frozen:
            return ["error frozen session frozen"]
        cmd, _, arg = line.strip().partition(" ")
        arg = arg.strip()
        if cmd == "load":
            return self._load(arg)
        if cmd in ("propose", "percept"):
            if self.session is None:
                return self._fail("no-session", "no session")
            if not arg or " " in arg:
                return self._fail("bad-argument", f"{cmd} takes exactly one symbol")
            try:
                if cmd == "propose":
                    return [self.session.propose(arg).wire()]
                return [f"ack {self.session.observe(arg)}"]
            except ProtocolOrder as exc:
                return self._fail("protocol-order", str(exc))
            except UnknownSymbol as exc:
                return self._fail("unknown-symbol", str(exc))
        return self._fail("bad-command", f"unknown command {cmd!r}")

    def _load(self, arg: str) -> list[str]:
        if self.session is not None:
            return self._fail("protocol-order", "session already loaded")
        if arg == "inline":
            self._inline = []
            return []
        key = arg or self.default
        d = self.specs.get(key)
        if d is None:
            matches = [v for k, v in self.specs.items() if v.spec_hash == key or v.name == key]
            d = matches[0] if matches else None
        if d is None:
            return self._fail("unknown-spec", f"no spec {arg!r}")
        return self._open(d)

    def _open_inline(self, text: str) -> list[str]:
        try:
            d = compile_text(text, name="inline")
        except DeonError as exc:
            return self._fail("spec-error", str(exc).replace("\n", " "))
        return self._open(d)

    def _open(self, d: Deontology) -> list[str]:
        try:
            self.session = open_session(d, self.cfg)
        except DeonError as exc:
            return self._fail("not-governable", f"{type(exc).__name__}: {exc}")
        return [f"loaded {d.spec_hash}"]


def run_lines(lines: Iterable[str], specs=None, cfg=None, default=None) -> list[str]:
    """Feed a transcript through one connection; returns all server lines."""
    proto = GovernorProtocol(specs, cfg, default)
    out = []
    for line in lines:
        out.extend(proto.handle(line))
    return out


def serve_stdio(d: Deontology, cfg: GovernorConfig | None = None,
                stdin: IO | None = None, stdout: IO | None = None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    proto = GovernorProtocol({d.spec_hash: d}, cfg, default=d.spec_hash)
    for line in stdin:
        for reply in proto.handle(line):
            stdout.write(reply + "\n")
        stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server
        proto = GovernorProtocol(server.specs, server.cfg, server.default)
        for raw in self.rfile:
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                self.wfile.write(b"error bad-encoding expected UTF-8\n")
                return
            for reply in proto.handle(line):
                self.wfile.write((reply + "\n").encode("utf-8"))
            self.wfile.flush()


class GovernorServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, d: Deontology, cfg: GovernorConfig | None = None):
        self.specs = {d.spec_hash: d}
        self.default = d.spec_hash
        self.cfg = cfg or GovernorConfig()
        super().__init__(address, _Handler)


def govern_daemon(d: Deontology, transport: str = "stdio", cfg: GovernorConfig | None = None,
                  ready: threading.Event | None = None):
    """Serve sessions for ``d`` over ``"stdio"`` or a ``"host:port"`` address.

    The deontology must admit a strict session; this is checked up front.
    """
    open_session(d, cfg or GovernorConfig())
    if transport == "stdio":
        serve_stdio(d, cfg)
        return None
    host, _, port = transport.rpartition(":")
    server = GovernorServer((host or "127.0.0.1", int(port)), d, cfg)
    if ready is not None:
        ready.set()
    with server:
        server.serve_forever()
