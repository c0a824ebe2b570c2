import pathlib
import socket
import subprocess
import sys
import threading

import pytest

from deon.daemon import GovernorServer, run_lines
from deon.fixtures import SPECS
from deon.governor import open_session

GOLDEN = pathlib.Path(__file__).parent / "golden"
SPEC_DIR = pathlib.Path(__file__).parent.parent / "specs"


def in_process(d, messages):
    """Reference verdict stream straight from the governor."""
    s = open_session(d)
    out = []
    for msg in messages:
        cmd, arg = msg.split()
        out.append(s.propose(arg).wire() if cmd == "propose" else f"ack {s.observe(arg)}")
    return out


def test_propose_before_load():
    out = run_lines(["propose noop"])
    assert out[0].startswith("error") and "no session" in out[0]
    assert run_lines(["propose noop", "load inline"])[1] == "error frozen session frozen"


def test_load_by_hash(ng):
    out = run_lines([f"load {ng.spec_hash}", "propose grab", "percept ok"], specs={ng.spec_hash: ng})
    assert out == [f"loaded {ng.spec_hash}", "verdict substituted grab noop", "ack 1"]


def test_load_errors(ng):
    assert run_lines(["load nope"], specs={ng.spec_hash: ng})[0].startswith("error unknown-spec")
    out = run_lines(["load inline", "good: (noop", "end"])
    assert out[0].startswith("error spec-error")
    out = run_lines(["load inline"] + SPECS["SPEC_NG"].splitlines()[:2] + ["good: (noop ok)", "end"])
    assert out[0].startswith("error not-governable")


def test_unknown_symbol_freezes(ng):
    out = run_lines([f"load {ng.spec_hash}", "propose fly", "propose noop"], specs={ng.spec_hash: ng})
    assert out[1].startswith("error unknown-symbol")
    assert out[2] == "error frozen session frozen"


def test_golden_transcript_stdio(ng):
    transcript = (GOLDEN / "ng_session.in").read_text()
    expected = (GOLDEN / "ng_session.out").read_text()
    proc = subprocess.run(
        [sys.executable, "-m", "deon", "govern", str(SPEC_DIR / "SPEC_NG.deon"), "--stdio"],
        input=transcript, capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == expected
    messages = [ln for ln in transcript.splitlines()[5:] if ln.startswith(("propose", "percept"))]
    assert len(messages) >= 20
    reference = in_process(ng, messages[:20])
    assert proc.stdout.splitlines()[1:21] == reference


@pytest.fixture
def tcp_server(rs):
    server = GovernorServer(("127.0.0.1", 0), rs)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


class Client:
    def __init__(self, address):
        self.sock = socket.create_connection(address, timeout=10)
        self.file = self.sock.makefile("rw", encoding="utf-8", newline="\n")

    def send(self, line):
        self.file.write(line + "\n")
        self.file.flush()
        return self.file.readline().rstrip("\n")

    def close(self):
        self.file.close()
        self.sock.close()


def test_interleaved_sessions_are_independent(tcp_server, rs):
    a, b = Client(tcp_server.server_address), Client(tcp_server.server_address)
    try:
        assert a.send("load " + rs.spec_hash).startswith("loaded")
        assert b.send("load " + rs.spec_hash).startswith("loaded")
        script_a = ["propose go", "percept red", "propose go", "percept green", "propose go", "percept red"]
        script_b = ["propose go", "percept green", "propose go", "percept red", "propose stop", "percept green"]
        got_a, got_b = [], []
        for ma, mb in zip(script_a, script_b):
            got_a.append(a.send(ma))
            got_b.append(b.send(mb))
        assert got_a == in_process(rs, script_a)
        assert got_b == in_process(rs, script_b)
        assert got_a[2] == "verdict substituted go stop"
        assert got_b[2] == "verdict approved go"
    finally:
        a.close()
        b.close()
