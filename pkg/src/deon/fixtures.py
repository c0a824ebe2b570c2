"""Reference specs shipped with the toolkit."""

from .speclang import Deontology, compile_text

SPECS = {
    "SPEC_NG": "percepts: ok err\nactions: noop move grab\ngood: ([noop move] _p)*\n",
    "SPEC_RS": "percepts: green red\nactions: go stop\ngood: (go | stop | green | (red stop))* red?\n",
    "SPEC_GUESS": "percepts: pa pb\nactions: a b\ngood: ((a pa) | (b pb))*\n",
    "SPEC_GAMBLE": "percepts: win lose\nactions: bet pass\ngood: ((pass _p) | (bet win))*\n",
    "SPEC_DEBT": "percepts: tick\nactions: borrow repay noop\ngood: eps | (% [repay noop] tick)\n",
    "SPEC_HOM": "percepts: ok err\nactions: G B\ngood: (G _p)*\n",
}


def load_fixture(name: str) -> Deontology:
    return compile_text(SPECS[name], name=name)
