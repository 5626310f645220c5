import itertools
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fsmrepair.fsm import Fsm, Transition

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIG1_ROWS = [
    ("S1", "a", "0", "S1"),
    ("S1", "b", "0", "S2"),
    ("S2", "b", "0", "S2"),
    ("S2", "a", "0", "S3"),
    ("S3", "a", "0", "S3"),
    ("S3", "b", "0", "S4"),
    ("S4", "b", "0", "S4"),
    ("S4", "a", "1", "S1"),
]

LISTING1 = (
    "when it is in state s1 , 0 is returned and the application moves to state s2 on occurence of b. "
    "in state s1 it returns 0 and it moves to state s1 if the input a occurs., 0 is returned and the "
    "application reaches state s3 on occurence of input a in  state s2., 0 is returned and it reaches "
    "s2 if  b occurs in  state s2. from state s3 , 0 is produced and the system reaches s4 on occurence "
    "of input b.\n the output 0 is produced and the system moves to s3 if the input is a when the system "
    "is in state s3. the application produces 1 and it reaches s1 on occurence of input a from state s4. "
    "when the system is in state s4 , 0 is returned and state s4 is reached on occurence of b. state s1 "
    "is the initial state."
)


@pytest.fixture
def fig1() -> Fsm:
    return Fsm.from_transitions(FIG1_ROWS, initial="S1")


def brute_equivalent(m1: Fsm, m2: Fsm, depth: int | None = None) -> bool:
    """Compare outputs on every input word up to ``depth`` (default |S1|*|S2|)."""
    depth = len(m1.states) * len(m2.states) if depth is None else depth
    frontier = [(m1.initial, m2.initial)]
    seen = set(frontier)
    for _ in range(depth):
        nxt = []
        for q1, q2 in frontier:
            for x in m1.inputs:
                (t1,) = m1.cell(q1, x)
                (t2,) = m2.cell(q2, x)
                if t1.out != t2.out:
                    return False
                pair = (t1.tgt, t2.tgt)
                if pair not in seen:
                    seen.add(pair)
                    nxt.append(pair)
        frontier = nxt
    return True


def brute_outputs(m: Fsm, word) -> tuple:
    q, out = m.initial, []
    for x in word:
        (t,) = m.cell(q, x)
        out.append(t.out)
        q = t.tgt
    return tuple(out)


def all_words(inputs, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(inputs, repeat=n)


@st.composite
def dfsms(draw, min_states=1, max_states=5, inputs=("a", "b"), outputs=("0", "1")):
    """Deterministic complete machines over fixed alphabets."""
    n = draw(st.integers(min_states, max_states))
    states = [f"S{i}" for i in range(1, n + 1)]
    ts = [
        Transition(s, x, draw(st.sampled_from(outputs)), draw(st.sampled_from(states)))
        for s in states
        for x in inputs
    ]
    return Fsm(tuple(states), "S1", tuple(inputs), tuple(outputs), tuple(ts))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
