import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import LISTING1, dfsms
from fsmrepair.fsm import Transition
from fsmrepair.nl import (
    DEFAULT_PATTERNS,
    all_sentences,
    describe_fsm,
    describe_transition,
    matches_patterns,
    parse_description,
    parse_transition,
)
from fsmrepair.random_fsm import GenSpec, generate_oracle
from fsmrepair.serialize import ParseError


def test_listing1_parses_to_fig1(fig1):
    assert parse_description(LISTING1) == fig1


def test_listing1_first_sentence_is_reachable():
    first = "when it is in state s1 , 0 is returned and the application moves to state s2 on occurence of b"
    assert first in set(all_sentences(Transition("S1", "b", "0", "S2")))


def test_pattern_variant_counts():
    p = DEFAULT_PATTERNS
    assert (len(p.states), len(p.orderings), len(p.systems)) == (2, 2, 3)
    assert (len(p.froms), len(p.moves), len(p.inputs), len(p.outputs)) == (6, 3, 5, 5)


def test_sentence_count_and_layout(fig1):
    text = describe_fsm(fig1, 3)
    lines = text.splitlines()
    assert len(lines) == len(fig1.transitions) + 1
    assert all(line.startswith(" ") and line.endswith(".") for line in lines)
    assert lines[-1] == " state s1 is the initial state."


def test_normalized_layout(fig1):
    text = describe_fsm(fig1, 3, normalize=True)
    assert "\n" not in text
    assert parse_description(text) == fig1


def test_truncated_patterns(fig1):
    p = DEFAULT_PATTERNS.truncated()
    text = describe_fsm(fig1, 0, p)
    assert len(set(all_sentences(fig1.transitions[0], p))) == 1
    assert parse_description(text, p) == fig1


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_description("s1 goes to s2 whenever it likes. state s1 is the initial state.")
    with pytest.raises(ParseError):
        parse_description("from s1 it produces 0 and it moves to s2 if the input is a.")


@given(dfsms(max_states=6), st.integers(0, 10**6))
def test_round_trip_and_grammar(m, seed):
    text = describe_fsm(m, seed)
    assert parse_description(text, inputs=m.inputs, outputs=m.outputs) == m
    for line in text.splitlines()[:-1]:
        assert matches_patterns(line.strip().rstrip("."))


@given(st.integers(0, 10**6))
def test_transition_round_trip(seed):
    rng = random.Random(seed)
    t = Transition(f"S{rng.randint(0, 40)}", rng.choice("abcxyz"), rng.choice("0123"), f"S{rng.randint(0, 40)}")
    assert parse_transition(describe_transition(t, rng) + ".") == t


def test_round_trip_sizes():
    for size in (5, 10, 25):
        for seed in range(5):
            m = generate_oracle(GenSpec(size, 5, 2, seed))
            assert parse_description(describe_fsm(m, seed), inputs=m.inputs, outputs=m.outputs) == m
