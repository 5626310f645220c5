"""English descriptions of machines built from fixed sentence patterns.

Each transition becomes one sentence made of a source phrase, an output
phrase, a move phrase and an input phrase, assembled in one of two orders.
Spacing quirks in the patterns (``"in  {src}"``, ``", {y} is returned"``)
are intentional and kept as is.
"""

from __future__ import annotations

import functools
import itertools
import random
import re
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .fsm import DomainError, Fsm, Transition
from .serialize import ParseError


@dataclass(frozen=True)
class PatternSet:
    states: tuple[str, ...] = ("state {label}", "{label}")
    orderings: tuple[str, ...] = (
        "{frm} {out} and {move} {inp}",
        "{out} and {move} {inp} {frm}",
    )
    systems: tuple[str, ...] = ("it", "the system", "the application")
    froms: tuple[str, ...] = (
        "from {src}",
        "from state {src}",
        "in state {src}",
        "in  {src}",
        "when the system is in {src}",
        "when it is in {src}",
    )
    moves: tuple[str, ...] = (
        "{system} moves to {tgt}",
        "{system} reaches {tgt}",
        "{tgt} is reached",
    )
    inputs: tuple[str, ...] = (
        "if the input is {x}",
        "if the input {x} occurs",
        "if  {x} occurs",
        "on occurence of input {x}",
        "on occurence of {x}",
    )
    outputs: tuple[str, ...] = (
        "{system} produces {y}",
        "{system} returns {y}",
        ", {y} is produced",
        "the output {y} is produced",
        ", {y} is returned",
    )
    initial: str = "state {label} is the initial state"

    def truncated(self) -> PatternSet:
        """Single-variant pattern set (first entry of every list)."""
        return replace(
            self,
            **{
                name: getattr(self, name)[:1]
                for name in ("states", "orderings", "systems", "froms", "moves", "inputs", "outputs")
            },
        )


DEFAULT_PATTERNS = PatternSet()


def state_label(state: str) -> str:
    if not re.fullmatch(r"[Ss]\d+", state):
        raise DomainError(f"state {state!r} is not of the form S<number>")
    return state.lower()


def _as_rng(rng) -> random.Random:
    return rng if isinstance(rng, random.Random) else random.Random(rng)


def describe_transition(t: Transition, rng=None, patterns: PatternSet = DEFAULT_PATTERNS) -> str:
    rng = _as_rng(rng)

    def state(s):
        return rng.choice(patterns.states).format(label=state_label(s))

    frm = rng.choice(patterns.froms).format(src=state(t.src))
    out = rng.choice(patterns.outputs).format(system=rng.choice(patterns.systems), y=t.out)
    move = rng.choice(patterns.moves).format(system=rng.choice(patterns.systems), tgt=state(t.tgt))
    inp = rng.choice(patterns.inputs).format(x=t.inp)
    return rng.choice(patterns.orderings).format(frm=frm, out=out, move=move, inp=inp)


def all_sentences(t: Transition, patterns: PatternSet = DEFAULT_PATTERNS) -> Iterator[str]:
    """Every sentence :func:`describe_transition` can emit for ``t``."""
    src, tgt = state_label(t.src), state_label(t.tgt)
    froms = [f.format(src=s.format(label=src)) for f in patterns.froms for s in patterns.states]
    outs = [o.format(system=sy, y=t.out) for o in patterns.outputs for sy in patterns.systems]
    moves = [m.format(system=sy, tgt=s.format(label=tgt)) for m in patterns.moves
             for sy in patterns.systems for s in patterns.states]
    inps = [i.format(x=t.inp) for i in patterns.inputs]
    seen = set()
    for order, frm, out, move, inp in itertools.product(patterns.orderings, froms, outs, moves, inps):
        sentence = order.format(frm=frm, out=out, move=move, inp=inp)
        if sentence not in seen:
            seen.add(sentence)
            yield sentence


def describe_fsm(m: Fsm, rng=None, patterns: PatternSet = DEFAULT_PATTERNS, normalize: bool = False) -> str:
    """One sentence per transition, then the initial-state sentence.

    The default layout prefixes each sentence with a space and ends it with
    ``".\\n"``; ``normalize=True`` joins the sentences on one line instead.
    """
    rng = _as_rng(rng)
    sentences = [describe_transition(t, rng, patterns) for t in m.transitions]
    sentences.append(patterns.initial.format(label=state_label(m.initial)))
    if normalize:
        return " ".join(s.strip() + "." for s in sentences)
    return "".join(f" {s}.\n" for s in sentences)


# -- parsing ----------------------------------------------------------------

_SYMBOL = r"[^\s.,]+"
_LABEL = r"s\d+"


class _Grammar:
    """Regex form of a :class:`PatternSet`, one named group per slot."""

    def __init__(self, patterns: PatternSet):
        self._count = itertools.count()
        p = patterns
        system = self._alt(p.systems, {})

        def state(slot):
            return lambda: self._alt(p.states, {"label": lambda: self._group(slot, _LABEL)})

        slots = {
            "frm": lambda: self._alt(p.froms, {"src": state("src")}),
            "out": lambda: self._alt(p.outputs, {"system": lambda: system, "y": lambda: self._group("out", _SYMBOL)}),
            "move": lambda: self._alt(p.moves, {"system": lambda: system, "tgt": state("tgt")}),
            "inp": lambda: self._alt(p.inputs, {"x": lambda: self._group("inp", _SYMBOL)}),
        }
        self.sentence = re.compile(self._alt(p.orderings, slots), re.IGNORECASE)
        init = self._template(p.initial, {"label": lambda: self._group("init", _LABEL)})
        self.initial = re.compile(init, re.IGNORECASE)

    def _group(self, slot: str, body: str) -> str:
        return f"(?P<{slot}_{next(self._count)}>{body})"

    def _template(self, template: str, subs) -> str:
        parts = re.split(r"\{(\w+)\}", template)
        out = []
        for i, part in enumerate(parts):
            out.append(subs[part]() if i % 2 else re.escape(part))
        return "".join(out)

    def _alt(self, templates: Sequence[str], subs) -> str:
        return "(?:" + "|".join(self._template(t, subs) for t in templates) + ")"


@functools.lru_cache(maxsize=8)
def _grammar(patterns: PatternSet) -> _Grammar:
    return _Grammar(patterns)


def _slot(match: re.Match, slot: str) -> str:
    for name, value in match.groupdict().items():
        if value is not None and name.rsplit("_", 1)[0] == slot:
            return value
    raise AssertionError(slot)


def _sentences(text: str) -> list[str]:
    return [s.strip() for s in text.replace("\n", " ").split(".") if s.strip()]


def parse_description(
    text: str,
    patterns: PatternSet = DEFAULT_PATTERNS,
    inputs: Sequence[str] | None = None,
    outputs: Sequence[str] | None = None,
) -> Fsm:
    """Rebuild the machine from a text produced by :func:`describe_fsm`."""
    grammar = _grammar(patterns)
    transitions: list[Transition] = []
    initial = None
    for sentence in _sentences(text):
        m = grammar.initial.fullmatch(sentence)
        if m:
            initial = _slot(m, "init").upper()
            continue
        m = grammar.sentence.fullmatch(sentence)
        if not m:
            raise ParseError(f"sentence does not match any pattern: {sentence!r}")
        transitions.append(
            Transition(_slot(m, "src").upper(), _slot(m, "inp"), _slot(m, "out"), _slot(m, "tgt").upper())
        )
    if initial is None:
        raise ParseError("description has no initial-state sentence")
    try:
        return Fsm.from_transitions(transitions, initial=initial, inputs=inputs, outputs=outputs)
    except DomainError as exc:
        raise ParseError(str(exc)) from exc


def parse_transition(sentence: str, patterns: PatternSet = DEFAULT_PATTERNS) -> Transition:
    """Inverse of :func:`describe_transition` for a single sentence."""
    text = sentence.strip().rstrip(".").strip()
    m = _grammar(patterns).sentence.fullmatch(text)
    if not m:
        raise ParseError(f"sentence does not match any pattern: {sentence!r}")
    return Transition(_slot(m, "src").upper(), _slot(m, "inp"), _slot(m, "out"), _slot(m, "tgt").upper())


def matches_patterns(sentence: str, patterns: PatternSet = DEFAULT_PATTERNS) -> bool:
    return _grammar(patterns).sentence.fullmatch(sentence.strip()) is not None
