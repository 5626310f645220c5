"""Prompt texts for generation and repair, and a reader for the repair
fragments they contain.

The template strings are kept byte for byte, typos and missing spaces
included, because the generation and repair experiments depend on them.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .fsm import Transition
from .nl import DEFAULT_PATTERNS, PatternSet, describe_transition, parse_transition

MACHINE_ROLE = (
    "You are a professional software engineer working on a project to generate a CSV "
    "representation of a finite state machine (FSM) from a natural language description. "
    "You have been given the following description:"
)

DESCRIPTION_SLOT = "{DFSM_description}"

_FORMAT_RULES = (
    "the states should be named Si (where i is always a number), the first row should contain "
    "State, Input, Output, Next_State, and the other rows should only contain the state name in Si "
    "format (where i is always a number) the input the output and the next state name in Si format "
    "(where i is always a number), there shouldnt spaces between each information only comas., here "
    "is an example: first row: State, Input, Output, Next_State, second row: S0,a,0,S2 third row: "
    "S1,b,1,S3 fourth row: S2,c,0,S1 fifth row: S3,d,1,S0."
)

USER_TEMPLATE = (
    DESCRIPTION_SLOT
    + " Can you create the previous automaton on csv format with the following order: State, Input, "
    "Output, Next_State, "
    + _FORMAT_RULES
    + " Please do not add any comments to the csv file. Please keep in mind the machine should be "
    "complete and deterministic."
)

# marks where the description ends inside a generation prompt
DESCRIPTION_END = " Can you create the previous automaton on csv format"

PRESENT_HEADER = "Correct the automaton so that these transitions are present in the generated automaton:\n"
ABSENT_HEADER = "Correct the automaton so that these transitions are not present in the generated automaton:"
CONSERVE_HEADER = "These transitions are correct and should be present in the generated automaton:\n"
SYNTACTIC_TAIL = "Please keep this format: State, Input, Output, Next_State, " + _FORMAT_RULES + " Do not add any comments\n"

TRACE_HEADER = "Correct the automaton so that this input sequence given to the automaton:\n"
TRACE_MIDDLE = "Generates this output sequence:\n"
TRACE_TAIL = "Please keep this format: State, Input, Output, Next_State, " + _FORMAT_RULES + "Do not add any comments\n"


@dataclass(frozen=True)
class PromptTemplates:
    machine_role: str = MACHINE_ROLE
    user: str = USER_TEMPLATE

    @classmethod
    def load(cls, path: str | Path) -> PromptTemplates:
        """JSON file with optional ``machine_role`` and ``user`` keys."""
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {"machine_role", "user"}
        if unknown:
            raise ValueError(f"unknown template keys {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class PromptMessage:
    system: str
    user: str
    temperature: float = 0.0
    model: str = "gpt-4o"

    def __post_init__(self):
        if not self.system or not self.user:
            raise ValueError("system and user roles must be nonempty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")

    def with_user(self, user: str) -> PromptMessage:
        return PromptMessage(self.system, user, self.temperature, self.model)

    def messages(self) -> list[dict]:
        return [{"role": "system", "content": self.system}, {"role": "user", "content": self.user}]


def build_generation_prompt(
    description: str, templates: PromptTemplates = PromptTemplates(), model: str = "gpt-4o"
) -> PromptMessage:
    if not description or not description.strip():
        raise ValueError("empty description")
    return PromptMessage(templates.machine_role, templates.user.replace(DESCRIPTION_SLOT, description), 0.0, model)


def description_of(user_text: str) -> str:
    """The description embedded in a generation prompt."""
    head, sep, _ = user_text.partition(DESCRIPTION_END)
    if not sep:
        raise ValueError("prompt does not follow the generation template")
    return head


# -- repair fragments ---------------------------------------------------------

def render_word(symbols: Sequence[str]) -> str:
    return " ".join(symbols)


def syntactic_fragment(
    present: Iterable[Transition],
    absent: Iterable[Transition],
    conserve: Iterable[Transition] | None,
    rng: random.Random | int | None = 0,
    patterns: PatternSet = DEFAULT_PATTERNS,
) -> str:
    """Repair fragment asking for ``present`` transitions, against ``absent``
    ones, and restating ``conserve`` (omitted entirely when None)."""
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    text = PRESENT_HEADER
    for t in present:
        text += describe_transition(t, rng, patterns) + "\n"
    text += ABSENT_HEADER
    for t in absent:
        text += describe_transition(t, rng, patterns) + "\n"
    if conserve is not None:
        text += CONSERVE_HEADER
        for t in conserve:
            text += describe_transition(t, rng, patterns) + "\n"
    return text + SYNTACTIC_TAIL


def trace_fragment(inputs: Sequence[str], outputs: Sequence[str]) -> str:
    return TRACE_HEADER + render_word(inputs) + "\n" + TRACE_MIDDLE + render_word(outputs) + "\n" + TRACE_TAIL


@dataclass(frozen=True)
class TransitionDirective:
    present: tuple[Transition, ...]
    absent: tuple[Transition, ...]
    conserve: tuple[Transition, ...]


@dataclass(frozen=True)
class TraceDirective:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


_SYNTACTIC_RE = re.compile(
    re.escape(PRESENT_HEADER) + "(.*?)" + re.escape(ABSENT_HEADER) + "(.*?)"
    + "(?:" + re.escape(CONSERVE_HEADER) + "(.*?))?" + re.escape(SYNTACTIC_TAIL),
    re.DOTALL,
)
_TRACE_RE = re.compile(
    re.escape(TRACE_HEADER) + "(.*?)\n" + re.escape(TRACE_MIDDLE) + "(.*?)\n" + re.escape(TRACE_TAIL),
    re.DOTALL,
)


def _transitions(block: str | None, patterns: PatternSet) -> tuple[Transition, ...]:
    if not block:
        return ()
    return tuple(parse_transition(line, patterns) for line in block.split("\n") if line.strip())


def parse_directives(text: str, patterns: PatternSet = DEFAULT_PATTERNS) -> list[TransitionDirective | TraceDirective]:
    """Repair fragments found in ``text``, in prompt order."""
    found = []
    for m in _SYNTACTIC_RE.finditer(text):
        d = TransitionDirective(*(_transitions(m.group(i), patterns) for i in (1, 2, 3)))
        found.append((m.start(), d))
    for m in _TRACE_RE.finditer(text):
        found.append((m.start(), TraceDirective(tuple(m.group(1).split()), tuple(m.group(2).split()))))
    return [d for _, d in sorted(found, key=lambda p: p[0])]
