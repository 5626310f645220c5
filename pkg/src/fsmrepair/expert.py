"""Experts answer output queries: given an input sequence, what should the
machine respond?"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

from .fsm import Fsm, FsmError, response


class ExpertError(FsmError):
    pass


@dataclass(frozen=True)
class OutputQuery:
    inputs: tuple[str, ...]
    answer: tuple[str, ...]
    source: str = "oracle"

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "answer", tuple(self.answer))
        if len(self.inputs) != len(self.answer):
            raise ValueError("answer length differs from query length")

    def to_dict(self) -> dict:
        return {"inputs": list(self.inputs), "answer": list(self.answer), "source": self.source}


class OracleExpert:
    """Answers by running a reference DFSM."""

    kind = "oracle"

    def __init__(self, oracle: Fsm):
        self.oracle = oracle

    def __call__(self, inputs: Sequence[str]) -> tuple[str, ...]:
        return response(self.oracle, inputs)


class InteractiveExpert:
    """Prints the input sequence and reads a whitespace separated answer."""

    kind = "interactive"

    def __init__(self, stdin: TextIO | None = None, stdout: TextIO | None = None):
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout

    def __call__(self, inputs: Sequence[str]) -> tuple[str, ...]:
        self.stdout.write(f"inputs: {' '.join(inputs)}\noutputs? ")
        self.stdout.flush()
        line = self.stdin.readline()
        if not line:
            raise ExpertError("expert input closed")
        return tuple(line.split())


Expert = Callable[[Sequence[str]], Sequence[str]]


def ask(expert: Expert, inputs: Sequence[str], attempts: int = 3) -> OutputQuery:
    """Query ``expert`` and re-ask while the answer has the wrong length."""
    inputs = tuple(inputs)
    for _ in range(attempts):
        answer = tuple(expert(inputs))
        if len(answer) == len(inputs):
            return OutputQuery(inputs, answer, getattr(expert, "kind", "oracle"))
        out = getattr(expert, "stdout", None)
        if out is not None:
            out.write(f"expected {len(inputs)} outputs, got {len(answer)}\n")
    raise ExpertError(f"no well-formed answer for {' '.join(inputs)!r} after {attempts} attempts")
