"""Mealy machine data model, simulation and structural predicates."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence


class FsmError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FsmError, ValueError):
    """A state, symbol or transition is not part of the machine."""


class SimulationError(FsmError):
    """A run reached a (state, input) cell with no transition."""

    def __init__(self, state: str, symbol: str):
        super().__init__(f"no transition from state {state!r} on input {symbol!r}")
        self.state = state
        self.symbol = symbol


class NondeterminismError(FsmError):
    """An operation that needs a DFSM was given a nondeterministic machine."""


class Transition(NamedTuple):
    src: str
    inp: str
    out: str
    tgt: str

    def __str__(self):
        return f"({self.src},{self.inp},{self.out},{self.tgt})"


@dataclass(frozen=True)
class Trace:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if len(self.inputs) != len(self.outputs):
            raise ValueError("trace input and output sequences differ in length")

    def __len__(self):
        return len(self.inputs)

    def __str__(self):
        return f"{' '.join(self.inputs)} / {' '.join(self.outputs)}"


@dataclass(frozen=True)
class Execution:
    start: str
    steps: tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        state = self.start
        for t in self.steps:
            if t.src != state:
                raise ValueError(f"execution does not chain at {t}")
            state = t.tgt

    @property
    def end(self) -> str:
        return self.steps[-1].tgt if self.steps else self.start

    @property
    def trace(self) -> Trace:
        return Trace([t.inp for t in self.steps], [t.out for t in self.steps])


def _unique(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True, eq=False)
class Fsm:
    """A finite state machine ``(states, initial, inputs, outputs, transitions)``.

    Instances are immutable. Equality ignores the order of states, symbols and
    transitions; iteration order is kept for deterministic serialization.
    """

    states: tuple[str, ...]
    initial: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    transitions: tuple[Transition, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "states", _unique(self.states))
        object.__setattr__(self, "inputs", _unique(self.inputs))
        object.__setattr__(self, "outputs", _unique(self.outputs))
        object.__setattr__(
            self, "transitions", tuple(dict.fromkeys(Transition(*t) for t in self.transitions))
        )
        states = set(self.states)
        if self.initial not in states:
            raise DomainError(f"initial state {self.initial!r} is not a state")
        if set(self.inputs) & set(self.outputs):
            raise DomainError("input and output alphabets must be disjoint")
        inputs, outputs = set(self.inputs), set(self.outputs)
        for t in self.transitions:
            if t.src not in states or t.tgt not in states:
                raise DomainError(f"transition {t} references an unknown state")
            if t.inp not in inputs:
                raise DomainError(f"transition {t} uses unknown input {t.inp!r}")
            if t.out not in outputs:
                raise DomainError(f"transition {t} uses unknown output {t.out!r}")

    @classmethod
    def from_transitions(
        cls,
        transitions: Iterable[Sequence[str]],
        initial: str | None = None,
        inputs: Sequence[str] | None = None,
        outputs: Sequence[str] | None = None,
        states: Sequence[str] | None = None,
    ) -> Fsm:
        """Build a machine whose universes are inferred from ``transitions``.

        Explicit ``states``/``inputs``/``outputs`` come first in the resulting
        order; symbols seen only in transitions are appended.
        """
        ts = [Transition(*t) for t in transitions]
        st = list(states or ())
        if initial is not None and initial not in st:
            st.insert(0, initial)
        for t in ts:
            st += [t.src, t.tgt]
        st = list(_unique(st))
        if not st:
            raise DomainError("a machine needs at least one state")
        ins = list(inputs or ()) + [t.inp for t in ts]
        outs = list(outputs or ()) + [t.out for t in ts]
        return cls(tuple(st), initial if initial is not None else st[0], _unique(ins), _unique(outs), tuple(ts))

    # -- equality ---------------------------------------------------------

    def _key(self):
        return (
            frozenset(self.states),
            self.initial,
            frozenset(self.inputs),
            frozenset(self.outputs),
            frozenset(self.transitions),
        )

    def __eq__(self, other):
        if not isinstance(other, Fsm):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (
            f"Fsm(states={len(self.states)}, inputs={list(self.inputs)}, "
            f"outputs={list(self.outputs)}, transitions={len(self.transitions)}, initial={self.initial!r})"
        )

    # -- indexing ---------------------------------------------------------

    @cached_property
    def _cells(self) -> dict[tuple[str, str], tuple[Transition, ...]]:
        cells: dict[tuple[str, str], list[Transition]] = {}
        for t in self.transitions:
            cells.setdefault((t.src, t.inp), []).append(t)
        return {k: tuple(v) for k, v in cells.items()}

    def transitions_from(self, state: str) -> tuple[Transition, ...]:
        if state not in self.states:
            raise DomainError(f"unknown state {state!r}")
        return tuple(t for t in self.transitions if t.src == state)

    def transitions_on(self, state: str, symbol: str) -> tuple[Transition, ...]:
        if state not in self.states:
            raise DomainError(f"unknown state {state!r}")
        if symbol not in self.inputs:
            raise DomainError(f"unknown input {symbol!r}")
        return self._cells.get((state, symbol), ())

    def cell(self, state: str, symbol: str) -> tuple[Transition, ...]:
        """Like :meth:`transitions_on` without membership checks."""
        return self._cells.get((state, symbol), ())

    def uncertain(self) -> tuple[Transition, ...]:
        """Transitions sharing their (state, input) cell with another one."""
        return tuple(t for t in self.transitions if len(self._cells[t.src, t.inp]) > 1)

    def missing_cells(self) -> list[tuple[str, str]]:
        return [(s, x) for s in self.states for x in self.inputs if (s, x) not in self._cells]

    @cached_property
    def _deterministic(self) -> bool:
        return all(len(v) == 1 for v in self._cells.values())

    def is_deterministic(self) -> bool:
        return self._deterministic

    def is_complete(self) -> bool:
        return not self.missing_cells()

    def step(self, state: str, symbol: str) -> Transition:
        cell = self._cells.get((state, symbol))
        if not cell:
            raise SimulationError(state, symbol)
        if len(cell) > 1:
            raise NondeterminismError(f"cell ({state},{symbol}) holds {len(cell)} transitions")
        return cell[0]

    @cached_property
    def delta(self) -> dict[tuple[str, str], Transition]:
        """Map (state, input) -> transition; only valid for a DFSM."""
        if not self.is_deterministic():
            raise NondeterminismError("machine is nondeterministic")
        return {k: v[0] for k, v in self._cells.items()}

    def reachable_states(self, start: str | None = None) -> list[str]:
        start = self.initial if start is None else start
        seen = {start: None}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for x in self.inputs:
                for t in self._cells.get((s, x), ()):
                    if t.tgt not in seen:
                        seen[t.tgt] = None
                        queue.append(t.tgt)
        return list(seen)

    def is_strongly_connected(self) -> bool:
        n = len(self.states)
        return all(len(self.reachable_states(s)) == n for s in self.states)

    # -- derived machines -------------------------------------------------

    def replace(self, **changes) -> Fsm:
        fields = dict(
            states=self.states,
            initial=self.initial,
            inputs=self.inputs,
            outputs=self.outputs,
            transitions=self.transitions,
        )
        fields.update(changes)
        return Fsm(**fields)

    def with_transitions(self, transitions: Iterable[Sequence[str]]) -> Fsm:
        return self.replace(transitions=tuple(Transition(*t) for t in transitions))

    def add(self, *ts: Sequence[str]) -> Fsm:
        return self.with_transitions(self.transitions + tuple(Transition(*t) for t in ts))

    def remove(self, *ts: Sequence[str]) -> Fsm:
        drop = {Transition(*t) for t in ts}
        return self.with_transitions(t for t in self.transitions if t not in drop)

    def rename(self, mapping: dict[str, str]) -> Fsm:
        """Rename states; names absent from ``mapping`` are kept."""
        m = lambda s: mapping.get(s, s)  # noqa: E731
        return Fsm(
            tuple(m(s) for s in self.states),
            m(self.initial),
            self.inputs,
            self.outputs,
            tuple(Transition(m(t.src), t.inp, t.out, m(t.tgt)) for t in self.transitions),
        )

    def first_per_cell(self) -> tuple[Fsm, list[Transition]]:
        """Keep the first listed transition of every cell; return the dropped ones."""
        kept, dropped, seen = [], [], set()
        for t in self.transitions:
            if (t.src, t.inp) in seen:
                dropped.append(t)
            else:
                seen.add((t.src, t.inp))
                kept.append(t)
        return self.with_transitions(kept), dropped


def execute(m: Fsm, inputs: Sequence[str], start: str | None = None) -> Execution:
    """The unique execution of the DFSM ``m`` on ``inputs``."""
    if not m.is_deterministic():
        raise NondeterminismError("run needs a deterministic machine")
    state = m.initial if start is None else start
    steps = []
    for x in inputs:
        if x not in m.inputs:
            raise DomainError(f"unknown input {x!r}")
        t = m.step(state, x)
        steps.append(t)
        state = t.tgt
    return Execution(m.initial if start is None else start, tuple(steps))


def run(m: Fsm, inputs: Sequence[str], start: str | None = None) -> tuple[Trace, str]:
    """Return the trace of ``m`` on ``inputs`` and the state reached."""
    e = execute(m, inputs, start)
    return e.trace, e.end


def response(m: Fsm, inputs: Sequence[str], start: str | None = None) -> tuple[str, ...]:
    return run(m, inputs, start)[0].outputs
