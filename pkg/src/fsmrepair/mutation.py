"""Mutation machines: nondeterministic machines whose per-cell choices
enumerate a finite repair domain of DFSMs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from .fsm import DomainError, Fsm, Transition


@dataclass(frozen=True)
class FaultModel:
    output_faults: bool = True
    missing_faults: bool = True
    transfer_faults: bool = False
    extra_transitions: tuple[Transition, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "extra_transitions", tuple(Transition(*t) for t in self.extra_transitions))
        if not (self.output_faults or self.missing_faults or self.transfer_faults or self.extra_transitions):
            raise ValueError("fault model adds nothing")

    @classmethod
    def parse(cls, text: str) -> FaultModel:
        """``"output,missing"`` style flags."""
        names = {n.strip() for n in text.split(",") if n.strip()}
        unknown = names - {"output", "missing", "transfer"}
        if unknown:
            raise ValueError(f"unknown fault kinds {sorted(unknown)}")
        return cls("output" in names, "missing" in names, "transfer" in names)


@dataclass(frozen=True)
class MutationMachine:
    machine: Fsm

    def __post_init__(self):
        missing = self.machine.missing_cells()
        if missing:
            raise DomainError(f"mutation machine has empty cells, e.g. {missing[0]}")

    @cached_property
    def cells(self) -> dict[tuple[str, str], tuple[Transition, ...]]:
        m = self.machine
        return {(s, x): m.cell(s, x) for s in m.states for x in m.inputs}

    @property
    def transitions(self) -> tuple[Transition, ...]:
        return self.machine.transitions

    def uncertain_cells(self) -> list[tuple[str, str]]:
        return [k for k, v in self.cells.items() if len(v) > 1]

    def selections(self) -> Iterator[Fsm]:
        """Every DFSM of the domain, in a fixed order."""
        m = self.machine
        keys = list(self.cells)
        for choice in itertools.product(*(self.cells[k] for k in keys)):
            yield Fsm(m.states, m.initial, m.inputs, m.outputs, choice)


def build_mutation_machine(generated: Fsm, fm: FaultModel) -> MutationMachine:
    """Add the transitions each enabled fault kind could have corrupted.

    Output faults add ``(s,x,y',t)`` for every other output ``y'``; transfer
    faults add ``(s,x,y,t')``; missing-transition faults fill every empty
    cell with all ``outputs x states`` candidates. Cells already holding
    several transitions keep all of them.
    """
    g = generated
    ts: list[Transition] = list(g.transitions)
    for t in g.transitions:
        if fm.output_faults:
            ts += [Transition(t.src, t.inp, y, t.tgt) for y in g.outputs if y != t.out]
        if fm.transfer_faults:
            ts += [Transition(t.src, t.inp, t.out, s) for s in g.states if s != t.tgt]
    if fm.missing_faults:
        for s, x in g.missing_cells():
            ts += [Transition(s, x, y, t) for y in g.outputs for t in g.states]
    for t in fm.extra_transitions:
        if t.src not in g.states or t.tgt not in g.states:
            raise DomainError(f"extra transition {t} references an unknown state")
        if t.inp not in g.inputs or t.out not in g.outputs:
            raise DomainError(f"extra transition {t} uses an unknown symbol")
        ts.append(t)
    return MutationMachine(g.with_transitions(ts))


def domain_size(mm: MutationMachine) -> int:
    return math.prod(len(v) for v in mm.cells.values())


def _check_compatible(mm: MutationMachine, m: Fsm):
    a = mm.machine
    if set(a.states) != set(m.states):
        raise DomainError("state names differ between repair domain and machine")
    if set(a.inputs) != set(m.inputs):
        raise DomainError("input alphabets differ between repair domain and machine")
    if not set(m.outputs) <= set(a.outputs):
        raise DomainError("machine uses outputs unknown to the repair domain")


def contains(mm: MutationMachine, m: Fsm) -> bool:
    """True iff ``m`` is one of the DFSMs selected from ``mm``."""
    a = mm.machine
    if set(a.states) != set(m.states) or set(a.inputs) != set(m.inputs) or m.initial != a.initial:
        return False
    if not (m.is_deterministic() and m.is_complete()):
        return False
    have = set(a.transitions)
    return all(t in have for t in m.transitions)


def augment_with_oracle(mm: MutationMachine, oracle: Fsm) -> tuple[MutationMachine, int]:
    """Add the oracle transitions the domain lacks; return the count added."""
    _check_compatible(mm, oracle)
    have = set(mm.transitions)
    extra = [t for t in oracle.transitions if t not in have]
    if not extra:
        return mm, 0
    return MutationMachine(mm.machine.add(*extra)), len(extra)


def selection_index(mm: MutationMachine) -> dict[Transition, int]:
    return {t: i for i, t in enumerate(mm.transitions)}


def machine_from_choice(mm: MutationMachine, chosen: Sequence[Transition]) -> Fsm:
    a = mm.machine
    return Fsm(a.states, a.initial, a.inputs, a.outputs, tuple(chosen))
