"""Mining a DFSM out of a mutation-machine repair domain with output queries.

Each transition of the mutation machine gets a selector variable; exactly
one selector is true per (state, input) cell. Expert answers are unrolled
into step-indexed occupancy variables so that only selections reproducing
every answer stay satisfiable.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence, TextIO

from .expert import Expert, OutputQuery, ask
from .fsm import Fsm, Transition, response
from .mutation import MutationMachine, domain_size, machine_from_choice
from .product import are_equivalent, shortest_distinguishing_sequence
from .sat import RecordingSolver, Solver, exactly_one, write_dimacs

log = logging.getLogger(__name__)


class MiningStatus(str, enum.Enum):
    REPAIRED = "repaired"
    FAILURE = "failure"
    EXHAUSTED = "exhausted"


@dataclass
class MiningResult:
    status: MiningStatus
    machine: Fsm | None = None
    candidates: tuple[Fsm, ...] = ()
    queries: list[OutputQuery] = field(default_factory=list)
    reason: str = ""
    capped: bool = False

    @property
    def query_count(self) -> int:
        return len(self.queries)

    @property
    def max_query_length(self) -> int:
        return max((len(q.inputs) for q in self.queries), default=0)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "reason": self.reason,
            "query_count": self.query_count,
            "max_query_length": self.max_query_length,
            "queries": [q.to_dict() for q in self.queries],
        }


def default_max_queries(mm: MutationMachine) -> int:
    m = mm.machine
    return len(m.states) * len(m.inputs) * len(m.outputs)


class SelectionFormula:
    """CNF over the transitions of a mutation machine."""

    def __init__(self, mm: MutationMachine, record: bool = False):
        self.mm = mm
        self.solver: Solver = RecordingSolver() if record else Solver()
        self.sel: dict[Transition, int] = {}
        for t in mm.transitions:
            self.sel[t] = self.solver.new_var()
        for cell in mm.cells.values():
            exactly_one(self.solver, [self.sel[t] for t in cell])
        self.queries: list[OutputQuery] = []

    def add_trace_constraint(self, query: OutputQuery) -> SelectionFormula:
        """Keep only selections whose DFSM answers ``query.answer`` on ``query.inputs``."""
        s, cells = self.solver, self.mm.cells
        occ = {self.mm.machine.initial: None}
        here = {st: s.new_var() for st in occ}
        s.add_clause([here[self.mm.machine.initial]])
        for x, y in zip(query.inputs, query.answer):
            nxt: dict[str, int] = {}
            for st, v in here.items():
                for t in cells[st, x]:
                    if t.out != y:
                        s.add_clause([-v, -self.sel[t]])
                        continue
                    if t.tgt not in nxt:
                        nxt[t.tgt] = s.new_var()
                    s.add_clause([-v, -self.sel[t], nxt[t.tgt]])
            here = nxt
        self.queries.append(query)
        return self

    def solve(self, assumptions: Sequence[int] = ()) -> Fsm | None:
        if not self.solver.solve(assumptions):
            return None
        chosen = [t for t in self.mm.transitions if self.solver.value(self.sel[t])]
        return machine_from_choice(self.mm, chosen)

    def block_clause(self, m: Fsm) -> list[int]:
        """Clause excluding every selection that agrees with ``m`` on its reachable cells."""
        reach = set(m.reachable_states())
        return [-self.sel[t] for t in m.transitions if t.src in reach]

    def distinguishable_partner(self, m1: Fsm, max_retries: int) -> tuple[Fsm | None, bool]:
        """A consistent selection not equivalent to ``m1``.

        Returns ``(partner, capped)``. Machines agreeing with an equivalent
        candidate on that candidate's reachable cells are equivalent too, so
        blocking them is exact; only ``max_retries`` can cut the search short.
        """
        act = self.solver.new_var()
        self.solver.add_clause([-act] + self.block_clause(m1))
        try:
            for _ in range(max_retries):
                m2 = self.solve([act])
                if m2 is None:
                    return None, False
                if not are_equivalent(m1, m2):
                    return m2, False
                self.solver.add_clause([-act] + self.block_clause(m2))
            return None, True
        finally:
            self.solver.add_clause([-act])

    def dump_dimacs(self, out: TextIO):
        if not isinstance(self.solver, RecordingSolver):
            raise TypeError("formula was not built with record=True")
        names = [f"sel {v} {t.src},{t.inp},{t.out},{t.tgt}" for t, v in self.sel.items()]
        write_dimacs(self.solver.nvars, self.solver.original, out, names)


def mine(
    mm: MutationMachine,
    expert: Expert,
    max_queries: int | None = None,
    max_retries: int = 1000,
    dump_cnf: TextIO | None = None,
) -> MiningResult:
    """Query the expert until one behaviour is left in the repair domain."""
    if max_queries is None:
        max_queries = default_max_queries(mm)
    f = SelectionFormula(mm, record=dump_cnf is not None)
    result = MiningResult(MiningStatus.FAILURE)
    try:
        while True:
            m1 = f.solve()
            if m1 is None:
                result.reason = "no DFSM of the repair domain is consistent with the expert answers"
                return result
            m2, capped = f.distinguishable_partner(m1, max_retries)
            if m2 is None:
                result.status, result.machine, result.capped = MiningStatus.REPAIRED, m1, capped
                return result
            if len(result.queries) >= max_queries:
                result.status, result.candidates = MiningStatus.EXHAUSTED, (m1, m2)
                result.reason = f"query budget {max_queries} spent"
                return result
            word = shortest_distinguishing_sequence(m1, m2)
            q = ask(expert, word)
            log.debug("query %s -> %s", " ".join(q.inputs), " ".join(q.answer))
            result.queries.append(q)
            f.add_trace_constraint(q)
    finally:
        if dump_cnf is not None:
            f.dump_dimacs(dump_cnf)


class DomainTooLarge(ValueError):
    pass


def consistent(m: Fsm, queries: Sequence[OutputQuery]) -> bool:
    return all(response(m, q.inputs) == q.answer for q in queries)


def brute_force_mine(
    mm: MutationMachine, expert: Expert, max_queries: int | None = None, limit: int = 10_000
) -> MiningResult:
    """Same loop as :func:`mine` over an explicit list of candidates."""
    size = domain_size(mm)
    if size > limit:
        raise DomainTooLarge(f"domain of {size} DFSMs exceeds enumeration limit {limit}")
    if max_queries is None:
        max_queries = default_max_queries(mm)
    candidates = list(mm.selections())
    result = MiningResult(MiningStatus.FAILURE)
    while True:
        if not candidates:
            result.reason = "no DFSM of the repair domain is consistent with the expert answers"
            return result
        m1 = candidates[0]
        m2 = next((c for c in candidates[1:] if not are_equivalent(m1, c)), None)
        if m2 is None:
            result.status, result.machine = MiningStatus.REPAIRED, m1
            return result
        if len(result.queries) >= max_queries:
            result.status, result.candidates = MiningStatus.EXHAUSTED, (m1, m2)
            result.reason = f"query budget {max_queries} spent"
            return result
        q = ask(expert, shortest_distinguishing_sequence(m1, m2))
        result.queries.append(q)
        candidates = [c for c in candidates if response(c, q.inputs) == q.answer]
