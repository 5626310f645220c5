"""A small incremental CDCL SAT solver and DIMACS helpers.

Literals are non-zero ints in DIMACS convention. The solver supports adding
clauses between calls and solving under assumptions, which is all the
mining and checking-sequence searches need.
"""

from __future__ import annotations

import heapq
import time
from typing import Iterable, Sequence, TextIO


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class Solver:
    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int] | None] = []
        self.learnt: list[bool] = []
        self.watches: dict[int, list[int]] = {}
        self.val: list[int] = [0]  # per variable: 1 true, -1 false, 0 unassigned
        self.level: list[int] = [0]
        self.reason: list[int] = [-1]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [-1]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.model: list[int] = []
        self.conflicts = 0
        self.num_learnt = 0
        self.max_learnt = 2000

    # -- problem construction -------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.val.append(0)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.phase.append(-1)
        self.watches[v] = []
        self.watches[-v] = []
        heapq.heappush(self.heap, (0.0, v))
        return v

    def new_vars(self, n: int) -> list[int]:
        return [self.new_var() for _ in range(n)]

    def _value(self, lit: int) -> int:
        v = self.val[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause at decision level 0. Returns False once unsatisfiable."""
        if not self.ok:
            return False
        if self.trail_lim:
            self._backtrack(0)
        clause = []
        seen = set()
        for lit in lits:
            if abs(lit) > self.nvars or lit == 0:
                raise ValueError(f"literal {lit} out of range")
            if -lit in seen:
                return True
            if lit in seen:
                continue
            v = self._value(lit)
            if v == 1:
                return True
            if v == 0:
                seen.add(lit)
                clause.append(lit)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._enqueue(clause[0], -1)
            if self._propagate() != -1:
                self.ok = False
            return self.ok
        self._attach(clause, learnt=False)
        return True

    def _attach(self, clause: list[int], learnt: bool) -> int:
        ci = len(self.clauses)
        self.clauses.append(clause)
        self.learnt.append(learnt)
        self.watches[clause[0]].append(ci)
        self.watches[clause[1]].append(ci)
        return ci

    # -- search -----------------------------------------------------------

    def _enqueue(self, lit: int, reason: int):
        v = lit if lit > 0 else -lit
        self.val[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        val = self.val
        clauses = self.clauses
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c is None:
                    continue
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                fv = val[first] if first > 0 else -val[-first]
                if fv == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = val[lk] if lk > 0 else -val[-lk]
                    if lv != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if fv == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return ci
                    v = first if first > 0 else -first
                    val[v] = 1 if first > 0 else -1
                    self.level[v] = len(self.trail_lim)
                    self.reason[v] = ci
                    trail.append(first)
            del ws[j:]
        return -1

    def _bump(self, v: int):
        a = self.activity[v] + self.var_inc
        self.activity[v] = a
        if a > 1e100:
            self.activity = [x * 1e-100 for x in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1) if self.val[u] == 0]
            heapq.heapify(self.heap)
        elif self.val[v] == 0:
            heapq.heappush(self.heap, (-a, v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        level = self.level
        while True:
            c = self.clauses[confl]
            for q in (c if p == 0 else c[1:]):
                v = q if q > 0 else -q
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                p = self.trail[idx]
                idx -= 1
                if (p if p > 0 else -p) in seen:
                    break
            v = p if p > 0 else -p
            confl = self.reason[v]
            seen.discard(v)
            counter -= 1
            if counter == 0:
                break
            c = self.clauses[confl]
            if c[0] != p:
                k = c.index(p)
                c[0], c[k] = c[k], c[0]
        learnt[0] = -p
        # drop literals implied by the rest of the clause
        marked = {abs(q) for q in learnt}
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[abs(q)]
            if r == -1 or any(abs(u) not in marked and level[abs(u)] > 0 for u in self.clauses[r] if abs(u) != abs(q)):
                kept.append(q)
        learnt = kept
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[abs(learnt[k])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[abs(learnt[1])]

    def _backtrack(self, lvl: int):
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for lit in self.trail[stop:]:
            v = lit if lit > 0 else -lit
            self.phase[v] = self.val[v]
            self.val[v] = 0
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        heap = self.heap
        while heap:
            a, v = heapq.heappop(heap)
            if self.val[v] == 0 and -a == self.activity[v]:
                return v if self.phase[v] == 1 else -v
        for v in range(1, self.nvars + 1):
            if self.val[v] == 0:
                return v if self.phase[v] == 1 else -v
        return 0

    def _reduce(self):
        locked = {self.reason[abs(l)] for l in self.trail}
        cand = [ci for ci, c in enumerate(self.clauses)
                if c is not None and self.learnt[ci] and len(c) > 2 and ci not in locked]
        cand.sort(key=lambda ci: len(self.clauses[ci]), reverse=True)
        for ci in cand[: len(cand) // 2]:
            self.clauses[ci] = None
            self.num_learnt -= 1

    def solve(
        self,
        assumptions: Sequence[int] = (),
        deadline: float | None = None,
        conflict_budget: int | None = None,
    ) -> bool | None:
        """True (model in :attr:`model`), False, or None when out of budget."""
        if not self.ok:
            return False
        self._backtrack(0)
        if self._propagate() != -1:
            self.ok = False
            return False
        restart = 1
        budget = 100 * luby(restart)
        since_restart = 0
        start_conflicts = self.conflicts
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = self._attach(learnt, learnt=True)
                    self.num_learnt += 1
                    self._enqueue(learnt[0], ci)
                self.var_inc /= 0.95
                if conflict_budget is not None and self.conflicts - start_conflicts > conflict_budget:
                    self._backtrack(0)
                    return None
                if deadline is not None and self.conflicts % 64 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    return None
                continue
            if since_restart >= budget:
                restart += 1
                budget = 100 * luby(restart)
                since_restart = 0
                self._backtrack(0)
                if self.num_learnt > self.max_learnt:
                    self._reduce()
                    self.max_learnt = int(self.max_learnt * 1.1)
                continue
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                p = assumptions[lvl]
                v = self._value(p)
                if v == -1:
                    self._backtrack(0)
                    return False
                self.trail_lim.append(len(self.trail))
                if v == 0:
                    self._enqueue(p, -1)
                continue
            lit = self._pick()
            if lit == 0:
                self.model = list(self.val)
                self._backtrack(0)
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, -1)

    def value(self, lit: int) -> bool:
        """Truth value of ``lit`` in the last model."""
        v = self.model[abs(lit)]
        return (v == 1) if lit > 0 else (v == -1)


# -- encodings ------------------------------------------------------------------


def at_most_one(solver: Solver, lits: Sequence[int]):
    if len(lits) <= 6:
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                solver.add_clause([-lits[i], -lits[j]])
        return
    # sequential counter
    prev = lits[0]
    for lit in lits[1:-1]:
        s = solver.new_var()
        solver.add_clause([-prev, s])
        solver.add_clause([-lit, s])
        solver.add_clause([-prev, -lit])
        prev = s
    solver.add_clause([-prev, -lits[-1]])


def exactly_one(solver: Solver, lits: Sequence[int]):
    solver.add_clause(list(lits))
    at_most_one(solver, lits)


# -- DIMACS -----------------------------------------------------------------------


class RecordingSolver(Solver):
    """Solver that keeps a copy of every original clause for DIMACS export."""

    def __init__(self):
        super().__init__()
        self.original: list[list[int]] = []

    def add_clause(self, lits):
        lits = list(lits)
        self.original.append(lits)
        return super().add_clause(lits)


def write_dimacs(nvars: int, clauses: Iterable[Sequence[int]], out: TextIO, comments: Sequence[str] = ()):
    clauses = [list(c) for c in clauses]
    for line in comments:
        out.write(f"c {line}\n")
    out.write(f"p cnf {nvars} {len(clauses)}\n")
    for c in clauses:
        out.write(" ".join(map(str, c)) + " 0\n")


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    nvars = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            nvars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    return nvars, clauses


def solve_cnf(nvars: int, clauses: Iterable[Sequence[int]]) -> list[int] | None:
    """Convenience: satisfying assignment as a list of true literals, or None."""
    s = Solver()
    s.new_vars(nvars)
    for c in clauses:
        if not s.add_clause(c):
            return None
    if not s.solve():
        return None
    return [v if s.model[v] == 1 else -v for v in range(1, nvars + 1)]
