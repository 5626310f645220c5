"""Checking sequences: traces no other machine with at most ``n`` states can
produce unless it is equivalent to the subject machine.

Verification is a SAT search for a counterexample: an ``n``-state DFSM that
reproduces the trace yet is distinguishable from the subject. Construction
starts from a transition tour and extends the trace with a distinguishing
continuation for each counterexample found.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .fsm import DomainError, Fsm, NondeterminismError, Trace, Transition, run
from .product import shortest_distinguishing_sequence
from .sat import Solver, at_most_one, exactly_one

log = logging.getLogger(__name__)


def synthetic_transitions(m: Fsm) -> tuple[Transition, ...]:
    """Self-loops with the first output symbol for every empty cell."""
    if not m.outputs:
        raise DomainError("cannot complete a machine without output symbols")
    return tuple(Transition(s, x, m.outputs[0], s) for s, x in m.missing_cells())


def complete_inputs(m: Fsm) -> Fsm:
    if not m.is_deterministic():
        raise NondeterminismError("resolve nondeterminism before completing inputs")
    extra = synthetic_transitions(m)
    return m.add(*extra) if extra else m


@dataclass(frozen=True)
class CheckingSequence:
    trace: Trace
    state_bound: int
    verified: bool
    restarts: int = 0
    counterexamples: int = 0
    reason: str = ""

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.trace.inputs

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.trace.outputs


class CounterexampleSearch:
    """Incremental SAT search for an ``n``-state machine that agrees with a
    growing trace of ``m`` but is not equivalent to it."""

    def __init__(self, m: Fsm, n: int):
        if not (m.is_deterministic() and m.is_complete()):
            raise DomainError("subject machine must be deterministic and complete")
        self.m = m
        self.n = n
        s = self.solver = Solver()
        X, Y, N = m.inputs, m.outputs, range(n)
        self.T = {(q, x, r): s.new_var() for q in N for x in X for r in N}
        self.O = {(q, x, y): s.new_var() for q in N for x in X for y in Y}
        for q in N:
            for x in X:
                exactly_one(s, [self.T[q, x, r] for r in N])
                exactly_one(s, [self.O[q, x, y] for y in Y])
        # occupancy along the trace, with fresh states introduced in order
        self.occ: list[list[int]] = [[s.new_var() for _ in N]]
        self.used: list[list[int]] = [self.occ[0][:]]
        s.add_clause([self.occ[0][0]])
        at_most_one(s, self.occ[0])
        self.length = 0
        self._encode_difference()

    def _encode_difference(self):
        s, m, n = self.solver, self.m, self.n
        X = m.inputs
        depth = n * len(m.states)
        delta = m.delta
        states = m.states
        w = [[s.new_var() for _ in X] for _ in range(depth)]
        p = [{u: s.new_var() for u in states} for _ in range(depth)]
        r = [[s.new_var() for _ in range(n)] for _ in range(depth)]
        diff = [s.new_var() for _ in range(depth)]
        s.add_clause([p[0][m.initial]])
        s.add_clause([r[0][0]])
        for j in range(depth):
            exactly_one(s, w[j])
            at_most_one(s, list(p[j].values()))
            at_most_one(s, r[j])
            for k, x in enumerate(X):
                for u in states:
                    t = delta[u, x]
                    for q in range(n):
                        s.add_clause([-diff[j], -p[j][u], -r[j][q], -w[j][k], -self.O[q, x, t.out]])
                    if j + 1 < depth:
                        s.add_clause([-p[j][u], -w[j][k], p[j + 1][t.tgt]])
                if j + 1 < depth:
                    for q in range(n):
                        for q2 in range(n):
                            s.add_clause([-r[j][q], -w[j][k], -self.T[q, x, q2], r[j + 1][q2]])
        s.add_clause(diff)

    def extend(self, inputs: Sequence[str], outputs: Sequence[str]):
        s, n = self.solver, self.n
        X = self.m.inputs
        for x, y in zip(inputs, outputs):
            if x not in X or y not in self.m.outputs:
                raise DomainError(f"symbol pair {x}/{y} is not in the machine alphabets")
            cur, used = self.occ[-1], self.used[-1]
            nxt = [s.new_var() for _ in range(n)]
            at_most_one(s, nxt)
            for q in range(n):
                s.add_clause([-cur[q], self.O[q, x, y]])
                for q2 in range(n):
                    s.add_clause([-cur[q], -self.T[q, x, q2], nxt[q2]])
            # state q2 may appear only once q2 - 1 has
            for q2 in range(1, n):
                s.add_clause([-nxt[q2], used[q2], used[q2 - 1]])
            new_used = [s.new_var() for _ in range(n)]
            for q in range(n):
                s.add_clause([-new_used[q], used[q], nxt[q]])
                s.add_clause([-used[q], new_used[q]])
                s.add_clause([-nxt[q], new_used[q]])
            self.occ.append(nxt)
            self.used.append(new_used)
            self.length += 1

    def counterexample(self, deadline: float | None = None) -> Fsm | None | bool:
        """A counterexample machine, None if there is none, False on timeout."""
        ok = self.solver.solve(deadline=deadline)
        if ok is None:
            return False
        if not ok:
            return None
        return self._machine()

    def _machine(self) -> Fsm:
        m, n, s = self.m, self.n, self.solver
        names = [f"C{q}" for q in range(n)]
        ts = []
        for q in range(n):
            for x in m.inputs:
                tgt = next(r for r in range(n) if s.value(self.T[q, x, r]))
                out = next(y for y in m.outputs if s.value(self.O[q, x, y]))
                ts.append(Transition(names[q], x, out, names[tgt]))
        return Fsm(tuple(names), names[0], m.inputs, m.outputs, tuple(ts))


def verify_checking_sequence(
    m: Fsm, trace: Trace, n: int, deadline: float | None = None
) -> Fsm | None:
    """A machine with at most ``n`` states that reproduces ``trace`` but is
    not equivalent to ``m``, or None when ``trace`` is a checking sequence.

    Raises TimeoutError when ``deadline`` passes first.
    """
    search = CounterexampleSearch(m, n)
    search.extend(trace.inputs, trace.outputs)
    found = search.counterexample(deadline)
    if found is False:
        raise TimeoutError("checking-sequence verification ran out of time")
    return found


def brute_force_counterexample(m: Fsm, trace: Trace, n: int, limit: int = 200_000) -> Fsm | None:
    """Enumerate every ``n``-state machine; only for tiny ``n`` and alphabets."""
    from .product import are_equivalent

    names = tuple(f"C{q}" for q in range(n))
    cells = [(q, x) for q in names for x in m.inputs]
    options = [(y, r) for y in m.outputs for r in names]
    if len(options) ** len(cells) > limit:
        raise ValueError("search space too large for enumeration")
    for choice in itertools.product(options, repeat=len(cells)):
        table = {c: o for c, o in zip(cells, choice)}
        q, ok = names[0], True
        for x, y in zip(trace.inputs, trace.outputs):
            out, q = table[q, x]
            if out != y:
                ok = False
                break
        if not ok:
            continue
        cand = Fsm(names, names[0], m.inputs, m.outputs,
                   tuple(Transition(c[0], c[1], o[0], o[1]) for c, o in table.items()))
        if not are_equivalent(m, cand):
            return cand
    return None


def transition_tour(m: Fsm, rng: random.Random | None = None) -> tuple[str, ...]:
    """Greedy tour from the initial state over the transitions it can reach.

    Repeatedly walks a shortest path to the nearest state with an unused
    transition; ``rng`` shuffles input order to vary the tour. Every
    transition is covered when ``m`` is strongly connected; otherwise those
    left behind on leaving a component stay uncovered.
    """
    delta = m.delta
    order = list(m.inputs)
    uncovered = set(delta)
    state, word = m.initial, []
    while uncovered:
        if rng is not None:
            rng.shuffle(order)
        parent = {state: None}
        queue = deque([state])
        goal = None
        while queue and goal is None:
            s = queue.popleft()
            for x in order:
                if (s, x) in uncovered:
                    goal = (s, x)
                    break
            else:
                for x in order:
                    t = delta[s, x]
                    if t.tgt not in parent:
                        parent[t.tgt] = (s, x)
                        queue.append(t.tgt)
        if goal is None:
            break
        path = [goal[1]]
        s = goal[0]
        while parent[s] is not None:
            s, x = parent[s]
            path.append(x)
        for x in reversed(path):
            uncovered.discard((state, x))
            state = delta[state, x].tgt
            word.append(x)
    return tuple(word)


def transfer_sequence(m: Fsm, src: str, dst: str) -> tuple[str, ...] | None:
    """Shortest input word taking ``m`` from ``src`` to ``dst``."""
    delta = m.delta
    parent = {src: None}
    queue = deque([src])
    while queue:
        s = queue.popleft()
        if s == dst:
            word = []
            while parent[s] is not None:
                s, x = parent[s]
                word.append(x)
            return tuple(reversed(word))
        for x in m.inputs:
            t = delta[s, x].tgt
            if t not in parent:
                parent[t] = (s, x)
                queue.append(t)
    return None


def _first_difference(m_out: Sequence[str], other: Fsm, word: Sequence[str]) -> int:
    """Index of the first output ``other`` gets wrong on ``word``, else ``len(word)``."""
    q = other.initial
    for i, (x, y) in enumerate(zip(word, m_out)):
        t = other.delta[q, x]
        if t.out != y:
            return i
        q = t.tgt
    return len(word)


class SearchLimit(RuntimeError):
    pass


class NoCheckingSequence(Exception):
    """Some machines in the pool cannot all be separated by one trace."""


def joint_separator(
    m: Fsm, start: str, others: Sequence[tuple[Fsm, str]], limit: int = 200_000
) -> tuple[str, ...] | None:
    """Shortest word from ``start`` on which every machine in ``others``,
    started in its paired state, disagrees with ``m`` at least once.

    None means no such word exists; SearchLimit is raised when ``limit``
    nodes were explored without an answer.
    """
    root = (start, tuple(q for _, q in others))
    parent: dict = {root: None}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        u, qs = node
        if all(q is None for q in qs):
            word = []
            while parent[node] is not None:
                node, x = parent[node]
                word.append(x)
            return tuple(reversed(word))
        for x in m.inputs:
            t = m.delta[u, x]
            nxt = []
            for (c, _), q in zip(others, qs):
                if q is None:
                    nxt.append(None)
                    continue
                ct = c.delta[q, x]
                nxt.append(None if ct.out != t.out else ct.tgt)
            child = (t.tgt, tuple(nxt))
            if child not in parent:
                if len(parent) >= limit:
                    raise SearchLimit(f"joint separation explored {limit} nodes")
                parent[child] = (node, x)
                queue.append(child)
    return None


def _splice(m: Fsm, word: list[str], pool: Sequence[Fsm]) -> list[str] | None:
    """Insert a detour into ``word`` so every machine of ``pool`` is separated.

    At position ``i`` the detour must separate each machine that the prefix
    ``word[:i]`` does not already separate; it then leads ``m`` back to the
    state it had at ``i`` so the rest of ``word`` keeps its meaning. The
    latest feasible position wins; when ``m`` cannot return, the suffix is
    dropped instead. Raises NoCheckingSequence when even the
    start of the trace admits no joint separator, since every trace must
    then let some machine of ``pool`` through.
    """
    out = run(m, word)[0].outputs
    ms = [m.initial]
    for x in word:
        ms.append(m.delta[ms[-1], x].tgt)
    firsts = [_first_difference(out, c, word) for c in pool]
    paths = []
    for c in pool:
        qs = [c.initial]
        for x in word:
            qs.append(c.delta[qs[-1], x].tgt)
        paths.append(qs)
    for i in range(len(word), -1, -1):
        need = [(c, qs[i]) for c, qs, f in zip(pool, paths, firsts) if f >= i]
        if any(shortest_distinguishing_sequence(m, c, start=(ms[i], q)) is None for c, q in need):
            continue
        try:
            d = joint_separator(m, ms[i], need)
        except SearchLimit:
            continue
        if d is None:
            if i == 0:
                raise NoCheckingSequence
            continue
        if i == len(word):
            return word + list(d)
        _, after = run(m, d, start=ms[i])
        back = transfer_sequence(m, after, ms[i])
        if back is None:
            # no way back: drop the suffix, the search will ask for what it covered
            return word[:i] + list(d)
        return word[:i] + list(d) + list(back) + word[i:]
    return None


def build_checking_sequence(
    m: Fsm, n: int | None = None, budget: float = 60.0, seed: int = 0, max_restarts: int = 5
) -> CheckingSequence:
    """Counterexample-guided construction; ``budget`` is in seconds.

    Each counterexample is separated by appending a distinguishing
    continuation, or, when it already behaves like ``m`` from the end of the
    trace, by splicing a detour into the trace. On timeout the current trace
    is returned with ``verified=False``.
    """
    if not (m.is_deterministic() and m.is_complete()):
        raise DomainError("checking sequences need a deterministic complete machine")
    n = len(m.states) if n is None else n
    if n < len(m.states):
        raise ValueError("state bound is smaller than the machine")
    deadline = time.monotonic() + budget
    rng = random.Random(seed)
    trace = Trace((), ())
    found_total = 0
    pool: list[Fsm] = []
    for restart in range(max_restarts + 1):
        word = list(transition_tour(m, rng if restart else None))
        trace, m_end = run(m, word)
        search = CounterexampleSearch(m, n)
        search.extend(trace.inputs, trace.outputs)
        pool.clear()
        while True:
            cex = search.counterexample(deadline)
            if cex is False:
                return CheckingSequence(trace, n, False, restart, found_total)
            if cex is None:
                return CheckingSequence(trace, n, True, restart, found_total)
            found_total += 1
            pool.append(cex)
            _, c_end = run(cex, trace.inputs)
            ext = shortest_distinguishing_sequence(m, cex, start=(m_end, c_end))
            if ext is not None:
                step, m_end = run(m, ext, start=m_end)
                word += ext
                search.extend(step.inputs, step.outputs)
                trace = Trace(trace.inputs + step.inputs, trace.outputs + step.outputs)
                continue
            try:
                spliced = _splice(m, word, pool)
            except NoCheckingSequence:
                return CheckingSequence(
                    trace, n, False, restart, found_total,
                    f"no trace separates all {len(pool)} counterexamples found; "
                    f"no checking sequence exists for bound {n}",
                )
            if spliced is None:
                log.debug("counterexample not separable; restarting")
                break
            word = spliced
            trace, m_end = run(m, word)
            search = CounterexampleSearch(m, n)
            search.extend(trace.inputs, trace.outputs)
    return CheckingSequence(trace, n, False, max_restarts, found_total)
