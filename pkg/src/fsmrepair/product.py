"""Distinguishing automaton of two DFSMs and the sequences it yields."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .fsm import DomainError, Fsm, NondeterminismError

Pair = tuple[str, str]


class _Sink:
    def __repr__(self):
        return "SINK"


SINK = _Sink()


def _check(m1: Fsm, m2: Fsm):
    if set(m1.inputs) != set(m2.inputs):
        raise DomainError(f"input alphabets differ: {sorted(m1.inputs)} vs {sorted(m2.inputs)}")
    for m in (m1, m2):
        if not m.is_deterministic():
            raise NondeterminismError("distinguishing automaton needs deterministic machines")
        if not m.is_complete():
            raise DomainError(f"machine is not complete; missing {m.missing_cells()[:3]}")


@dataclass(frozen=True)
class DistinguishingAutomaton:
    """Reachable part of the synchronous product of two DFSMs.

    ``edges[(pair, x)]`` is the next pair when both machines answer ``x``
    with the same output and :data:`SINK` when the outputs differ.
    """

    inputs: tuple[str, ...]
    initial: Pair
    pairs: tuple[Pair, ...]
    edges: dict

    @property
    def sink_reachable(self) -> bool:
        return any(v is SINK for v in self.edges.values())

    def sink_edges(self) -> list[tuple[Pair, str]]:
        return [k for k, v in self.edges.items() if v is SINK]


def build_product(m1: Fsm, m2: Fsm, start: Pair | None = None) -> DistinguishingAutomaton:
    _check(m1, m2)
    d1, d2 = m1.delta, m2.delta
    init = start or (m1.initial, m2.initial)
    seen = {init: None}
    queue = deque([init])
    edges = {}
    while queue:
        p = queue.popleft()
        for x in m1.inputs:
            t1, t2 = d1[p[0], x], d2[p[1], x]
            if t1.out != t2.out:
                edges[p, x] = SINK
                continue
            q = (t1.tgt, t2.tgt)
            edges[p, x] = q
            if q not in seen:
                seen[q] = None
                queue.append(q)
    return DistinguishingAutomaton(m1.inputs, init, tuple(seen), edges)


def are_equivalent(m1: Fsm, m2: Fsm) -> bool:
    return not build_product(m1, m2).sink_reachable


def shortest_distinguishing_sequence(m1: Fsm, m2: Fsm, start: Pair | None = None) -> tuple[str, ...] | None:
    """Shortest input word driving the product to the sink, ties broken by input order."""
    _check(m1, m2)
    d1, d2 = m1.delta, m2.delta
    init = start or (m1.initial, m2.initial)
    parent: dict[Pair, tuple[Pair, str] | None] = {init: None}
    queue = deque([init])
    while queue:
        p = queue.popleft()
        for x in m1.inputs:
            t1, t2 = d1[p[0], x], d2[p[1], x]
            if t1.out != t2.out:
                word = [x]
                while parent[p] is not None:
                    p, y = parent[p]
                    word.append(y)
                return tuple(reversed(word))
            q = (t1.tgt, t2.tgt)
            if q not in parent:
                parent[q] = (p, x)
                queue.append(q)
    return None


def sample_distinguishing_sequences(m1: Fsm, m2: Fsm, count: int, rng=None) -> list[tuple[str, ...]]:
    """Up to ``count`` distinct distinguishing words.

    The shortest word always comes first; the rest are random walks in the
    product, capped at ``2 * |S1| * |S2|`` steps, kept only if they hit the
    sink.
    """
    if count < 1:
        raise ValueError("count must be positive")
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    shortest = shortest_distinguishing_sequence(m1, m2)
    if shortest is None:
        return []
    product = build_product(m1, m2)
    found = [shortest]
    cap = 2 * len(m1.states) * len(m2.states)
    attempts = 0
    while len(found) < count and attempts < 50 * count:
        attempts += 1
        p, word = product.initial, []
        for _ in range(cap):
            x = rng.choice(product.inputs)
            word.append(x)
            p = product.edges[p, x]
            if p is SINK:
                w = tuple(word)
                if w not in found:
                    found.append(w)
                break
    return found
