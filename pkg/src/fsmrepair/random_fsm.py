"""Seeded generation of random oracle machines.

All randomness goes through :class:`random.Random` (MT19937). Seeding it
with an integer and using only ``randrange``/``choice``/``shuffle`` gives
the same stream on every CPython >= 3.2.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .fsm import Fsm, Transition


@dataclass(frozen=True)
class GenSpec:
    num_states: int
    num_inputs: int
    num_outputs: int
    seed: int = 0

    def __post_init__(self):
        if min(self.num_states, self.num_inputs, self.num_outputs) < 1:
            raise ValueError("state, input and output counts must be positive")


def input_alphabet(k: int) -> tuple[str, ...]:
    """``a, b, ..., z, a1, b1, ...``"""
    letters = string.ascii_lowercase
    return tuple(letters[i % 26] + (str(i // 26) if i >= 26 else "") for i in range(k))


def output_alphabet(k: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(k))


def generate_oracle(spec: GenSpec) -> Fsm:
    """Random deterministic, complete, initially connected machine.

    A random spanning tree rooted at ``S1`` is laid over the first
    ``n - 1`` assigned cells so every state is reachable; the remaining
    cells get a uniformly random target and output.
    """
    rng = random.Random(spec.seed)
    states = tuple(f"S{i}" for i in range(1, spec.num_states + 1))
    inputs = input_alphabet(spec.num_inputs)
    outputs = output_alphabet(spec.num_outputs)

    table: dict[tuple[str, str], Transition] = {}
    reached = [states[0]]
    for new in states[1:]:
        # with k >= 1 inputs a tree over r states always leaves a free cell
        open_cells = [(s, x) for s in reached for x in inputs if (s, x) not in table]
        s, x = rng.choice(open_cells)
        table[s, x] = Transition(s, x, rng.choice(outputs), new)
        reached.append(new)
    for s in states:
        for x in inputs:
            if (s, x) not in table:
                table[s, x] = Transition(s, x, rng.choice(outputs), rng.choice(states))
    transitions = tuple(table[s, x] for s in states for x in inputs)
    return Fsm(states, states[0], inputs, outputs, transitions)
