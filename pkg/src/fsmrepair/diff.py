"""Syntactic comparison of machines and fault injection.

States are matched by name. Each (state, input) cell is compared on its
transition sets; a cell where output and target both differ yields two
evidences.
"""

from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .fsm import DomainError, Fsm, Transition


class FaultKind(str, enum.Enum):
    ADDITIONAL = "additional_transition"  # type 1
    MISSING = "missing_transition"  # type 2
    LOCAL_OUTPUT = "local_output"  # type 3
    TRANSFER = "transfer"  # type 4

    @property
    def type_number(self) -> int:
        return list(FaultKind).index(self) + 1


@dataclass(frozen=True)
class FaultEvidence:
    kind: FaultKind
    expected: Transition | None = None
    observed: Transition | None = None

    def __post_init__(self):
        paired = self.kind in (FaultKind.LOCAL_OUTPUT, FaultKind.TRANSFER)
        if paired and (self.expected is None or self.observed is None):
            raise ValueError(f"{self.kind.value} evidence needs both transitions")
        if self.kind is FaultKind.ADDITIONAL and (self.observed is None or self.expected is not None):
            raise ValueError("additional-transition evidence carries the observed transition only")
        if self.kind is FaultKind.MISSING and (self.expected is None or self.observed is not None):
            raise ValueError("missing-transition evidence carries the expected transition only")

    @property
    def cell(self) -> tuple[str, str]:
        t = self.expected or self.observed
        return t.src, t.inp

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "expected": list(self.expected) if self.expected else None,
            "observed": list(self.observed) if self.observed else None,
        }


@dataclass(frozen=True)
class SyntacticDiff:
    state_set_mismatch: bool
    alphabet_mismatch: bool
    evidences: tuple[FaultEvidence, ...]
    desired: tuple[Transition, ...]  # in expected, absent from observed
    undesired: tuple[Transition, ...]  # in observed, absent from expected
    correct: tuple[Transition, ...] = field(default=())

    @property
    def is_empty(self) -> bool:
        return not (self.state_set_mismatch or self.alphabet_mismatch or self.evidences)

    def __len__(self):
        return len(self.evidences)

    def counts(self) -> dict[FaultKind, int]:
        c = Counter(e.kind for e in self.evidences)
        return {k: c.get(k, 0) for k in FaultKind}

    def to_dict(self) -> dict:
        return {
            "state_set_mismatch": self.state_set_mismatch,
            "alphabet_mismatch": self.alphabet_mismatch,
            "evidences": [e.to_dict() for e in self.evidences],
            "desired": [list(t) for t in self.desired],
            "undesired": [list(t) for t in self.undesired],
            "counts": {k.value: v for k, v in self.counts().items()},
        }


def _classify_cell(exp: Sequence[Transition], obs: Sequence[Transition]) -> list[FaultEvidence]:
    only_exp = [t for t in exp if t not in obs]
    only_obs = [t for t in obs if t not in exp]
    found = []
    for e, o in zip(only_exp, only_obs):
        if e.out != o.out:
            found.append(FaultEvidence(FaultKind.LOCAL_OUTPUT, e, o))
        if e.tgt != o.tgt:
            found.append(FaultEvidence(FaultKind.TRANSFER, e, o))
    k = min(len(only_exp), len(only_obs))
    found += [FaultEvidence(FaultKind.MISSING, expected=e) for e in only_exp[k:]]
    found += [FaultEvidence(FaultKind.ADDITIONAL, observed=o) for o in only_obs[k:]]
    return found


def syntactic_diff(expected: Fsm, observed: Fsm) -> SyntacticDiff:
    """Compare ``observed`` against ``expected`` cell by cell.

    Within a cell, transitions present on one side only are paired in
    listing order; each pair gives a local-output and/or transfer evidence,
    leftovers are missing (expected side) or additional (observed side).
    Cells on inputs unknown to ``expected`` are not classified; they set
    ``alphabet_mismatch``.
    """
    states = list(dict.fromkeys(expected.states + observed.states))
    evidences: list[FaultEvidence] = []
    desired: list[Transition] = []
    undesired: list[Transition] = []
    correct: list[Transition] = []
    for s in states:
        for x in expected.inputs:
            exp, obs = expected.cell(s, x), observed.cell(s, x)
            evidences += _classify_cell(exp, obs)
            desired += [t for t in exp if t not in obs]
            undesired += [t for t in obs if t not in exp]
            correct += [t for t in obs if t in exp]
    return SyntacticDiff(
        state_set_mismatch=set(expected.states) != set(observed.states),
        alphabet_mismatch=set(expected.inputs) != set(observed.inputs),
        evidences=tuple(evidences),
        desired=tuple(desired),
        undesired=tuple(undesired),
        correct=tuple(correct),
    )


# -- fault injection ----------------------------------------------------------

Recipe = Sequence[tuple[FaultKind, tuple[str, str]]]


def inject_faults(m: Fsm, recipe: Recipe, rng=None) -> Fsm:
    """Apply ``(kind, (state, input))`` faults to ``m``.

    Local-output and transfer faults may share a cell; any other repeat or
    combination on one cell is rejected, as is a recipe that would leave a
    state without any transition (it would drop out of the serialized
    machine).
    """
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    per_cell: dict[tuple[str, str], list[FaultKind]] = {}
    for kind, (s, x) in recipe:
        kind = FaultKind(kind)
        if s not in m.states or x not in m.inputs:
            raise DomainError(f"fault location ({s},{x}) is not a cell of the machine")
        per_cell.setdefault((s, x), []).append(kind)

    transitions = list(m.transitions)
    for (s, x), kinds in per_cell.items():
        if len(set(kinds)) != len(kinds):
            raise DomainError(f"repeated fault kind on cell ({s},{x})")
        if len(kinds) > 1 and not set(kinds) <= {FaultKind.LOCAL_OUTPUT, FaultKind.TRANSFER}:
            raise DomainError(f"incompatible faults on cell ({s},{x}): {[k.value for k in kinds]}")
        cell = m.cell(s, x)
        kind = kinds[0]
        if kind is FaultKind.ADDITIONAL:
            taken = set(cell)
            options = [
                (s, x, y, t) for y in m.outputs for t in m.states
                if (s, x, y, t) not in taken and (not cell or all(y != c.out for c in cell))
            ]
            if not options:
                raise DomainError(f"no additional transition possible on ({s},{x})")
            transitions.append(Transition(*rng.choice(options)))
            continue
        if len(cell) != 1:
            raise DomainError(f"cell ({s},{x}) must hold exactly one transition for {kind.value}")
        old = cell[0]
        i = transitions.index(old)
        if kind is FaultKind.MISSING:
            del transitions[i]
            continue
        out, tgt = old.out, old.tgt
        if FaultKind.LOCAL_OUTPUT in kinds:
            choices = [y for y in m.outputs if y != old.out]
            if not choices:
                raise DomainError("local output fault needs at least two outputs")
            out = rng.choice(choices)
        if FaultKind.TRANSFER in kinds:
            choices = [t for t in m.states if t != old.tgt]
            if not choices:
                raise DomainError("transfer fault needs at least two states")
            tgt = rng.choice(choices)
        transitions[i] = Transition(s, x, out, tgt)

    result = m.with_transitions(transitions)
    used = {t.src for t in transitions} | {t.tgt for t in transitions}
    if len(m.states) > 1 and set(m.states) - used:
        raise DomainError("fault recipe would leave a state without transitions")
    return result


def random_recipe(m: Fsm, counts: dict[FaultKind, int], rng=None) -> list[tuple[FaultKind, tuple[str, str]]]:
    """Pick distinct cells for the requested number of faults of each kind.

    Counts are clipped to the number of cells available.
    """
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    cells = [(s, x) for s in m.states for x in m.inputs if len(m.cell(s, x)) == 1]
    rng.shuffle(cells)
    refs = Counter()
    for t in m.transitions:
        refs[t.src] += 1
        refs[t.tgt] += 1
    recipe = []
    for kind in FaultKind:
        if kind in (FaultKind.LOCAL_OUTPUT, FaultKind.ADDITIONAL) and len(m.outputs) < 2:
            continue
        if kind is FaultKind.TRANSFER and len(m.states) < 2:
            continue
        for _ in range(counts.get(kind, 0)):
            i = next((i for i in range(len(cells) - 1, -1, -1) if _keeps_states(m, kind, cells[i], refs)), None)
            if i is None:
                break
            recipe.append((kind, cells.pop(i)))
    return recipe


def _keeps_states(m: Fsm, kind: FaultKind, cell: tuple[str, str], refs: Counter) -> bool:
    """Whether faulting ``cell`` leaves every state referenced; updates ``refs`` if so.

    A missing transition drops a reference to its source and its target, a
    transfer drops one to its old target (the new one is only a gain).
    """
    if kind not in (FaultKind.MISSING, FaultKind.TRANSFER) or len(m.states) == 1:
        return True
    (t,) = m.cell(*cell)
    lost = Counter([t.tgt]) if kind is FaultKind.TRANSFER else Counter([t.src, t.tgt])
    if any(refs[q] <= n for q, n in lost.items()):
        return False
    refs.subtract(lost)
    return True


def expected_evidence(recipe: Iterable[tuple[FaultKind, tuple[str, str]]]) -> Counter:
    """Multiset of (kind, cell) that :func:`syntactic_diff` should report."""
    return Counter((FaultKind(k), tuple(c)) for k, c in recipe)


def evidence_multiset(diff: SyntacticDiff) -> Counter:
    return Counter((e.kind, e.cell) for e in diff.evidences)
