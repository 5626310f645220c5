"""Iterative repair of generated machines.

Three drivers refine the prompt: by syntactic fault lists, by
distinguishing traces, or by checking sequences answered by an expert. The
fourth mines a repair domain built from the generated machine and never
prompts again.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .checking import build_checking_sequence, complete_inputs
from .diff import syntactic_diff
from .expert import Expert, OutputQuery, ask
from .fsm import DomainError, Fsm, FsmError, response
from .llm import Backend, BackendResponse, generate_fsm
from .miner import MiningStatus, consistent, mine
from .mutation import FaultModel, augment_with_oracle, build_mutation_machine
from .prompts import PromptMessage, build_generation_prompt, syntactic_fragment, trace_fragment
from .product import are_equivalent, sample_distinguishing_sequences, shortest_distinguishing_sequence
from .serialize import serialize_csv

log = logging.getLogger(__name__)


class Strategy(str, enum.Enum):
    SYNTACTIC = "syntactic"
    DISTSEQ = "distseq"
    CHECKSEQ = "checkseq"
    FAULTMODEL = "faultmodel"


@dataclass
class RepairConfig:
    strategy: Strategy = Strategy.SYNTACTIC
    max_iter: int | None = None
    state_bound: int | None = None
    fault_model: FaultModel = field(default_factory=FaultModel)
    sequences_per_attempt: int = 3
    conserve: bool = True
    checkseq_budget: float = 60.0
    max_queries: int | None = None
    seed: int = 0

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        if self.max_iter is not None and self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.sequences_per_attempt < 1:
            raise ValueError("need at least one sequence per attempt")


def default_max_iter(m: Fsm) -> int:
    return len(m.states) * len(m.inputs)


@dataclass
class PromptState:
    """The prompt chain of one session; ``history`` holds (prompt, response text)."""

    current: PromptMessage
    attempt: int = 0
    history: list[tuple[str, str]] = field(default_factory=list)

    def extend(self, fragment: str):
        self.current = self.current.with_user(self.current.user + fragment)
        self.attempt += 1


@dataclass
class RepairOutcome:
    strategy: Strategy
    success: bool = False
    attempts: int = 0
    machine: Fsm | None = None
    initially_faulty: bool = False
    reason: str = ""
    revisits: int = 0
    low_confidence: bool = False
    equivalent_to_oracle: bool | None = None
    queries: list[OutputQuery] = field(default_factory=list)
    augmented: int = 0
    history: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def query_count(self) -> int:
        return len(self.queries)

    @property
    def max_query_length(self) -> int:
        return max((len(q.inputs) for q in self.queries), default=0)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "success": self.success,
            "attempts": self.attempts,
            "initially_faulty": self.initially_faulty,
            "reason": self.reason,
            "revisits": self.revisits,
            "low_confidence": self.low_confidence,
            "equivalent_to_oracle": self.equivalent_to_oracle,
            "machine": serialize_csv(self.machine) if self.machine is not None else None,
            "augmented": self.augmented,
            "query_count": self.query_count,
            "max_query_length": self.max_query_length,
            "queries": [q.to_dict() for q in self.queries],
            "history": [{"prompt": p, "response": r} for p, r in self.history],
            "warnings": self.warnings,
        }

    def save_transcript(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


class _Session:
    """Prompt chain plus revisit bookkeeping shared by the prompting drivers."""

    def __init__(self, description: str, backend: Backend, outcome: RepairOutcome):
        self.state = PromptState(build_generation_prompt(description))
        self.backend = backend
        self.outcome = outcome
        self.seen: set[str] = set()

    def query(self) -> BackendResponse:
        r = generate_fsm(self.backend, self.state.current)
        self.state.history.append((self.state.current.user, r.raw_text))
        self.outcome.history = self.state.history
        key = hashlib.sha256(
            (serialize_csv(r.machine) if r.machine is not None else r.raw_text).encode()
        ).hexdigest()
        if key in self.seen:
            self.outcome.revisits += 1
            log.info("attempt %d regenerated an already visited machine", self.state.attempt)
        self.seen.add(key)
        return r

    def refine(self, fragment: str) -> BackendResponse:
        prev = self.state.current.user
        self.state.extend(fragment)
        assert self.state.current.user.startswith(prev)
        self.outcome.attempts = self.state.attempt
        return self.query()


def _audit(outcome: RepairOutcome, oracle: Fsm | None):
    m = outcome.machine
    if oracle is None or m is None:
        return
    try:
        outcome.equivalent_to_oracle = are_equivalent(oracle, m)
    except FsmError:
        outcome.equivalent_to_oracle = False


def _comparable(m: Fsm, reference: Fsm) -> Fsm:
    """Deterministic complete view of ``m`` over ``reference``'s inputs."""
    inputs = tuple(dict.fromkeys(reference.inputs + m.inputs))
    outputs = tuple(dict.fromkeys(m.outputs + reference.outputs))
    det, _ = m.replace(inputs=inputs, outputs=outputs).first_per_cell()
    det = det.with_transitions(t for t in det.transitions if t.inp in reference.inputs)
    return complete_inputs(det.replace(inputs=reference.inputs))


def repair_syntactic(
    oracle: Fsm, description: str, backend: Backend, cfg: RepairConfig | None = None
) -> RepairOutcome:
    """Prompt with the transitions to add, to drop and to keep until the
    generated machine has an empty syntactic diff against ``oracle``."""
    cfg = cfg or RepairConfig(Strategy.SYNTACTIC)
    max_iter = default_max_iter(oracle) if cfg.max_iter is None else cfg.max_iter
    outcome = RepairOutcome(Strategy.SYNTACTIC)
    session = _Session(description, backend, outcome)
    rng = random.Random(cfg.seed)
    r = session.query()
    while True:
        if r.machine is None:
            present, absent, correct = oracle.transitions, (), ()
            done = False
        else:
            d = syntactic_diff(oracle, r.machine)
            foreign = tuple(t for t in r.machine.transitions if t.inp not in oracle.inputs)
            present, absent, correct = d.desired, d.undesired + foreign, d.correct
            done = d.is_empty and not d.state_set_mismatch and not foreign
        if session.state.attempt == 0:
            outcome.initially_faulty = not done
        outcome.machine = r.machine
        if done:
            outcome.success = True
            break
        if session.state.attempt >= max_iter:
            outcome.reason = f"still faulty after {max_iter} repair attempts"
            break
        r = session.refine(syntactic_fragment(present, absent, correct if cfg.conserve else None, rng))
    _audit(outcome, oracle)
    return outcome


def _probe_sequences(oracle: Fsm, m: Fsm, view: Fsm) -> list[tuple[str, ...]]:
    """Access words ending in every cell where ``m`` is not a DFSM over the
    oracle's inputs; used when ``view`` already behaves like the oracle."""
    words = []
    for s in oracle.reachable_states():
        cell_bad = [x for x in oracle.inputs if len(m.cell(s, x)) != 1] if s in m.states else list(oracle.inputs)
        for x in cell_bad:
            prefix = shortest_access(oracle, s)
            if prefix is not None:
                words.append(prefix + (x,))
    return words


def shortest_access(m: Fsm, target: str) -> tuple[str, ...] | None:
    from .checking import transfer_sequence

    return transfer_sequence(m, m.initial, target)


def repair_distseq(
    oracle: Fsm, description: str, backend: Backend, cfg: RepairConfig | None = None
) -> RepairOutcome:
    """Prompt with distinguishing input sequences and the oracle's outputs
    on them until the generated machine is equivalent to ``oracle``."""
    cfg = cfg or RepairConfig(Strategy.DISTSEQ)
    max_iter = default_max_iter(oracle) if cfg.max_iter is None else cfg.max_iter
    outcome = RepairOutcome(Strategy.DISTSEQ)
    session = _Session(description, backend, outcome)
    rng = random.Random(cfg.seed)
    r = session.query()
    while True:
        outcome.machine = r.machine
        seqs: list[tuple[str, ...]] = []
        if r.machine is None:
            done = False
            seqs = [shortest_access(oracle, s) + (x,) for s in oracle.reachable_states() for x in oracle.inputs]
        else:
            m = r.machine
            exact = m.is_deterministic() and m.is_complete() and set(m.inputs) == set(oracle.inputs)
            done = exact and are_equivalent(oracle, m)
            if not done:
                view = _comparable(m, oracle)
                seqs = sample_distinguishing_sequences(oracle, view, cfg.sequences_per_attempt, rng)
                if not seqs:
                    seqs = _probe_sequences(oracle, m, view)[: cfg.sequences_per_attempt]
        if session.state.attempt == 0:
            outcome.initially_faulty = not done
        if done:
            outcome.success = True
            break
        if session.state.attempt >= max_iter:
            outcome.reason = f"not equivalent after {max_iter} repair attempts"
            break
        fragment = "".join(trace_fragment(s, response(oracle, s)) for s in seqs)
        r = session.refine(fragment)
    _audit(outcome, oracle)
    return outcome


def repair_checkseq(
    description: str,
    backend: Backend,
    expert: Expert,
    cfg: RepairConfig | None = None,
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
    oracle: Fsm | None = None,
) -> RepairOutcome:
    """Checking-sequence repair loop.

    ``cfg.max_iter`` plays the role of K, the number of generations; it
    defaults to ``n * |inputs|``. ``inputs``/``outputs`` widen the
    alphabets of the generated machine before completion, and ``oracle``
    is only used to audit the result.
    """
    cfg = cfg or RepairConfig(Strategy.CHECKSEQ)
    outcome = RepairOutcome(Strategy.CHECKSEQ)
    session = _Session(description, backend, outcome)
    k = cfg.max_iter
    r = session.query()
    while True:
        m = r.machine
        outcome.machine = m
        if m is None:
            outcome.reason = "unparsable response: " + "; ".join(r.diagnostics[-1:])
            outcome.initially_faulty = outcome.initially_faulty or session.state.attempt == 0
            break
        m = m.replace(
            inputs=tuple(dict.fromkeys(m.inputs + tuple(inputs))),
            outputs=tuple(dict.fromkeys(m.outputs + tuple(outputs))),
        )
        m, dropped = m.first_per_cell()
        if dropped:
            msg = f"attempt {session.state.attempt}: kept first transition of nondeterministic cells, dropped {len(dropped)}"
            outcome.warnings.append(msg)
            log.warning(msg)
        m = complete_inputs(m)
        if k is None:
            k = (cfg.state_bound or len(m.states)) * len(m.inputs)
        n = max(cfg.state_bound or len(m.states), len(m.states))
        cs = build_checking_sequence(m, n, cfg.checkseq_budget, cfg.seed)
        if not cs.verified:
            outcome.low_confidence = True
            outcome.warnings.append(f"attempt {session.state.attempt}: checking sequence not verified ({cs.reason or 'budget'})")
        q = ask(expert, cs.inputs)
        outcome.queries.append(q)
        faulty = q.answer != cs.outputs
        if session.state.attempt == 0:
            outcome.initially_faulty = faulty
        if not faulty:
            outcome.success = True
            outcome.machine = m
            break
        k -= 1
        if k <= 0:
            outcome.reason = "repair failure"
            break
        r = session.refine(trace_fragment(q.inputs, q.answer))
    _audit(outcome, oracle)
    return outcome


def repair_fault_model(
    description: str,
    backend: Backend,
    expert: Expert,
    cfg: RepairConfig | None = None,
    oracle: Fsm | None = None,
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
) -> RepairOutcome:
    """Generate once, then mine the repair domain spanned by the fault model.

    With an ``oracle`` the domain is widened to its alphabets and states and
    augmented with any oracle transition it lacks.
    """
    cfg = cfg or RepairConfig(Strategy.FAULTMODEL)
    outcome = RepairOutcome(Strategy.FAULTMODEL)
    session = _Session(description, backend, outcome)
    r = session.query()
    g = r.machine
    if g is None:
        outcome.initially_faulty = True
        outcome.reason = "unparsable response"
        return outcome
    outcome.machine = g
    if oracle is not None:
        inputs, outputs = tuple(inputs) + oracle.inputs, tuple(outputs) + oracle.outputs
        g = g.replace(states=tuple(dict.fromkeys(g.states + oracle.states)))
    g = g.replace(
        inputs=tuple(dict.fromkeys(g.inputs + tuple(inputs))),
        outputs=tuple(dict.fromkeys(g.outputs + tuple(outputs))),
    )
    if oracle is not None:
        outcome.initially_faulty = not syntactic_diff(oracle, r.machine).is_empty
    try:
        mm = build_mutation_machine(g, cfg.fault_model)
        if oracle is not None and mm.machine.initial == oracle.initial:
            mm, outcome.augmented = augment_with_oracle(mm, oracle)
    except DomainError as exc:
        outcome.reason = f"no repair domain: {exc}"
        return outcome
    result = mine(mm, expert, cfg.max_queries)
    outcome.queries = result.queries
    if result.status is MiningStatus.REPAIRED:
        outcome.success = True
        outcome.machine = result.machine
        assert consistent(result.machine, result.queries)
    else:
        outcome.reason = result.reason or result.status.value
    _audit(outcome, oracle)
    return outcome


def run_repair(
    cfg: RepairConfig,
    description: str,
    backend: Backend,
    oracle: Fsm | None = None,
    expert: Expert | None = None,
) -> RepairOutcome:
    """Dispatch on ``cfg.strategy``; the oracle-driven strategies need ``oracle``."""
    s = cfg.strategy
    if s in (Strategy.SYNTACTIC, Strategy.DISTSEQ):
        if oracle is None:
            raise ValueError(f"{s.value} repair needs an oracle machine")
        fn = repair_syntactic if s is Strategy.SYNTACTIC else repair_distseq
        return fn(oracle, description, backend, cfg)
    if expert is None:
        raise ValueError(f"{s.value} repair needs an expert")
    if s is Strategy.CHECKSEQ:
        kw = {"inputs": oracle.inputs, "outputs": oracle.outputs, "oracle": oracle} if oracle else {}
        return repair_checkseq(description, backend, expert, cfg, **kw)
    return repair_fault_model(description, backend, expert, cfg, oracle)
