import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dfsms
from fsmrepair.diff import FaultKind, inject_faults, random_recipe
from fsmrepair.expert import ExpertError, InteractiveExpert, OracleExpert, OutputQuery, ask
from fsmrepair.fsm import response
from fsmrepair.miner import (
    DomainTooLarge,
    MiningStatus,
    SelectionFormula,
    brute_force_mine,
    consistent,
    mine,
)
from fsmrepair.mutation import FaultModel, augment_with_oracle, build_mutation_machine, domain_size
from fsmrepair.product import are_equivalent
from fsmrepair.random_fsm import GenSpec, generate_oracle
from fsmrepair.sat import read_dimacs, solve_cnf

OUTPUT_ONLY = FaultModel(output_faults=True, missing_faults=False)


def count_models(mm, queries):
    """Consistent selections counted by enumerating the formula's models."""
    f = SelectionFormula(mm)
    for q in queries:
        f.add_trace_constraint(q)
    n = 0
    while (m := f.solve()) is not None:
        n += 1
        f.solver.add_clause([-f.sel[t] for t in m.transitions])
    return n


def test_fig1_domain_repairs_output_fault(fig1):
    bad = fig1.remove(("S4", "a", "1", "S1")).add(("S4", "a", "0", "S1"))
    mm = build_mutation_machine(bad, OUTPUT_ONLY)
    res = mine(mm, OracleExpert(fig1))
    assert res.status is MiningStatus.REPAIRED
    assert are_equivalent(res.machine, fig1)
    assert consistent(res.machine, res.queries)
    assert res.query_count >= 1 and res.max_query_length >= 4


def test_oracle_outside_domain(fig1):
    # a transfer fault is invisible to an output-only domain
    bad = fig1.remove(("S4", "a", "1", "S1")).add(("S4", "a", "0", "S3"))
    mm = build_mutation_machine(bad, OUTPUT_ONLY)
    res = mine(mm, OracleExpert(fig1))
    brute = brute_force_mine(mm, OracleExpert(fig1))
    assert res.status is brute.status
    if res.status is MiningStatus.REPAIRED:
        assert not are_equivalent(res.machine, fig1)
        assert consistent(res.machine, res.queries)


def test_failure_when_answers_contradict_domain(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    res = mine(mm, lambda word: ("2",) * len(word))
    assert res.status is MiningStatus.FAILURE


def test_query_budget(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    res = mine(mm, OracleExpert(fig1), max_queries=0)
    assert res.status is MiningStatus.EXHAUSTED and len(res.candidates) == 2


def test_dimacs_dump_is_satisfiable(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    buf = io.StringIO()
    mine(mm, OracleExpert(fig1), dump_cnf=buf)
    nvars, clauses = read_dimacs(buf.getvalue())
    assert solve_cnf(nvars, clauses) is not None
    assert "c sel" in buf.getvalue()


def test_brute_force_limit(fig1):
    mm = build_mutation_machine(fig1, FaultModel(transfer_faults=True))
    with pytest.raises(DomainTooLarge):
        brute_force_mine(mm, OracleExpert(fig1))


def test_formula_counts_match_enumeration(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    assert count_models(mm, []) == 256
    q = ask(OracleExpert(fig1), "babab")
    expect = sum(response(s, q.inputs) == q.answer for s in mm.selections())
    assert count_models(mm, [q]) == expect < 256


@settings(max_examples=25)
@given(dfsms(max_states=3), st.integers(0, 10**6))
def test_constraints_monotone(m, seed):
    rng = random.Random(seed)
    mm = build_mutation_machine(m, FaultModel.parse("output"))
    oracle = rng.choice(list(mm.selections()))
    queries, prev = [], count_models(mm, [])
    for _ in range(3):
        word = tuple(rng.choice(m.inputs) for _ in range(rng.randint(1, 6)))
        queries.append(ask(OracleExpert(oracle), word))
        now = count_models(mm, queries)
        assert now <= prev
        assert now == sum(consistent(s, queries) for s in mm.selections())
        prev = now


def faulty_domain(seed):
    rng = random.Random(seed)
    oracle = generate_oracle(GenSpec(rng.randint(2, 4), 2, 2, seed))
    counts = {FaultKind.LOCAL_OUTPUT: rng.randint(0, 2), FaultKind.MISSING: rng.randint(0, 1)}
    g = inject_faults(oracle, random_recipe(oracle, counts, rng), rng)
    mm = build_mutation_machine(g, FaultModel.parse("output,missing"))
    if rng.random() < 0.7:
        mm, _ = augment_with_oracle(mm, oracle)
    return oracle, mm


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_agrees_with_brute_force(seed):
    oracle, mm = faulty_domain(seed)
    if domain_size(mm) > 10_000:
        return
    a = mine(mm, OracleExpert(oracle))
    b = brute_force_mine(mm, OracleExpert(oracle), max_queries=10**6)
    assert (a.status is MiningStatus.REPAIRED) == (b.status is MiningStatus.REPAIRED)
    if a.status is MiningStatus.REPAIRED:
        assert are_equivalent(a.machine, b.machine)
        assert are_equivalent(a.machine, oracle)
        assert consistent(a.machine, a.queries)


def test_expert_helpers():
    with pytest.raises(ValueError):
        OutputQuery(("a",), ())
    expert = InteractiveExpert(io.StringIO("0\n0 1\n"), io.StringIO())
    q = ask(expert, ("a", "b"))
    assert q.answer == ("0", "1") and q.source == "interactive"
    with pytest.raises(ExpertError):
        ask(InteractiveExpert(io.StringIO(""), io.StringIO()), ("a",))
