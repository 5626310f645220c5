import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dfsms
from fsmrepair.fsm import DomainError, Transition
from fsmrepair.mutation import (
    FaultModel,
    MutationMachine,
    augment_with_oracle,
    build_mutation_machine,
    contains,
    domain_size,
)

OUTPUT_ONLY = FaultModel(output_faults=True, missing_faults=False)


def test_fig1_output_domain(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    assert domain_size(mm) == 256 == 2**8
    assert contains(mm, fig1)
    assert len(mm.transitions) == 16


def test_missing_cells_get_every_candidate(fig1):
    partial = fig1.remove(("S4", "a", "1", "S1"))
    mm = build_mutation_machine(partial, FaultModel(output_faults=False, missing_faults=True))
    assert len(mm.cells["S4", "a"]) == len(fig1.outputs) * len(fig1.states)
    assert domain_size(mm) == 8
    assert contains(mm, fig1)


def test_transfer_faults(fig1):
    mm = build_mutation_machine(fig1, FaultModel(output_faults=False, missing_faults=False, transfer_faults=True))
    assert domain_size(mm) == 4**8


def test_fault_model_parsing():
    assert FaultModel.parse("output, missing") == FaultModel(True, True, False)
    assert FaultModel.parse("transfer") == FaultModel(False, False, True)
    with pytest.raises(ValueError):
        FaultModel.parse("sideways")
    with pytest.raises(ValueError):
        FaultModel.parse("")


def test_empty_cells_rejected(fig1):
    with pytest.raises(DomainError):
        MutationMachine(fig1.remove(("S4", "a", "1", "S1")))
    with pytest.raises(DomainError):
        build_mutation_machine(fig1, FaultModel(extra_transitions=(("S1", "a", "0", "S9"),)))


def test_contains_rejects_foreign_machines(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    assert not contains(mm, fig1.replace(initial="S2"))
    assert not contains(mm, fig1.remove(("S1", "a", "0", "S1")).add(("S1", "a", "0", "S2")))
    assert not contains(mm, fig1.add(("S1", "a", "1", "S1")))


@given(dfsms(max_states=4), st.sampled_from(["output", "missing", "transfer", "output,transfer"]))
def test_domain_size_matches_enumeration(m, kinds):
    mm = build_mutation_machine(m, FaultModel.parse(kinds))
    assert contains(mm, m)
    size = domain_size(mm)
    if size <= 10_000:
        selections = list(mm.selections())
        assert len(selections) == size == len(set(selections))
        assert all(contains(mm, s) for s in selections)


@given(dfsms(max_states=4), st.data())
def test_augment_idempotent(g, data):
    oracle = g.with_transitions(
        Transition(t.src, t.inp, data.draw(st.sampled_from(g.outputs)), data.draw(st.sampled_from(g.states)))
        for t in g.transitions
    )
    mm = build_mutation_machine(g, OUTPUT_ONLY)
    once, added = augment_with_oracle(mm, oracle)
    assert contains(once, oracle)
    assert added == len(set(oracle.transitions) - set(mm.transitions))
    twice, again = augment_with_oracle(once, oracle)
    assert again == 0 and twice == once


def test_augment_needs_matching_states(fig1):
    mm = build_mutation_machine(fig1, OUTPUT_ONLY)
    with pytest.raises(DomainError):
        augment_with_oracle(mm, fig1.replace(states=fig1.states + ("S5",)).add(("S5", "a", "0", "S5")))


def test_extra_transitions(fig1):
    fm = FaultModel(output_faults=False, missing_faults=False, extra_transitions=(Transition("S1", "a", "1", "S3"),))
    mm = build_mutation_machine(fig1, fm)
    assert domain_size(mm) == 2
