from collections import deque

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsmrepair.random_fsm import GenSpec, generate_oracle


def bfs_states(m):
    seen, queue = {m.initial}, deque([m.initial])
    while queue:
        q = queue.popleft()
        for t in m.transitions_from(q):
            if t.tgt not in seen:
                seen.add(t.tgt)
                queue.append(t.tgt)
    return seen


@given(st.integers(1, 12), st.integers(1, 6), st.integers(1, 4), st.integers(0, 10**6))
def test_generated_machines(n, k, o, seed):
    m = generate_oracle(GenSpec(n, k, o, seed))
    assert m.is_deterministic() and m.is_complete()
    assert len(m.transitions) == n * k
    assert bfs_states(m) == set(m.states)
    assert m == generate_oracle(GenSpec(n, k, o, seed))


def test_seeds_differ():
    machines = {generate_oracle(GenSpec(5, 3, 2, s)) for s in range(10)}
    assert len(machines) > 1


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, 0)])
def test_spec_validation(args):
    with pytest.raises(ValueError):
        GenSpec(*args)
