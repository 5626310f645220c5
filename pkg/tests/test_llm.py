import json
import random

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsmrepair.diff import FaultKind, syntactic_diff
from fsmrepair.llm import (
    TABLE1,
    BackendError,
    LiveBackend,
    LiveConfig,
    PerfectBackend,
    SimulatorBackend,
    SimulatorProfile,
    draw_fault_counts,
    generate_fsm,
    make_backend,
    poisson,
    table1_profile,
)
from fsmrepair.nl import describe_fsm
from fsmrepair.prompts import build_generation_prompt, syntactic_fragment, trace_fragment
from fsmrepair.random_fsm import GenSpec, generate_oracle
from fsmrepair.fsm import response

ALL_KINDS = {k: 0.6 for k in FaultKind}


def prompt_for(m, seed=0):
    return build_generation_prompt(describe_fsm(m, seed))


def test_perfect_backend(fig1):
    r = generate_fsm(PerfectBackend(), prompt_for(fig1))
    assert r.parsed and r.machine == fig1


def test_unparsable_response():
    class Chatty:
        name = "chatty"

        def complete(self, prompt):
            return "I cannot help with that."

    r = generate_fsm(Chatty(), build_generation_prompt("x"))
    assert not r.parsed and r.diagnostics[-1].startswith("unparsable response")


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(0, 100))
def test_simulator_faithful_and_deterministic(seed, profile_seed):
    m = generate_oracle(GenSpec(3 + seed % 8, 3, 2, seed))
    sim = SimulatorBackend(SimulatorProfile(ALL_KINDS, seed=profile_seed))
    prompt = prompt_for(m, seed)
    text = sim.complete(prompt)
    recipe = sim.last_recipe
    assert SimulatorBackend(SimulatorProfile(ALL_KINDS, seed=profile_seed)).complete(prompt) == text
    r = generate_fsm(sim, prompt)
    counts = syntactic_diff(m, r.machine).counts()
    injected = {k: sum(1 for kind, _ in recipe if kind is k) for k in FaultKind}
    assert counts == injected


def test_zero_rates_equal_perfect():
    for seed in range(10):
        m = generate_oracle(GenSpec(6, 3, 2, seed))
        p = prompt_for(m, seed)
        assert SimulatorBackend(SimulatorProfile()).complete(p) == PerfectBackend().complete(p)


def test_cooperative_simulator_applies_directives(fig1):
    sim = SimulatorBackend(SimulatorProfile({FaultKind.LOCAL_OUTPUT: 1.0}, {FaultKind.LOCAL_OUTPUT: 1}, min_total=1))
    prompt = prompt_for(fig1)
    faulty = generate_fsm(sim, prompt).machine
    d = syntactic_diff(fig1, faulty)
    assert len(d) == 1
    fixed = generate_fsm(sim, prompt.with_user(prompt.user + syntactic_fragment(d.desired, d.undesired, d.correct)))
    assert fixed.machine == fig1
    word = ("b", "a", "b", "a") * 2 + ("b", "b", "a", "a")
    traced = generate_fsm(sim, prompt.with_user(prompt.user + trace_fragment(word, response(fig1, word))))
    assert response(traced.machine, word) == response(fig1, word)
    stubborn = SimulatorBackend(sim.profile, cooperative=False)
    again = generate_fsm(stubborn, prompt.with_user(prompt.user + syntactic_fragment(d.desired, d.undesired, None)))
    assert again.machine == faulty


def test_poisson_mean():
    rng = random.Random(1)
    draws = [poisson(rng, 0.43) for _ in range(20000)]
    assert abs(sum(draws) / len(draws) - 0.43) < 0.02
    assert poisson(rng, 0) == 0


def test_fault_counts_respect_caps_and_minimum():
    rng = random.Random(2)
    prof = table1_profile(10, min_total=1)
    rates, maxima = TABLE1[10]
    for _ in range(500):
        c = draw_fault_counts(prof, rng)
        assert all(c[k] <= maxima[k] for k in FaultKind)
        assert sum(c.values()) >= 1
    forced = SimulatorProfile({FaultKind.MISSING: 0.001}, {FaultKind.MISSING: 2}, min_total=2)
    assert draw_fault_counts(forced, rng, attempts=1)[FaultKind.MISSING] == 2


def test_profile_serialization(tmp_path):
    prof = table1_profile(5, seed=3)
    assert SimulatorProfile.from_dict(json.loads(json.dumps(prof.to_dict()))) == prof
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"rates": {"missing_transition": 0.5}, "seed": 4}))
    assert SimulatorProfile.load(path).rates == {FaultKind.MISSING: 0.5}
    with pytest.raises(ValueError):
        SimulatorProfile({FaultKind.MISSING: -1})
    with pytest.raises(ValueError):
        SimulatorProfile({"sideways": 1})


def test_table1_closest_size():
    assert table1_profile(4).rates == TABLE1[5][0]
    assert table1_profile(25).maxima == TABLE1[10][1]


# -- live backend over a mock transport ---------------------------------------

def completion(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def live(handler, **kw):
    cfg = LiveConfig(api_key="k", base_url="https://example.test/v1", **kw)
    return LiveBackend(cfg, httpx.Client(transport=httpx.MockTransport(handler)), sleep=lambda s: None)


def test_live_request_body_is_template_output(fig1):
    seen = []

    def handler(request):
        seen.append(request)
        return httpx.Response(200, json=completion("State,Input,Output,Next_State\nS1,a,0,S1\n"))

    prompt = prompt_for(fig1)
    text = live(handler).complete(prompt)
    assert text.startswith("State,")
    (req,) = seen
    body = json.loads(req.content)
    assert str(req.url) == "https://example.test/v1/chat/completions"
    assert req.headers["authorization"] == "Bearer k"
    assert body == {"model": "gpt-4o", "temperature": 0.0, "messages": prompt.messages()}
    assert body["messages"][1]["content"] == prompt.user


def test_live_retries_then_succeeds():
    codes = iter([429, 503])
    sleeps = []

    def handler(request):
        code = next(codes, 200)
        return httpx.Response(code, json=completion("ok") if code == 200 else {})

    cfg = LiveConfig(api_key="k", backoff=0.5)
    b = LiveBackend(cfg, httpx.Client(transport=httpx.MockTransport(handler)), sleep=sleeps.append)
    assert b.complete(build_generation_prompt("x")) == "ok"
    assert sleeps == [0.5, 1.0]


def test_live_transport_errors_and_give_up():
    def handler(request):
        raise httpx.ConnectError("down")

    with pytest.raises(BackendError):
        live(handler, max_retries=2).complete(build_generation_prompt("x"))


def test_live_client_error_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="bad key")

    with pytest.raises(BackendError):
        live(handler).complete(build_generation_prompt("x"))
    assert len(calls) == 1


def test_live_config(monkeypatch, tmp_path):
    for var in ("FSMREPAIR_API_KEY", "OPENAI_API_KEY", "FSMREPAIR_BASE_URL", "FSMREPAIR_MODEL"):
        monkeypatch.delenv(var, raising=False)
    with pytest.raises(BackendError):
        LiveBackend(LiveConfig.from_env())
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"api_key": "file", "model": "m1"}))
    monkeypatch.setenv("FSMREPAIR_MODEL", "m2")
    cfg = LiveConfig.from_env(path)
    assert (cfg.api_key, cfg.model) == ("file", "m2")


def test_make_backend():
    assert isinstance(make_backend("perfect"), PerfectBackend)
    assert isinstance(make_backend("sim"), SimulatorBackend)
    with pytest.raises(ValueError):
        make_backend("psychic")
