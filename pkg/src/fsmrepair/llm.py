"""Text-model backends turning a generation prompt into a CSV machine.

``LiveBackend`` talks to any chat-completions compatible HTTP endpoint.
``PerfectBackend`` parses the embedded description with the sentence
grammar. ``SimulatorBackend`` does the same and then injects seeded faults,
optionally honouring the repair fragments found in the prompt.
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .diff import FaultKind, inject_faults, random_recipe
from .fsm import Fsm, FsmError
from .nl import parse_description
from .prompts import PromptMessage, TraceDirective, TransitionDirective, description_of, parse_directives
from .serialize import ParseError, parse_csv, serialize_csv

log = logging.getLogger(__name__)


class BackendError(FsmError):
    """The backend could not produce any text."""


@dataclass
class BackendResponse:
    raw_text: str
    machine: Fsm | None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def parsed(self) -> bool:
        return self.machine is not None


class Backend(Protocol):
    name: str

    def complete(self, prompt: PromptMessage) -> str: ...


def generate_fsm(backend: Backend, prompt: PromptMessage) -> BackendResponse:
    text = backend.complete(prompt)
    notes: list[str] = []
    try:
        machine = parse_csv(text, diagnostics=notes)
    except ParseError as exc:
        notes.append(f"unparsable response: {exc}")
        return BackendResponse(text, None, notes)
    return BackendResponse(text, machine, notes)


class PerfectBackend:
    """Answers with the exact machine described in the prompt."""

    name = "perfect"

    def complete(self, prompt: PromptMessage) -> str:
        return serialize_csv(parse_description(description_of(prompt.user)))


# -- simulator ---------------------------------------------------------------

@dataclass(frozen=True)
class SimulatorProfile:
    """Expected and maximal fault counts per generated machine."""

    rates: dict = field(default_factory=dict)
    maxima: dict = field(default_factory=dict)
    seed: int = 0
    min_total: int = 0

    def __post_init__(self):
        rates = {FaultKind(k): float(v) for k, v in self.rates.items()}
        maxima = {FaultKind(k): int(v) for k, v in self.maxima.items()}
        if any(v < 0 for v in rates.values()) or any(v < 0 for v in maxima.values()):
            raise ValueError("fault rates and maxima must be non-negative")
        if self.min_total < 0:
            raise ValueError("min_total must be non-negative")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "maxima", maxima)

    def with_seed(self, seed: int) -> SimulatorProfile:
        return SimulatorProfile(self.rates, self.maxima, seed, self.min_total)

    def to_dict(self) -> dict:
        return {
            "rates": {k.value: v for k, v in self.rates.items()},
            "maxima": {k.value: v for k, v in self.maxima.items()},
            "seed": self.seed,
            "min_total": self.min_total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> SimulatorProfile:
        return cls(data.get("rates", {}), data.get("maxima", {}), data.get("seed", 0), data.get("min_total", 0))

    @classmethod
    def load(cls, path: str | Path) -> SimulatorProfile:
        return cls.from_dict(json.loads(Path(path).read_text()))


_K = FaultKind
# per machine size: means and maxima of additional, missing, local-output and transfer faults
TABLE1 = {
    5: ({_K.ADDITIONAL: 0.0, _K.MISSING: 0.03, _K.LOCAL_OUTPUT: 0.0, _K.TRANSFER: 0.0},
        {_K.ADDITIONAL: 0, _K.MISSING: 1, _K.LOCAL_OUTPUT: 0, _K.TRANSFER: 0}),
    10: ({_K.ADDITIONAL: 0.07, _K.MISSING: 0.43, _K.LOCAL_OUTPUT: 0.27, _K.TRANSFER: 0.33},
         {_K.ADDITIONAL: 1, _K.MISSING: 3, _K.LOCAL_OUTPUT: 3, _K.TRANSFER: 4}),
}


def table1_profile(num_states: int, seed: int = 0, min_total: int = 0) -> SimulatorProfile:
    """Profile of the closest tabulated machine size."""
    size = min(TABLE1, key=lambda k: (abs(k - num_states), k))
    rates, maxima = TABLE1[size]
    return SimulatorProfile(rates, maxima, seed, min_total)


def poisson(rng: random.Random, mean: float) -> int:
    """Knuth's multiplication sampler; fine for the small means used here."""
    if mean <= 0:
        return 0
    limit, k, p = math.exp(-mean), 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def draw_fault_counts(profile: SimulatorProfile, rng: random.Random, attempts: int = 1000) -> dict[FaultKind, int]:
    """Per-kind counts, each capped by its maximum, with at least
    ``min_total`` faults overall when the maxima allow it."""
    caps = {k: profile.maxima.get(k, 10**9) for k in FaultKind}
    counts = {k: 0 for k in FaultKind}
    for _ in range(attempts):
        counts = {k: min(poisson(rng, profile.rates.get(k, 0.0)), caps[k]) for k in FaultKind}
        if sum(counts.values()) >= profile.min_total:
            return counts
    # rates too low to reach min_total by chance: top up the likeliest kinds
    order = sorted(FaultKind, key=lambda k: -profile.rates.get(k, 0.0))
    for k in order:
        while sum(counts.values()) < profile.min_total and counts[k] < caps[k] and profile.rates.get(k, 0.0) > 0:
            counts[k] += 1
    return counts


class SimulatorBackend:
    """Deterministic stand-in for a chat model.

    The response is the described machine with a fault recipe drawn from
    ``profile`` seeded by the profile seed and the description text, so the
    same description always yields the same faulty machine. A cooperative
    simulator then applies every repair fragment of the prompt: requested
    transitions are added, rejected ones removed, and each cell visited by a
    requested trace is restored to the described behaviour.
    """

    name = "sim"

    def __init__(self, profile: SimulatorProfile = SimulatorProfile(), cooperative: bool = True):
        self.profile = profile
        self.cooperative = cooperative
        self.last_recipe: list = []

    def faulty_machine(self, description: str) -> tuple[Fsm, Fsm, list]:
        truth = parse_description(description)
        rng = random.Random(f"{self.profile.seed}\x00{description}")
        counts = draw_fault_counts(self.profile, rng)
        recipe = random_recipe(truth, counts, rng)
        return truth, inject_faults(truth, recipe, rng), recipe

    def complete(self, prompt: PromptMessage) -> str:
        description = description_of(prompt.user)
        truth, machine, recipe = self.faulty_machine(description)
        self.last_recipe = recipe
        if self.cooperative:
            for d in parse_directives(prompt.user[len(description):]):
                machine = _apply(machine, truth, d)
        return serialize_csv(machine)


def _apply(m: Fsm, truth: Fsm, d: TransitionDirective | TraceDirective) -> Fsm:
    if isinstance(d, TransitionDirective):
        absent = set(d.absent)
        keep = [t for t in m.transitions if t not in absent]
        for t in d.present + d.conserve:
            if t not in keep:
                keep.append(t)
        return m.with_transitions(keep)
    state, fixed = truth.initial, []
    for x in d.inputs:
        cell = truth.cell(state, x)
        if len(cell) != 1:
            break
        fixed.append(cell[0])
        state = cell[0].tgt
    cells = {(t.src, t.inp) for t in fixed}
    ts = [t for t in m.transitions if (t.src, t.inp) not in cells]
    return m.with_transitions(ts + list(dict.fromkeys(fixed)))


# -- live HTTP backend --------------------------------------------------------

@dataclass
class LiveConfig:
    api_key: str | None = None
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o"
    timeout: float = 120.0
    max_retries: int = 4
    backoff: float = 1.0

    @classmethod
    def from_env(cls, path: str | Path | None = None) -> LiveConfig:
        """Values from an optional JSON file, overridden by environment
        variables ``FSMREPAIR_API_KEY`` (or ``OPENAI_API_KEY``),
        ``FSMREPAIR_BASE_URL`` and ``FSMREPAIR_MODEL``."""
        data = json.loads(Path(path).read_text()) if path else {}
        cfg = cls(**data)
        env = os.environ
        cfg.api_key = env.get("FSMREPAIR_API_KEY") or env.get("OPENAI_API_KEY") or cfg.api_key
        cfg.base_url = env.get("FSMREPAIR_BASE_URL", cfg.base_url)
        cfg.model = env.get("FSMREPAIR_MODEL", cfg.model)
        return cfg


class LiveBackend:
    name = "live"

    def __init__(self, config: LiveConfig | None = None, client=None, sleep=time.sleep):
        import httpx

        self.config = config or LiveConfig.from_env()
        if not self.config.api_key:
            raise BackendError("live backend needs an API key")
        self.client = client or httpx.Client(timeout=self.config.timeout)
        self._sleep = sleep

    def request_body(self, prompt: PromptMessage) -> dict:
        return {"model": prompt.model or self.config.model, "temperature": prompt.temperature,
                "messages": prompt.messages()}

    def complete(self, prompt: PromptMessage) -> str:
        import httpx

        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {self.config.api_key}"}
        body = self.request_body(prompt)
        last: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(self.config.backoff * 2 ** (attempt - 1))
            try:
                r = self.client.post(url, json=body, headers=headers)
            except httpx.TransportError as exc:
                last = exc
                log.warning("transport error on attempt %d: %s", attempt + 1, exc)
                continue
            if r.status_code == 429 or r.status_code >= 500:
                last = BackendError(f"HTTP {r.status_code}")
                log.warning("retriable HTTP %d on attempt %d", r.status_code, attempt + 1)
                continue
            if r.status_code >= 400:
                raise BackendError(f"HTTP {r.status_code}: {r.text[:200]}")
            try:
                return r.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise BackendError(f"malformed completion payload: {exc}") from exc
        raise BackendError(f"no completion after {self.config.max_retries + 1} attempts: {last}")


def make_backend(kind: str, profile: SimulatorProfile | None = None, cooperative: bool = True) -> Backend:
    if kind == "perfect":
        return PerfectBackend()
    if kind == "sim":
        return SimulatorBackend(profile or SimulatorProfile(), cooperative)
    if kind == "live":
        return LiveBackend()
    raise ValueError(f"unknown backend {kind!r}")
