"""Batch experiments: random oracles, descriptions, generation, diff and
repair, aggregated into fault, repair and query statistics per size."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .diff import FaultKind, syntactic_diff
from .expert import OracleExpert
from .fsm import FsmError
from .llm import Backend, LiveBackend, PerfectBackend, SimulatorBackend, SimulatorProfile, generate_fsm, table1_profile
from .mutation import FaultModel
from .nl import describe_fsm
from .product import are_equivalent
from .prompts import build_generation_prompt
from .random_fsm import GenSpec, generate_oracle
from .repair import RepairConfig, Strategy, run_repair

log = logging.getLogger(__name__)

KINDS = list(FaultKind)


@dataclass
class ExperimentPlan:
    sizes: list[int] = field(default_factory=lambda: [5, 10])
    oracles_per_size: int = 30
    num_inputs: int = 5
    num_outputs: int = 2
    backend: str = "sim"
    profile: dict | None = None
    cooperative: bool = True
    strategy: str | None = None
    repair_max_states: int = 10
    fault_model: str = "output,missing"
    checkseq_budget: float = 60.0
    seed: int = 0

    def __post_init__(self):
        if self.oracles_per_size < 1 or any(n < 1 for n in self.sizes):
            raise ValueError("sizes and oracle counts must be positive")
        if self.backend not in ("perfect", "sim", "live"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.strategy is not None:
            Strategy(self.strategy)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentPlan:
        return cls(**json.loads(Path(path).read_text()))

    def backend_for(self, size: int) -> Backend:
        if self.backend == "perfect":
            return PerfectBackend()
        if self.backend == "live":
            return LiveBackend()
        if self.profile is None:
            profile = table1_profile(size, seed=self.seed)
        else:
            profile = SimulatorProfile.from_dict(self.profile)
        return SimulatorBackend(profile, self.cooperative)


def oracle_seed(plan_seed: int, size: int, index: int) -> int:
    return (plan_seed * 1_000_003 + size) * 10_007 + index


def _run_one(plan: ExperimentPlan, size: int, index: int, backend: Backend) -> dict:
    seed = oracle_seed(plan.seed, size, index)
    oracle = generate_oracle(GenSpec(size, plan.num_inputs, plan.num_outputs, seed))
    description = describe_fsm(oracle, seed)
    rec = {"size": size, "index": index, "seed": seed}
    resp = generate_fsm(backend, build_generation_prompt(description))
    rec["parsed"] = resp.parsed
    if resp.machine is None:
        rec.update(faulty=True, delta=0, counts={k.value: 0 for k in KINDS}, equivalent=False)
        rec["diagnostics"] = resp.diagnostics
    else:
        d = syntactic_diff(oracle, resp.machine)
        counts = d.counts()
        rec["counts"] = {k.value: counts.get(k, 0) for k in KINDS}
        rec["delta"] = len(d)
        rec["faulty"] = not d.is_empty or d.state_set_mismatch or d.alphabet_mismatch
        try:
            rec["equivalent"] = are_equivalent(oracle, resp.machine)
        except FsmError:
            rec["equivalent"] = False
    if plan.strategy and rec["faulty"] and size <= plan.repair_max_states:
        cfg = RepairConfig(
            Strategy(plan.strategy),
            fault_model=FaultModel.parse(plan.fault_model),
            checkseq_budget=plan.checkseq_budget,
            seed=seed,
        )
        out = run_repair(cfg, description, backend, oracle, OracleExpert(oracle))
        rec["repair"] = {
            "success": out.success,
            "attempts": out.attempts,
            "reason": out.reason,
            "revisits": out.revisits,
            "equivalent_to_oracle": out.equivalent_to_oracle,
            "query_count": out.query_count,
            "max_query_length": out.max_query_length,
            "augmented": out.augmented,
            "low_confidence": out.low_confidence,
        }
    return rec


def _summary(size: int, recs: list[dict], repaired: bool) -> dict:
    n = len(recs)
    parsed = [r for r in recs if r["parsed"]]
    faulty = [r for r in recs if r["faulty"]]
    means = {k.value: sum(r["counts"][k.value] for r in parsed) / n for k in KINDS}
    maxima = {k.value: max((r["counts"][k.value] for r in parsed), default=0) for k in KINDS}
    s = {
        "size": size,
        "oracles": n,
        "faulty": len(faulty),
        "unparsed": n - len(parsed),
        "fault_means": means,
        "fault_means_all": sum(r["delta"] for r in recs) / n,
        "fault_maxima": maxima,
        "fault_maxima_all": max((r["delta"] for r in recs), default=0),
        "avg_delta": sum(r["delta"] for r in recs) / n,
        "max_delta": max((r["delta"] for r in recs), default=0),
    }
    if repaired:
        tried = [r["repair"] for r in faulty if "repair" in r]
        ok = sum(t["success"] for t in tried)
        s["repair_success_rate"] = 100.0 * ok / len(tried) if tried else 100.0
        s["max_attempts"] = max((t["attempts"] for t in tried), default=0)
        s["max_queries"] = max((t["query_count"] for t in tried), default=0)
        s["max_query_length"] = max((t["max_query_length"] for t in tried), default=0)
        s["augmented_domains"] = sum(t["augmented"] > 0 for t in tried)
        s["max_augmented"] = max((t["augmented"] for t in tried), default=0)
    return s


@dataclass
class ExperimentReport:
    plan: dict
    summaries: list[dict]
    records: list[dict]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ExperimentReport:
        return cls(**json.loads(text))


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    records, summaries = [], []
    for size in plan.sizes:
        backend = plan.backend_for(size)
        recs = []
        for i in range(plan.oracles_per_size):
            try:
                recs.append(_run_one(plan, size, i, backend))
            except Exception as exc:  # one oracle never aborts the batch
                log.exception("oracle %d of size %d failed", i, size)
                recs.append({"size": size, "index": i, "error": repr(exc), "parsed": False, "faulty": True,
                             "delta": 0, "counts": {k.value: 0 for k in KINDS}, "equivalent": False})
        records += recs
        repaired = plan.strategy is not None and size <= plan.repair_max_states
        summaries.append(_summary(size, recs, repaired))
    return ExperimentReport(asdict(plan), summaries, records)


# -- tables -------------------------------------------------------------------

def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".") if isinstance(x, float) else str(x)


def table_faults(report: ExperimentReport) -> str:
    head = ["nb of states", "Type 1", "Type 2", "Type 3", "Type 4", "All"]
    rows = [head, ["Means"]]
    for s in report.summaries:
        rows.append([s["size"]] + [_num(s["fault_means"][k.value]) for k in KINDS] + [_num(s["fault_means_all"])])
    rows.append(["Maximum"])
    for s in report.summaries:
        rows.append([s["size"]] + [s["fault_maxima"][k.value] for k in KINDS] + [s["fault_maxima_all"]])
    return _csv(rows)


def table_repair(report: ExperimentReport) -> str:
    head = ["nb states", "nb of oracles", "nb. of faulty generated DFSM", "average size of Delta",
            "Max size of Delta", "repair succeeding rate"]
    rows = [head]
    for s in report.summaries:
        rate = s.get("repair_success_rate")
        rows.append([s["size"], s["oracles"], s["faulty"], _num(s["avg_delta"]), s["max_delta"],
                     "" if rate is None else f"{_num(rate)}%"])
    return _csv(rows)


def table_fault_model(report: ExperimentReport) -> str:
    keys = [
        ("nb states", "size"),
        ("nb. of auto. gen. oracles", "oracles"),
        ("nb. of faulty generated DFSM", "faulty"),
        ("repair succeeding rate", "repair_success_rate"),
        ("max nb. of output queries", "max_queries"),
        ("max length of output queries", "max_query_length"),
        ("nb. repair domains augmented with specific transitions", "augmented_domains"),
        ("nb. max of added specific transitions", "max_augmented"),
    ]
    rows = []
    for label, key in keys:
        vals = [s.get(key, "") for s in report.summaries]
        if key == "repair_success_rate":
            vals = [f"{_num(v)}%" if v != "" else "" for v in vals]
        rows.append([label] + vals)
    return _csv(rows)


def emit_report(report: ExperimentReport, path: str | Path, fmt: str = "json") -> list[Path]:
    """Write ``report.json`` style output, or the three CSV tables into the
    directory ``path``; returns the files written."""
    path = Path(path)
    if fmt == "json":
        path.write_text(report.to_json())
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    path.mkdir(parents=True, exist_ok=True)
    out = {"faults.csv": table_faults(report), "repair.csv": table_repair(report)}
    if report.plan.get("strategy") == Strategy.FAULTMODEL.value:
        out["fault_model.csv"] = table_fault_model(report)
    written = []
    for name, text in out.items():
        (path / name).write_text(text)
        written.append(path / name)
    return written
