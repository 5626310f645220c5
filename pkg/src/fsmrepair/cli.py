"""Command line entry point: ``fsmrepair <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .checking import build_checking_sequence, complete_inputs
from .diff import syntactic_diff
from .expert import InteractiveExpert, OracleExpert
from .fsm import Fsm, FsmError
from .harness import ExperimentPlan, emit_report, run_experiment
from .llm import BackendError, LiveBackend, PerfectBackend, SimulatorBackend, SimulatorProfile, generate_fsm
from .mutation import FaultModel, build_mutation_machine, domain_size
from .nl import describe_fsm, parse_description
from .product import are_equivalent, shortest_distinguishing_sequence
from .prompts import PromptTemplates, build_generation_prompt
from .random_fsm import GenSpec, generate_oracle
from .repair import RepairConfig, Strategy, run_repair
from .serialize import parse_csv, parse_dot, serialize_csv, serialize_dot


def load_machine(path: str) -> Fsm:
    text = Path(path).read_text()
    return parse_dot(text) if path.endswith(".dot") else parse_csv(text)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _machine_text(m: Fsm, fmt: str) -> str:
    return serialize_dot(m) if fmt == "dot" else serialize_csv(m)


def _backend(args):
    if args.backend == "perfect":
        return PerfectBackend()
    if args.backend == "live":
        return LiveBackend()
    profile = SimulatorProfile.load(args.profile) if args.profile else SimulatorProfile()
    if args.seed is not None:
        profile = profile.with_seed(args.seed)
    return SimulatorBackend(profile, cooperative=not args.ignore_directives)


def cmd_gen(args):
    m = generate_oracle(GenSpec(args.states, args.inputs, args.outputs, args.seed))
    _emit(_machine_text(m, args.format), args.out)


def cmd_describe(args):
    _emit(describe_fsm(load_machine(args.machine), args.seed), args.out)


def cmd_parse_desc(args):
    m = parse_description(Path(args.desc).read_text())
    _emit(_machine_text(m, args.format), args.out)


def cmd_diff(args):
    d = syntactic_diff(load_machine(args.expected), load_machine(args.observed))
    print(json.dumps(d.to_dict(), indent=2))
    return 0 if d.is_empty else 1


def cmd_equiv(args):
    a, b = load_machine(args.a), load_machine(args.b)
    if are_equivalent(a, b):
        print("equivalent")
        return 0
    print("distinguished by: " + " ".join(shortest_distinguishing_sequence(a, b)))
    return 1


def cmd_checkseq(args):
    m = complete_inputs(load_machine(args.machine))
    cs = build_checking_sequence(m, args.n, args.budget_seconds, args.seed)
    print(json.dumps({
        "inputs": list(cs.inputs),
        "outputs": list(cs.outputs),
        "state_bound": cs.state_bound,
        "verified": cs.verified,
        "reason": cs.reason,
    }, indent=2))
    return 0 if cs.verified else 1


def cmd_mutate(args):
    mm = build_mutation_machine(load_machine(args.machine), FaultModel.parse(args.faults))
    sys.stderr.write(f"domain size: {domain_size(mm)}\n")
    _emit(_machine_text(mm.machine, args.format), args.out)


def cmd_generate(args):
    templates = PromptTemplates.load(args.templates) if args.templates else PromptTemplates()
    prompt = build_generation_prompt(Path(args.desc).read_text(), templates)
    r = generate_fsm(_backend(args), prompt)
    for note in r.diagnostics:
        sys.stderr.write(note + "\n")
    _emit(r.raw_text if r.machine is None else serialize_csv(r.machine), args.out)
    return 0 if r.machine is not None else 1


def cmd_repair(args):
    oracle = load_machine(args.oracle) if args.oracle else None
    expert = OracleExpert(oracle) if args.expert == "oracle" and oracle else InteractiveExpert()
    if args.expert == "oracle" and oracle is None:
        raise SystemExit("--expert oracle needs --oracle")
    cfg = RepairConfig(
        Strategy(args.strategy),
        max_iter=args.max_iter,
        state_bound=args.n,
        fault_model=FaultModel.parse(args.faults),
        checkseq_budget=args.budget_seconds,
        conserve=not args.no_conserve,
    )
    out = run_repair(cfg, Path(args.desc).read_text(), _backend(args), oracle, expert)
    if args.transcript:
        out.save_transcript(args.transcript)
    print(json.dumps({k: v for k, v in out.to_dict().items() if k not in ("history", "queries")}, indent=2))
    return 0 if out.success else 1


def cmd_experiment(args):
    report = run_experiment(ExperimentPlan.load(args.plan))
    emit_report(report, args.out)
    if args.tables:
        emit_report(report, args.tables, "csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsmrepair", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=["csv", "dot"], default="csv")
        sp.add_argument("--out")

    def backend(sp):
        sp.add_argument("--backend", choices=["perfect", "sim", "live"], default="perfect")
        sp.add_argument("--profile", help="simulator profile JSON")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--ignore-directives", action="store_true", help="simulator ignores repair fragments")

    sp = sub.add_parser("gen", help="random oracle machine")
    sp.add_argument("--states", type=int, required=True)
    sp.add_argument("--inputs", type=int, default=5)
    sp.add_argument("--outputs", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    fmt(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("describe", help="English description of a machine")
    sp.add_argument("machine")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_describe)

    sp = sub.add_parser("parse-desc", help="machine from an English description")
    sp.add_argument("desc")
    fmt(sp)
    sp.set_defaults(func=cmd_parse_desc)

    sp = sub.add_parser("diff", help="syntactic fault evidence, exit 1 when faulty")
    sp.add_argument("expected")
    sp.add_argument("observed")
    sp.set_defaults(func=cmd_diff)

    sp = sub.add_parser("equiv", help="behavioural equivalence, exit 1 when distinguished")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("checkseq", help="checking sequence of a machine")
    sp.add_argument("--in", dest="machine", required=True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--budget-seconds", type=float, default=60.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_checkseq)

    sp = sub.add_parser("mutate", help="mutation machine of a generated machine")
    sp.add_argument("machine")
    sp.add_argument("--faults", default="output,missing")
    fmt(sp)
    sp.set_defaults(func=cmd_mutate)

    sp = sub.add_parser("generate", help="machine from a description through a backend")
    sp.add_argument("--desc", required=True)
    sp.add_argument("--templates", help="JSON prompt template override")
    sp.add_argument("--out")
    backend(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("repair", help="generate and repair a machine")
    sp.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    sp.add_argument("--desc", required=True)
    sp.add_argument("--oracle")
    sp.add_argument("--expert", choices=["oracle", "interactive"], default="oracle")
    sp.add_argument("--max-iter", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--faults", default="output,missing")
    sp.add_argument("--budget-seconds", type=float, default=60.0)
    sp.add_argument("--no-conserve", action="store_true", help="omit the list of correct transitions")
    sp.add_argument("--transcript", help="write the session as JSON")
    backend(sp)
    sp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("experiment", help="batch experiment from a plan")
    sp.add_argument("--plan", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--tables", help="directory for CSV tables")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args) or 0
    except (FsmError, BackendError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
