"""Design, check and repair Mealy machines generated from English descriptions."""

from .checking import CheckingSequence, build_checking_sequence, complete_inputs, verify_checking_sequence
from .diff import FaultKind, SyntacticDiff, inject_faults, syntactic_diff
from .fsm import Fsm, Trace, Transition, response, run
from .mutation import FaultModel, MutationMachine, build_mutation_machine, contains, domain_size
from .miner import MiningResult, MiningStatus, brute_force_mine, mine
from .nl import describe_fsm, describe_transition, parse_description
from .product import are_equivalent, build_product, shortest_distinguishing_sequence
from .random_fsm import GenSpec, generate_oracle
from .serialize import parse_csv, parse_dot, serialize_csv, serialize_dot

__all__ = [
    "CheckingSequence", "FaultKind", "FaultModel", "Fsm", "GenSpec", "MiningResult", "MiningStatus",
    "MutationMachine", "SyntacticDiff", "Trace", "Transition", "are_equivalent", "brute_force_mine",
    "build_checking_sequence", "build_mutation_machine", "build_product", "complete_inputs", "contains",
    "describe_fsm", "describe_transition", "domain_size", "generate_oracle", "inject_faults", "mine",
    "parse_csv", "parse_description", "parse_dot", "response", "run", "serialize_csv", "serialize_dot",
    "shortest_distinguishing_sequence", "syntactic_diff", "verify_checking_sequence",
]
