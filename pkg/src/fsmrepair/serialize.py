"""CSV and DOT encodings of machines.

The CSV layout is the one requested from the language model::

    State,Input,Output,Next_State
    S0,a,0,S2

The source state of the first data row is taken as the initial state.
"""

from __future__ import annotations

import logging
import re
from typing import Sequence

from .fsm import DomainError, Fsm, FsmError, Transition

log = logging.getLogger(__name__)

CSV_HEADER = "State,Input,Output,Next_State"
_HEADER_FIELDS = ["state", "input", "output", "next_state"]


class ParseError(FsmError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _check_alphabet(t: Transition, lineno: int, inputs, outputs):
    if inputs is not None and t.inp not in inputs:
        raise ParseError(f"unknown input symbol {t.inp!r}", lineno)
    if outputs is not None and t.out not in outputs:
        raise ParseError(f"unknown output symbol {t.out!r}", lineno)


def parse_csv(
    text: str,
    inputs: Sequence[str] | None = None,
    outputs: Sequence[str] | None = None,
    diagnostics: list[str] | None = None,
) -> Fsm:
    """Parse the four-column CSV form, tolerating typical chat-model noise.

    Code fences, blank lines and comma-free prose lines are skipped. A line
    that has commas but not four non-empty fields is an error. When
    ``inputs``/``outputs`` are given, the machine uses exactly those
    alphabets and any other symbol is an error.
    """
    notes = diagnostics if diagnostics is not None else []
    rows: list[Transition] = []
    seen: set[Transition] = set()
    header_found = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("```"):
            continue
        if "," not in line:
            notes.append(f"line {lineno}: skipped non-CSV line")
            continue
        fields = [f.strip() for f in line.split(",")]
        if not header_found:
            if [f.lower().replace(" ", "_") for f in fields] == _HEADER_FIELDS:
                header_found = True
            else:
                notes.append(f"line {lineno}: skipped line before header")
            continue
        if len(fields) != 4 or not all(fields) or any(" " in f for f in fields):
            raise ParseError(f"expected 4 fields State,Input,Output,Next_State, got {line!r}", lineno)
        t = Transition(*fields)
        _check_alphabet(t, lineno, inputs, outputs)
        if t in seen:
            msg = f"line {lineno}: duplicate transition {t} dropped"
            notes.append(msg)
            log.warning(msg)
            continue
        seen.add(t)
        rows.append(t)
    if not header_found:
        raise ParseError(f"missing header row {CSV_HEADER!r}")
    if not rows:
        raise ParseError("no transition rows")
    try:
        return Fsm.from_transitions(rows, initial=rows[0].src, inputs=inputs, outputs=outputs)
    except DomainError as exc:
        raise ParseError(str(exc)) from exc


def _csv_order(m: Fsm) -> list[Transition]:
    first = [t for t in m.transitions if t.src == m.initial]
    if not first:
        raise DomainError("CSV cannot encode an initial state without outgoing transitions")
    return first + [t for t in m.transitions if t.src != m.initial]


def serialize_csv(m: Fsm) -> str:
    rows = [CSV_HEADER] + [",".join(t) for t in _csv_order(m)]
    return "\n".join(rows) + "\n"


# -- DOT ------------------------------------------------------------------

_START = "__start"
_ID = r'(?:"((?:[^"\\]|\\.)*)"|([A-Za-z0-9_.]+))'
_EDGE_RE = re.compile(rf"^{_ID}\s*->\s*{_ID}\s*(?:\[(.*)\])?\s*;?$")
_NODE_RE = re.compile(rf"^{_ID}\s*(?:\[(.*)\])?\s*;?$")
_ATTR_RE = re.compile(r'(\w+)\s*=\s*(?:"((?:[^"\\]|\\.)*)"|([^,\s\]]+))')


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_dot(m: Fsm, name: str = "fsm") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", f"  {_START} [shape=point];"]
    lines += [f"  {_quote(s)} [shape=circle];" for s in m.states]
    lines.append(f"  {_START} -> {_quote(m.initial)};")
    for t in m.transitions:
        lines.append(f"  {_quote(t.src)} -> {_quote(t.tgt)} [label={_quote(t.inp + '/' + t.out)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _ident(match, i):
    quoted, bare = match.group(i), match.group(i + 1)
    return bytes(quoted, "utf-8").decode("unicode_escape") if quoted is not None else bare


def _attrs(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    return {k: (q if q is not None else b) for k, q, b in _ATTR_RE.findall(text)}


def parse_dot(
    text: str, inputs: Sequence[str] | None = None, outputs: Sequence[str] | None = None
) -> Fsm:
    """Parse a digraph whose edges carry ``input/output`` labels.

    The initial state is the target of the edge leaving a ``shape=point``
    node (or a node named ``__start``).
    """
    body = text.strip()
    head = re.match(r"^(?:strict\s+)?digraph\b[^{]*\{", body)
    if not head or not body.endswith("}"):
        raise ParseError("expected 'digraph ... { ... }'")
    states: list[str] = []
    sources: set[str] = {_START}
    initial = None
    edges: list[tuple[str, str, str, int]] = []
    for lineno, raw in enumerate(body[head.end():-1].splitlines(), start=1):
        for stmt in raw.split(";"):
            stmt = stmt.strip()
            if not stmt or stmt.startswith("//") or re.match(r"^\w+\s*=", stmt):
                continue
            if "->" in stmt:
                em = _EDGE_RE.match(stmt)
                if not em:
                    raise ParseError(f"malformed edge {stmt!r}", lineno)
                edges.append((_ident(em, 1), _ident(em, 3), _attrs(em.group(5)).get("label", ""), lineno))
                continue
            nm = _NODE_RE.match(stmt)
            if not nm:
                raise ParseError(f"malformed statement {stmt!r}", lineno)
            node, attrs = _ident(nm, 1), _attrs(nm.group(3))
            if node in ("graph", "node", "edge") or "=" in node:
                continue
            if attrs.get("shape") == "point":
                sources.add(node)
            elif node not in states:
                states.append(node)
    transitions = []
    for src, tgt, label, lineno in edges:
        if src in sources:
            initial = tgt
            continue
        parts = label.split("/")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ParseError(f"edge label {label!r} is not of the form input/output", lineno)
        t = Transition(src, parts[0].strip(), parts[1].strip(), tgt)
        _check_alphabet(t, lineno, inputs, outputs)
        transitions.append(t)
    if initial is None:
        raise ParseError("no initial-state marker edge")
    states = [s for s in states if s not in sources]
    try:
        return Fsm.from_transitions(transitions, initial=initial, inputs=inputs, outputs=outputs, states=states)
    except DomainError as exc:
        raise ParseError(str(exc)) from exc
