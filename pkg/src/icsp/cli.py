"""Line-oriented problem files and the command-line runner.

Grammar (one directive per line, `#` starts a comment):

    iset <name> open|closed {e1,e2,...}
    var <name> :: <iset>
    fdc <cname> <var>...
    isetc member <e> <iset>
    isetc union|intersection|difference <a> <b> <c>
    isetc inclusion <a> <b>
    source <iset> script [e1,e2,...]
    source <iset> range <lo>..<hi>
    source <iset> interactive
    option labeling on|off

Names are lowercase atoms, unique per kind, declared before use. Elements
are signed integers or bare lowercase atoms. <cname> is one of the built-in
verifiers (lt, le, gt, ge, eq, ne, sum_eq_const:<k>); arbitrary verifiers
are a library-only feature.

Exit codes: 0 consistent, 1 inconsistent, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .acquisition import InteractiveSource, RangeSource, ScriptedSource
from .engine import Engine
from .errors import SourceContractError
from .fd import resolve_verifier
from .isets import (
    Difference,
    Inclusion,
    Intersection,
    Member,
    Union,
    element_sort_key,
    format_element,
    parse_element,
)

_NAME = r"[a-z][a-z0-9_]*"
_ISET_RE = re.compile(rf"iset\s+({_NAME})\s+(open|closed)\s+\{{\s*(.*?)\s*\}}\Z")
_VAR_RE = re.compile(rf"var\s+({_NAME})\s+::\s+({_NAME})\Z")
_SCRIPT_RE = re.compile(rf"source\s+({_NAME})\s+script\s+\[\s*(.*?)\s*\]\Z")
_RANGE_RE = re.compile(rf"source\s+({_NAME})\s+range\s+(-?\d+)\.\.(-?\d+)\Z")


class ProblemError(Exception):
    pass


@dataclass
class ProblemFile:
    """Parsed directives in file order, ready to build an engine from."""

    directives: list = field(default_factory=list)
    labeling: bool = False
    var_names: list = field(default_factory=list)


def _err(lineno, message):
    raise ProblemError(f"line {lineno}: {message}")


def _elements(body, lineno):
    if not body:
        return []
    out = []
    for piece in body.split(","):
        try:
            out.append(parse_element(piece))
        except ValueError:
            _err(lineno, f"bad element {piece.strip()!r}")
    return out


def parse(text: str) -> ProblemFile:
    problem = ProblemFile()
    isets: set = set()
    variables: set = set()
    sourced: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        if head == "iset":
            m = _ISET_RE.fullmatch(line)
            if not m:
                _err(lineno, "expected: iset <name> open|closed {e1,e2,...}")
            name, mode, body = m.groups()
            if name in isets:
                _err(lineno, f"duplicate iset {name!r}")
            isets.add(name)
            problem.directives.append(("iset", name, mode == "open",
                                       _elements(body, lineno)))
        elif head == "var":
            m = _VAR_RE.fullmatch(line)
            if not m:
                _err(lineno, "expected: var <name> :: <iset>")
            name, iset = m.groups()
            if name in variables:
                _err(lineno, f"duplicate var {name!r}")
            if iset not in isets:
                _err(lineno, f"undefined iset {iset!r}")
            variables.add(name)
            problem.var_names.append(name)
            problem.directives.append(("var", name, iset))
        elif head == "fdc":
            tokens = line.split()
            if len(tokens) < 3:
                _err(lineno, "expected: fdc <cname> <var>...")
            cname, args = tokens[1], tokens[2:]
            try:
                lo, hi, _ = resolve_verifier(cname)
            except ValueError as exc:
                _err(lineno, str(exc))
            if len(args) < lo or (hi is not None and len(args) > hi):
                _err(lineno, f"{cname} takes {lo}{'' if hi == lo else ' or more'} arguments")
            for v in args:
                if v not in variables:
                    _err(lineno, f"undefined var {v!r}")
            problem.directives.append(("fdc", cname, args))
        elif head == "isetc":
            tokens = line.split()
            kind = tokens[1] if len(tokens) > 1 else ""
            if kind == "member":
                if len(tokens) != 4:
                    _err(lineno, "expected: isetc member <e> <iset>")
                try:
                    element = parse_element(tokens[2])
                except ValueError:
                    _err(lineno, f"bad element {tokens[2]!r}")
                if tokens[3] not in isets:
                    _err(lineno, f"undefined iset {tokens[3]!r}")
                problem.directives.append(("isetc", "member", element, tokens[3]))
            elif kind in ("union", "intersection", "difference", "inclusion"):
                want = 2 if kind == "inclusion" else 3
                args = tokens[2:]
                if len(args) != want:
                    _err(lineno, f"isetc {kind} takes {want} iset names")
                for name in args:
                    if name not in isets:
                        _err(lineno, f"undefined iset {name!r}")
                problem.directives.append(("isetc", kind, *args))
            else:
                _err(lineno, f"unknown iset constraint {kind!r}")
        elif head == "source":
            tokens = line.split()
            if len(tokens) < 3:
                _err(lineno, "expected: source <iset> script|range|interactive ...")
            iset = tokens[1]
            if iset not in isets:
                _err(lineno, f"undefined iset {iset!r}")
            if iset in sourced:
                _err(lineno, f"{iset!r} already has a source")
            kind = tokens[2]
            if kind == "script":
                m = _SCRIPT_RE.fullmatch(line)
                if not m:
                    _err(lineno, "expected: source <iset> script [e1,e2,...]")
                payload = _elements(m.group(2), lineno)
            elif kind == "range":
                m = _RANGE_RE.fullmatch(line)
                if not m:
                    _err(lineno, "expected: source <iset> range <lo>..<hi>")
                payload = (int(m.group(2)), int(m.group(3)))
            elif kind == "interactive":
                if len(tokens) != 3:
                    _err(lineno, "expected: source <iset> interactive")
                payload = None
            else:
                _err(lineno, f"unknown source kind {kind!r}")
            sourced.add(iset)
            problem.directives.append(("source", iset, kind, payload))
        elif head == "option":
            tokens = line.split()
            if len(tokens) != 3 or tokens[1] != "labeling" or tokens[2] not in ("on", "off"):
                _err(lineno, "expected: option labeling on|off")
            problem.labeling = tokens[2] == "on"
        else:
            _err(lineno, f"unknown directive {head!r}")
    return problem


_ISETC_CLASSES = {
    "union": Union,
    "intersection": Intersection,
    "difference": Difference,
}


def build(problem: ProblemFile) -> "tuple[Engine, dict]":
    """Construct an engine from parsed directives, in file order."""
    engine = Engine()
    iset_ids: dict = {}
    var_ids: dict = {}
    for directive in problem.directives:
        tag = directive[0]
        if tag == "iset":
            _, name, open_, elements = directive
            iset_ids[name] = engine.new_iset(elements, open=open_, name=name)
        elif tag == "var":
            _, name, iset = directive
            var_ids[name] = engine.new_fd_variable(iset_ids[iset], name=name)
        elif tag == "fdc":
            _, cname, args = directive
            engine.post_fd_constraint(cname, [var_ids[v] for v in args])
        elif tag == "isetc":
            kind = directive[1]
            if kind == "member":
                engine.post_iset_constraint(Member(directive[2], iset_ids[directive[3]]))
            elif kind == "inclusion":
                engine.post_iset_constraint(
                    Inclusion(iset_ids[directive[2]], iset_ids[directive[3]]))
            else:
                cls = _ISETC_CLASSES[kind]
                engine.post_iset_constraint(cls(*(iset_ids[n] for n in directive[2:])))
        elif tag == "source":
            _, iset, kind, payload = directive
            if kind == "script":
                source = ScriptedSource(payload)
            elif kind == "range":
                source = RangeSource(*payload)
            else:
                source = InteractiveSource(iset)
            engine.register_source(iset_ids[iset], source)
    return engine, var_ids


def format_trace_entry(entry) -> str:
    tag = entry[0]
    if tag in ("INSERT", "CANDIDATE", "OBSERVE", "PRESENT", "REMOVE"):
        return f"{tag} {entry[1]} {format_element(entry[2])}"
    if tag == "CLOSE":
        return f"CLOSE {entry[1]}"
    if tag == "RELY":
        (v1, e1), (v2, e2) = entry[1], entry[2]
        return (f"RELY ({v1},{format_element(e1)}) "
                f"({v2},{format_element(e2)}) {entry[3]}")
    if tag == "ACQUIRE":
        got = format_element(entry[2]) if entry[2] is not None else "none"
        return f"ACQUIRE {entry[1]} -> {got}"
    raise ValueError(f"unknown trace entry {entry!r}")


def _domain_line(name, present, removed) -> str:
    fmt = lambda elems: ",".join(
        format_element(e) for e in sorted(elems, key=element_sort_key))
    return f"DOMAIN {name} present=[{fmt(present)}] removed=[{fmt(removed)}]"


def run(problem: ProblemFile, *, trace: bool = False, label_override: bool = False,
        out=None) -> int:
    """Build, propagate, optionally label, and report. Returns the exit code."""
    out = out if out is not None else sys.stdout
    engine, var_ids = build(problem)
    consistent = engine.solve()
    if consistent and (problem.labeling or label_override):
        consistent = engine.label([var_ids[n] for n in problem.var_names]) is not None
    if trace:
        for entry in engine.trace:
            out.write(format_trace_entry(entry) + "\n")
    out.write(f"RESULT {'consistent' if consistent else 'inconsistent'}\n")
    for name in problem.var_names:
        vid = var_ids[name]
        out.write(_domain_line(name, engine.present(vid), engine.removed(vid)) + "\n")
    return 0 if consistent else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="icsp",
        description="Constraint solving over incrementally-acquired domains.",
    )
    parser.add_argument("problem", help="problem file to solve")
    parser.add_argument("--trace", action="store_true",
                        help="emit one line per propagation event")
    parser.add_argument("--label", action="store_true",
                        help="search for a total assignment after propagation")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved for randomized sources; the bundled "
                             "sources are deterministic")
    args = parser.parse_args(argv)
    try:
        text = Path(args.problem).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        problem = parse(text)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(problem, trace=args.trace, label_override=args.label)
    except SourceContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
