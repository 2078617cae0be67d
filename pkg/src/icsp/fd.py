"""Finite-domain variables, n-ary constraints, and the support graph.

A variable does not own a classical domain. It ranges over an iset (its
definition domain) and keeps three disjoint element lists of its own:
present (proven usable, the known part of its current domain), removed
(proven inconsistent; they stay in the definition domain but are never
tried again), and candidates (waiting to be checked). The current domain
is always the definition domain minus the removed values.

Every (variable, element) pair moves through a small state machine; the
transitions permitted during propagation are exactly the four listed in
ALLOWED_TRANSITIONS. Search-time narrowing is a snapshot-level operation
and is tagged separately in the engine's transition log.
"""

from __future__ import annotations

import operator
from collections import deque
from enum import Enum
from typing import Callable, Sequence

from .isets import Element


class PairState(Enum):
    UNKNOWN = "unknown"
    CANDIDATE = "candidate"
    OBSERVED = "observed"
    PRESENT = "present"
    REMOVED = "removed"


ALLOWED_TRANSITIONS = {
    (PairState.UNKNOWN, PairState.CANDIDATE),    # element entered the definition domain
    (PairState.CANDIDATE, PairState.OBSERVED),   # chosen as seed or as a supporter
    (PairState.OBSERVED, PairState.PRESENT),     # graph flush
    (PairState.OBSERVED, PairState.REMOVED),     # no support found
}

# Additional moves allowed only while a search decision is active.
SEARCH_TRANSITIONS = {
    (PairState.PRESENT, PairState.REMOVED),
    (PairState.CANDIDATE, PairState.REMOVED),
}


class FdVariable:
    def __init__(self, vid: int, name: str):
        self.id = vid
        self.name = name
        self.def_domain: "int | None" = None
        self.present: list = []
        self.removed: list = []
        self.candidates: deque = deque()
        self.states: dict = {}
        # Set while search has committed this variable to a single value.
        self.bound_to: "Element | None" = None

    def state(self, element: Element) -> PairState:
        return self.states.get(element, PairState.UNKNOWN)

    def __repr__(self):
        return f"FdVariable({self.name})"


class FdConstraint:
    """A named n-ary relation checked by a ground-tuple verifier.

    The verifier must be total and deterministic over ground tuples of the
    constraint's arity. Arguments may repeat a variable; verification
    substitutes the same element at every occurrence.
    """

    def __init__(self, cid: int, name: str, args: Sequence[int],
                 verifier: Callable[[list], bool]):
        if len(args) < 1:
            raise ValueError("constraint needs at least one argument")
        self.id = cid
        self.name = name
        self.args = list(args)
        self.verifier = verifier

    def distinct_args(self) -> list:
        return list(dict.fromkeys(self.args))

    def verify(self, values: Sequence[Element]) -> bool:
        if len(values) != len(self.args):
            raise ValueError(
                f"{self.name} expects {len(self.args)} values, got {len(values)}"
            )
        return bool(self.verifier(list(values)))

    def __repr__(self):
        return f"FdConstraint({self.name}/{len(self.args)})"


class SupportGraph:
    """Observed (variable, element) pairs plus who-relies-on-whom arcs.

    An arc (p, q, c) records that p's satisfaction of constraint c depends
    on q. Supporters that are already present are never recorded: a present
    element is known to be supported, so losing nothing can invalidate it.
    """

    def __init__(self):
        self.nodes: dict = {}   # insertion-ordered set of (var id, element)
        self.arcs: list = []    # (supported pair, supporter pair, constraint id)

    def add_node(self, pair) -> None:
        self.nodes[pair] = None

    def has_node(self, pair) -> bool:
        return pair in self.nodes

    def observed_elements(self, vid: int) -> list:
        return [e for (v, e) in self.nodes if v == vid]

    def add_arc(self, supported, supporter, cid: int) -> None:
        self.arcs.append((supported, supporter, cid))

    def drop_support_arcs(self, supported, cid: int) -> None:
        """Forget which supporters `supported` used for constraint cid."""
        self.arcs = [a for a in self.arcs if not (a[0] == supported and a[2] == cid)]

    def dependents(self, supporter) -> list:
        """Pairs (dependent pair, constraint id) that rely on `supporter`."""
        return list(dict.fromkeys((a[0], a[2]) for a in self.arcs if a[1] == supporter))

    def remove_node(self, pair) -> None:
        self.nodes.pop(pair, None)
        self.arcs = [a for a in self.arcs if a[0] != pair and a[1] != pair]

    def clear(self) -> None:
        self.nodes.clear()
        self.arcs.clear()


# ----------------------------------------------------------------------
# built-in verifiers (the ones the problem-file front end may name)

def _comparison(op) -> Callable[[list], bool]:
    def check(values):
        a, b = values
        if isinstance(a, int) and isinstance(b, int):
            return op(a, b)
        if isinstance(a, str) and isinstance(b, str):
            return op(a, b)
        return False  # ints and atoms are not ordered against each other

    return check


_BUILTINS = {
    "lt": _comparison(operator.lt),
    "le": _comparison(operator.le),
    "gt": _comparison(operator.gt),
    "ge": _comparison(operator.ge),
    "eq": lambda values: values[0] == values[1],
    "ne": lambda values: values[0] != values[1],
}


def resolve_verifier(name: str):
    """Map a constraint name to (min arity, max arity or None, verifier).

    Supported: lt, le, gt, ge, eq, ne (binary) and sum_eq_const:<k>
    (any arity >= 1, integer elements summing to k).
    """
    if name in _BUILTINS:
        return 2, 2, _BUILTINS[name]
    if name.startswith("sum_eq_const:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad constant in {name!r}") from None

        def check(values, _k=k):
            return all(isinstance(v, int) for v in values) and sum(values) == _k

        return 1, None, check
    raise ValueError(f"unknown constraint name {name!r}")
