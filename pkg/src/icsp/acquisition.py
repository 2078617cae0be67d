"""Pluggable element suppliers for open sets.

A source hands the engine at most one new element per call for a given
iset, never the same element twice, and reports exhaustion once it has
nothing left. Exhaustion closes the iset. Sources are invoked synchronously
on the engine's thread and must not call back into the engine.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .isets import Element, parse_element


@dataclass
class AcquisitionContext:
    """Read-only advisory data passed to a source on every call.

    Sources may ignore all of it. var_name duplicates requesting_var in
    display form so prompting sources need no engine access.
    """

    requesting_var: "int | None" = None
    requesting_constraint: "str | None" = None
    known_snapshot: set = field(default_factory=set)
    var_name: "str | None" = None


class AcquisitionSource:
    """Behavioral contract: next() returns a fresh element or None.

    None means exhausted; after reporting exhaustion for an iset a source
    must keep reporting it. get_state/set_state let the engine rewind a
    source together with the rest of the world during search backtracking;
    sources that cannot rewind (interactive input) simply keep no state.
    """

    def next(self, iset: int, ctx: AcquisitionContext) -> "Element | None":
        raise NotImplementedError

    def get_state(self):
        return None

    def set_state(self, state) -> None:
        pass


class ScriptedSource(AcquisitionSource):
    """Replays a fixed element list in order, then exhausts forever."""

    def __init__(self, elements):
        self.elements = list(elements)
        self._pos = 0

    def next(self, iset, ctx):
        if self._pos >= len(self.elements):
            return None
        element = self.elements[self._pos]
        self._pos += 1
        return element

    def get_state(self):
        return self._pos

    def set_state(self, state):
        self._pos = state

    def calls_served(self) -> int:
        return self._pos

    def __repr__(self):
        return f"ScriptedSource({self.elements!r})"


class RangeSource(AcquisitionSource):
    """Counts through the closed integer range lo..hi, then exhausts."""

    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi
        self._next = lo

    def next(self, iset, ctx):
        if self._next > self.hi:
            return None
        value = self._next
        self._next += 1
        return value

    def get_state(self):
        return self._next

    def set_state(self, state):
        self._next = state

    def __repr__(self):
        return f"RangeSource({self.lo}..{self.hi})"


class InteractiveSource(AcquisitionSource):
    """Prompts a text stream for elements.

    A line parsing as an integer or a bare lowercase atom is an element;
    the literal line "none" (or end of input) means exhausted. Unparsable
    lines are reported and re-prompted. No rewinding: consumed input stays
    consumed across search backtracking.
    """

    def __init__(self, iset_name: str, input_stream=None, output_stream=None):
        self.iset_name = iset_name
        self.input_stream = input_stream
        self.output_stream = output_stream

    def next(self, iset, ctx):
        inp = self.input_stream if self.input_stream is not None else sys.stdin
        out = self.output_stream if self.output_stream is not None else sys.stdout
        while True:
            who = ctx.var_name if ctx.var_name is not None else "-"
            out.write(f"acquire {self.iset_name} for {who}? ")
            out.flush()
            line = inp.readline()
            if not line:
                return None
            line = line.strip()
            if line == "none":
                return None
            try:
                return parse_element(line)
            except ValueError:
                out.write(f"cannot parse element {line!r}\n")
