"""Incrementally-known sets and event-driven set constraint propagation.

An iset is a set whose membership is discovered over time: it holds the
ground elements known so far plus an open/closed flag. While open it can
still grow; closing it is irreversible and freezes the known part. Every
insertion and every closure emits exactly one event, and the posted set
constraints (membership, union, intersection, difference, inclusion) react
to those events until a FIFO fixpoint is reached.

Elements are ground scalars only: ints or lowercase-atom strings. No
variables, no nested sets.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Union as _Union

from .errors import Inconsistency

# A ground element: an integer or an interned-string atom.
Element = _Union[int, str]

_INT_RE = re.compile(r"-?\d+\Z")
_ATOM_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


def parse_element(text: str) -> Element:
    """Parse a signed integer or a bare lowercase atom."""
    text = text.strip()
    if _INT_RE.match(text):
        return int(text)
    if _ATOM_RE.match(text):
        return text
    raise ValueError(f"not an element: {text!r}")


def format_element(element: Element) -> str:
    return str(element)


def element_sort_key(element: Element):
    """Display ordering: integers first, then atoms alphabetically."""
    return (isinstance(element, str), element)


@dataclass(frozen=True)
class Inserted:
    """Element entered the known part of iset."""

    iset: int
    element: Element


@dataclass(frozen=True)
class Closed:
    """Iset was closed; its known part is now final."""

    iset: int


Event = _Union[Inserted, Closed]


@dataclass
class Iset:
    id: int
    name: str
    known: "dict[Element, None]"  # insertion-ordered set
    open: bool


class IsetConstraint:
    """Base class for set constraints: reacts to events on its arguments.

    Handlers must be idempotent: activation replays history on posting, and
    an event queued before posting will reach the constraint a second time
    when it is drained.
    """

    def isets(self) -> tuple:
        raise NotImplementedError

    def distinct_isets(self) -> list:
        return list(dict.fromkeys(self.isets()))

    def on_inserted(self, store: "IsetStore", iset: int, element: Element) -> None:
        pass

    def on_closed(self, store: "IsetStore", iset: int) -> None:
        pass

    def activate(self, store: "IsetStore") -> None:
        """Replay the arguments' history so that posting order is irrelevant."""
        for i in self.distinct_isets():
            for e in store.known_in_order(i):
                self.on_inserted(store, i, e)
        for i in self.distinct_isets():
            if store.is_closed(i):
                self.on_closed(store, i)

    # Per-constraint mutable state, captured by engine snapshots.
    def get_state(self):
        return None

    def set_state(self, state) -> None:
        pass


class Member(IsetConstraint):
    """element ∈ iset, enforced once at posting time."""

    def __init__(self, element: Element, iset: int):
        self.element = element
        self.iset = iset

    def isets(self):
        return (self.iset,)

    def activate(self, store):
        store.ensure_member(self.iset, self.element)

    def __repr__(self):
        return f"Member({self.element!r}, s{self.iset})"


class Inclusion(IsetConstraint):
    """a ⊆ b."""

    def __init__(self, a: int, b: int):
        self.a = a
        self.b = b

    def isets(self):
        return (self.a, self.b)

    def on_inserted(self, store, iset, element):
        if iset == self.a:
            store.ensure_member(self.b, element)
            self._maybe_close_left(store)

    def on_closed(self, store, iset):
        if iset == self.b:
            missing = store.known(self.a) - store.known(self.b)
            if missing:
                raise Inconsistency(
                    f"{store.name_of(self.a)} ⊆ {store.name_of(self.b)} violated: "
                    f"{sorted(missing, key=element_sort_key)} missing from closed superset"
                )
            self._maybe_close_left(store)

    def _maybe_close_left(self, store):
        # Once the superset is closed and the known parts coincide, the
        # subset cannot grow either.
        if store.is_closed(self.b) and store.known(self.a) == store.known(self.b):
            store.close(self.a)

    def __repr__(self):
        return f"Inclusion(s{self.a}, s{self.b})"


class Intersection(IsetConstraint):
    """a ∩ b = c."""

    def __init__(self, a: int, b: int, c: int):
        self.a = a
        self.b = b
        self.c = c

    def isets(self):
        return (self.a, self.b, self.c)

    def on_inserted(self, store, iset, element):
        if iset == self.c:
            store.ensure_member(self.a, element)
            store.ensure_member(self.b, element)
        if iset == self.a and store.contains(self.b, element):
            store.ensure_member(self.c, element)
        if iset == self.b and store.contains(self.a, element):
            store.ensure_member(self.c, element)

    def on_closed(self, store, iset):
        if iset not in (self.a, self.b):
            return
        if not (store.is_closed(self.a) and store.is_closed(self.b)):
            return
        # Both operands are final: c is exactly their intersection.
        inter = [e for e in store.known_in_order(self.a) if store.contains(self.b, e)]
        stray = store.known(self.c) - set(inter)
        if stray:
            raise Inconsistency(
                f"{store.name_of(self.c)} holds {sorted(stray, key=element_sort_key)} "
                f"outside {store.name_of(self.a)} ∩ {store.name_of(self.b)}"
            )
        for e in inter:
            store.ensure_member(self.c, e)
        store.close(self.c)

    def __repr__(self):
        return f"Intersection(s{self.a}, s{self.b}, s{self.c})"


class Union(IsetConstraint):
    """a ∪ b = c.

    An element inserted into c while both operands are open cannot be
    assigned a side without guessing, so it is kept as a pending obligation
    and settled when either operand closes.
    """

    def __init__(self, a: int, b: int, c: int):
        self.a = a
        self.b = b
        self.c = c
        self.pending: list = []

    def isets(self):
        return (self.a, self.b, self.c)

    def on_inserted(self, store, iset, element):
        if iset in (self.a, self.b):
            store.ensure_member(self.c, element)
        if iset == self.c:
            self._settle(store, element)

    def _settle(self, store, element):
        if store.contains(self.a, element) or store.contains(self.b, element):
            return
        if store.is_closed(self.a):
            store.ensure_member(self.b, element)
        elif store.is_closed(self.b):
            store.ensure_member(self.a, element)
        elif element not in self.pending:
            self.pending.append(element)

    def on_closed(self, store, iset):
        if iset not in (self.a, self.b):
            return
        pending, self.pending = self.pending, []
        for e in pending:
            self._settle(store, e)
        if store.is_closed(self.a) and store.is_closed(self.b):
            for e in store.known_in_order(self.c):
                if not (store.contains(self.a, e) or store.contains(self.b, e)):
                    raise Inconsistency(
                        f"{store.name_of(self.c)} holds {e!r} outside "
                        f"{store.name_of(self.a)} ∪ {store.name_of(self.b)}"
                    )
            for e in store.known_in_order(self.a):
                store.ensure_member(self.c, e)
            for e in store.known_in_order(self.b):
                store.ensure_member(self.c, e)
            store.close(self.c)

    def get_state(self):
        return list(self.pending)

    def set_state(self, state):
        self.pending = list(state) if state else []

    def __repr__(self):
        return f"Union(s{self.a}, s{self.b}, s{self.c})"


class Difference(IsetConstraint):
    """a ∖ b = c.

    Elements of a are forwarded to c only once b is closed; while b is
    open their membership in c is not yet decidable and is deferred.
    """

    def __init__(self, a: int, b: int, c: int):
        self.a = a
        self.b = b
        self.c = c

    def isets(self):
        return (self.a, self.b, self.c)

    def on_inserted(self, store, iset, element):
        if iset == self.c:
            store.ensure_member(self.a, element)
            if store.contains(self.b, element):
                raise Inconsistency(
                    f"{element!r} is in both {store.name_of(self.c)} and "
                    f"{store.name_of(self.b)} under difference"
                )
        if iset == self.b and store.contains(self.c, element):
            raise Inconsistency(
                f"{element!r} is in both {store.name_of(self.c)} and "
                f"{store.name_of(self.b)} under difference"
            )
        if iset == self.a and store.is_closed(self.b) and not store.contains(self.b, element):
            store.ensure_member(self.c, element)

    def on_closed(self, store, iset):
        if iset not in (self.a, self.b):
            return
        if store.is_closed(self.b):
            for e in store.known_in_order(self.a):
                if not store.contains(self.b, e):
                    store.ensure_member(self.c, e)
            if store.is_closed(self.a):
                store.close(self.c)

    def __repr__(self):
        return f"Difference(s{self.a}, s{self.b}, s{self.c})"


class IsetStore:
    """Owns every iset, the posted set constraints, and the event queue.

    Single-threaded: one store per engine, externally serialized.
    """

    def __init__(self, trace: "list | None" = None):
        self._isets: list[Iset] = []
        self._constraints: list[IsetConstraint] = []
        self._watchers: dict[int, list[IsetConstraint]] = {}
        self.queue: deque = deque()
        # Shared, append-only event trace (the engine passes its own list in).
        self.trace = trace if trace is not None else []

    # ------------------------------------------------------------------
    # creation and state access

    def new_iset(self, elements: Iterable[Element] = (), *, open: bool = True,
                 name: "str | None" = None) -> int:
        """Create an iset with the given (deduplicated) initial known part."""
        iid = len(self._isets)
        self._isets.append(Iset(iid, name or f"s{iid}", {}, True))
        self._watchers[iid] = []
        for e in elements:
            self.ensure_member(iid, e)
        if not open:
            self.close(iid)
        return iid

    def _get(self, iset: int) -> Iset:
        if not isinstance(iset, int) or not 0 <= iset < len(self._isets):
            raise ValueError(f"unknown iset id {iset!r}")
        return self._isets[iset]

    def name_of(self, iset: int) -> str:
        return self._get(iset).name

    def known(self, iset: int) -> set:
        """Snapshot of the known part; mutating it does not touch the store."""
        return set(self._get(iset).known)

    def known_in_order(self, iset: int) -> list:
        return list(self._get(iset).known)

    def contains(self, iset: int, element: Element) -> bool:
        return element in self._get(iset).known

    def is_closed(self, iset: int) -> bool:
        return not self._get(iset).open

    def iset_count(self) -> int:
        return len(self._isets)

    # ------------------------------------------------------------------
    # state changes

    def ensure_member(self, iset: int, element: Element) -> bool:
        """Force element into the set.

        Returns True if it was newly inserted (queueing one Inserted event),
        False if it was already known. Raises Inconsistency if the set is
        closed without it.
        """
        s = self._get(iset)
        if element in s.known:
            return False
        if not s.open:
            raise Inconsistency(f"{element!r} cannot enter closed set {s.name}")
        s.known[element] = None
        self.queue.append(Inserted(iset, element))
        self.trace.append(("INSERT", s.name, element))
        return True

    def close(self, iset: int) -> bool:
        """Close the set. True if it was open; closing twice is a no-op."""
        s = self._get(iset)
        if not s.open:
            return False
        s.open = False
        self.queue.append(Closed(iset))
        self.trace.append(("CLOSE", s.name))
        return True

    # ------------------------------------------------------------------
    # constraints and propagation

    def post(self, constraint: IsetConstraint) -> None:
        """Record a constraint and replay its arguments' history against it."""
        for i in constraint.distinct_isets():
            self._get(i)
        self._constraints.append(constraint)
        for i in constraint.distinct_isets():
            self._watchers[i].append(constraint)
        constraint.activate(self)

    def propagate(self, event: Event) -> None:
        """Apply one dequeued event to every constraint watching its iset."""
        for constraint in self._watchers[event.iset]:
            if isinstance(event, Inserted):
                constraint.on_inserted(self, event.iset, event.element)
            else:
                constraint.on_closed(self, event.iset)

    def fixpoint(self) -> list:
        """Drain the event queue FIFO until quiescent.

        Returns the Inserted events drained this round, in drain order, for
        the engine to convert into candidates. Terminates: each
        (iset, element) insertion and each closure happens at most once and
        the constraint store only grows.
        """
        drained = []
        while self.queue:
            event = self.queue.popleft()
            if isinstance(event, Inserted):
                drained.append(event)
            self.propagate(event)
        return drained

    # ------------------------------------------------------------------
    # snapshot support for search

    def get_state(self):
        return (
            [(dict(s.known), s.open) for s in self._isets],
            [c.get_state() for c in self._constraints],
        )

    def set_state(self, state) -> None:
        iset_states, constraint_states = state
        if len(iset_states) != len(self._isets):
            raise ValueError("snapshot does not match store shape")
        for s, (known, open_) in zip(self._isets, iset_states):
            s.known = dict(known)
            s.open = open_
        for c, cs in zip(self._constraints, constraint_states):
            c.set_state(cs)
        self.queue.clear()
