"""The propagation engine: known-arc-consistent solving over isets.

Two cooperating solvers share one engine. The set side (IsetStore) keeps
the isets and set constraints quiescent. The finite-domain side checks, for
every value that enters a variable's definition domain, whether each
constraint on the variable can be satisfied by known values of the other
variables, preferring values that are already proven (present), then values
currently under check (observed), then unchecked candidates. Only when
nothing known works is a fresh element acquired from the iset's source.

The two sides interact through insertion events: an acquisition raises an
insertion, set propagation runs to quiescence first, and only then are the
drained insertions turned into candidates for the variables ranging over
the affected sets.

At quiescence every present value of every variable has, for each
constraint on the variable, a satisfying tuple of present values of the
other variables. This holds by construction: a batch of observed pairs is
flushed to present only after mutual support was verified, and present
lists never shrink during propagation.

One engine instance is single-threaded; callers must serialize access.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Sequence

from .acquisition import AcquisitionContext, AcquisitionSource
from .errors import Inconsistency, SourceContractError
from .fd import (
    ALLOWED_TRANSITIONS,
    SEARCH_TRANSITIONS,
    FdConstraint,
    FdVariable,
    PairState,
    SupportGraph,
    resolve_verifier,
)
from .isets import Element, IsetConstraint, IsetStore

_BY_PRESENT = "by_present"
_BY_GRAPH = "by_graph"
_NO_SUPPORT = "no_support"

_POOL_ALL = (PairState.PRESENT, PairState.OBSERVED, PairState.CANDIDATE)
_POOL_PRESENT = (PairState.PRESENT,)


class Engine:
    def __init__(self):
        self.trace: list = []
        self.isets = IsetStore(trace=self.trace)
        self.variables: list[FdVariable] = []
        self.graph = SupportGraph()
        # (var id, element, from, to, phase) with phase "prop" or "search"
        self.transitions: list = []
        # (iset id, requesting var id or None, element or None) per acquire call
        self.acquisitions: list = []
        self._fd_constraints: list[FdConstraint] = []
        self._constraints_on: dict[int, list[FdConstraint]] = {}
        self._links: dict[int, list[int]] = {}
        self._sources: dict[int, AcquisitionSource] = {}
        self._search_depth = 0

    # ------------------------------------------------------------------
    # iset facade

    def new_iset(self, elements: Iterable[Element] = (), *, open: bool = True,
                 name: "str | None" = None) -> int:
        return self.isets.new_iset(elements, open=open, name=name)

    def ensure_member(self, iset: int, element: Element) -> bool:
        return self.isets.ensure_member(iset, element)

    def close(self, iset: int) -> bool:
        return self.isets.close(iset)

    def known(self, iset: int) -> set:
        return self.isets.known(iset)

    def is_closed(self, iset: int) -> bool:
        return self.isets.is_closed(iset)

    def post_iset_constraint(self, constraint: IsetConstraint) -> None:
        self.isets.post(constraint)

    def propagate_isets(self) -> None:
        """Drain set events to quiescence, then feed the drained insertions
        to the variables ranging over the affected sets, strictly in that
        order: no candidate is created while set consequences are pending."""
        drained = self.isets.fixpoint()
        for event in drained:
            for vid in self._links.get(event.iset, ()):
                self._enqueue(self.variables[vid], event.element)

    # ------------------------------------------------------------------
    # variables, links, constraints

    def new_fd_variable(self, def_domain: "int | None" = None, *,
                        name: "str | None" = None) -> int:
        vid = len(self.variables)
        self.variables.append(FdVariable(vid, name or f"v{vid}"))
        if def_domain is not None:
            self.def_domain(vid, def_domain)
        return vid

    def variable(self, vid: int) -> FdVariable:
        if not 0 <= vid < len(self.variables):
            raise ValueError(f"unknown variable id {vid!r}")
        return self.variables[vid]

    def def_domain(self, vid: int, iset: int) -> None:
        """Link a variable to its definition domain (at most one per variable).

        Elements already known to the iset become candidates immediately."""
        var = self.variable(vid)
        if var.def_domain is not None:
            raise ValueError(f"{var.name} already has a definition domain")
        self.isets.name_of(iset)  # validates the id
        var.def_domain = iset
        self._links.setdefault(iset, []).append(vid)
        for element in self.isets.known_in_order(iset):
            self._enqueue(var, element)

    def post_fd_constraint(self, name: str, args: Sequence[int],
                           verifier: "Callable[[list], bool] | None" = None) -> int:
        """Register a constraint over the given variables.

        With verifier=None the name must resolve to a built-in. Constraints
        should be posted before the first kac_fixpoint call: values already
        present are not re-checked against later constraints.
        """
        for vid in args:
            self.variable(vid)
        if verifier is None:
            lo, hi, verifier = resolve_verifier(name)
            if len(args) < lo or (hi is not None and len(args) > hi):
                raise ValueError(f"{name} takes {lo}{'' if hi == lo else '+'} arguments")
        cid = len(self._fd_constraints)
        constraint = FdConstraint(cid, name, args, verifier)
        self._fd_constraints.append(constraint)
        for vid in constraint.distinct_args():
            self._constraints_on.setdefault(vid, []).append(constraint)
        return cid

    def fd_constraint(self, cid: int) -> FdConstraint:
        return self._fd_constraints[cid]

    def fd_constraints(self) -> list:
        return list(self._fd_constraints)

    def enqueue_candidate(self, vid: int, element: Element) -> None:
        """Queue an element for checking; no-op unless the pair is unknown."""
        var = self.variable(vid)
        if var.def_domain is None or not self.isets.contains(var.def_domain, element):
            raise ValueError(
                f"{element!r} is not in the definition domain of {var.name}"
            )
        self._enqueue(var, element)

    def _enqueue(self, var: FdVariable, element: Element) -> None:
        if var.state(element) is not PairState.UNKNOWN:
            return
        self._set_state(var, element, PairState.CANDIDATE)
        var.candidates.append(element)
        self.trace.append(("CANDIDATE", var.name, element))

    # ------------------------------------------------------------------
    # acquisition

    def register_source(self, iset: int, source: AcquisitionSource) -> None:
        self.isets.name_of(iset)
        if iset in self._sources:
            raise ValueError(f"{self.isets.name_of(iset)} already has a source")
        self._sources[iset] = source

    def acquire(self, iset: int, *, requesting_var: "int | None" = None,
                requesting_constraint: "str | None" = None) -> "Element | None":
        """Ask the iset's source for one element and propagate the outcome.

        Returns the inserted element, or None if the source is exhausted
        (which closes the iset). An iset without a source is treated as
        immediately exhausted. A source that repeats an element the iset
        already knows is a contract violation and raises SourceContractError
        rather than looping.
        """
        if self.isets.is_closed(iset):
            raise ValueError(f"cannot acquire for closed set {self.isets.name_of(iset)}")
        source = self._sources.get(iset)
        var_name = (self.variables[requesting_var].name
                    if requesting_var is not None else None)
        ctx = AcquisitionContext(
            requesting_var=requesting_var,
            requesting_constraint=requesting_constraint,
            known_snapshot=self.isets.known(iset),
            var_name=var_name,
        )
        element = source.next(iset, ctx) if source is not None else None
        self.acquisitions.append((iset, requesting_var, element))
        self.trace.append(("ACQUIRE", self.isets.name_of(iset), element))
        if element is None:
            self.isets.close(iset)
            self.propagate_isets()
            return None
        if self.isets.contains(iset, element):
            raise SourceContractError(
                f"source for {self.isets.name_of(iset)} repeated element {element!r}"
            )
        self.isets.ensure_member(iset, element)
        self.propagate_isets()
        return element

    # ------------------------------------------------------------------
    # the KAC procedure

    def solve(self) -> bool:
        """Propagate to quiescence. True if consistent so far, False if not."""
        try:
            self.kac_fixpoint()
            return True
        except Inconsistency:
            return False

    def kac_fixpoint(self) -> None:
        """Check candidates until quiescent, acquiring only when forced.

        Loop: while any variable has candidates, seed the support graph with
        the first candidate of the first such variable (creation order),
        check it to completion and flush the graph. With no candidates left,
        a variable with an empty present list and an open definition domain
        gets one element acquired. Quiescence with an empty present list
        over a closed definition domain is a wipe-out.
        """
        self.propagate_isets()
        while True:
            var = next((v for v in self.variables if v.candidates), None)
            if var is not None:
                element = var.candidates[0]
                if var.bound_to is not None:
                    # A search decision already fixed this variable; late
                    # arrivals contradict it and are discarded as removed.
                    var.candidates.popleft()
                    self._set_state(var, element, PairState.REMOVED)
                    var.removed.append(element)
                    self.trace.append(("REMOVE", var.name, element))
                    continue
                self._observe(var, element)
                self._check_candidate(var, element)
                self._flush_graph()
                continue
            needy = next(
                (v for v in self.variables
                 if not v.present and v.bound_to is None
                 and v.def_domain is not None
                 and not self.isets.is_closed(v.def_domain)),
                None,
            )
            if needy is not None:
                self.acquire(needy.def_domain, requesting_var=needy.id)
                continue
            for v in self.variables:
                if v.present:
                    continue
                if v.bound_to is not None:
                    raise Inconsistency(f"search value for {v.name} was eliminated")
                if v.def_domain is not None and self.isets.is_closed(v.def_domain):
                    raise Inconsistency(f"domain wipe-out for {v.name}")
            return

    def _check_candidate(self, var: FdVariable, element: Element) -> bool:
        """Seek support for an observed pair against every constraint on its
        variable. Cascades triggered while checking one constraint may
        remove the pair itself; the state guard detects that."""
        for constraint in self._constraints_on.get(var.id, ()):
            if var.state(element) is not PairState.OBSERVED:
                return False
            if self._seek_support(var, element, constraint) == _NO_SUPPORT:
                self._remove_node(var, element)
                return False
        return var.state(element) is PairState.OBSERVED

    def _seek_support(self, var: FdVariable, element: Element,
                      constraint: FdConstraint) -> str:
        """Find a satisfying tuple for the pair under one constraint.

        Tuples are enumerated position by position, each position's pool
        ordered present, then observed, then candidates (insertion order
        within a class). An all-present tuple needs no bookkeeping; any
        other supporter is recorded with a reliance arc, and candidate
        supporters are observed and fully checked before returning. When
        no tuple exists, one element is acquired for the first other
        variable with an open domain and the search restarts; with every
        other domain closed the pair is unsupported.
        """
        pair = (var.id, element)
        self.graph.drop_support_arcs(pair, constraint.id)
        while True:
            assignment = self._find_tuple(var, element, constraint, _POOL_ALL)
            if assignment is not None:
                supporters = [
                    (w, x) for (w, x) in assignment
                    if self.variables[w].state(x) is not PairState.PRESENT
                ]
                if not supporters:
                    return _BY_PRESENT
                newly = []
                for w, x in supporters:
                    wvar = self.variables[w]
                    if wvar.state(x) is PairState.CANDIDATE:
                        self._observe(wvar, x)
                        newly.append((w, x))
                    self.graph.add_arc(pair, (w, x), constraint.id)
                    self.trace.append(
                        ("RELY", (var.name, element), (wvar.name, x), constraint.name)
                    )
                for w, x in newly:
                    if self.variables[w].state(x) is PairState.OBSERVED:
                        self._check_candidate(self.variables[w], x)
                return _BY_GRAPH
            target = None
            for w in constraint.distinct_args():
                if w == var.id:
                    continue
                wvar = self.variables[w]
                if wvar.def_domain is not None and not self.isets.is_closed(wvar.def_domain):
                    target = wvar
                    break
            if target is None:
                return _NO_SUPPORT
            self.acquire(target.def_domain, requesting_var=target.id,
                         requesting_constraint=constraint.name)

    def _find_tuple(self, var: FdVariable, element: Element,
                    constraint: FdConstraint, classes) -> "list | None":
        """Depth-first search for a satisfying assignment of the other
        variables, the pair's element fixed at every occurrence of its
        variable. Returns [(var id, element)] per distinct other variable,
        or None."""
        others = [w for w in constraint.distinct_args() if w != var.id]
        pools = {}
        for w in others:
            wvar = self.variables[w]
            if wvar.bound_to is not None:
                # A bound variable may only support with its committed value.
                pools[w] = list(wvar.present)
                continue
            pool = []
            if PairState.PRESENT in classes:
                pool.extend(wvar.present)
            if PairState.OBSERVED in classes:
                pool.extend(self.graph.observed_elements(w))
            if PairState.CANDIDATE in classes:
                pool.extend(wvar.candidates)
            pools[w] = pool
        assignment: dict = {}

        def extend(i: int) -> bool:
            if i == len(others):
                values = [element if a == var.id else assignment[a]
                          for a in constraint.args]
                return constraint.verify(values)
            w = others[i]
            for x in pools[w]:
                assignment[w] = x
                if extend(i + 1):
                    return True
            assignment.pop(w, None)
            return False

        if extend(0):
            return [(w, assignment[w]) for w in others]
        return None

    def _remove_node(self, var: FdVariable, element: Element) -> None:
        """Drop an unsupported observed pair and re-seek support for every
        pair that relied on it, cascading removals as needed."""
        pair = (var.id, element)
        self._set_state(var, element, PairState.REMOVED)
        var.removed.append(element)
        self.trace.append(("REMOVE", var.name, element))
        dependents = self.graph.dependents(pair)
        self.graph.remove_node(pair)
        for (dvid, delement), cid in dependents:
            dvar = self.variables[dvid]
            if dvar.state(delement) is not PairState.OBSERVED:
                continue
            if self._seek_support(dvar, delement, self._fd_constraints[cid]) == _NO_SUPPORT:
                self._remove_node(dvar, delement)

    def _observe(self, var: FdVariable, element: Element) -> None:
        if var.state(element) is PairState.CANDIDATE and element in var.candidates:
            var.candidates.remove(element)
        self._set_state(var, element, PairState.OBSERVED)
        self.graph.add_node((var.id, element))
        self.trace.append(("OBSERVE", var.name, element))

    def _flush_graph(self) -> None:
        """Promote every surviving observed pair to present and clear the
        graph; the batch was verified mutually supported, and presents
        never revert during propagation, so the supports stay valid."""
        for vid, element in list(self.graph.nodes):
            var = self.variables[vid]
            self._set_state(var, element, PairState.PRESENT)
            var.present.append(element)
            self.trace.append(("PRESENT", var.name, element))
        self.graph.clear()

    def _set_state(self, var: FdVariable, element: Element, new: PairState) -> None:
        old = var.state(element)
        phase = "search" if self._search_depth else "prop"
        allowed = ALLOWED_TRANSITIONS if phase == "prop" \
            else ALLOWED_TRANSITIONS | SEARCH_TRANSITIONS
        if (old, new) not in allowed:
            raise AssertionError(
                f"illegal {phase} transition {old.value}->{new.value} "
                f"for ({var.name},{element!r})"
            )
        var.states[element] = new
        self.transitions.append((var.id, element, old, new, phase))

    # ------------------------------------------------------------------
    # read access

    def present(self, vid: int) -> list:
        return list(self.variable(vid).present)

    def removed(self, vid: int) -> list:
        return list(self.variable(vid).removed)

    def candidates(self, vid: int) -> list:
        return list(self.variable(vid).candidates)

    def pair_state(self, vid: int, element: Element) -> PairState:
        return self.variable(vid).state(element)

    # ------------------------------------------------------------------
    # search

    def label(self, variables: "Sequence[int] | None" = None) -> "dict | None":
        """Depth-first search for a total assignment of the given variables.

        Values are tried in present-list order; committing to a value moves
        the variable's other present values to removed and re-propagates.
        Failed branches restore a full engine snapshot (sets, variables,
        pair states and source positions). When a variable runs out of
        present values and its definition domain is still open, one more
        element is acquired before giving up on the node.

        Returns {var id: element} or None when the search space is exhausted.
        """
        order = ([self.variables[v] for v in variables]
                 if variables is not None else list(self.variables))
        self._search_depth += 1
        try:
            return self._label(order, 0)
        finally:
            self._search_depth -= 1

    def _label(self, order: list, index: int) -> "dict | None":
        if index == len(order):
            return {v.id: v.bound_to for v in order}
        var = order[index]
        if var.bound_to is not None:
            return self._label(order, index + 1)
        tried: set = set()
        while True:
            value = next((e for e in var.present if e not in tried), None)
            if value is not None:
                tried.add(value)
                snapshot = self._snapshot()
                try:
                    self._bind(var, value)
                    result = self._label(order, index + 1)
                    if result is not None:
                        return result
                except Inconsistency:
                    pass
                self._restore(snapshot)
                continue
            if var.def_domain is not None and not self.isets.is_closed(var.def_domain):
                snapshot = self._snapshot()
                try:
                    self.acquire(var.def_domain, requesting_var=var.id)
                    self.kac_fixpoint()
                except Inconsistency:
                    self._restore(snapshot)
                    return None
                continue
            return None

    def _bind(self, var: FdVariable, value: Element) -> None:
        for e in list(var.present):
            if e != value:
                self._search_remove_present(var, e)
        for e in list(var.candidates):
            var.candidates.remove(e)
            self._set_state(var, e, PairState.REMOVED)
            var.removed.append(e)
            self.trace.append(("REMOVE", var.name, e))
        var.bound_to = value
        self._revise([var])
        self.kac_fixpoint()

    def _revise(self, seeds: list) -> None:
        """Cascade removal of present values whose every present-tuple
        support died when a search decision narrowed some variable."""
        work = deque(v.id for v in seeds)
        while work:
            vid = work.popleft()
            for constraint in self._constraints_on.get(vid, ()):
                for w in constraint.distinct_args():
                    if w == vid:
                        continue
                    wvar = self.variables[w]
                    for e in list(wvar.present):
                        if self._find_tuple(wvar, e, constraint, _POOL_PRESENT) is None:
                            self._search_remove_present(wvar, e)
                            work.append(w)

    def _search_remove_present(self, var: FdVariable, element: Element) -> None:
        self._set_state(var, element, PairState.REMOVED)
        var.present.remove(element)
        var.removed.append(element)
        self.trace.append(("REMOVE", var.name, element))

    # ------------------------------------------------------------------
    # snapshots (search only; taken at quiescence)

    def _snapshot(self):
        if self.isets.queue or self.graph.nodes:
            raise AssertionError("snapshot requires a quiescent engine")
        return (
            self.isets.get_state(),
            [(list(v.present), list(v.removed), list(v.candidates),
              dict(v.states), v.bound_to) for v in self.variables],
            {i: s.get_state() for i, s in self._sources.items()},
        )

    def _restore(self, snapshot) -> None:
        iset_state, var_states, source_states = snapshot
        self.isets.set_state(iset_state)
        for var, (present, removed, candidates, states, bound) in zip(
                self.variables, var_states):
            var.present = list(present)
            var.removed = list(removed)
            var.candidates = deque(candidates)
            var.states = dict(states)
            var.bound_to = bound
        for i, s in source_states.items():
            self._sources[i].set_state(s)
        self.graph.clear()
