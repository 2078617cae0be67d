"""Engine-level tests of the known-arc-consistency procedure: candidate
handling, support seek priority, the reliance graph, cascaded removal, and
the full lazy-acquisition walkthrough."""

import pytest

from icsp import Engine, Intersection, PairState, ScriptedSource

from instances import audit_transitions, engine_kac_holds
from icsp.oracle import ClosedCsp, ac3


def golden_engine():
    """Three variables over unknown domains, an intersection between the
    domains, one order constraint, and two scripted suppliers."""
    eng = Engine()
    dx = eng.new_iset(name="dx")
    dy = eng.new_iset(name="dy")
    dz = eng.new_iset(name="dz")
    x = eng.new_fd_variable(dx, name="x")
    y = eng.new_fd_variable(dy, name="y")
    z = eng.new_fd_variable(dz, name="z")
    eng.post_iset_constraint(Intersection(dx, dy, dz))
    eng.post_fd_constraint("gt", [z, x])
    eng.register_source(dx, ScriptedSource([1]))
    eng.register_source(dz, ScriptedSource([2]))
    return eng, (dx, dy, dz), (x, y, z)


# ----------------------------------------------------------------------
# variables, candidates, verify

def test_new_variable_over_empty_domain():
    eng = Engine()
    d = eng.new_iset()
    v = eng.new_fd_variable(d)
    assert eng.present(v) == [] and eng.removed(v) == [] and eng.candidates(v) == []


def test_new_variable_candidates_existing_elements():
    eng = Engine()
    d = eng.new_iset([1, 2])
    v = eng.new_fd_variable(d)
    assert eng.candidates(v) == [1, 2]
    assert eng.pair_state(v, 1) is PairState.CANDIDATE


def test_shared_domain_independent_queues():
    eng = Engine()
    d = eng.new_iset([1])
    v1 = eng.new_fd_variable(d)
    v2 = eng.new_fd_variable(d)
    assert eng.candidates(v1) == [1] and eng.candidates(v2) == [1]
    eng.variable(v1).candidates.popleft()
    assert eng.candidates(v2) == [1]


def test_enqueue_candidate_idempotent():
    eng = Engine()
    d = eng.new_iset([1])
    v = eng.new_fd_variable(d)
    eng.enqueue_candidate(v, 1)
    assert eng.candidates(v) == [1]


def test_enqueue_candidate_requires_domain_membership():
    eng = Engine()
    d = eng.new_iset([1])
    v = eng.new_fd_variable(d)
    with pytest.raises(ValueError):
        eng.enqueue_candidate(v, 9)


def test_verify_builtins():
    eng = Engine()
    d = eng.new_iset([1])
    v = eng.new_fd_variable(d)
    lt = eng.fd_constraint(eng.post_fd_constraint("lt", [v, v]))
    gt = eng.fd_constraint(eng.post_fd_constraint("gt", [v, v]))
    assert lt.verify([1, 2]) is True
    assert lt.verify([2, 2]) is False
    assert gt.verify([2, 1]) is True
    with pytest.raises(ValueError):
        lt.verify([1])


def test_builtin_arity_checked_at_post():
    eng = Engine()
    d = eng.new_iset([1])
    v = eng.new_fd_variable(d)
    with pytest.raises(ValueError):
        eng.post_fd_constraint("lt", [v])
    with pytest.raises(ValueError):
        eng.post_fd_constraint("no_such_thing", [v, v])


def test_duplicate_def_domain_rejected():
    eng = Engine()
    d1 = eng.new_iset()
    d2 = eng.new_iset()
    v = eng.new_fd_variable(d1)
    with pytest.raises(ValueError):
        eng.def_domain(v, d2)


# ----------------------------------------------------------------------
# the KAC loop

def test_no_variables_is_quiescent():
    assert Engine().solve() is True


def test_golden_walkthrough():
    eng, (dx, dy, dz), (x, y, z) = golden_engine()
    assert eng.solve() is True
    assert eng.present(x) == [1] and eng.removed(x) == [2]
    assert eng.present(y) == [2] and eng.removed(y) == []
    assert eng.present(z) == [2] and eng.removed(z) == []
    assert eng.is_closed(dz)
    assert not eng.is_closed(dx) and not eng.is_closed(dy)
    # one acquisition for dx, two for dz (the second being the exhausted reply)
    per_iset = [iset for iset, _var, _elem in eng.acquisitions]
    assert per_iset == [dx, dz, dz]
    assert eng.acquisitions[-1][2] is None
    assert engine_kac_holds(eng)
    assert audit_transitions(eng) == []


def test_wipeout_on_closed_empty_domain():
    eng = Engine()
    d = eng.new_iset([], open=False)
    eng.new_fd_variable(d)
    assert eng.solve() is False


def test_unsupported_pair_with_closed_domains_fails_like_ac():
    eng = Engine()
    dx = eng.new_iset([2], open=False)
    dz = eng.new_iset([2], open=False)
    x = eng.new_fd_variable(dx, name="x")
    z = eng.new_fd_variable(dz, name="z")
    eng.post_fd_constraint("gt", [z, x])
    assert eng.solve() is False
    from icsp import resolve_verifier
    _, _, gt = resolve_verifier("gt")
    assert ac3(ClosedCsp({"x": [2], "z": [2]}, [("gt", ["z", "x"], gt)])).consistent is False


def test_variable_without_constraints_is_vacuously_supported():
    eng = Engine()
    d = eng.new_iset([5], open=False)
    v = eng.new_fd_variable(d)
    assert eng.solve() is True
    assert eng.present(v) == [5]


def test_unary_constraint_is_node_consistency():
    eng = Engine()
    d = eng.new_iset([1, 2, 3, 4], open=False)
    v = eng.new_fd_variable(d)
    eng.post_fd_constraint("even", [v], lambda t: t[0] % 2 == 0)
    assert eng.solve() is True
    # oracle: direct filter of the domain
    assert eng.present(v) == [e for e in [1, 2, 3, 4] if e % 2 == 0]
    assert eng.removed(v) == [e for e in [1, 2, 3, 4] if e % 2 != 0]


def test_repeated_argument_substitutes_same_element():
    eng = Engine()
    d = eng.new_iset([2, 3], open=False)
    v = eng.new_fd_variable(d)
    eng.post_fd_constraint("self_sum_is_even", [v, v], lambda t: (t[0] + t[1]) % 4 == 0)
    assert eng.solve() is True
    assert eng.present(v) == [2]  # (2,2) passes, (3,3) does not
    assert eng.removed(v) == [3]


# ----------------------------------------------------------------------
# support priority and the reliance graph

def test_support_by_present_records_no_arc():
    eng = Engine()
    dz = eng.new_iset([2], open=False, name="dz")
    z = eng.new_fd_variable(dz, name="z")
    assert eng.solve() is True  # z=2 becomes present with no constraints yet
    assert eng.present(z) == [2]
    dx = eng.new_iset([1], name="dx")
    x = eng.new_fd_variable(dx, name="x")
    eng.post_fd_constraint("gt", [z, x])
    assert eng.solve() is True
    assert eng.present(x) == [1]
    # support came from a present value: nothing was recorded
    assert [t for t in eng.trace if t[0] == "RELY"] == []


def test_support_by_observed_records_arc():
    eng, _isets, (x, _y, z) = golden_engine()
    eng.solve()
    relies = [t for t in eng.trace if t[0] == "RELY"]
    assert (("RELY", ("x", 1), ("z", 2), "gt")) in relies
    assert (("RELY", ("z", 2), ("x", 1), "gt")) in relies


def test_flush_clears_graph_and_promotes():
    eng, _isets, (x, _y, z) = golden_engine()
    eng.solve()
    assert eng.graph.nodes == {} and eng.graph.arcs == []
    assert eng.pair_state(x, 1) is PairState.PRESENT
    assert eng.pair_state(z, 2) is PairState.PRESENT


def test_removal_cascade_chain():
    # ea relies on eb relies on ec; ec fails its unary check, so all three
    # fall, and the second elements of each domain survive instead
    table_ab = {(1, 2), (10, 20)}
    table_bc = {(2, 3), (20, 30)}
    eng = Engine()
    da = eng.new_iset([1, 10], open=False, name="da")
    db = eng.new_iset([2, 20], open=False, name="db")
    dc = eng.new_iset([3, 30], open=False, name="dc")
    a = eng.new_fd_variable(da, name="a")
    b = eng.new_fd_variable(db, name="b")
    c = eng.new_fd_variable(dc, name="c")
    eng.post_fd_constraint("ab", [a, b], lambda t: tuple(t) in table_ab)
    eng.post_fd_constraint("bc", [b, c], lambda t: tuple(t) in table_bc)
    eng.post_fd_constraint("cok", [c], lambda t: t[0] != 3)
    assert eng.solve() is True
    assert eng.removed(a) == [1] and eng.removed(b) == [2] and eng.removed(c) == [3]
    assert eng.present(a) == [10] and eng.present(b) == [20] and eng.present(c) == [30]
    # oracle agreement: AC prunes exactly the same three values
    csp = ClosedCsp(
        {"a": [1, 10], "b": [2, 20], "c": [3, 30]},
        [("ab", ["a", "b"], lambda t: tuple(t) in table_ab),
         ("bc", ["b", "c"], lambda t: tuple(t) in table_bc),
         ("cok", ["c"], lambda t: t[0] != 3)],
    )
    result = ac3(csp)
    assert result.consistent
    assert result.domains == {"a": [10], "b": [20], "c": [30]}


def test_cascade_reseek_finds_all_present_tuple():
    # b first leans on a doomed supporter; after the cascade the re-seek
    # succeeds purely among present values and records no new arc
    truths = {(2, 10, 4), (2, 20, 40)}
    eng = Engine()
    dc = eng.new_iset([10, 20], open=False, name="dc")
    dd = eng.new_iset([40], name="dd")
    c = eng.new_fd_variable(dc, name="c")
    d = eng.new_fd_variable(dd, name="d")
    assert eng.solve() is True  # c: 10,20 present; d: 40 present
    db = eng.new_iset([2], open=False, name="db")
    b = eng.new_fd_variable(db, name="b")
    eng.post_fd_constraint("k", [b, c, d], lambda t: tuple(t) in truths)
    eng.post_fd_constraint("dok", [d], lambda t: t[0] != 4)
    eng.ensure_member(dd, 4)
    assert eng.solve() is True
    assert eng.present(b) == [2]
    assert eng.removed(d) == [4] and eng.present(d) == [40]
    # exactly the two arcs of the first (doomed) tuple were ever recorded
    relies = [t for t in eng.trace if t[0] == "RELY"]
    assert relies == [
        ("RELY", ("d", 4), ("b", 2), "k"),
        ("RELY", ("b", 2), ("d", 4), "k"),
    ]
    # oracle agreement on the closed-world equivalent
    csp = ClosedCsp(
        {"b": [2], "c": [10, 20], "d": [40, 4]},
        [("k", ["b", "c", "d"], lambda t: tuple(t) in truths),
         ("dok", ["d"], lambda t: t[0] != 4)],
    )
    result = ac3(csp)
    assert result.consistent
    assert 2 in result.domains["b"]
    # no blanket consistency check here: k was posted after c's values were
    # already present, so those carry no promise of support under k


def test_transition_log_is_clean_across_scenarios():
    eng, _isets, _vars = golden_engine()
    eng.solve()
    assert audit_transitions(eng) == []
    assert all(phase == "prop" for *_rest, phase in eng.transitions)
