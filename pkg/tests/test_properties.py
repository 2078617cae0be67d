"""Randomized invariant checks (compact versions; the acceptance module
repeats the headline properties at their full instance counts)."""

import random

from icsp import PairState

from instances import (
    audit_transitions,
    engine_kac_holds,
    random_iset_instance,
    random_open_engine,
    run_iset_instance,
)


def test_order_independence_small():
    rng = random.Random(1)
    for _ in range(30):
        instance = random_iset_instance(rng)
        baseline = run_iset_instance(instance)
        for perm in range(4):
            shuffled = run_iset_instance(instance, random.Random(perm))
            assert shuffled == baseline


def test_random_open_instances_stay_known_arc_consistent():
    rng = random.Random(2)
    quiescent = 0
    for _ in range(80):
        engine, _var_ids = random_open_engine(rng)
        if engine.solve():
            quiescent += 1
            assert engine_kac_holds(engine)
    assert quiescent > 10


def test_element_lists_partition_and_stay_in_domain():
    rng = random.Random(3)
    for _ in range(60):
        engine, var_ids = random_open_engine(rng)
        if not engine.solve():
            continue
        for vid in var_ids:
            var = engine.variable(vid)
            present, removed = set(var.present), set(var.removed)
            assert not present & removed
            assert not var.candidates
            known = engine.known(var.def_domain)
            assert present | removed <= known


def test_removed_values_never_return_during_propagation():
    rng = random.Random(4)
    for _ in range(60):
        engine, _var_ids = random_open_engine(rng)
        engine.solve()
        seen_removed = set()
        for vid, element, _frm, to, _phase in engine.transitions:
            assert (vid, element) not in seen_removed
            if to is PairState.REMOVED:
                seen_removed.add((vid, element))
        assert audit_transitions(engine) == []


def test_acquisitions_bounded_by_supply():
    rng = random.Random(5)
    for _ in range(60):
        engine, _var_ids = random_open_engine(rng)
        supplies = {iset: len(src.elements) for iset, src in engine._sources.items()}
        engine.solve()
        calls = {}
        for iset, _var, _elem in engine.acquisitions:
            calls[iset] = calls.get(iset, 0) + 1
        for iset, n in calls.items():
            assert n <= supplies[iset] + 1  # +1 for the exhausted reply


def test_no_arc_ever_points_at_a_present_supporter():
    # replay the trace: once a pair has flushed to present it may never
    # appear again as the supporter of a reliance arc
    rng = random.Random(6)
    for _ in range(60):
        engine, _var_ids = random_open_engine(rng)
        engine.solve()
        present_so_far = set()
        for entry in engine.trace:
            if entry[0] == "PRESENT":
                present_so_far.add((entry[1], entry[2]))
            elif entry[0] == "RELY":
                assert entry[2] not in present_so_far
