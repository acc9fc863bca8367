import random

import pytest

from afsm import (
    InitialStateMismatch,
    QuotientSelfLoop,
    arena_quotient,
    arena_vertex_partition,
    comp_bisimulation,
    expand,
    induce_fsm,
    is_bisimilar,
    is_comp_bisimilar,
    is_isomorphic,
    load_fixture,
    machine_classes,
    max_bisimulation,
    quotient,
    reduce,
    validate_arena,
    validate_fsm,
    verify_theorem_4_2,
)
from afsm.compositional import ClassCoverageGap
from conftest import random_arena, random_fsm, renamed_copy


def two_loop_machine():
    return validate_fsm(
        "Q", ["q0"], ["a", "b"], [], {"q0": []},
        [("q0", ["a"], "q0"), ("q0", ["b"], "q0")], initial="q0",
    )


def test_machine_classes_of_counterexample_arenas():
    doc = load_fixture("counterexample.afsm")
    a1 = doc.arenas["A1"]
    a2 = doc.arenas["A2"]
    classes = machine_classes(a1, a2)
    # M2 appears in both arenas and shares a class; every other machine
    # is alone (M4 in particular is bisimilar to none of M1..M3)
    blocks = set(classes.classes)
    assert frozenset({(0, "v2"), (1, "w2")}) in blocks
    assert frozenset({(1, "w4")}) in blocks
    assert len(blocks) == 4


def test_machine_classes_tokens_are_stable():
    doc = load_fixture("counterexample.afsm")
    classes = machine_classes(doc.arenas["A1"])
    assert classes.tokens() == ("C0", "C1", "C2")
    assert classes.token_of(0, "v1") == "C0"


def test_machine_classes_agree_with_pairwise_check():
    rng = random.Random(4001)
    for _ in range(15):
        arena = random_arena(rng)
        classes = machine_classes(arena)
        machines = dict(arena.vertices)
        for v in machines:
            for w in machines:
                same = classes.token_of(0, v) == classes.token_of(0, w)
                assert same == is_bisimilar(machines[v], machines[w])


def test_machine_classes_reject_mixed_initial_presence():
    with_init = random_fsm(random.Random(1), "a", with_initial=True)
    without = random_fsm(random.Random(2), "b", with_initial=False)
    arena = validate_arena("mix", {"v": with_init, "w": without}, [])
    with pytest.raises(InitialStateMismatch):
        machine_classes(arena)


def test_induce_fsm_shape():
    doc = load_fixture("counterexample.afsm")
    a2 = doc.arenas["A2"]
    classes = machine_classes(a2)
    f = induce_fsm(a2, classes)
    assert f.states == ("w2", "w4")
    assert f.initial is None
    assert f.transitions == (("w2", frozenset(), "w4"),)
    assert f.output_map["w2"] != f.output_map["w4"]


def test_induce_fsm_requires_covering_classes():
    doc = load_fixture("counterexample.afsm")
    classes = machine_classes(doc.arenas["A2"])
    with pytest.raises(ClassCoverageGap):
        induce_fsm(doc.arenas["A1"], classes)


def test_counterexample_arenas_not_comp_bisimilar():
    doc = load_fixture("counterexample.afsm")
    assert not is_comp_bisimilar(doc.arenas["A1"], doc.arenas["A2"])
    assert is_comp_bisimilar(doc.arenas["A1"], doc.arenas["A1"])


def test_comp_bisimulation_matches_induced_machine_bisimulation():
    rng = random.Random(4002)
    for _ in range(20):
        a1 = random_arena(rng, "a1")
        a2 = random_arena(rng, "a2")
        classes = machine_classes(a1, a2)
        f1 = induce_fsm(a1, classes, 0)
        f2 = induce_fsm(a2, classes, 1)
        assert is_comp_bisimilar(a1, a2) == is_bisimilar(f1, f2)
        assert comp_bisimulation(a1, a2) == max_bisimulation(f1, f2)


def test_comp_bisim_invariant_under_vertex_and_state_renaming():
    rng = random.Random(4003)
    for _ in range(10):
        a1 = random_arena(rng, "a1")
        renamed = {
            v: renamed_copy(rng, fsm, f"{fsm.id}r") for v, fsm in a1.vertices
        }
        mapping = {v: f"w{i}" for i, (v, _) in enumerate(a1.vertices)}
        a2 = validate_arena(
            "a2",
            {mapping[v]: renamed[v] for v, _ in a1.vertices},
            [(mapping[x], mapping[y]) for x, y in a1.edges],
        )
        assert is_comp_bisimilar(a1, a2)


def test_arena_vertex_partition_refines_classes_by_edges():
    m = two_loop_machine()
    # identical machines but only one vertex has an outgoing edge:
    # same machine class, different blocks
    arena = validate_arena("a", {"v1": m, "v2": m, "v3": m}, [("v1", "v3")])
    assert len(machine_classes(arena).classes) == 1
    part = arena_vertex_partition(arena)
    assert frozenset({"v2", "v3"}) in part
    assert frozenset({"v1"}) in part


def test_arena_quotient_of_one_directed_edge_pair_is_the_arena():
    m = two_loop_machine()
    arena = validate_arena("a", {"v1": m, "v2": m}, [("v1", "v2")])
    q = arena_quotient(arena)
    assert len(q.vertices) == 2
    assert q.edges == (("v1", "v2"),)


def test_arena_quotient_self_loop_error_on_two_cycle():
    m = two_loop_machine()
    arena = validate_arena("a", {"v1": m, "v2": m}, [("v1", "v2"), ("v2", "v1")])
    with pytest.raises(QuotientSelfLoop):
        arena_quotient(arena)


def test_arena_quotient_is_idempotent_and_comp_bisimilar():
    rng = random.Random(4004)
    done = 0
    while done < 20:
        arena = random_arena(rng)
        try:
            q = arena_quotient(arena)
        except QuotientSelfLoop:
            continue
        done += 1
        assert is_comp_bisimilar(arena, q)
        q2 = arena_quotient(q)
        assert len(q2.vertices) == len(q.vertices)
        assert len(q2.edges) == len(q.edges)


def test_ecoli_quotient_matches_published_minimal_arena():
    doc = load_fixture("ecoli.afsm")
    arena = doc.arenas["ecoli"]
    a_min = doc.arenas["ecoli_min"]
    q = arena_quotient(arena)
    assert len(q.vertices) == 9
    assert len(q.edges) == 18
    assert is_comp_bisimilar(arena, a_min)
    assert is_comp_bisimilar(q, a_min)


def test_reduce_singleton_arena_equals_direct_minimization():
    rng = random.Random(4005)
    for _ in range(10):
        m = random_fsm(rng, "m", with_initial=True)
        arena = validate_arena("solo", {"v": m}, [])
        minimal, report = reduce(arena)
        assert is_isomorphic(minimal, quotient(expand(arena, mode="full").fsm))
        assert report["classes"] == 1
        assert report["quotient_vertices"] == 1
        assert report["final_states"] == len(minimal.states)


def test_reduce_report_keys():
    doc = load_fixture("counterexample.afsm")
    _, report = reduce(doc.arenas["A2"])
    assert set(report) == {
        "classes",
        "quotient_vertices",
        "expanded_states",
        "expanded_transitions",
        "final_states",
        "final_transitions",
    }


def test_expansion_preservation_has_a_genuine_counterexample():
    # Merging compositionally equivalent vertices is NOT sound for the
    # expansion semantics: composite labels are unions of component
    # labels, so two concurrent copies of this machine produce an {a,b}
    # step that a single copy cannot.  This documents the defect; the
    # reduction pipeline is therefore a heuristic, not an equivalence.
    q = two_loop_machine()
    a1 = validate_arena("two", {"v1": q, "v2": q}, [])
    a2 = validate_arena("one", {"w": q}, [])
    assert is_comp_bisimilar(a1, a2)
    m1 = expand(a1, mode="full").fsm
    m2 = expand(a2, mode="full").fsm
    assert not is_bisimilar(m1, m2)
    assert verify_theorem_4_2(a1, a2) == {
        "comp": True,
        "flat": False,
        "consistent": False,
    }


def test_verify_report_on_counterexample_fixture():
    doc = load_fixture("counterexample.afsm")
    out = verify_theorem_4_2(doc.arenas["A1"], doc.arenas["A2"])
    assert out == {"comp": False, "flat": True, "consistent": True}
