import random

import pytest

from afsm import (
    export_dot,
    fixture_path,
    load_fixture,
    parse,
    serialize,
    validate_fsm,
)
from afsm.formats import (
    DuplicateName,
    FormatError,
    MissingStateAtLine,
    serialize_arena,
    serialize_fsm,
)
from afsm.model import MissingState
from conftest import random_document

FIXTURES = ("euclid.afsm", "counterexample.afsm", "ecoli.afsm")


def test_parse_euclid_document():
    doc = load_fixture("euclid.afsm")
    assert sorted(doc.fsms) == ["M1", "M2", "M3"]
    assert sorted(doc.arenas) == ["euclid"]
    m3 = doc.fsms["M3"]
    assert m3.states == ("5", "6", "7")
    assert m3.output_map["7"] == frozenset({"norm_z"})


def test_serialize_is_parse_fixpoint_on_fixtures():
    for name in FIXTURES:
        text = fixture_path(name).read_text(encoding="utf-8")
        doc = parse(text, source=name)
        canon = serialize(doc)
        again = parse(canon, source=name + ":canon")
        assert serialize(again) == canon
        assert again == doc


def test_serialization_preserves_vertex_machine_assignment():
    doc = load_fixture("ecoli.afsm")
    canon = serialize(doc)
    again = parse(canon)
    # LacA reuses the LacY shape; the node line must say so after a round
    # trip, not degrade to a copy
    assert again.arena_nodes["ecoli"]["LacA"] == "LacY"
    assert again.arenas["ecoli"].machine("LacA") is again.fsms["LacY"]


def test_declaration_order_is_irrelevant():
    a = parse(
        "fsm m\n  inputs {a}\n  outputs {}\n"
        "  state x {}\n  state y {}\n  initial x\n  trans x {a} y\nend\n"
    )
    b = parse(
        "fsm m\n  outputs {}\n  inputs {a}\n"
        "  state y {}\n  state x {}\n  trans x {a} y\n  initial x\nend\n"
    )
    assert a == b
    assert serialize(a) == serialize(b)


def test_comments_and_blank_lines_are_ignored():
    doc = parse(
        "# leading comment\n\n"
        "fsm m  # trailing comment\n"
        "  inputs {}\n  outputs {}\n"
        "  state x {}   # a state\n"
        "end\n"
    )
    assert doc.fsms["m"].states == ("x",)


def test_trans_before_state_declaration_reports_line():
    text = "fsm m\n  inputs {a}\n  outputs {}\n  trans x {a} y\n  state x {}\nend\n"
    with pytest.raises(MissingStateAtLine) as exc:
        parse(text)
    assert isinstance(exc.value, MissingState)
    assert exc.value.line == 4
    assert "line 4" in str(exc.value)


def test_parse_error_line_numbers():
    cases = [
        ("fsm m\n  bogus x\nend\n", 2),
        ("state x {}\n", 1),
        ("fsm m\n  inputs {a b}\nend\n", 2),
        ("fsm m\n  inputs {a}\nfsm n\nend\n", 3),
        ("fsm m\n  inputs {}\n  outputs {}\n  state x {}\n", 4),
        ("arena a\n  node v ghost\nend\n", 1),
    ]
    for text, line in cases:
        with pytest.raises(FormatError) as exc:
            parse(text)
        assert exc.value.line == line, text


def test_duplicate_names_rejected():
    with pytest.raises(DuplicateName):
        parse("fsm m\n  inputs {}\n  outputs {}\n  state x {}\nend\n"
              "fsm m\n  inputs {}\n  outputs {}\n  state x {}\nend\n")
    with pytest.raises(DuplicateName):
        parse("fsm m\n  inputs {}\n  outputs {}\n  state x {}\n  state x {}\nend\n")


def test_serialize_fsm_without_initial_omits_directive():
    m = validate_fsm("m", ["x"], [], [], {"x": []}, [])
    text = serialize_fsm(m)
    assert "initial" not in text
    assert parse(text + "\n").fsms["m"].initial is None


def test_export_dot_fsm():
    doc = load_fixture("euclid.afsm")
    dot = export_dot(doc.fsms["M1"])
    assert dot.startswith('digraph "M1" {')
    assert '__start__ -> "1";' in dot
    assert '"1" [label="1 / {}"];' in dot
    assert '"2" [label="2 / {z1sq}"];' in dot
    assert dot.count("->") == 3  # two transitions plus the start marker


def test_export_dot_fsm_without_initial_has_no_start_marker():
    m = validate_fsm("m", ["x"], [], [], {"x": []}, [])
    assert "__start__" not in export_dot(m)


def test_export_dot_arena():
    doc = load_fixture("ecoli.afsm")
    dot = export_dot(doc.arenas["ecoli"])
    assert dot.count("shape=box") == 17
    assert dot.count("->") == 43
    assert '"LacA" [shape=box, label="LacA : LacY"];' in dot


def test_export_dot_rejects_other_types():
    with pytest.raises(TypeError):
        export_dot("not a model")


def test_random_documents_round_trip():
    rng = random.Random(5001)
    for _ in range(100):
        doc = random_document(rng)
        canon = serialize(doc)
        again = parse(canon)
        assert again == doc
        assert serialize(again) == canon


def test_serialize_arena_standalone():
    doc = load_fixture("euclid.afsm")
    text = serialize_arena(doc.arenas["euclid"])
    assert text.splitlines()[0] == "arena euclid"
    assert "  edge m1 m3" in text.splitlines()
