import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from machines import random_machine, structure
from schemasim.dsl import (
    AssemblageError, compile_assemblage, compile_source, parse_assemblage, render_assemblage,
)
from schemasim.fsm import to_table, validate_fsm

SCENARIOS = Path(__import__("schemasim.scenarios", fromlist=["x"]).__file__).parent


def source(name):
    return (SCENARIOS / name).read_text()


def diag(src):
    with pytest.raises(AssemblageError) as info:
        parse_assemblage(src)
    return info.value.diagnostics


def test_hom_for_ast():
    ast = parse_assemblage(source("foraging.asm.txt"))
    assert ast.process_name == "HOM_FOR"
    assert ast.start_ref == "OFF"
    assert [d.name for d in ast.state_defs] == ["OFF", "WANDER", "ACQUIRE_RED", "DELIVER_RED", "ACQUIRE_BLUE",
                                                 "DELIVER_BLUE"]
    wander = ast.state_defs[1]
    assert [a.releaser for a in wander.alternatives] == ["red_visible", "blue_visible", "off"]


@pytest.mark.parametrize("src,table", [
    ("foraging.asm.txt", "foraging.table"),
    ("forward.asm.txt", "forward.table"),
    ("goal_keeper.asm.txt", "goal_keeper.table"),
])
def test_reference_sources_match_golden(src, table, golden):
    fsm = compile_source(source(src))
    assert to_table(fsm) == golden(table)
    assert validate_fsm(fsm) == []


def test_minimal_program():
    fsm = compile_source("P = A,\nA = (on->A).")
    assert len(fsm.states) == 1 and len(fsm.transitions) == 1
    assert fsm.finals == {fsm.start}


def test_trailing_comma_and_comments():
    fsm = compile_source("// header\nP = A, // start\nA = (on->B),\nB = (off->A),\n")
    assert [s.label for s in fsm.states] == ["A", "B"]


def test_undefined_reference():
    (d,) = diag("P = A,\nA = (on->B).")
    assert d.message == "undefined state reference: B"
    assert (d.span.line, d.span.column) == (2, 10)


def test_semantic_errors_all_reported():
    ds = diag("P = A,\nA = (on->A|on->Z),\nA = (x->A).")
    msgs = [d.message for d in ds]
    assert "duplicate state definition: A" in msgs
    assert "duplicate releaser within A: on" in msgs
    assert "undefined state reference: Z" in msgs


def test_process_name_redefined():
    msgs = [d.message for d in diag("P = A,\nP = (on->A),\nA = (on->A).")]
    assert any("process name" in m for m in msgs)


@pytest.mark.parametrize("src,line,col", [
    ("P = A,\nA = (On->A).", 2, 6),        # mixed case
    ("P = A,\nA = (on->a).", 2, 10),       # releaser where a state belongs
    ("P = A,\nA = (on->A)", 2, 12),        # missing terminator
    ("P = A,\nA = (on->A). junk", 2, 14),  # trailing garbage
    ("P = A,\nA = ().", 2, 6),
    ("P = A,\nA = (on-A).", 2, 8),
    ("", 1, 1),
    ("P = A,\nA = (on->A) # .", 2, 13),
])
def test_syntax_errors_have_positions(src, line, col):
    (d,) = diag(src)
    assert (d.span.line, d.span.column) == (line, col)
    assert d.format("f.asm.txt").startswith(f"f.asm.txt:{line}:{col}: ")


def test_invalid_utf8_is_a_diagnostic():
    (d,) = diag(b"P = A,\nA = (on->A\xff).")
    assert (d.span.line, d.span.column) == (2, 11)


def test_explicit_numbering():
    ast = parse_assemblage("P = A,\nA = (go->B),\nB = (go->A).")
    fsm = compile_assemblage(ast, {"A": 5, "B": 2})
    assert to_table(fsm) == "2 go 5\n5 go 2\n"


def test_render_reference_round_trip(golden):
    fsm = compile_source(source("foraging.asm.txt"))
    text = render_assemblage(fsm, "HOM_FOR")
    assert compile_source(text) == fsm


def test_render_forward_has_six_arrows():
    assert render_assemblage(compile_source(source("forward.asm.txt"))).count("->") == 6


def test_render_one_state():
    fsm = compile_source("P = A,\nA = (on->A).")
    assert render_assemblage(fsm) == "P = A,\nA = (on->A).\n"


@given(st.integers(0, 2**32 - 1))
def test_render_parse_compile_round_trip(seed):
    fsm = random_machine(random.Random(seed))
    back = compile_source(render_assemblage(fsm))
    assert structure(back) == structure(fsm)


@given(st.binary(max_size=200))
def test_parser_total_on_bytes(data):
    try:
        parse_assemblage(data)
    except AssemblageError as exc:
        assert exc.diagnostics
        assert all(d.span.line >= 1 and d.span.column >= 1 and d.span.length >= 1 for d in exc.diagnostics)


@given(st.text(alphabet="PAB=(),.|->onf \n/", max_size=80))
def test_parser_total_on_near_miss_text(text):
    try:
        parse_assemblage(text)
    except AssemblageError as exc:
        assert exc.diagnostics
