"""The independent verifier-text parser and type checker."""

import pytest

from corpus import INVALID_PROGRAMS, VALID_PROGRAMS
from uclgen.frontend import parse_tolerant, prune_to_child
from uclgen.uclid import compile_program, lower, print_uclid
from uclgen.uclid_check import (
    UclidParseError,
    parse_uclid,
    validate_uclid,
)


def program_of(src: str):
    p, _ = prune_to_child(parse_tolerant(src))
    return p


GOOD = """
module main {
  var count : integer;
  input cap : integer;
  init {
    count = 0;
  }
  next {
    if (count < cap) {
      count = count + 1;
    }
  }
  invariant keep: count >= 0;
}
"""


def codes(text: str) -> set[str]:
    return {d.code for d in validate_uclid(text)}


def test_accepts_well_typed_module():
    assert validate_uclid(GOOD) == []


def test_accepts_flexible_layout():
    # comma declaration lists, multi-name modifies, call-based next
    text = """
module main {
  var a, b : integer;
  var go : boolean;
  init { a = 0; b = 0; go = false; }
  procedure step()
    modifies a, b;
  {
    a = b;
    b = a + 1;
  }
  next { call step(); }
}
"""
    assert validate_uclid(text) == []


def test_parse_error_is_a_diagnostic():
    assert codes("module main { var }")  # no exception


def test_parse_uclid_raises_on_garbage():
    with pytest.raises(UclidParseError):
        parse_uclid("this is not a module")


def test_duplicate_declaration():
    text = GOOD.replace(
        "var count : integer;",
        "var count : integer;\n  var count : boolean;",
    )
    assert "duplicate-declaration" in codes(text)


def test_input_write_detected():
    text = GOOD.replace("count = count + 1;", "cap = 0;")
    assert any("input" in c for c in codes(text))


def test_assignment_type_mismatch():
    text = GOOD.replace("count = 0;", "count = false;")
    assert codes(text)


def test_condition_must_be_boolean():
    text = GOOD.replace("count < cap", "count + cap")
    assert codes(text)


def test_undeclared_variable():
    text = GOOD.replace("count = 0;", "count = ghost;")
    assert any("undeclared" in c for c in codes(text))


def test_modifies_must_be_exact():
    missing = """
module main {
  var a : integer;
  var b : integer;
  init { a = 0; b = 0; }
  procedure step()
    modifies a;
  {
    a = 1;
    b = 2;
  }
  next { call step(); }
}
"""
    assert codes(missing)
    stale = missing.replace("modifies a;", "modifies a;\n    modifies b;")
    stale = stale.replace("b = 2;", "")
    assert codes(stale)


def test_invariant_must_be_boolean():
    text = GOOD.replace("count >= 0", "count + 1")
    assert codes(text)


def test_enum_tags_resolve():
    text = """
module main {
  var mode : enum { OFF, ON };
  init { mode = OFF; }
  next { mode = ON; }
}
"""
    assert validate_uclid(text) == []
    assert codes(text.replace("mode = ON;", "mode = MAYBE;"))


def test_bitvector_widths_checked():
    text = """
module main {
  var w : bv4;
  init { w = 0bv4; }
  next { w = w + 1bv8; }
}
"""
    assert codes(text)
    assert validate_uclid(text.replace("1bv8", "1bv4")) == []


def test_parse_print_is_stable():
    module = parse_uclid(GOOD)
    printed = print_uclid(module)
    assert print_uclid(parse_uclid(printed)) == printed


@pytest.mark.parametrize("name", sorted(VALID_PROGRAMS))
def test_differential_accepts_valid_corpus(name):
    text = print_uclid(compile_program(program_of(VALID_PROGRAMS[name])))
    assert validate_uclid(text) == []


@pytest.mark.parametrize("name", sorted(INVALID_PROGRAMS))
def test_differential_rejects_invalid_corpus(name):
    # render without compile-time checking so the validator sees the
    # same ill-typed program the compiler rejected
    text = print_uclid(lower(program_of(INVALID_PROGRAMS[name]), {}))
    assert validate_uclid(text)
