"""The built-in MAX-SMT solver, its theory core, and the external bridge."""

import random
from pathlib import Path

import pytest

from oracle_maxsmt import oracle_optimum, random_clause_set
from uclgen.ast_core import BOOL, INT, REAL, ArrayType, BVType, EnumType
from uclgen.constraints import ClauseSet, Eq, HasTag, Lit
from uclgen.constraints import Tester as CtorTester
from uclgen.maxsmt import (
    Untypeable,
    check_sat,
    emit_smtlib,
    parse_solver_output,
    solve_external,
    solve_maxsmt,
    verify_solution,
)

GOLDEN = Path(__file__).parent / "golden"


def cs_of(*clauses, hard=()):
    cs = ClauseSet()
    v = {name: cs.tvar(("var", name)) for name in "xyz"}
    for lits in hard:
        cs.add_hard([l(v) for l in lits], "t:hard")
    for i, lits in enumerate(clauses):
        cs.add_soft([l(v) for l in lits], 1, origin=i, label="t:soft")
    return cs


def eq(name, ty):
    return lambda v: Lit(Eq(v[name], ty))


def neq(name, ty):
    return lambda v: Lit(Eq(v[name], ty), positive=False)


def eqv(a, b):
    return lambda v: Lit(Eq(v[a], v[b]))


def is_ctor(ctor, name):
    return lambda v: Lit(CtorTester(ctor, v[name]))


def tag(t, name):
    return lambda v: Lit(HasTag(t, v[name]))


# ---------------------------------------------------------------------------
# check_sat
# ---------------------------------------------------------------------------

def test_check_sat_simple_binding():
    cs = cs_of([eq("x", INT)], [eqv("x", "y")])
    res = check_sat(cs.clauses)
    assert res.sat
    assert res.model[cs.tvar(("var", "y")).tid] == INT
    assert set(res.forced) >= {cs.tvar(("var", "x")).tid}


def test_check_sat_conflict_yields_core():
    cs = cs_of([eq("x", INT)], [eq("x", BOOL)], [eq("y", REAL)])
    res = check_sat(cs.clauses)
    assert not res.sat
    assert set(res.core) == {0, 1}


def test_check_sat_occurs_check():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_hard([Lit(Eq(x, ArrayType(INT, x)))], "t:occurs")
    assert not check_sat(cs.clauses).sat


def test_check_sat_tester_and_tag():
    cs = cs_of(
        [is_ctor("enum", "x")],
        [tag("GO", "x")],
        [neq("x", EnumType(("GO",)))],
    )
    res = check_sat(cs.clauses)
    assert res.sat
    model_x = res.model[cs.tvar(("var", "x")).tid]
    assert isinstance(model_x, EnumType) and "GO" in model_x.tags
    assert model_x != EnumType(("GO",))


def test_check_sat_negative_testers_leave_options():
    cs = cs_of([is_ctor("bv", "x")], [neq("x", BVType(1))], [neq("x", BVType(2))])
    res = check_sat(cs.clauses)
    assert res.sat
    got = res.model[cs.tvar(("var", "x")).tid]
    assert isinstance(got, BVType) and got.width not in (1, 2)


def test_check_sat_disjunction_splits():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_hard([Lit(Eq(x, INT)), Lit(Eq(x, BOOL))], "t:or")
    cs.add_hard([Lit(Eq(x, INT), positive=False)], "t:neq")
    res = check_sat(cs.clauses)
    assert res.sat
    assert res.model[x.tid] == BOOL


# ---------------------------------------------------------------------------
# solve_maxsmt
# ---------------------------------------------------------------------------

def test_satisfiable_set_has_empty_falsified():
    cs = cs_of([eq("x", INT)], [eqv("x", "y")], [eq("y", INT)])
    res = solve_maxsmt(cs)
    assert res.falsified == ()
    assert res.cost == 0
    assert verify_solution(cs, res)


def test_minimum_weight_wins():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_soft([Lit(Eq(x, INT))], 5, origin=0, label="a")
    cs.add_soft([Lit(Eq(x, BOOL))], 2, origin=1, label="b")
    res = solve_maxsmt(cs)
    assert res.falsified == (1,)
    assert res.cost == 2


def test_equal_weight_tie_breaks_to_lex_smallest_index():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_soft([Lit(Eq(x, INT))], 3, origin=0, label="a")
    cs.add_soft([Lit(Eq(x, BOOL))], 3, origin=1, label="b")
    res = solve_maxsmt(cs)
    assert res.falsified == (0,)


def test_hard_clauses_are_never_falsified():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_hard([Lit(Eq(x, BOOL))], "h")
    soft = cs.add_soft([Lit(Eq(x, INT))], 1, origin=0, label="s")
    res = solve_maxsmt(cs)
    assert res.falsified == (soft.index,)


def test_unsatisfiable_hard_clauses_raise_with_core():
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_hard([Lit(Eq(x, BOOL))], "h1")
    cs.add_hard([Lit(Eq(x, INT))], "h2")
    cs.add_hard([Lit(Eq(cs.tvar(("var", "y")), REAL))], "h3")
    with pytest.raises(Untypeable) as exc:
        solve_maxsmt(cs)
    assert set(exc.value.core) == {0, 1}


def test_unconstrained_variables_default_to_int():
    cs = ClauseSet()
    cs.tvar(("var", "loose"))
    res = solve_maxsmt(cs)
    tid = cs.tvar(("var", "loose")).tid
    assert res.model[tid] == INT
    assert tid in res.defaulted


def test_forced_variables_are_reported():
    cs = cs_of([eq("x", INT)])
    res = solve_maxsmt(cs)
    x = cs.tvar(("var", "x")).tid
    assert res.forced.get(x) == INT


def test_components_solve_independently():
    # x-clauses conflict; y-clauses don't; the y component stays intact
    cs = ClauseSet()
    x, y = cs.tvar(("var", "x")), cs.tvar(("var", "y"))
    cs.add_soft([Lit(Eq(x, INT))], 1, origin=0, label="x1")
    cs.add_soft([Lit(Eq(x, BOOL))], 1, origin=1, label="x2")
    cs.add_soft([Lit(Eq(y, REAL))], 1, origin=2, label="y1")
    res = solve_maxsmt(cs)
    assert res.falsified == (0,)
    assert res.model[y.tid] == REAL


def test_solver_matches_oracle_on_random_sets():
    rng = random.Random(1131)
    for _ in range(120):
        cs = random_clause_set(rng, max_soft=10)
        expect = oracle_optimum(cs)
        try:
            res = solve_maxsmt(cs)
        except Untypeable:
            assert expect is None
            continue
        assert expect is not None
        assert (res.cost, res.falsified) == expect
        assert verify_solution(cs, res)


# ---------------------------------------------------------------------------
# SMT-LIB bridge
# ---------------------------------------------------------------------------

def test_emit_smtlib_matches_golden():
    cs = cs_of(
        [eq("x", INT)],
        [eqv("x", "y"), tag("GO", "y")],
        [is_ctor("bv", "z")],
        hard=[[neq("z", BVType(2))]],
    )
    got = emit_smtlib(cs)
    expect = (GOLDEN / "clauses.smt2").read_text(encoding="utf-8")
    assert got == expect


def test_parse_solver_output():
    text = "sat\n((b0 true)\n (b2 false)\n (b5 false))\n"
    assert parse_solver_output(text) == (2, 5)


def test_parse_solver_output_rejects_noise():
    from uclgen.maxsmt import ExternalSolverError

    with pytest.raises(ExternalSolverError):
        parse_solver_output("segmentation fault")
    with pytest.raises(ExternalSolverError):
        parse_solver_output("unsat\n")


def test_solve_external_uses_scripted_solver(tmp_path):
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_soft([Lit(Eq(x, INT))], 1, origin=0, label="a")
    cs.add_soft([Lit(Eq(x, BOOL))], 1, origin=1, label="b")
    script = tmp_path / "fakesolver"
    script.write_text(
        "#!/bin/sh\nprintf 'sat\\n((b0 true) (b1 false))\\n'\n",
        encoding="utf-8",
    )
    script.chmod(0o755)
    res = solve_external(cs, command=str(script))
    assert res.falsified == (1,)
    assert res.model[x.tid] == INT


def test_solve_external_falls_back_on_garbage(tmp_path):
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_soft([Lit(Eq(x, INT))], 1, origin=0, label="a")
    script = tmp_path / "fakesolver"
    script.write_text("#!/bin/sh\necho kaboom\n", encoding="utf-8")
    script.chmod(0o755)
    res = solve_external(cs, command=str(script))
    assert res.falsified == ()


def test_solve_external_falls_back_on_infeasible_answer(tmp_path):
    # the scripted answer keeps two contradictory clauses; the bridge must
    # notice and fall back to the built-in search
    cs = ClauseSet()
    x = cs.tvar(("var", "x"))
    cs.add_soft([Lit(Eq(x, INT))], 1, origin=0, label="a")
    cs.add_soft([Lit(Eq(x, BOOL))], 1, origin=1, label="b")
    script = tmp_path / "fakesolver"
    script.write_text(
        "#!/bin/sh\nprintf 'sat\\n((b0 true) (b1 true))\\n'\n",
        encoding="utf-8",
    )
    script.chmod(0o755)
    res = solve_external(cs, command=str(script))
    assert len(res.falsified) == 1


def test_solve_external_without_command_uses_internal(monkeypatch):
    monkeypatch.delenv("UCLGEN_SMT_SOLVER", raising=False)
    cs = cs_of([eq("x", INT)])
    res = solve_external(cs)
    assert res.falsified == ()
