"""Program repair: hole insertion and model-based hole filling.

One repair round is:
  1. synthesize declarations for variables that are used but never
     declared (``self.x = ??`` appended to the locals section),
  2. solve the typing MAX-SMT problem and replace the subtree at each
     falsified clause's origin with a hole of the right category,
  3. re-solve the holed program and fill every type hole whose type
     variable is forced (ground by equations or pinned to a singleton
     scalar constructor by testers).

Everything still holey after that is handed back to the LLM.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Optional

from .ast_core import (
    Annot,
    Assign,
    ChildProgram,
    Decl,
    DeclValue,
    Expr,
    HoleDecl,
    HoleExpr,
    HoleStmt,
    HoleType,
    If,
    Node,
    Stmt,
    TypeAnnot,
    TypeTerm,
    VarRef,
    assign_node_ids,
    count_holes,
    iter_nodes,
    max_hole_id,
)
from .constraints import ClauseSet, generate_clauses
from .maxsmt import MaxSmtResult, solve_maxsmt


# ---------------------------------------------------------------------------
# Hole insertion at falsified-clause origins
# ---------------------------------------------------------------------------

class _HoleIds:
    def __init__(self, start: int):
        self.next = start

    def take(self) -> int:
        hid = self.next
        self.next += 1
        return hid


def holeify(
    program: ChildProgram, cs: ClauseSet, falsified: tuple[int, ...]
) -> ChildProgram:
    """Replace the maximal subtree at each falsified clause's origin with
    a hole. Origins nested inside other origins are absorbed by the
    outermost replacement. Node ids are reassigned afterwards."""
    origins = {
        cs.clauses[i].origin
        for i in falsified
        if cs.clauses[i].origin is not None
    }
    if not origins:
        return program
    ids = _HoleIds(max_hole_id(program) + 1)

    def decl(d) -> object:
        if isinstance(d, HoleDecl):
            return d
        if d.nid in origins:
            return HoleDecl(ids.take(), span=d.span)
        if d.annot.nid in origins or _expr_origin_in(d.annot, origins):
            return dataclasses.replace(
                d, annot=HoleType(ids.take(), span=d.annot.span)
            )
        return d

    def stmt(s: Stmt) -> Stmt:
        if s.nid in origins:
            return HoleStmt(ids.take(), span=s.span)
        if isinstance(s, Assign):
            return dataclasses.replace(s, lhs=expr(s.lhs), rhs=expr(s.rhs))
        if isinstance(s, If):
            return dataclasses.replace(
                s,
                cond=expr(s.cond),
                then=tuple(stmt(x) for x in s.then),
                elifs=tuple(
                    (expr(c), tuple(stmt(x) for x in b)) for c, b in s.elifs
                ),
                orelse=tuple(stmt(x) for x in s.orelse),
            )
        if hasattr(s, "cond"):  # Assume / Assert
            return dataclasses.replace(s, cond=expr(s.cond))
        return s  # Havoc, HoleStmt

    def expr(e: Expr) -> Expr:
        if e.nid in origins:
            return HoleExpr(ids.take(), span=e.span)
        changes = {}
        for f in dataclasses.fields(e):
            v = getattr(e, f.name)
            if isinstance(v, Expr):
                changes[f.name] = expr(v)
        return dataclasses.replace(e, **changes) if changes else e

    out = dataclasses.replace(
        program,
        type_defs=tuple(decl(d) for d in program.type_defs),
        locals=tuple(decl(d) for d in program.locals),
        inputs=tuple(decl(d) for d in program.inputs),
        outputs=tuple(decl(d) for d in program.outputs),
        init_body=tuple(stmt(s) for s in program.init_body),
        next_body=tuple(stmt(s) for s in program.next_body),
        invariants_spec=tuple(
            (name, expr(e)) for name, e in program.invariants_spec
        ),
    )
    return assign_node_ids(out)


def _expr_origin_in(annot: Annot, origins: set) -> bool:
    if isinstance(annot, DeclValue):
        return any(n.nid in origins for n, _ in iter_nodes(annot.expr))
    return False


# ---------------------------------------------------------------------------
# Declaration synthesis
# ---------------------------------------------------------------------------

def declared_names(p: ChildProgram) -> set[str]:
    out = set()
    for d in (*p.locals, *p.inputs, *p.outputs):
        if isinstance(d, Decl):
            out.add(d.name)
    return out


def synthesize_decls(p: ChildProgram) -> tuple[ChildProgram, tuple[str, ...]]:
    """Append ``self.x = ??`` to locals for every variable that is used
    but never declared, in first-use order."""
    known = declared_names(p)
    missing: list[str] = []
    for node, _ in iter_nodes(p):
        if isinstance(node, VarRef) and node.name not in known:
            known.add(node.name)
            missing.append(node.name)
    if not missing:
        return p, ()
    ids = _HoleIds(max_hole_id(p) + 1)
    extra = tuple(
        Decl(name, HoleType(ids.take())) for name in missing
    )
    out = dataclasses.replace(p, locals=p.locals + extra)
    return assign_node_ids(out), tuple(missing)


# ---------------------------------------------------------------------------
# Model repair
# ---------------------------------------------------------------------------

def model_repair(
    program: ChildProgram, cs: ClauseSet, result: MaxSmtResult
) -> tuple[ChildProgram, tuple[str, ...]]:
    """Fill type holes and value declarations whose type variable is
    forced by the solution. Returns the program and the names filled."""
    filled: list[str] = []

    def forced_value(key) -> Optional[TypeTerm]:
        tv = cs.tvar_table.get(key)
        if tv is None:
            return None
        return result.forced.get(tv.tid)

    def decl(d, var_key: str):
        if isinstance(d, HoleDecl):
            return d
        if isinstance(d.annot, HoleType):
            val = forced_value(("hole", d.annot.hid))
            if val is not None:
                filled.append(d.name)
                return dataclasses.replace(
                    d, annot=TypeAnnot(val, span=d.annot.span)
                )
        elif isinstance(d.annot, DeclValue):
            val = forced_value((var_key, d.name))
            if val is not None:
                filled.append(d.name)
                return dataclasses.replace(
                    d, annot=TypeAnnot(val, span=d.annot.span)
                )
        return d

    out = dataclasses.replace(
        program,
        type_defs=tuple(decl(d, "typedef") for d in program.type_defs),
        locals=tuple(decl(d, "var") for d in program.locals),
        inputs=tuple(decl(d, "var") for d in program.inputs),
        outputs=tuple(decl(d, "var") for d in program.outputs),
    )
    return assign_node_ids(out), tuple(filled)


# ---------------------------------------------------------------------------
# One full repair round
# ---------------------------------------------------------------------------

@dataclass
class RepairOutcome:
    program: ChildProgram
    falsified: tuple[int, ...]
    synthesized: tuple[str, ...] = ()
    filled: tuple[str, ...] = ()
    holes_remaining: int = 0
    cost: int = 0
    ms: float = 0.0


def repair_round(
    program: ChildProgram,
    weight_mode: str = "depth",
    solver=solve_maxsmt,
) -> RepairOutcome:
    """Run a complete repair round and return the repaired program."""
    t0 = time.monotonic()
    program, synthesized = synthesize_decls(program)
    cs = generate_clauses(program, weight_mode)
    res = solver(cs)
    holed = holeify(program, cs, res.falsified)
    cs2 = generate_clauses(holed, weight_mode)
    res2 = solver(cs2)
    repaired, filled = model_repair(holed, cs2, res2)
    return RepairOutcome(
        program=repaired,
        falsified=res.falsified,
        synthesized=synthesized,
        filled=filled,
        holes_remaining=count_holes(repaired),
        cost=res.cost,
        ms=(time.monotonic() - t0) * 1000.0,
    )
