"""Compilation of hole-free module-language programs to UCLID5 text.

`compile_program` rejects programs with holes or typing conflicts, then
lowers to a `UclidModule` and prints it. Lowering and printing are
separate so tests can compare against independently parsed modules.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .ast_core import (
    ArraySelect,
    ArrayType,
    Assert,
    Assign,
    Assume,
    BVLit,
    BVType,
    Binary,
    BoolLit,
    BoolType,
    ChildProgram,
    Decl,
    DeclValue,
    EnumLit,
    EnumType,
    Expr,
    Havoc,
    HoleDecl,
    If,
    IntLit,
    IntType,
    Ite,
    RealLit,
    RealType,
    Stmt,
    SynonymType,
    TypeAnnot,
    TypeTerm,
    TVar,
    Unary,
    VarRef,
    count_holes,
    iter_nodes,
)
from .constraints import generate_clauses
from .maxsmt import Untypeable, check_sat


class CompileError(ValueError):
    pass


class HoleRemaining(CompileError):
    """The program still contains holes and cannot be compiled."""

    def __init__(self, count: int):
        super().__init__(f"program still has {count} hole(s)")
        self.count = count


# UCLID5 reserved words that cannot be used as identifiers
UCLID_KEYWORDS = frozenset(
    """module init next var input output type const function define
    procedure returns modifies requires ensures call havoc assume assert
    invariant property axiom control if else case esac for while skip
    forall exists boolean integer real true false enum record instance
    sharedvar synthesis grammar parameter group""".split()
)


@dataclass
class UclidModule:
    name: str
    type_defs: list[tuple[str, TypeTerm]] = field(default_factory=list)
    vars: list[tuple[str, TypeTerm]] = field(default_factory=list)
    inputs: list[tuple[str, TypeTerm]] = field(default_factory=list)
    outputs: list[tuple[str, TypeTerm]] = field(default_factory=list)
    init_body: list[Stmt] = field(default_factory=list)
    next_body: list[Stmt] = field(default_factory=list)
    invariants: list[tuple[str, Expr]] = field(default_factory=list)
    modifies: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------

def _safe_name(name: str, notes: list[str]) -> str:
    if name in UCLID_KEYWORDS:
        notes.append(f"renamed {name!r} to {name + '_v'!r} (reserved word)")
        return name + "_v"
    return name


def _assigned_names(body) -> list[str]:
    """State variables written in a statement list, in appearance order."""
    out: list[str] = []

    def base(e: Expr) -> Optional[str]:
        while isinstance(e, ArraySelect):
            e = e.array
        return e.name if isinstance(e, VarRef) else None

    def walk(stmts) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                name = base(s.lhs)
                if name and name not in out:
                    out.append(name)
            elif isinstance(s, Havoc):
                if s.name not in out:
                    out.append(s.name)
            elif isinstance(s, If):
                walk(s.then)
                for _, b in s.elifs:
                    walk(b)
                walk(s.orelse)

    walk(body)
    return out


def lower(
    program: ChildProgram, var_types: dict[str, TypeTerm]
) -> UclidModule:
    """Lower a hole-free program given the resolved type of every
    variable that was declared by value rather than by type."""
    notes: list[str] = []
    renames: dict[str, str] = {}

    def rename(name: str) -> str:
        if name not in renames:
            renames[name] = _safe_name(name, notes)
        return renames[name]

    def decl_type(d: Decl, key: str) -> TypeTerm:
        if isinstance(d.annot, TypeAnnot):
            return d.annot.ty
        if isinstance(d.annot, DeclValue):
            got = var_types.get(d.name)
            if got is None:
                notes.append(f"defaulted {d.name!r} to integer")
                return IntType()
            return got
        raise HoleRemaining(1)

    def decls(section, key="var") -> list[tuple[str, TypeTerm]]:
        out = []
        for d in section:
            if isinstance(d, HoleDecl):
                raise HoleRemaining(1)
            out.append((rename(d.name), decl_type(d, key)))
        return out

    def ren_expr(e: Expr) -> Expr:
        if isinstance(e, VarRef):
            return dataclasses.replace(e, name=rename(e.name))
        changes = {}
        for f in dataclasses.fields(e):
            v = getattr(e, f.name)
            if isinstance(v, Expr):
                changes[f.name] = ren_expr(v)
        return dataclasses.replace(e, **changes) if changes else e

    def ren_stmt(s: Stmt) -> Stmt:
        if isinstance(s, Assign):
            return dataclasses.replace(s, lhs=ren_expr(s.lhs), rhs=ren_expr(s.rhs))
        if isinstance(s, If):
            return dataclasses.replace(
                s,
                cond=ren_expr(s.cond),
                then=tuple(ren_stmt(x) for x in s.then),
                elifs=tuple(
                    (ren_expr(c), tuple(ren_stmt(x) for x in b))
                    for c, b in s.elifs
                ),
                orelse=tuple(ren_stmt(x) for x in s.orelse),
            )
        if isinstance(s, Havoc):
            return dataclasses.replace(s, name=rename(s.name))
        if isinstance(s, (Assume, Assert)):
            return dataclasses.replace(s, cond=ren_expr(s.cond))
        raise HoleRemaining(1)

    m = UclidModule(name="main", notes=notes)
    m.type_defs = decls(program.type_defs, "typedef")
    m.vars = decls(program.locals)
    m.inputs = decls(program.inputs)
    m.outputs = decls(program.outputs)
    m.init_body = [ren_stmt(s) for s in program.init_body]
    m.next_body = [ren_stmt(s) for s in program.next_body]
    m.invariants = [
        (name, ren_expr(e)) for name, e in program.invariants_spec
    ]
    m.modifies = _assigned_names(m.next_body)
    return m


def compile_program(
    program: ChildProgram, weight_mode: str = "depth"
) -> UclidModule:
    """Typecheck and lower. Raises HoleRemaining if holes are left and
    Untypeable (with an unsat core) if the clauses cannot all hold."""
    n = count_holes(program)
    if n:
        raise HoleRemaining(n)
    declared = {
        d.name
        for section in (program.locals, program.inputs, program.outputs)
        for d in section
        if isinstance(d, Decl)
    }
    for node, _ in iter_nodes(program):
        if isinstance(node, VarRef) and node.name not in declared:
            raise CompileError(f"use of undeclared variable {node.name!r}")
    cs = generate_clauses(program, weight_mode)
    res = check_sat(cs.clauses)
    if not res.sat:
        raise Untypeable(res.core)
    var_types: dict[str, TypeTerm] = {}
    for key, tv in cs.tvar_table.items():
        if key[0] == "var" and tv.tid in res.model:
            var_types[key[1]] = res.model[tv.tid]
    return lower(program, var_types)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def print_type(t: TypeTerm) -> str:
    if isinstance(t, BoolType):
        return "boolean"
    if isinstance(t, IntType):
        return "integer"
    if isinstance(t, RealType):
        return "real"
    if isinstance(t, BVType):
        return f"bv{t.width}"
    if isinstance(t, EnumType):
        return "enum { " + ", ".join(t.tags) + " }"
    if isinstance(t, ArrayType):
        return f"[{print_type(t.index)}]{print_type(t.elem)}"
    if isinstance(t, SynonymType):
        return t.name
    raise CompileError(f"cannot print type {t!r}")


_UCLID_BINOP = {
    "and": "&&",
    "or": "||",
    "implies": "==>",
    "xor": "^",
    "==": "==",
    "!=": "!=",
    "<": "<",
    "<=": "<=",
    ">": ">",
    ">=": ">=",
    "+": "+",
    "-": "-",
    "*": "*",
    "div": "/",
    "mod": "%",
    "bvand": "&",
    "bvor": "|",
    "bvxor": "^",
    "shl": "<<",
    "lshr": ">>",
    "concat": "++",
}


def print_expr(e: Expr) -> str:
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, RealLit):
        return repr(e.value)
    if isinstance(e, BVLit):
        return f"{e.value}bv{e.width}"
    if isinstance(e, EnumLit):
        return e.tag
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Unary):
        op = "!" if e.op == "not" else "-"
        return f"{op}({print_expr(e.operand)})"
    if isinstance(e, Binary):
        op = _UCLID_BINOP[e.op]
        return f"({print_expr(e.left)} {op} {print_expr(e.right)})"
    if isinstance(e, Ite):
        return (
            f"ite({print_expr(e.cond)}, {print_expr(e.then)}, "
            f"{print_expr(e.other)})"
        )
    if isinstance(e, ArraySelect):
        return f"{print_expr(e.array)}[{print_expr(e.index)}]"
    raise CompileError(f"cannot print expression {e!r}")


def _print_stmt(s: Stmt, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(s, Assign):
        out.append(f"{pad}{print_expr(s.lhs)} = {print_expr(s.rhs)};")
    elif isinstance(s, Havoc):
        out.append(f"{pad}havoc {s.name};")
    elif isinstance(s, Assume):
        out.append(f"{pad}assume({print_expr(s.cond)});")
    elif isinstance(s, Assert):
        out.append(f"{pad}assert({print_expr(s.cond)});")
    elif isinstance(s, If):
        _print_if(s, indent, out)
    else:
        raise CompileError(f"cannot print statement {s!r}")


def _print_if(s: If, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    out.append(f"{pad}if ({print_expr(s.cond)}) {{")
    for sub in s.then:
        _print_stmt(sub, indent + 1, out)
    rest: Stmt | None = None
    if s.elifs:
        head = s.elifs[0]
        rest = If(head[0], head[1], s.elifs[1:], s.orelse)
    if rest is not None:
        out.append(f"{pad}}} else {{")
        _print_if(rest, indent + 1, out)
        out.append(f"{pad}}}")
    elif s.orelse:
        out.append(f"{pad}}} else {{")
        for sub in s.orelse:
            _print_stmt(sub, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        out.append(f"{pad}}}")


def print_uclid(m: UclidModule) -> str:
    out: list[str] = [f"module {m.name} {{"]
    for name, ty in m.type_defs:
        out.append(f"  type {name} = {print_type(ty)};")
    for kw, section in (
        ("var", m.vars), ("input", m.inputs), ("output", m.outputs)
    ):
        for name, ty in section:
            out.append(f"  {kw} {name} : {print_type(ty)};")
    out.append("")
    out.append("  init {")
    for s in m.init_body:
        _print_stmt(s, 2, out)
    out.append("  }")
    out.append("")
    out.append("  procedure step()")
    for name in m.modifies:
        out.append(f"    modifies {name};")
    out.append("  {")
    for s in m.next_body:
        _print_stmt(s, 2, out)
    out.append("  }")
    out.append("")
    out.append("  next {")
    out.append("    call step();")
    out.append("  }")
    for name, e in m.invariants:
        out.append(f"  invariant {name}: {print_expr(e)};")
    out.append("}")
    return "\n".join(out) + "\n"
