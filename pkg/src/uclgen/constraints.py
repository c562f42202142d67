"""Typing constraints over module-language programs.

Each program node of interest gets a type variable; static checks are
encoded as clauses over an algebra of type terms. Soft clauses carry a
weight and an *origin*: the node whose subtree is replaced with a hole if
the clause ends up falsified by the optimal assignment. Hard clauses can
never be falsified.

Checks encoded here:
  S1  every variable is declared exactly once (duplicate declarations
      compete through per-declaration activation variables)
  S2  declared types are well-formed and bind the variable's type
  S3  expressions are consistently typed (numeric operators stay within
      one numeric type; div/mod are integer-only; no int/bitvector mixing)
  S4  assignments preserve the type of the left-hand side
  S5  inputs are never written (the write or the declaration must go)
  S6  branch/assume/assert conditions and specification bodies are boolean
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .ast_core import (
    ArraySelect,
    ArrayType,
    Assert,
    Assign,
    Assume,
    BOOL,
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
    HoleExpr,
    HoleStmt,
    HoleType,
    If,
    INT,
    IntLit,
    IntType,
    Ite,
    REAL,
    RealLit,
    RealType,
    Stmt,
    SynonymType,
    TVar,
    TypeAnnot,
    TypeTerm,
    Unary,
    VarRef,
    depth_map,
    format_type,
)

# Type-variable keys. A key identifies what a variable stands for:
#   ("var", name)      the declared type of a state variable
#   ("typedef", name)  the type bound by a type synonym declaration
#   ("node", nid)      the type of an expression node
#   ("hole", hid)      the type of a hole
#   ("act", nid)       activation of a declaration (Bool = active)
#   ("aux", nid, tag)  structural helper (array index/element types)
TVarKey = tuple


# ---------------------------------------------------------------------------
# Atoms, literals, clauses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Eq:
    """left == right over type terms."""

    left: TypeTerm
    right: TypeTerm


#: constructor names for tester atoms
CTORS = ("bool", "int", "real", "bv", "enum", "arr")


@dataclass(frozen=True)
class Tester:
    """is-<ctor>(term): the term is built with the given constructor."""

    ctor: str
    term: TypeTerm

    def __post_init__(self) -> None:
        if self.ctor not in CTORS:
            raise ValueError(f"unknown constructor {self.ctor!r}")


@dataclass(frozen=True)
class HasTag:
    """term is an enum type that includes the given tag."""

    tag: str
    term: TypeTerm


Atom = Union[Eq, Tester, HasTag]


@dataclass(frozen=True)
class Lit:
    atom: Atom
    positive: bool = True

    def negate(self) -> "Lit":
        return Lit(self.atom, not self.positive)


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals.

    weight is None for hard clauses. origin is the node id to hole when
    the clause is falsified; hard clauses have no origin.
    """

    index: int
    lits: tuple[Lit, ...]
    weight: Optional[int]
    origin: Optional[int]
    label: str

    @property
    def hard(self) -> bool:
        return self.weight is None


def _fmt_term(t: TypeTerm, names: dict[int, TVarKey]) -> str:
    if isinstance(t, TVar):
        key = names.get(t.tid)
        return "?" + ".".join(str(p) for p in key) if key else f"?t{t.tid}"
    if isinstance(t, ArrayType):
        return f"arr({_fmt_term(t.index, names)}, {_fmt_term(t.elem, names)})"
    return format_type(t)


def _fmt_lit(lit: Lit, names: dict[int, TVarKey]) -> str:
    a = lit.atom
    if isinstance(a, Eq):
        body = f"{_fmt_term(a.left, names)} = {_fmt_term(a.right, names)}"
    elif isinstance(a, Tester):
        body = f"is-{a.ctor}({_fmt_term(a.term, names)})"
    else:
        body = f"has-tag({a.tag!r}, {_fmt_term(a.term, names)})"
    return body if lit.positive else f"!({body})"


# ---------------------------------------------------------------------------
# Clause sets
# ---------------------------------------------------------------------------

WEIGHT_MODES = ("depth", "inverse-depth", "uniform")


@dataclass
class ClauseSet:
    clauses: list[Clause] = field(default_factory=list)
    tvar_table: dict[TVarKey, TVar] = field(default_factory=dict)
    _next_tid: int = 0

    def tvar(self, key: TVarKey) -> TVar:
        got = self.tvar_table.get(key)
        if got is None:
            got = TVar(self._next_tid)
            self._next_tid += 1
            self.tvar_table[key] = got
        return got

    def add_soft(self, lits, weight: int, origin: int, label: str) -> Clause:
        c = Clause(len(self.clauses), tuple(lits), weight, origin, label)
        self.clauses.append(c)
        return c

    def add_hard(self, lits, label: str) -> Clause:
        c = Clause(len(self.clauses), tuple(lits), None, None, label)
        self.clauses.append(c)
        return c

    @property
    def soft(self) -> list[Clause]:
        return [c for c in self.clauses if not c.hard]

    @property
    def hard(self) -> list[Clause]:
        return [c for c in self.clauses if c.hard]

    def key_names(self) -> dict[int, TVarKey]:
        return {tv.tid: key for key, tv in self.tvar_table.items()}

    def dump(self) -> str:
        names = self.key_names()
        lines = []
        for c in self.clauses:
            kind = "hard" if c.hard else f"soft w={c.weight} origin={c.origin}"
            body = " | ".join(_fmt_lit(l, names) for l in c.lits)
            lines.append(f"[{c.index:3}] ({kind}) {c.label}: {body}")
        return "\n".join(lines)


def clause_tvars(c: Clause) -> set[int]:
    out: set[int] = set()
    for lit in c.lits:
        a = lit.atom
        terms = (a.left, a.right) if isinstance(a, Eq) else (a.term,)
        for t in terms:
            stack = [t]
            while stack:
                cur = stack.pop()
                if isinstance(cur, TVar):
                    out.add(cur.tid)
                elif isinstance(cur, ArrayType):
                    stack.extend((cur.index, cur.elem))
    return out


# ---------------------------------------------------------------------------
# Ground evaluation (used by the solver and by tests as an oracle)
# ---------------------------------------------------------------------------

_TESTER_CLASSES = {
    "bool": BoolType,
    "int": IntType,
    "real": RealType,
    "bv": BVType,
    "enum": EnumType,
    "arr": ArrayType,
}


def eval_atom(atom: Atom, assignment: dict[int, TypeTerm]) -> bool:
    """Evaluate an atom under a total ground assignment of type variables."""

    def resolve(t: TypeTerm) -> TypeTerm:
        if isinstance(t, TVar):
            return resolve(assignment[t.tid]) if t.tid in assignment else t
        if isinstance(t, ArrayType):
            return ArrayType(resolve(t.index), resolve(t.elem))
        return t

    if isinstance(atom, Eq):
        return resolve(atom.left) == resolve(atom.right)
    got = resolve(atom.term)
    if isinstance(atom, Tester):
        return isinstance(got, _TESTER_CLASSES[atom.ctor])
    return isinstance(got, EnumType) and atom.tag in got.tags


def eval_clause(clause: Clause, assignment: dict[int, TypeTerm]) -> bool:
    return any(
        eval_atom(l.atom, assignment) == l.positive for l in clause.lits
    )


# ---------------------------------------------------------------------------
# Clause generation
# ---------------------------------------------------------------------------

_NUMERIC_TESTERS = ("int", "real", "bv")


class _Gen:
    def __init__(self, program: ChildProgram, weight_mode: str):
        if weight_mode not in WEIGHT_MODES:
            raise ValueError(f"unknown weight mode {weight_mode!r}")
        self.p = program
        self.cs = ClauseSet()
        self.depths = depth_map(program)
        self.max_depth = max(self.depths.values(), default=0)
        self.mode = weight_mode
        # nid -> guard literal to prepend (duplicated declarations)
        self.input_decls: dict[str, Decl] = {}
        self.guarded: dict[int, Lit] = {}

    def weight(self, origin: int) -> int:
        d = self.depths[origin]
        if self.mode == "depth":
            return 1 + d
        if self.mode == "inverse-depth":
            return 1 + (self.max_depth - d)
        return 1

    def soft(self, lits, origin: int, label: str) -> None:
        self.cs.add_soft(lits, self.weight(origin), origin, label)

    # -- declarations -------------------------------------------------------

    def run(self) -> ClauseSet:
        var_decls: list[tuple[str, Decl]] = []  # (section, decl)
        for d in self.p.locals:
            if isinstance(d, Decl):
                var_decls.append(("locals", d))
        for d in self.p.inputs:
            if isinstance(d, Decl):
                var_decls.append(("inputs", d))
                self.input_decls[d.name] = d
        for d in self.p.outputs:
            if isinstance(d, Decl):
                var_decls.append(("outputs", d))

        by_name: dict[str, list[Decl]] = {}
        for _, d in var_decls:
            by_name.setdefault(d.name, []).append(d)

        typedefs = [d for d in self.p.type_defs if isinstance(d, Decl)]
        td_by_name: dict[str, list[Decl]] = {}
        for d in typedefs:
            td_by_name.setdefault(d.name, []).append(d)

        # S1/S2 per declaration, in section order
        for d in typedefs:
            self._decl_clauses(d, ("typedef", d.name),
                               duplicated=len(td_by_name[d.name]) > 1,
                               is_input=False)
        for section, d in var_decls:
            self._decl_clauses(d, ("var", d.name),
                               duplicated=len(by_name[d.name]) > 1,
                               is_input=section == "inputs")

        # S1: at most one active declaration per name
        for name in sorted(n for n, ds in by_name.items() if len(ds) > 1):
            self._exclusion(by_name[name])
        for name in sorted(n for n, ds in td_by_name.items() if len(ds) > 1):
            self._exclusion(td_by_name[name])

        # S3-S6 over behavior
        for stmt in self.p.init_body:
            self._stmt(stmt)
        for stmt in self.p.next_body:
            self._stmt(stmt)
        for _, expr in self.p.invariants_spec:
            self._expr(expr)
            self.soft([Lit(Eq(self._t(expr), BOOL))], expr.nid, "S6:spec")
        return self.cs

    def _act(self, d: Decl) -> TypeTerm:
        return self.cs.tvar(("act", d.nid))

    def _decl_clauses(self, d: Decl, key: TVarKey, duplicated: bool,
                      is_input: bool) -> None:
        guard: list[Lit] = []
        if duplicated or is_input:
            act = self._act(d)
            self.soft([Lit(Eq(act, BOOL))], d.nid, "S1:active")
            guard = [Lit(Eq(act, BOOL), positive=False)]
            self.guarded[d.nid] = guard[0]
        t_name = self.cs.tvar(key)
        annot = d.annot
        if isinstance(annot, TypeAnnot):
            ty = self._elaborate(annot.ty)
            self.soft(guard + [Lit(Eq(t_name, ty))], annot.nid, "S2:decl-type")
        elif isinstance(annot, HoleType):
            h = self.cs.tvar(("hole", annot.hid))
            self.cs.add_hard(guard + [Lit(Eq(t_name, h))], "S2:hole-binding")
        elif isinstance(annot, DeclValue):
            self._expr(annot.expr)
            self.soft(
                guard + [Lit(Eq(t_name, self._t(annot.expr)))],
                annot.nid, "S2:decl-value",
            )

    def _exclusion(self, decls: list[Decl]) -> None:
        for i, a in enumerate(decls):
            for b in decls[i + 1 :]:
                self.cs.add_hard(
                    [
                        Lit(Eq(self._act(a), BOOL), positive=False),
                        Lit(Eq(self._act(b), BOOL), positive=False),
                    ],
                    "S1:exclusive",
                )

    def _elaborate(self, ty: TypeTerm) -> TypeTerm:
        if isinstance(ty, SynonymType):
            return self.cs.tvar(("typedef", ty.name))
        if isinstance(ty, ArrayType):
            return ArrayType(self._elaborate(ty.index), self._elaborate(ty.elem))
        return ty

    # -- statements ---------------------------------------------------------

    def _stmt(self, s: Stmt) -> None:
        if isinstance(s, Assign):
            self._expr(s.lhs)
            self._expr(s.rhs)
            self.soft(
                [Lit(Eq(self._t(s.lhs), self._t(s.rhs)))], s.nid, "S4:assign"
            )
            self._input_write(s.lhs, s.nid)
        elif isinstance(s, If):
            self._expr(s.cond)
            self.soft([Lit(Eq(self._t(s.cond), BOOL))], s.cond.nid, "S6:cond")
            for sub in s.then:
                self._stmt(sub)
            for cond, body in s.elifs:
                self._expr(cond)
                self.soft([Lit(Eq(self._t(cond), BOOL))], cond.nid, "S6:cond")
                for sub in body:
                    self._stmt(sub)
            for sub in s.orelse:
                self._stmt(sub)
        elif isinstance(s, Havoc):
            self.cs.tvar(("var", s.name))
            d = self.input_decls.get(s.name)
            if d is not None:
                self.soft(
                    [Lit(Eq(self._act(d), BOOL), positive=False)],
                    s.nid, "S5:input-write",
                )
        elif isinstance(s, (Assume, Assert)):
            self._expr(s.cond)
            self.soft([Lit(Eq(self._t(s.cond), BOOL))], s.cond.nid, "S6:cond")
        elif isinstance(s, HoleStmt):
            pass
        else:
            raise TypeError(f"unknown statement {s!r}")

    def _input_write(self, lhs: Expr, origin: int) -> None:
        base = lhs
        while isinstance(base, ArraySelect):
            base = base.array
        if isinstance(base, VarRef):
            d = self.input_decls.get(base.name)
            if d is not None:
                self.soft(
                    [Lit(Eq(self._act(d), BOOL), positive=False)],
                    origin, "S5:input-write",
                )

    # -- expressions ---------------------------------------------------------

    def _t(self, e: Expr) -> TVar:
        return self.cs.tvar(("node", e.nid))

    def _numeric(self, t: TypeTerm, origin: int, label: str) -> None:
        self.soft([Lit(Tester(k, t)) for k in _NUMERIC_TESTERS], origin, label)

    def _expr(self, e: Expr) -> None:
        t = self._t(e)
        if isinstance(e, BoolLit):
            self.soft([Lit(Eq(t, BOOL))], e.nid, "S3:lit")
        elif isinstance(e, IntLit):
            self.soft([Lit(Eq(t, INT))], e.nid, "S3:lit")
        elif isinstance(e, RealLit):
            self.soft([Lit(Eq(t, REAL))], e.nid, "S3:lit")
        elif isinstance(e, BVLit):
            self.soft([Lit(Eq(t, BVType(e.width)))], e.nid, "S3:lit")
        elif isinstance(e, EnumLit):
            self.soft([Lit(HasTag(e.tag, t))], e.nid, "S3:lit")
        elif isinstance(e, VarRef):
            self.cs.add_hard(
                [Lit(Eq(t, self.cs.tvar(("var", e.name))))], "S3:var"
            )
        elif isinstance(e, HoleExpr):
            self.cs.add_hard(
                [Lit(Eq(t, self.cs.tvar(("hole", e.hid))))], "S3:hole"
            )
        elif isinstance(e, Unary):
            self._expr(e.operand)
            to = self._t(e.operand)
            if e.op == "not":
                self.soft([Lit(Eq(t, BOOL))], e.nid, "S3:op")
                self.soft([Lit(Eq(to, BOOL))], e.nid, "S3:op")
            else:  # neg
                self.soft([Lit(Eq(t, to))], e.nid, "S3:op")
                self._numeric(t, e.nid, "S3:op")
        elif isinstance(e, Binary):
            self._expr(e.left)
            self._expr(e.right)
            self._binary(e, t, self._t(e.left), self._t(e.right))
        elif isinstance(e, Ite):
            self._expr(e.cond)
            self._expr(e.then)
            self._expr(e.other)
            self.soft([Lit(Eq(self._t(e.cond), BOOL))], e.nid, "S3:op")
            self.soft([Lit(Eq(t, self._t(e.then)))], e.nid, "S3:op")
            self.soft([Lit(Eq(t, self._t(e.other)))], e.nid, "S3:op")
        elif isinstance(e, ArraySelect):
            self._expr(e.array)
            self._expr(e.index)
            aux_i = self.cs.tvar(("aux", e.nid, "idx"))
            aux_e = self.cs.tvar(("aux", e.nid, "elem"))
            self.soft(
                [Lit(Eq(self._t(e.array), ArrayType(aux_i, aux_e)))],
                e.nid, "S3:select",
            )
            self.cs.add_hard([Lit(Eq(self._t(e.index), aux_i))], "S3:select")
            self.cs.add_hard([Lit(Eq(t, aux_e))], "S3:select")
        else:
            raise TypeError(f"unknown expression {e!r}")

    def _binary(self, e: Binary, t: TVar, tl: TVar, tr: TVar) -> None:
        op = e.op
        n = e.nid
        if op in ("and", "or", "implies"):
            self.soft([Lit(Eq(t, BOOL))], n, "S3:op")
            self.soft([Lit(Eq(tl, BOOL))], n, "S3:op")
            self.soft([Lit(Eq(tr, BOOL))], n, "S3:op")
        elif op in ("==", "!="):
            self.soft([Lit(Eq(t, BOOL))], n, "S3:op")
            self.soft([Lit(Eq(tl, tr))], n, "S3:op")
        elif op in ("<", "<=", ">", ">="):
            self.soft([Lit(Eq(t, BOOL))], n, "S3:op")
            self.soft([Lit(Eq(tl, tr))], n, "S3:op")
            self._numeric(tl, n, "S3:op")
        elif op in ("+", "-", "*"):
            self.soft([Lit(Eq(t, tl))], n, "S3:op")
            self.soft([Lit(Eq(t, tr))], n, "S3:op")
            self._numeric(t, n, "S3:op")
        elif op in ("div", "mod"):
            self.soft([Lit(Eq(t, tl))], n, "S3:op")
            self.soft([Lit(Eq(t, tr))], n, "S3:op")
            self.soft([Lit(Eq(t, INT))], n, "S3:op")
        elif op == "xor":
            self.soft([Lit(Eq(t, tl))], n, "S3:op")
            self.soft([Lit(Eq(t, tr))], n, "S3:op")
            self.soft(
                [Lit(Tester("bool", t)), Lit(Tester("bv", t))], n, "S3:op"
            )
        elif op in ("bvand", "bvor", "bvxor", "shl", "lshr"):
            self.soft([Lit(Eq(t, tl))], n, "S3:op")
            self.soft([Lit(Eq(t, tr))], n, "S3:op")
            self.soft([Lit(Tester("bv", t))], n, "S3:op")
        elif op == "concat":
            self.soft([Lit(Tester("bv", t))], n, "S3:op")
            self.soft([Lit(Tester("bv", tl))], n, "S3:op")
            self.soft([Lit(Tester("bv", tr))], n, "S3:op")
        else:
            raise ValueError(f"unknown operator {op!r}")


def generate_clauses(
    program: ChildProgram, weight_mode: str = "depth"
) -> ClauseSet:
    """Generate the full weighted clause set for a program.

    Clause indices follow generation order, which is deterministic:
    declarations by section (types, locals, inputs, outputs), then init,
    next, and the specification; expressions in pre-order.
    """
    return _Gen(program, weight_mode).run()
