"""Shared tree representations.

Defines the surface-language AST produced by the tolerant parser, the
restricted module-language AST (with holes), type terms, source spans and
stable node identities. All trees are immutable after construction; every
transformation elsewhere in the package returns a new tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    """Byte range plus line/column pair for diagnostics."""

    start: int = 0
    end: int = 0
    line: int = 0
    col: int = 0
    end_line: int = 0
    end_col: int = 0


NO_SPAN = Span()


# ---------------------------------------------------------------------------
# Type terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeTerm:
    """Base class for the type vocabulary used by constraints and decls."""


@dataclass(frozen=True)
class BoolType(TypeTerm):
    pass


@dataclass(frozen=True)
class IntType(TypeTerm):
    pass


@dataclass(frozen=True)
class RealType(TypeTerm):
    pass


@dataclass(frozen=True)
class BVType(TypeTerm):
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"bitvector width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class EnumType(TypeTerm):
    tags: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.tags:
            raise ValueError("enum needs at least one tag")
        if len(set(self.tags)) != len(self.tags):
            raise ValueError(f"duplicate enum tags: {self.tags}")
        object.__setattr__(self, "tags", tuple(sorted(self.tags)))


@dataclass(frozen=True)
class ArrayType(TypeTerm):
    index: TypeTerm
    elem: TypeTerm


@dataclass(frozen=True)
class SynonymType(TypeTerm):
    name: str


@dataclass(frozen=True)
class TVar(TypeTerm):
    tid: int


BOOL = BoolType()
INT = IntType()
REAL = RealType()


def is_ground(t: TypeTerm) -> bool:
    """True iff no type variable occurs in t."""
    if isinstance(t, TVar):
        return False
    if isinstance(t, ArrayType):
        return is_ground(t.index) and is_ground(t.elem)
    return True


def type_tvars(t: TypeTerm) -> Iterator[TVar]:
    if isinstance(t, TVar):
        yield t
    elif isinstance(t, ArrayType):
        yield from type_tvars(t.index)
        yield from type_tvars(t.elem)


# ---------------------------------------------------------------------------
# Surface-language AST (output of the tolerant parser)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PNode:
    """Generic surface AST node: kind tag, children, token text, span, id."""

    kind: str
    children: tuple["PNode", ...] = ()
    text: str = ""
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
    nid: int = field(default=-1, compare=False, repr=False)


@dataclass
class ParentAst:
    root: PNode
    error_nodes: list[int]
    source: str


# ---------------------------------------------------------------------------
# Module-language AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    span: Span = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)
    nid: int = field(default=-1, compare=False, repr=False, kw_only=True)


# -- expressions --

@dataclass(frozen=True)
class Expr(Node):
    pass


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class RealLit(Expr):
    value: float


@dataclass(frozen=True)
class BVLit(Expr):
    value: int
    width: int


@dataclass(frozen=True)
class EnumLit(Expr):
    tag: str


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


UNARY_OPS = ("not", "neg")
BINARY_OPS = (
    "and", "or", "xor", "implies",
    "==", "!=", "<", "<=", ">", ">=",
    "+", "-", "*", "div", "mod",
    "bvand", "bvor", "bvxor", "shl", "lshr", "concat",
)


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr

    def __post_init__(self) -> None:
        if self.op not in UNARY_OPS:
            raise ValueError(f"bad unary op {self.op!r}")


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in BINARY_OPS:
            raise ValueError(f"bad binary op {self.op!r}")


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass(frozen=True)
class ArraySelect(Expr):
    array: Expr
    index: Expr


@dataclass(frozen=True)
class HoleExpr(Expr):
    hid: int


LValue = Union[VarRef, ArraySelect]


# -- statements --

@dataclass(frozen=True)
class Stmt(Node):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    lhs: Expr  # VarRef or ArraySelect chain rooted at a state variable
    rhs: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple[Stmt, ...]
    elifs: tuple[tuple[Expr, tuple[Stmt, ...]], ...] = ()
    orelse: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Havoc(Stmt):
    name: str


@dataclass(frozen=True)
class Assume(Stmt):
    cond: Expr


@dataclass(frozen=True)
class Assert(Stmt):
    cond: Expr


@dataclass(frozen=True)
class HoleStmt(Stmt):
    hid: int


# -- declarations --

@dataclass(frozen=True)
class TypeAnnot(Node):
    """A type expression in declaration position."""

    ty: TypeTerm


@dataclass(frozen=True)
class HoleType(Node):
    hid: int


@dataclass(frozen=True)
class DeclValue(Node):
    """A value where a type was expected; the constraint phase infers the
    declared type from it instead of deleting the declaration."""

    expr: Expr


Annot = Union[TypeAnnot, HoleType, DeclValue]


@dataclass(frozen=True)
class Decl(Node):
    name: str
    annot: Annot


@dataclass(frozen=True)
class HoleDecl(Node):
    hid: int


DeclEntry = Union[Decl, HoleDecl]


@dataclass(frozen=True)
class ChildProgram(Node):
    module_name: str = "M"
    type_defs: tuple[DeclEntry, ...] = ()
    locals: tuple[DeclEntry, ...] = ()
    inputs: tuple[DeclEntry, ...] = ()
    outputs: tuple[DeclEntry, ...] = ()
    init_body: tuple[Stmt, ...] = ()
    next_body: tuple[Stmt, ...] = ()
    invariants_spec: tuple[tuple[str, Expr], ...] = ()
    module_hole: Optional[int] = None


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------

def expr_children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Ite):
        return (e.cond, e.then, e.other)
    if isinstance(e, ArraySelect):
        return (e.array, e.index)
    return ()


def stmt_children(s: Stmt) -> tuple[Node, ...]:
    if isinstance(s, Assign):
        return (s.lhs, s.rhs)
    if isinstance(s, If):
        out: list[Node] = [s.cond, *s.then]
        for cond, body in s.elifs:
            out.append(cond)
            out.extend(body)
        out.extend(s.orelse)
        return tuple(out)
    if isinstance(s, (Assume, Assert)):
        return (s.cond,)
    return ()


def node_children(n: Node) -> tuple[Node, ...]:
    if isinstance(n, ChildProgram):
        out: list[Node] = []
        out.extend(n.type_defs)
        out.extend(n.locals)
        out.extend(n.inputs)
        out.extend(n.outputs)
        out.extend(n.init_body)
        out.extend(n.next_body)
        out.extend(e for _, e in n.invariants_spec)
        return tuple(out)
    if isinstance(n, Decl):
        return (n.annot,)
    if isinstance(n, DeclValue):
        return (n.expr,)
    if isinstance(n, Stmt):
        return stmt_children(n)
    if isinstance(n, Expr):
        return expr_children(n)
    return ()


def iter_nodes(tree: Node) -> Iterator[tuple[Node, int]]:
    """Pre-order traversal yielding (node, depth)."""

    def walk(n: Node, d: int) -> Iterator[tuple[Node, int]]:
        yield n, d
        for c in node_children(n):
            yield from walk(c, d + 1)

    yield from walk(tree, 0)


def iter_pnodes(root: PNode) -> Iterator[tuple[PNode, int]]:
    def walk(n: PNode, d: int) -> Iterator[tuple[PNode, int]]:
        yield n, d
        for c in n.children:
            yield from walk(c, d + 1)

    yield from walk(root, 0)


# ---------------------------------------------------------------------------
# Node-id assignment
# ---------------------------------------------------------------------------

def _with_nid(n, nid: int):
    object.__setattr__(n, "nid", nid)
    return n


def _rebuild(n: Node, counter: list[int]) -> Node:
    nid = counter[0]
    counter[0] += 1

    def rec(c: Node) -> Node:
        return _rebuild(c, counter)

    if isinstance(n, ChildProgram):
        out = ChildProgram(
            module_name=n.module_name,
            type_defs=tuple(rec(d) for d in n.type_defs),
            locals=tuple(rec(d) for d in n.locals),
            inputs=tuple(rec(d) for d in n.inputs),
            outputs=tuple(rec(d) for d in n.outputs),
            init_body=tuple(rec(s) for s in n.init_body),
            next_body=tuple(rec(s) for s in n.next_body),
            invariants_spec=tuple((name, rec(e)) for name, e in n.invariants_spec),
            module_hole=n.module_hole,
            span=n.span,
        )
    elif isinstance(n, Decl):
        out = Decl(n.name, rec(n.annot), span=n.span)
    elif isinstance(n, DeclValue):
        out = DeclValue(rec(n.expr), span=n.span)
    elif isinstance(n, Assign):
        out = Assign(rec(n.lhs), rec(n.rhs), span=n.span)
    elif isinstance(n, If):
        out = If(
            rec(n.cond),
            tuple(rec(s) for s in n.then),
            tuple((rec(c), tuple(rec(s) for s in b)) for c, b in n.elifs),
            tuple(rec(s) for s in n.orelse),
            span=n.span,
        )
    elif isinstance(n, (Assume, Assert)):
        out = type(n)(rec(n.cond), span=n.span)
    elif isinstance(n, Unary):
        out = Unary(n.op, rec(n.operand), span=n.span)
    elif isinstance(n, Binary):
        out = Binary(n.op, rec(n.left), rec(n.right), span=n.span)
    elif isinstance(n, Ite):
        out = Ite(rec(n.cond), rec(n.then), rec(n.other), span=n.span)
    elif isinstance(n, ArraySelect):
        out = ArraySelect(rec(n.array), rec(n.index), span=n.span)
    else:
        # leaves: literals, VarRef, holes, TypeAnnot, Havoc, HoleDecl, ...
        import dataclasses as _dc

        out = _dc.replace(n)
    return _with_nid(out, nid)


def assign_node_ids(tree):
    """Return a copy of the tree with unique pre-order node ids.

    Idempotent: re-running on an id-bearing tree reproduces the same ids.
    Works on both ParentAst and module-language trees.
    """
    if isinstance(tree, ParentAst):
        counter = [0]

        def walk(p: PNode) -> PNode:
            nid = counter[0]
            counter[0] += 1
            kids = tuple(walk(c) for c in p.children)
            return PNode(p.kind, kids, p.text, p.span, nid)

        return ParentAst(walk(tree.root), list(tree.error_nodes), tree.source)
    if isinstance(tree, Node):
        return _rebuild(tree, [0])
    raise TypeError(f"cannot assign node ids to {type(tree).__name__}")


def depth_map(tree) -> dict[int, int]:
    """Map every node id in the tree to its depth (root = 0)."""
    out: dict[int, int] = {}
    if isinstance(tree, ParentAst):
        for n, d in iter_pnodes(tree.root):
            if n.nid >= 0:
                out[n.nid] = d
    else:
        for n, d in iter_nodes(tree):
            if n.nid >= 0:
                out[n.nid] = d
    return out


def depth_of(tree, nid: int) -> int:
    """Depth of the node with the given id; raises KeyError if unknown."""
    dm = depth_map(tree)
    if nid not in dm:
        raise KeyError(f"unknown node id {nid}")
    return dm[nid]


def max_nid(tree) -> int:
    dm = depth_map(tree)
    return max(dm) if dm else -1


def max_hole_id(tree: Node) -> int:
    best = -1
    for n, _ in iter_nodes(tree):
        if isinstance(n, (HoleExpr, HoleStmt, HoleType, HoleDecl)):
            best = max(best, n.hid)
    if isinstance(tree, ChildProgram) and tree.module_hole is not None:
        best = max(best, tree.module_hole)
    return best


def count_holes(p: ChildProgram) -> int:
    n = sum(
        1
        for node, _ in iter_nodes(p)
        if isinstance(node, (HoleExpr, HoleStmt, HoleType, HoleDecl))
    )
    if p.module_hole is not None:
        n += 1
    return n


# ---------------------------------------------------------------------------
# Type formatting and debug printers
# ---------------------------------------------------------------------------

def format_type(t: TypeTerm) -> str:
    """Surface spelling of a type, used by printers and diagnostics."""
    if isinstance(t, BoolType):
        return "bool"
    if isinstance(t, IntType):
        return "int"
    if isinstance(t, RealType):
        return "real"
    if isinstance(t, BVType):
        return f"BitVector({t.width})"
    if isinstance(t, EnumType):
        return "Enum(" + ", ".join(f'"{tag}"' for tag in t.tags) + ")"
    if isinstance(t, ArrayType):
        return f"Array({format_type(t.index)}, {format_type(t.elem)})"
    if isinstance(t, SynonymType):
        return f"self.{t.name}"
    if isinstance(t, TVar):
        return f"?t{t.tid}"
    raise TypeError(f"unknown type term {t!r}")


def pp_parent(ast: ParentAst) -> str:
    """Deterministic s-expression dump of a surface AST (golden tests)."""
    lines: list[str] = []
    for n, d in iter_pnodes(ast.root):
        label = n.kind if not n.text else f"{n.kind}:{n.text}"
        lines.append("  " * d + label)
    if ast.error_nodes:
        lines.append("errors: " + ",".join(str(i) for i in sorted(ast.error_nodes)))
    return "\n".join(lines) + "\n"


def _pp_node(n: Node) -> str:
    if isinstance(n, BoolLit):
        return f"bool:{n.value}"
    if isinstance(n, IntLit):
        return f"int:{n.value}"
    if isinstance(n, RealLit):
        return f"real:{n.value}"
    if isinstance(n, BVLit):
        return f"bv:{n.value}w{n.width}"
    if isinstance(n, EnumLit):
        return f"enum:{n.tag}"
    if isinstance(n, VarRef):
        return f"var:{n.name}"
    if isinstance(n, Unary):
        return f"unary:{n.op}"
    if isinstance(n, Binary):
        return f"binary:{n.op}"
    if isinstance(n, Ite):
        return "ite"
    if isinstance(n, ArraySelect):
        return "select"
    if isinstance(n, HoleExpr):
        return "hole-expr"
    if isinstance(n, Assign):
        return "assign"
    if isinstance(n, If):
        return "if"
    if isinstance(n, Havoc):
        return f"havoc:{n.name}"
    if isinstance(n, Assume):
        return "assume"
    if isinstance(n, Assert):
        return "assert"
    if isinstance(n, HoleStmt):
        return "hole-stmt"
    if isinstance(n, TypeAnnot):
        return f"type:{format_type(n.ty)}"
    if isinstance(n, HoleType):
        return "hole-type"
    if isinstance(n, DeclValue):
        return "decl-value"
    if isinstance(n, Decl):
        return f"decl:{n.name}"
    if isinstance(n, HoleDecl):
        return "hole-decl"
    if isinstance(n, ChildProgram):
        return f"module:{n.module_name}" + (" hole" if n.module_hole is not None else "")
    return type(n).__name__


def pp_child(p: ChildProgram) -> str:
    """Deterministic structural dump of a module-language tree."""
    lines: list[str] = []
    for n, d in iter_nodes(p):
        lines.append("  " * d + _pp_node(n))
    return "\n".join(lines) + "\n"
