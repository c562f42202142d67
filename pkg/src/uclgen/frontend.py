"""Error-tolerant parsing of LLM output and pruning to the module language.

The surface syntax is an indentation-delimited, class-based scripting
notation (a Python subset). `parse_tolerant` is total: anything it cannot
parse becomes an error node and recovery re-synchronizes on the next line
at the same or lower indentation. `prune_to_child` keeps the maximal
subtree expressible in the module language, inserting holes in mandatory
slots and dropping (and logging) everything else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ast_core import (
    NO_SPAN,
    ArraySelect,
    ArrayType,
    Assert,
    Assign,
    Assume,
    BOOL,
    BVLit,
    BVType,
    BoolLit,
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
    Ite,
    PNode,
    ParentAst,
    REAL,
    RealLit,
    Span,
    Stmt,
    SynonymType,
    TypeAnnot,
    TypeTerm,
    Unary,
    Binary,
    VarRef,
    assign_node_ids,
    format_type,
    iter_pnodes,
)


class ExtractError(ValueError):
    """Raised when no source text can be extracted from an LLM response."""


SECTION_METHODS = (
    "types", "locals", "inputs", "outputs", "init", "next", "specification",
)

BASE_CLASS = "Module"


# ---------------------------------------------------------------------------
# Code extraction
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"^\s*```", re.MULTILINE)
_DECL_LINE_RE = re.compile(r"^(class\s+\w|import\s+\w|from\s+\w)", re.MULTILINE)


def extract_code(llm_response: str) -> str:
    """Pull source text out of a raw LLM response.

    Policy: the contents of the first fenced code block win. A single fence
    is treated as the terminator of a block opened by the prompt when code
    precedes it. Without any fence, the longest suffix starting at a line
    that begins a class or import declaration is used; failing that, the
    whole response is returned.
    """
    if not llm_response.strip():
        raise ExtractError("empty LLM response")
    fences = list(_FENCE_RE.finditer(llm_response))
    if len(fences) >= 2:
        start = llm_response.index("\n", fences[0].start())
        return llm_response[start + 1 : fences[1].start()].strip("\n")
    if len(fences) == 1:
        before = llm_response[: fences[0].start()]
        after = llm_response[fences[0].end() :]
        after = after[after.index("\n") + 1 :] if "\n" in after else ""
        if _DECL_LINE_RE.search(before):
            return before.strip("\n")
        return after.strip("\n")
    m = _DECL_LINE_RE.search(llm_response)
    if m:
        return llm_response[m.start() :].strip("\n")
    return llm_response


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tok:
    kind: str  # NAME, INT, FLOAT, STR, OP, HOLE
    value: str
    pos: int  # byte offset into the source


_MULTI_OPS = ("**=", "//=", "==", "!=", "<=", ">=", "<<", ">>", "//", "**",
              "??", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->")
_SINGLE_OPS = "()[]{}:,.=+-*/%<>&|^~@;"

_KEYWORD_VALUES = ("True", "False", "None")


class _TokenError(Exception):
    pass


class _UnterminatedTriple(_TokenError):
    """A triple-quoted string continues past the region being tokenized."""


def _tokenize(source: str, start: int, end: int) -> list[Tok]:
    """Tokenize one physical line region [start, end)."""
    toks: list[Tok] = []
    i = start
    while i < end:
        c = source[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "#":
            nl = source.find("\n", i, end)
            if nl == -1:
                break
            i = nl + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < end and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(Tok("NAME", source[i:j], i))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < end and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < end and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    # attribute access on an int literal is not a float
                    if j + 1 >= end or not source[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            text = source[i:j]
            toks.append(Tok("FLOAT" if "." in text else "INT", text, i))
            i = j
            continue
        if c in "\"'":
            quote = c
            if source.startswith(quote * 3, i):
                close = source.find(quote * 3, i + 3, end)
                if close == -1:
                    raise _UnterminatedTriple(f"unterminated string at {i}")
                toks.append(Tok("STR", source[i + 3 : close], i))
                i = close + 3
                continue
            j = i + 1
            buf = []
            closed = False
            while j < end:
                if source[j] == "\n":
                    break
                if source[j] == "\\" and j + 1 < end:
                    buf.append(source[j + 1])
                    j += 2
                    continue
                if source[j] == quote:
                    closed = True
                    j += 1
                    break
                buf.append(source[j])
                j += 1
            if not closed:
                raise _TokenError(f"unterminated string at {i}")
            toks.append(Tok("STR", "".join(buf), i))
            i = j
            continue
        matched = False
        for op in _MULTI_OPS:
            if source.startswith(op, i):
                toks.append(Tok("HOLE" if op == "??" else "OP", op, i))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        if c == "?":
            raise _TokenError(f"stray '?' at {i}")
        if c in _SINGLE_OPS:
            toks.append(Tok("OP", c, i))
            i += 1
            continue
        raise _TokenError(f"unexpected character {c!r} at {i}")
    return toks


@dataclass
class _Line:
    indent: int
    toks: list[Tok]
    span: Span
    bad: bool = False  # tokenizer failed; treat as an error line


def _logical_lines(source: str) -> list[_Line]:
    """Split into logical lines; joins lines while brackets are open."""
    out: list[_Line] = []
    phys: list[tuple[int, int, int]] = []  # (start, end, lineno)
    pos = 0
    lineno = 0
    for raw in source.split("\n"):
        phys.append((pos, pos + len(raw), lineno))
        pos += len(raw) + 1
        lineno += 1

    i = 0
    while i < len(phys):
        start, end, ln = phys[i]
        text = source[start:end]
        stripped = text.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        indent = 0
        for ch in text:
            if ch == " ":
                indent += 1
            elif ch == "\t":
                indent += 4
            else:
                break
        toks: list[Tok] = []
        bad = False
        j = i
        while True:
            _, e2, _ = phys[j]
            try:
                toks = _tokenize(source, start, e2)
                bad = False
            except _UnterminatedTriple:
                bad = True
                if j + 1 < len(phys):
                    j += 1
                    continue
                toks = []
                break
            except _TokenError:
                bad = True
                toks = []
                break
            depth = 0
            for t in toks:
                if t.kind == "OP" and t.value in "([{":
                    depth += 1
                elif t.kind == "OP" and t.value in ")]}":
                    depth -= 1
            if depth <= 0 or j + 1 >= len(phys):
                break
            j += 1
        last_end = phys[j][1]
        span = Span(start, last_end, ln, indent, phys[j][2], last_end - phys[j][0])
        out.append(_Line(indent, toks, span, bad))
        i = j + 1
    return out


# ---------------------------------------------------------------------------
# Expression parsing (precedence climbing over one logical line)
# ---------------------------------------------------------------------------

class _ParseFail(Exception):
    pass


class _ExprParser:
    def __init__(self, toks: list[Tok], src_end: int):
        self.toks = toks
        self.i = 0
        self.src_end = src_end

    def peek(self) -> Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> Tok:
        t = self.peek()
        if t is None:
            raise _ParseFail("unexpected end of line")
        self.i += 1
        return t

    def expect(self, value: str) -> Tok:
        t = self.next()
        if t.value != value:
            raise _ParseFail(f"expected {value!r}, got {t.value!r}")
        return t

    def at(self, value: str) -> bool:
        t = self.peek()
        return t is not None and t.value == value and t.kind in ("OP", "NAME")

    def span_from(self, tok: Tok) -> Span:
        end = self.toks[self.i - 1] if self.i > 0 else tok
        return Span(tok.pos, end.pos + len(end.value))

    # grammar: ternary > or > and > not > comparison > bitor > bitxor >
    #          bitand > shift > additive > multiplicative > unary > postfix
    def parse(self) -> PNode:
        return self.ternary()

    def ternary(self) -> PNode:
        start = self.peek()
        body = self.or_()
        if self.at("if"):
            self.next()
            cond = self.or_()
            self.expect("else")
            other = self.ternary()
            return PNode("ifexp", (body, cond, other), span=self.span_from(start))
        return body

    def _binop_level(self, sub, ops: tuple[str, ...]) -> PNode:
        start = self.peek()
        node = sub()
        while True:
            t = self.peek()
            if t is None or t.value not in ops or t.kind not in ("OP", "NAME"):
                return node
            self.next()
            rhs = sub()
            node = PNode("binop", (node, rhs), t.value, span=self.span_from(start))

    def or_(self) -> PNode:
        return self._binop_level(self.and_, ("or",))

    def and_(self) -> PNode:
        return self._binop_level(self.not_, ("and",))

    def not_(self) -> PNode:
        t = self.peek()
        if t is not None and t.kind == "NAME" and t.value == "not":
            self.next()
            operand = self.not_()
            return PNode("unop", (operand,), "not", span=self.span_from(t))
        return self.comparison()

    def comparison(self) -> PNode:
        return self._binop_level(
            self.bitor, ("==", "!=", "<", "<=", ">", ">=")
        )

    def bitor(self) -> PNode:
        return self._binop_level(self.bitxor, ("|",))

    def bitxor(self) -> PNode:
        return self._binop_level(self.bitand, ("^",))

    def bitand(self) -> PNode:
        return self._binop_level(self.shift, ("&",))

    def shift(self) -> PNode:
        return self._binop_level(self.additive, ("<<", ">>"))

    def additive(self) -> PNode:
        return self._binop_level(self.multiplicative, ("+", "-"))

    def multiplicative(self) -> PNode:
        return self._binop_level(self.unary, ("*", "/", "//", "%"))

    def unary(self) -> PNode:
        t = self.peek()
        if t is not None and t.kind == "OP" and t.value in ("-", "+", "~"):
            self.next()
            operand = self.unary()
            if t.value == "+":
                return operand
            return PNode("unop", (operand,), t.value, span=self.span_from(t))
        return self.postfix()

    def postfix(self) -> PNode:
        node = self.atom()
        while True:
            t = self.peek()
            if t is None or t.kind != "OP":
                return node
            if t.value == ".":
                self.next()
                name = self.next()
                if name.kind != "NAME":
                    raise _ParseFail("expected attribute name")
                node = PNode(
                    "attr", (node,), name.value,
                    span=Span(node.span.start, name.pos + len(name.value)),
                )
            elif t.value == "(":
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.parse())
                    while self.at(","):
                        self.next()
                        if self.at(")"):
                            break
                        args.append(self.parse())
                close = self.expect(")")
                node = PNode(
                    "call", (node, *args), "",
                    span=Span(node.span.start, close.pos + 1),
                )
            elif t.value == "[":
                self.next()
                idx = self.parse()
                close = self.expect("]")
                node = PNode(
                    "subscript", (node, idx), "",
                    span=Span(node.span.start, close.pos + 1),
                )
            else:
                return node

    def atom(self) -> PNode:
        t = self.next()
        sp = Span(t.pos, t.pos + len(t.value))
        if t.kind == "HOLE":
            return PNode("hole", span=sp)
        if t.kind == "INT":
            return PNode("int", text=t.value, span=sp)
        if t.kind == "FLOAT":
            return PNode("float", text=t.value, span=sp)
        if t.kind == "STR":
            return PNode("str", text=t.value, span=Span(t.pos, t.pos + len(t.value) + 2))
        if t.kind == "NAME":
            if t.value in ("True", "False"):
                return PNode("bool", text=t.value, span=sp)
            if t.value in ("if", "else", "and", "or", "not", "in", "is"):
                raise _ParseFail(f"keyword {t.value!r} in atom position")
            return PNode("name", text=t.value, span=sp)
        if t.kind == "OP" and t.value == "(":
            inner = self.parse()
            if self.at(","):
                raise _ParseFail("tuple expressions are not supported")
            self.expect(")")
            return inner
        raise _ParseFail(f"unexpected token {t.value!r}")


def _parse_expr_tokens(toks: list[Tok]) -> PNode:
    p = _ExprParser(toks, 0)
    node = p.parse()
    if p.peek() is not None:
        raise _ParseFail(f"trailing tokens after expression: {p.peek().value!r}")
    return node


# ---------------------------------------------------------------------------
# Statement / block parsing
# ---------------------------------------------------------------------------

_AUG_OPS = ("+=", "-=", "*=", "/=", "//=", "%=", "&=", "|=", "^=")


class _BlockParser:
    def __init__(self, lines: list[_Line], source: str):
        self.lines = lines
        self.source = source
        self.errors: list[PNode] = []

    def parse_block(self, i: int, indent: int) -> tuple[list[PNode], int]:
        nodes: list[PNode] = []
        while i < len(self.lines):
            line = self.lines[i]
            if line.indent < indent:
                break
            if line.indent > indent:
                # orphan over-indented line: error, consume it alone
                nodes.append(self._error_region(i, line.indent))
                i = self._skip_region(i, line.indent)
                continue
            node, i = self.parse_line(i)
            if node.kind in ("elif", "else") and nodes and nodes[-1].kind == "if":
                nodes[-1] = PNode(
                    "if", nodes[-1].children + (node,), "",
                    span=Span(nodes[-1].span.start, node.span.end,
                              nodes[-1].span.line, nodes[-1].span.col),
                )
            elif node.kind in ("elif", "else"):
                nodes.append(self._as_error(node, "dangling elif/else"))
            else:
                nodes.append(node)
        return nodes, i

    def _skip_region(self, i: int, indent: int) -> int:
        """Skip line i and every following line more indented than it."""
        j = i + 1
        while j < len(self.lines) and self.lines[j].indent > indent:
            j += 1
        return j

    def _error_region(self, i: int, indent: int) -> PNode:
        j = self._skip_region(i, indent)
        last = self.lines[j - 1]
        sp = Span(self.lines[i].span.start, last.span.end,
                  self.lines[i].span.line, self.lines[i].span.col,
                  last.span.end_line, last.span.end_col)
        node = PNode("error", span=sp)
        self.errors.append(node)
        return node

    def _as_error(self, node: PNode, reason: str) -> PNode:
        err = PNode("error", text=reason, span=node.span)
        self.errors.append(err)
        return err

    def parse_line(self, i: int) -> tuple[PNode, int]:
        line = self.lines[i]
        if line.bad or not line.toks:
            node = self._error_region(i, line.indent)
            return node, self._skip_region(i, line.indent)
        try:
            return self._parse_line_inner(i)
        except _ParseFail:
            node = self._error_region(i, line.indent)
            return node, self._skip_region(i, line.indent)

    def _parse_line_inner(self, i: int) -> tuple[PNode, int]:
        line = self.lines[i]
        toks = line.toks
        head = toks[0]
        if head.kind == "NAME" and head.value in ("class", "def"):
            return self._parse_def_like(i, head.value)
        if head.kind == "NAME" and head.value in ("if", "elif"):
            return self._parse_cond_block(i, head.value)
        if head.kind == "NAME" and head.value == "else":
            if len(toks) != 2 or toks[1].value != ":":
                raise _ParseFail("malformed else")
            body, j = self.parse_block(i + 1, self._body_indent(i))
            return PNode("else", (self._block(body, line.span),), span=line.span), j
        if head.kind == "NAME" and head.value == "assert":
            expr = _parse_expr_tokens(toks[1:])
            return PNode("assert_stmt", (expr,), span=line.span), i + 1
        if head.kind == "NAME" and head.value == "return":
            if len(toks) == 1:
                return PNode("return", span=line.span), i + 1
            expr = _parse_expr_tokens(toks[1:])
            return PNode("return", (expr,), span=line.span), i + 1
        if head.kind == "NAME" and head.value == "pass":
            if len(toks) != 1:
                raise _ParseFail("malformed pass")
            return PNode("pass", span=line.span), i + 1
        if head.kind == "NAME" and head.value in ("import", "from"):
            return PNode("import", text=self._line_text(line), span=line.span), i + 1
        if head.kind == "STR" and len(toks) == 1:
            return PNode("docstring", text=head.value, span=line.span), i + 1
        # assignment, augmented assignment, or expression statement
        eq = self._top_level_assign_index(toks)
        if eq is not None:
            idx, opval = eq
            lhs = _parse_expr_tokens(toks[:idx])
            rhs = _parse_expr_tokens(toks[idx + 1 :])
            if opval == "=":
                return PNode("assign", (lhs, rhs), span=line.span), i + 1
            return PNode("augassign", (lhs, rhs), opval, span=line.span), i + 1
        expr = _parse_expr_tokens(toks)
        return PNode("expr_stmt", (expr,), span=line.span), i + 1

    def _line_text(self, line: _Line) -> str:
        return self.source[line.span.start : line.span.end].strip()

    def _top_level_assign_index(self, toks: list[Tok]):
        depth = 0
        for idx, t in enumerate(toks):
            if t.kind != "OP":
                continue
            if t.value in "([{":
                depth += 1
            elif t.value in ")]}":
                depth -= 1
            elif depth == 0 and t.value == "=" :
                return idx, "="
            elif depth == 0 and t.value in _AUG_OPS:
                return idx, t.value
        return None

    def _body_indent(self, i: int) -> int:
        line = self.lines[i]
        if i + 1 < len(self.lines) and self.lines[i + 1].indent > line.indent:
            return self.lines[i + 1].indent
        return line.indent + 4

    def _parse_def_like(self, i: int, kw: str) -> tuple[PNode, int]:
        line = self.lines[i]
        toks = line.toks
        if len(toks) < 3 or toks[1].kind != "NAME" or toks[-1].value != ":":
            raise _ParseFail(f"malformed {kw}")
        name = toks[1].value
        bases: list[str] = []
        if len(toks) > 3:
            if toks[2].value != "(" or toks[-2].value != ")":
                raise _ParseFail(f"malformed {kw} header")
            for t in toks[3:-2]:
                if t.kind == "NAME":
                    bases.append(t.value)
                elif t.value not in (",", ".", "*"):
                    raise _ParseFail(f"unexpected token in {kw} header")
        body, j = self.parse_block(i + 1, self._body_indent(i))
        kind = "class" if kw == "class" else "def"
        header = PNode("bases" if kw == "class" else "params",
                       tuple(PNode("name", text=b) for b in bases), span=line.span)
        return (
            PNode(kind, (header, self._block(body, line.span)), name, span=line.span),
            j,
        )

    def _parse_cond_block(self, i: int, kw: str) -> tuple[PNode, int]:
        line = self.lines[i]
        toks = line.toks
        if toks[-1].value != ":":
            raise _ParseFail(f"malformed {kw}")
        cond = _parse_expr_tokens(toks[1:-1])
        body, j = self.parse_block(i + 1, self._body_indent(i))
        return PNode(kw, (cond, self._block(body, line.span)), span=line.span), j

    def _block(self, nodes: list[PNode], span: Span) -> PNode:
        return PNode("block", tuple(nodes), span=span)


def parse_tolerant(source: str) -> ParentAst:
    """Parse arbitrary text into a surface AST. Total: never raises."""
    lines = _logical_lines(source)
    bp = _BlockParser(lines, source)
    nodes, i = bp.parse_block(0, lines[0].indent if lines else 0)
    # anything left over (dedented below the first line) is parsed as a
    # fresh top-level run
    while i < len(lines):
        more, i2 = bp.parse_block(i, lines[i].indent)
        nodes.extend(more)
        i = max(i2, i + 1)
    end = len(source)
    root = PNode("module", tuple(nodes), span=Span(0, end))
    ast = assign_node_ids(ParentAst(root, [], source))
    ast.error_nodes = [n.nid for n, _ in iter_pnodes(ast.root) if n.kind == "error"]
    return ast


# ---------------------------------------------------------------------------
# Pruning to the module language
# ---------------------------------------------------------------------------

@dataclass
class PruneReport:
    dropped: list[tuple[int, Span, str]] = field(default_factory=list)
    holes_inserted: list[tuple[int, str, Span]] = field(default_factory=list)

    def drop(self, node: PNode, reason: str) -> None:
        self.dropped.append((node.nid, node.span, reason))

    def to_dict(self) -> dict:
        return {
            "dropped": [
                {"node": nid, "line": sp.line, "reason": reason}
                for nid, sp, reason in self.dropped
            ],
            "holes_inserted": [
                {"hole": hid, "category": cat, "line": sp.line}
                for hid, cat, sp in self.holes_inserted
            ],
        }


class _Pruner:
    def __init__(self, ast: ParentAst):
        self.ast = ast
        self.report = PruneReport()
        self.hole_counter = 0
        self.typedef_names: set[str] = set()

    def fresh_hole(self, category: str, span: Span) -> int:
        hid = self.hole_counter
        self.hole_counter += 1
        self.report.holes_inserted.append((hid, category, span))
        return hid

    def carried_hole(self) -> int:
        # a `??` already present in the source: carried, not inserted
        hid = self.hole_counter
        self.hole_counter += 1
        return hid

    def run(self) -> ChildProgram:
        cls = self._find_module_class()
        if cls is None:
            root = self.ast.root
            hid = self.fresh_hole("module", root.span)
            self.report.dropped.append(
                (root.nid, root.span, "no class extending Module")
            )
            return ChildProgram(module_hole=hid, nid=root.nid, span=root.span)
        body = cls.children[1]
        sections: dict[str, PNode] = {}
        for item in body.children:
            if item.kind == "def" and item.text in SECTION_METHODS:
                if item.text in sections:
                    self.report.drop(item, "duplicate method")
                else:
                    sections[item.text] = item
            elif item.kind in ("docstring", "pass"):
                continue
            else:
                self.report.drop(item, "not a recognized method")

        # typedef names must be known before elaborating other sections
        if "types" in sections:
            for stmt in sections["types"].children[1].children:
                name = self._decl_target(stmt)
                if name:
                    self.typedef_names.add(name)

        type_defs = self._decl_section(sections.get("types"), is_typedef=True)
        locals_ = self._decl_section(sections.get("locals"))
        inputs = self._decl_section(sections.get("inputs"))
        outputs = self._decl_section(sections.get("outputs"))
        init_body = self._stmt_block(sections["init"].children[1]) if "init" in sections else ()
        next_body = self._stmt_block(sections["next"].children[1]) if "next" in sections else ()
        invariants = self._spec_section(sections.get("specification"))

        return ChildProgram(
            module_name=cls.text,
            type_defs=type_defs,
            locals=locals_,
            inputs=inputs,
            outputs=outputs,
            init_body=init_body,
            next_body=next_body,
            invariants_spec=invariants,
            nid=cls.nid,
            span=cls.span,
        )

    def _spec_section(self, method: PNode | None):
        if method is None:
            return ()
        out: list[tuple[str, Expr]] = []
        for stmt in method.children[1].children:
            if stmt.kind in ("pass", "docstring"):
                continue
            if stmt.kind == "return" and stmt.children:
                out.append(
                    (f"spec{len(out)}", self._expr(stmt.children[0]))
                )
            else:
                self.report.drop(stmt, "specification must return a property")
        return tuple(out)

    def _find_module_class(self) -> PNode | None:
        for node in self.ast.root.children:
            if node.kind != "class":
                continue
            bases = [b.text for b in node.children[0].children]
            if BASE_CLASS in bases:
                return node
        return None

    def _decl_target(self, stmt: PNode) -> str | None:
        if stmt.kind != "assign":
            return None
        lhs = stmt.children[0]
        if lhs.kind == "attr" and lhs.children[0].kind == "name" \
                and lhs.children[0].text == "self":
            return lhs.text
        return None

    def _decl_section(self, method: PNode | None, is_typedef: bool = False):
        if method is None:
            return ()
        out: list = []
        for stmt in method.children[1].children:
            if stmt.kind in ("pass", "docstring"):
                continue
            if stmt.kind == "expr_stmt" and stmt.children[0].kind == "hole":
                out.append(HoleDecl(self.carried_hole(), nid=stmt.nid, span=stmt.span))
                continue
            if stmt.kind == "error":
                self.report.drop(stmt, "unparseable")
                continue
            name = self._decl_target(stmt)
            if name is None:
                self.report.drop(stmt, "not a declaration")
                continue
            rhs = stmt.children[1]
            annot = self._elaborate_annot(rhs, is_typedef)
            out.append(Decl(name, annot, nid=stmt.nid, span=stmt.span))
        return tuple(out)

    def _elaborate_annot(self, rhs: PNode, is_typedef: bool):
        ty = self._try_type(rhs)
        if ty is not None:
            return TypeAnnot(ty, nid=rhs.nid, span=rhs.span)
        if rhs.kind == "hole":
            return HoleType(self.carried_hole(), nid=rhs.nid, span=rhs.span)
        if not is_typedef:
            expr = self._expr(rhs, optional=True)
            if expr is not None:
                return DeclValue(expr, span=rhs.span)
        hid = self.fresh_hole("type", rhs.span)
        self.report.drop(rhs, "unrecognized type expression")
        return HoleType(hid, nid=rhs.nid, span=rhs.span)

    def _try_type(self, node: PNode) -> TypeTerm | None:
        if node.kind == "name":
            return {"bool": BOOL, "int": INT, "real": REAL}.get(node.text)
        if node.kind == "attr" and node.children[0].kind == "name" \
                and node.children[0].text == "self":
            if node.text in self.typedef_names:
                return SynonymType(node.text)
            return None
        if node.kind == "call" and node.children[0].kind == "name":
            fn = node.children[0].text
            args = node.children[1:]
            if fn == "BitVector" and len(args) == 1 and args[0].kind == "int":
                width = int(args[0].text)
                return BVType(width) if width >= 1 else None
            if fn == "Enum" and args and all(a.kind == "str" for a in args):
                tags = [a.text for a in args]
                if len(set(tags)) != len(tags):
                    return None
                return EnumType(tuple(tags))
            if fn == "Array" and len(args) == 2:
                idx = self._try_type(args[0])
                elem = self._try_type(args[1])
                if idx is not None and elem is not None:
                    return ArrayType(idx, elem)
            return None
        return None

    def _stmt_block(self, block: PNode) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for stmt in block.children:
            got = self._stmt(stmt)
            if got is not None:
                out.append(got)
        return tuple(out)

    def _stmt(self, stmt: PNode) -> Stmt | None:
        if stmt.kind in ("pass", "docstring"):
            return None
        if stmt.kind == "error":
            self.report.drop(stmt, "unparseable")
            return None
        if stmt.kind == "assign":
            lhs = self._lvalue(stmt.children[0])
            if lhs is None:
                self.report.drop(stmt, "assignment target is not a state variable")
                return None
            rhs = self._expr(stmt.children[1])
            return Assign(lhs, rhs, nid=stmt.nid, span=stmt.span)
        if stmt.kind == "augassign":
            lhs = self._lvalue(stmt.children[0])
            if lhs is None:
                self.report.drop(stmt, "assignment target is not a state variable")
                return None
            op = _BINOP_MAP.get(stmt.text.rstrip("="))
            if op is None:
                self.report.drop(stmt, "unsupported augmented assignment")
                return None
            rhs_inner = self._expr(stmt.children[1])
            rhs = Binary(op, lhs, rhs_inner, nid=stmt.nid, span=stmt.span)
            return Assign(lhs, rhs, nid=stmt.nid, span=stmt.span)
        if stmt.kind == "if":
            return self._if_stmt(stmt)
        if stmt.kind == "assert_stmt":
            return Assert(self._expr(stmt.children[0]), nid=stmt.nid, span=stmt.span)
        if stmt.kind == "expr_stmt":
            inner = stmt.children[0]
            if inner.kind == "hole":
                return HoleStmt(self.carried_hole(), nid=stmt.nid, span=stmt.span)
            if inner.kind == "call" and inner.children[0].kind == "name":
                fn = inner.children[0].text
                args = inner.children[1:]
                if fn == "assume" and len(args) == 1:
                    return Assume(self._expr(args[0]), nid=stmt.nid, span=stmt.span)
                if fn == "havoc" and len(args) == 1:
                    target = self._lvalue(args[0])
                    if isinstance(target, VarRef):
                        return Havoc(target.name, nid=stmt.nid, span=stmt.span)
            self.report.drop(stmt, "statement outside the module language")
            return None
        self.report.drop(stmt, "statement outside the module language")
        return None

    def _if_stmt(self, stmt: PNode) -> If:
        cond = self._expr(stmt.children[0])
        then = self._stmt_block(stmt.children[1])
        elifs: list[tuple[Expr, tuple[Stmt, ...]]] = []
        orelse: tuple[Stmt, ...] = ()
        for extra in stmt.children[2:]:
            if extra.kind == "elif":
                elifs.append(
                    (self._expr(extra.children[0]), self._stmt_block(extra.children[1]))
                )
            elif extra.kind == "else":
                orelse = self._stmt_block(extra.children[0])
        return If(cond, then, tuple(elifs), orelse, nid=stmt.nid, span=stmt.span)

    def _lvalue(self, node: PNode):
        if node.kind == "attr" and node.children[0].kind == "name" \
                and node.children[0].text == "self":
            return VarRef(node.text, nid=node.nid, span=node.span)
        if node.kind == "subscript":
            arr = self._lvalue(node.children[0])
            if arr is None:
                return None
            idx = self._expr(node.children[1])
            return ArraySelect(arr, idx, nid=node.nid, span=node.span)
        return None

    def _expr(self, node: PNode, optional: bool = False):
        """Convert a surface expression. Mandatory slots get holes when the
        form is outside the module language; with optional=True, returns
        None instead."""
        got = self._expr_inner(node)
        if got is not None:
            return got
        if optional:
            return None
        hid = self.fresh_hole("expression", node.span)
        self.report.drop(node, "expression outside the module language")
        return HoleExpr(hid, nid=node.nid, span=node.span)

    def _expr_inner(self, node: PNode):
        k = node.kind
        if k == "hole":
            return HoleExpr(self.carried_hole(), nid=node.nid, span=node.span)
        if k == "int":
            return IntLit(int(node.text), nid=node.nid, span=node.span)
        if k == "float":
            return RealLit(float(node.text), nid=node.nid, span=node.span)
        if k == "bool":
            return BoolLit(node.text == "True", nid=node.nid, span=node.span)
        if k == "str":
            if re.fullmatch(r"[A-Za-z_]\w*", node.text):
                return EnumLit(node.text, nid=node.nid, span=node.span)
            return None
        if k == "attr" and node.children[0].kind == "name" \
                and node.children[0].text == "self":
            return VarRef(node.text, nid=node.nid, span=node.span)
        if k == "unop":
            operand = self._expr(node.children[0])
            op = {"not": "not", "-": "neg"}.get(node.text)
            if op is None:
                return None
            return Unary(op, operand, nid=node.nid, span=node.span)
        if k == "binop":
            op = _BINOP_MAP.get(node.text)
            if op is None:
                return None
            left = self._expr(node.children[0])
            right = self._expr(node.children[1])
            return Binary(op, left, right, nid=node.nid, span=node.span)
        if k == "ifexp":
            body, cond, other = node.children
            return Ite(
                self._expr(cond), self._expr(body), self._expr(other),
                nid=node.nid, span=node.span,
            )
        if k == "subscript":
            arr = self._expr(node.children[0])
            idx = self._expr(node.children[1])
            return ArraySelect(arr, idx, nid=node.nid, span=node.span)
        if k == "call" and node.children[0].kind == "name":
            fn = node.children[0].text
            args = node.children[1:]
            if fn == "BV" and len(args) == 2 and args[0].kind == "int" \
                    and args[1].kind == "int" and int(args[1].text) >= 1:
                return BVLit(int(args[0].text), int(args[1].text),
                             nid=node.nid, span=node.span)
            return None
        return None


_BINOP_MAP = {
    "and": "and",
    "or": "or",
    "==": "==",
    "!=": "!=",
    "<": "<",
    "<=": "<=",
    ">": ">",
    ">=": ">=",
    "+": "+",
    "-": "-",
    "*": "*",
    "/": "div",
    "//": "div",
    "%": "mod",
    "&": "bvand",
    "|": "bvor",
    "^": "xor",
    "<<": "shl",
    ">>": "lshr",
}


def prune_to_child(ast: ParentAst) -> tuple[ChildProgram, PruneReport]:
    """Prune a surface AST to the maximal module-language subtree."""
    pruner = _Pruner(ast)
    # renumber so node ids are unique within the pruned program
    # (augmented-assignment desugaring duplicates surface ids)
    program = assign_node_ids(pruner.run())
    return program, pruner.report


# ---------------------------------------------------------------------------
# Surface printer (inverse of parse + prune; used for prompts and reports)
# ---------------------------------------------------------------------------

_EXPR_BINOP_SURFACE = {
    "and": "and", "or": "or", "xor": "^",
    "==": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">=",
    "+": "+", "-": "-", "*": "*", "div": "//", "mod": "%",
    "bvand": "&", "bvor": "|", "shl": "<<", "lshr": ">>",
}


def print_expr(e: Expr) -> str:
    if isinstance(e, BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, RealLit):
        return repr(e.value)
    if isinstance(e, BVLit):
        return f"BV({e.value}, {e.width})"
    if isinstance(e, EnumLit):
        return f'"{e.tag}"'
    if isinstance(e, VarRef):
        return f"self.{e.name}"
    if isinstance(e, Unary):
        op = "not" if e.op == "not" else "-"
        return f"({op} {print_expr(e.operand)})"
    if isinstance(e, Binary):
        surf = _EXPR_BINOP_SURFACE.get(e.op)
        if surf is None:
            raise ValueError(f"operator {e.op!r} has no surface form")
        return f"({print_expr(e.left)} {surf} {print_expr(e.right)})"
    if isinstance(e, Ite):
        return f"({print_expr(e.then)} if {print_expr(e.cond)} else {print_expr(e.other)})"
    if isinstance(e, ArraySelect):
        return f"{print_expr(e.array)}[{print_expr(e.index)}]"
    if isinstance(e, HoleExpr):
        return "??"
    raise TypeError(f"unknown expression {e!r}")


def _print_stmt(s: Stmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    if isinstance(s, Assign):
        out.append(f"{pad}{print_expr(s.lhs)} = {print_expr(s.rhs)}")
    elif isinstance(s, If):
        out.append(f"{pad}if {print_expr(s.cond)}:")
        _print_body(s.then, indent + 1, out)
        for cond, body in s.elifs:
            out.append(f"{pad}elif {print_expr(cond)}:")
            _print_body(body, indent + 1, out)
        if s.orelse:
            out.append(f"{pad}else:")
            _print_body(s.orelse, indent + 1, out)
    elif isinstance(s, Havoc):
        out.append(f"{pad}havoc(self.{s.name})")
    elif isinstance(s, Assume):
        out.append(f"{pad}assume({print_expr(s.cond)})")
    elif isinstance(s, Assert):
        out.append(f"{pad}assert {print_expr(s.cond)}")
    elif isinstance(s, HoleStmt):
        out.append(f"{pad}??")
    else:
        raise TypeError(f"unknown statement {s!r}")


def _print_body(body: tuple[Stmt, ...], indent: int, out: list[str]) -> None:
    if not body:
        out.append("    " * indent + "pass")
    for s in body:
        _print_stmt(s, indent, out)


def _print_decl(d, out: list[str]) -> None:
    pad = "        "
    if isinstance(d, HoleDecl):
        out.append(f"{pad}??")
        return
    if isinstance(d.annot, TypeAnnot):
        rhs = format_type(d.annot.ty)
    elif isinstance(d.annot, HoleType):
        rhs = "??"
    else:
        rhs = print_expr(d.annot.expr)
    out.append(f"{pad}self.{d.name} = {rhs}")


def print_child(p: ChildProgram) -> str:
    """Deterministic surface rendering of a module-language program.

    parse_tolerant + prune_to_child on this text reproduces the program
    (holes get fresh ids); empty sections are omitted.
    """
    if p.module_hole is not None:
        return "??\n"
    out: list[str] = [f"class {p.module_name}(Module):"]
    sections = (
        ("types", p.type_defs),
        ("locals", p.locals),
        ("inputs", p.inputs),
        ("outputs", p.outputs),
    )
    emitted = False
    for name, decls in sections:
        if not decls:
            continue
        out.append(f"    def {name}(self):")
        for d in decls:
            _print_decl(d, out)
        emitted = True
    for name, body in (("init", p.init_body), ("next", p.next_body)):
        if not body:
            continue
        out.append(f"    def {name}(self):")
        _print_body(body, 2, out)
        emitted = True
    if p.invariants_spec:
        out.append("    def specification(self):")
        for _, e in p.invariants_spec:
            out.append(f"        return {print_expr(e)}")
        emitted = True
    if not emitted:
        out.append("    pass")
    return "\n".join(out) + "\n"
