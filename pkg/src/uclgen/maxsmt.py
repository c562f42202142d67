"""Weighted partial MAX-SMT over the type-term algebra.

The theory is unification over type terms extended with constructor
testers and enum-tag membership. The built-in solver is a branch and
bound search over which soft clauses to falsify; an external SMT-LIB
solver can be plugged in for the same job (`solve_external`), with the
built-in search as fallback.

Optimum selection: minimal total weight of falsified soft clauses;
ties go to the lexicographically smallest set of falsified clause
indices. The clause graph is split into connected components (clauses
sharing a type variable) and each component is optimized separately,
which preserves both the optimum and the tie-break.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .ast_core import (
    ArrayType,
    BOOL,
    BVType,
    BoolType,
    EnumType,
    INT,
    IntType,
    REAL,
    RealType,
    TVar,
    TypeTerm,
)
from .constraints import (
    Clause,
    ClauseSet,
    Eq,
    HasTag,
    Lit,
    Tester,
    clause_tvars,
    eval_clause,
)

_SINGLETONS = {"bool": BOOL, "int": INT, "real": REAL}
_CTOR_OF = {
    BoolType: "bool",
    IntType: "int",
    RealType: "real",
    BVType: "bv",
    EnumType: "enum",
    ArrayType: "arr",
}


class _Conflict(Exception):
    pass


class _Theory:
    """A conjunction of theory literals, decided by unification."""

    def __init__(self) -> None:
        self.parent: dict[int, int] = {}
        self.binding: dict[int, TypeTerm] = {}
        self.req: dict[int, str] = {}
        self.forbid: dict[int, set[str]] = {}
        self.req_tags: dict[int, set[str]] = {}
        self.forbid_tags: dict[int, set[str]] = {}
        self.diseqs: list[tuple[TypeTerm, TypeTerm]] = []

    # -- union-find ---------------------------------------------------------

    def find(self, tid: int) -> int:
        root = tid
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(tid, tid) != root:
            self.parent[tid], tid = root, self.parent[tid]
        return root

    def resolve(self, t: TypeTerm) -> TypeTerm:
        """Follow variable bindings one level (result is a root TVar,
        a scalar, or an array whose parts are unresolved)."""
        while isinstance(t, TVar):
            root = self.find(t.tid)
            bound = self.binding.get(root)
            if bound is None:
                return TVar(root)
            t = bound
        return t

    def resolve_deep(self, t: TypeTerm) -> TypeTerm:
        t = self.resolve(t)
        if isinstance(t, ArrayType):
            return ArrayType(self.resolve_deep(t.index), self.resolve_deep(t.elem))
        return t

    def _occurs(self, root: int, t: TypeTerm) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.tid == root
        if isinstance(t, ArrayType):
            return self._occurs(root, t.index) or self._occurs(root, t.elem)
        return False

    # -- assertion ----------------------------------------------------------

    def _check_record(self, root: int) -> None:
        req = self.req.get(root)
        if req is not None and req in self.forbid.get(root, ()):
            raise _Conflict
        tags = self.req_tags.get(root)
        if tags:
            if req is not None and req != "enum":
                raise _Conflict
            if tags & self.forbid_tags.get(root, set()):
                raise _Conflict

    def _merge_roots(self, a: int, b: int) -> None:
        self.parent[b] = a
        rb = self.req.pop(b, None)
        if rb is not None:
            ra = self.req.get(a)
            if ra is not None and ra != rb:
                raise _Conflict
            self.req[a] = rb
        for table in (self.forbid, self.forbid_tags, self.req_tags):
            got = table.pop(b, None)
            if got:
                table.setdefault(a, set()).update(got)
        self._check_record(a)

    def _apply_record_to_ground(self, root: int, t: TypeTerm) -> None:
        ctor = _CTOR_OF[type(t)]
        req = self.req.pop(root, None)
        if req is not None and req != ctor:
            raise _Conflict
        if ctor in self.forbid.pop(root, set()):
            raise _Conflict
        tags = self.req_tags.pop(root, set())
        bad = self.forbid_tags.pop(root, set())
        if tags or bad:
            if not isinstance(t, EnumType):
                if tags:
                    raise _Conflict
            else:
                if not tags <= set(t.tags):
                    raise _Conflict
                if bad & set(t.tags):
                    raise _Conflict

    def _bind(self, root: int, t: TypeTerm) -> None:
        if self._occurs(root, t):
            raise _Conflict
        resolved = self.resolve(t)
        if isinstance(resolved, TVar):
            self._merge_roots(resolved.tid, root)
            return
        self._apply_record_to_ground(root, resolved)
        self.binding[root] = resolved

    def unify(self, a: TypeTerm, b: TypeTerm) -> None:
        a = self.resolve(a)
        b = self.resolve(b)
        if a == b:
            return
        if isinstance(a, TVar) and isinstance(b, TVar):
            self._merge_roots(a.tid, b.tid)
            return
        if isinstance(a, TVar):
            self._bind(a.tid, b)
            return
        if isinstance(b, TVar):
            self._bind(b.tid, a)
            return
        if isinstance(a, ArrayType) and isinstance(b, ArrayType):
            self.unify(a.index, b.index)
            self.unify(a.elem, b.elem)
            return
        raise _Conflict

    def assert_tester(self, ctor: str, term: TypeTerm, positive: bool) -> None:
        t = self.resolve(term)
        if not isinstance(t, TVar):
            actual = _CTOR_OF[type(t)]
            if (actual == ctor) != positive:
                raise _Conflict
            return
        root = t.tid
        if positive:
            old = self.req.get(root)
            if old is not None and old != ctor:
                raise _Conflict
            self.req[root] = ctor
        else:
            self.forbid.setdefault(root, set()).add(ctor)
        self._check_record(root)
        if not positive and self.req.get(root) is None:
            if self.forbid[root] >= set(_CTOR_OF.values()):
                raise _Conflict

    def assert_has_tag(self, tag: str, term: TypeTerm, positive: bool) -> None:
        t = self.resolve(term)
        if not isinstance(t, TVar):
            holds = isinstance(t, EnumType) and tag in t.tags
            if holds != positive:
                raise _Conflict
            return
        root = t.tid
        if positive:
            old = self.req.get(root)
            if old is not None and old != "enum":
                raise _Conflict
            self.req[root] = "enum"
            self.req_tags.setdefault(root, set()).add(tag)
        else:
            self.forbid_tags.setdefault(root, set()).add(tag)
        self._check_record(root)

    def assert_lit(self, lit: Lit) -> None:
        a = lit.atom
        if isinstance(a, Eq):
            if lit.positive:
                self.unify(a.left, a.right)
            else:
                self.diseqs.append((a.left, a.right))
        elif isinstance(a, Tester):
            self.assert_tester(a.ctor, a.term, lit.positive)
        else:
            self.assert_has_tag(a.tag, a.term, lit.positive)

    # -- final consistency ---------------------------------------------------

    def determined(self, t: TypeTerm) -> Optional[TypeTerm]:
        """The unique value of a term if it has one, else None.

        Variables are determined when bound to a determined term or when
        required to be a singleton scalar constructor.
        """
        t = self.resolve(t)
        if isinstance(t, TVar):
            return _SINGLETONS.get(self.req.get(t.tid, ""))
        if isinstance(t, ArrayType):
            i = self.determined(t.index)
            e = self.determined(t.elem)
            return ArrayType(i, e) if i is not None and e is not None else None
        return t

    def check_diseqs(self) -> None:
        for a, b in self.diseqs:
            ra = self.resolve_deep(a)
            rb = self.resolve_deep(b)
            if ra == rb:
                raise _Conflict
            da = self.determined(a)
            db = self.determined(b)
            if da is not None and db is not None and da == db:
                raise _Conflict

    # -- models ---------------------------------------------------------------

    def forced(self, tids) -> dict[int, TypeTerm]:
        out: dict[int, TypeTerm] = {}
        for tid in tids:
            val = self.determined(TVar(tid))
            if val is not None:
                out[tid] = val
        return out

    def model(self, tids) -> dict[int, TypeTerm]:
        """A total ground assignment consistent with the asserted literals."""
        values: dict[int, TypeTerm] = {}
        fresh = [1000]

        def ground(t: TypeTerm) -> TypeTerm:
            t = self.resolve(t)
            if isinstance(t, TVar):
                return value_of(t.tid)
            if isinstance(t, ArrayType):
                return ArrayType(ground(t.index), ground(t.elem))
            return t

        def candidates(root: int):
            req = self.req.get(root)
            forbid = self.forbid.get(root, set())
            tags = sorted(self.req_tags.get(root, set()))
            bad_tags = self.forbid_tags.get(root, set())
            order = [req] if req else [
                c for c in ("int", "bool", "real", "bv", "enum", "arr")
                if c not in forbid
            ]
            for ctor in order:
                if ctor in _SINGLETONS:
                    yield _SINGLETONS[ctor]
                elif ctor == "bv":
                    for w in range(1, 64):
                        yield BVType(w)
                    while True:
                        fresh[0] += 1
                        yield BVType(fresh[0])
                elif ctor == "enum":
                    if tags:
                        yield EnumType(tuple(tags))
                    base = tuple(tags)
                    while True:
                        fresh[0] += 1
                        extra = f"TAG{fresh[0]}"
                        if extra not in bad_tags:
                            yield EnumType(base + (extra,))
                elif ctor == "arr":
                    yield ArrayType(INT, INT)
                    while True:
                        fresh[0] += 1
                        yield ArrayType(INT, BVType(fresh[0]))

        def violates(root: int, val: TypeTerm) -> bool:
            for a, b in self.diseqs:
                ra = self.resolve_deep(a)
                rb = self.resolve_deep(b)
                ga = _partial_ground(ra, values, root, val)
                gb = _partial_ground(rb, values, root, val)
                if ga is not None and gb is not None and ga == gb:
                    return True
            return False

        def value_of(tid: int) -> TypeTerm:
            root = self.find(tid)
            if root in values:
                return values[root]
            bound = self.binding.get(root)
            if bound is not None:
                val = ground(bound)
                values[root] = val
                return val
            for cand in candidates(root):
                if not violates(root, cand):
                    values[root] = cand
                    return cand
            raise _Conflict  # should be unreachable after check_diseqs

        return {tid: value_of(tid) for tid in sorted(tids)}


def _partial_ground(t, values, extra_root, extra_val):
    """Ground a resolved term using already-chosen values; None if a part
    is still unvalued."""
    if isinstance(t, TVar):
        if t.tid == extra_root:
            return extra_val
        return values.get(t.tid)
    if isinstance(t, ArrayType):
        i = _partial_ground(t.index, values, extra_root, extra_val)
        e = _partial_ground(t.elem, values, extra_root, extra_val)
        return ArrayType(i, e) if i is not None and e is not None else None
    return t


def _theory_of(lits: Sequence[Lit]) -> Optional[_Theory]:
    th = _Theory()
    try:
        for lit in lits:
            th.assert_lit(lit)
        th.check_diseqs()
    except _Conflict:
        return None
    return th


# ---------------------------------------------------------------------------
# Satisfiability of a clause set (DPLL over non-unit clauses)
# ---------------------------------------------------------------------------

@dataclass
class SatResult:
    sat: bool
    model: dict[int, TypeTerm] = field(default_factory=dict)
    forced: dict[int, TypeTerm] = field(default_factory=dict)
    core: tuple[int, ...] = ()


def _split(clauses: Sequence[Clause], negated) -> tuple[list[Lit], list[Clause]]:
    units: list[Lit] = []
    rest: list[Clause] = []
    for c in clauses:
        if c.index in negated:
            units.extend(l.negate() for l in c.lits)
        elif len(c.lits) == 1:
            units.append(c.lits[0])
        else:
            rest.append(c)
    return units, rest


def _dpll(units: list[Lit], rest: list[Clause]) -> Optional[_Theory]:
    th = _theory_of(units)
    if th is None:
        return None
    if not rest:
        return th
    clause = rest[0]
    for lit in clause.lits:
        got = _dpll(units + [lit], rest[1:])
        if got is not None:
            return got
    return None


def check_sat(clauses: Sequence[Clause], negated=frozenset()) -> SatResult:
    """Decide one conjunction: every listed clause holds, except those in
    `negated`, which are falsified (all their literals negated)."""
    tids = set()
    for c in clauses:
        tids |= clause_tvars(c)
    units, rest = _split(clauses, negated)
    th = _dpll(units, rest)
    if th is None:
        return SatResult(False, core=_shrink_core(clauses, negated))
    return SatResult(True, model=th.model(tids), forced=th.forced(tids))


def _is_sat(clauses: Sequence[Clause], negated=frozenset()) -> bool:
    units, rest = _split(clauses, negated)
    return _dpll(units, rest) is not None


def _shrink_core(clauses: Sequence[Clause], negated) -> tuple[int, ...]:
    """Deletion-based shrink to a small unsatisfiable subset."""
    core = list(clauses)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1 :]
        if not _is_sat(trial, negated):
            core = trial
        else:
            i += 1
    return tuple(c.index for c in core)


# ---------------------------------------------------------------------------
# MAX-SMT branch and bound
# ---------------------------------------------------------------------------

@dataclass
class MaxSmtResult:
    falsified: tuple[int, ...]
    cost: int
    model: dict[int, TypeTerm]
    forced: dict[int, TypeTerm]
    defaulted: frozenset[int] = frozenset()


class Untypeable(Exception):
    """The hard clauses alone are unsatisfiable."""

    def __init__(self, core: tuple[int, ...]):
        super().__init__(f"hard clauses are unsatisfiable; core: {core}")
        self.core = core


def _components(cs: ClauseSet) -> list[list[Clause]]:
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        parent[find(a)] = find(b)

    clause_vars = {c.index: sorted(clause_tvars(c)) for c in cs.clauses}
    for tvs in clause_vars.values():
        for t in tvs[1:]:
            union(tvs[0], t)
    groups: dict[int, list[Clause]] = {}
    for c in cs.clauses:
        tvs = clause_vars[c.index]
        key = find(tvs[0]) if tvs else -1
        groups.setdefault(key, []).append(c)
    return [groups[k] for k in sorted(groups)]


def _solve_component(clauses: list[Clause]) -> tuple[tuple[int, ...], int, _Theory]:
    """Core-guided hitting-set search.

    A falsified soft clause is simply dropped (not negated): the reported
    set is the cheapest set of soft clauses whose removal leaves the rest
    satisfiable, tie-broken by the lexicographically smallest sorted index
    tuple. Whenever the active clauses are unsatisfiable, a minimal
    unsatisfiable core is extracted and the search branches on dropping
    each soft clause in the core; every minimal relaxation set hits every
    core, so the search is complete.
    """
    softs = [c for c in clauses if not c.hard]
    hards = [c for c in clauses if c.hard]
    best: Optional[tuple[int, tuple[int, ...], _Theory]] = None
    seen: set[frozenset[int]] = set()

    def attempt(excluded: frozenset[int]) -> Optional[_Theory]:
        active = hards + [c for c in softs if c.index not in excluded]
        units, rest = _split(active, frozenset())
        return _dpll(units, rest)

    def soft_core(excluded: frozenset[int]) -> list[Clause]:
        """Deletion-shrink the active soft clauses to a minimal core
        (assumes the active set is unsatisfiable)."""
        core = [c for c in softs if c.index not in excluded]
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1:]
            if _is_sat(hards + trial):
                i += 1
            else:
                core = trial
        return core

    def search(excluded: frozenset[int], cost: int) -> None:
        nonlocal best
        if excluded in seen:
            return
        seen.add(excluded)
        if best is not None and cost > best[0]:
            return
        th = attempt(excluded)
        if th is not None:
            cand = (cost, tuple(sorted(excluded)))
            if best is None or cand < (best[0], best[1]):
                best = (cost, cand[1], th)
            return
        for c in soft_core(excluded):
            search(excluded | {c.index}, cost + c.weight)

    search(frozenset(), 0)
    if best is None:
        raise Untypeable(_shrink_core(hards, frozenset()))
    return best[1], best[0], best[2]


def solve_maxsmt(cs: ClauseSet) -> MaxSmtResult:
    """Optimal soft-clause falsification for the whole clause set."""
    hard = [c for c in cs.clauses if c.hard]
    if not _is_sat(hard):
        raise Untypeable(_shrink_core(hard, frozenset()))

    falsified: list[int] = []
    cost = 0
    model: dict[int, TypeTerm] = {}
    forced: dict[int, TypeTerm] = {}
    for comp in _components(cs):
        f, w, th = _solve_component(comp)
        falsified.extend(f)
        cost += w
        tids = set()
        for c in comp:
            tids |= clause_tvars(c)
        model.update(th.model(tids))
        forced.update(th.forced(tids))
    all_tids = {tv.tid for tv in cs.tvar_table.values()}
    defaulted = frozenset(all_tids - set(forced))
    for tid in all_tids - set(model):
        model[tid] = INT
    return MaxSmtResult(tuple(sorted(falsified)), cost, model, forced, defaulted)


# ---------------------------------------------------------------------------
# External solver via SMT-LIB
# ---------------------------------------------------------------------------

SMT_PRELUDE = """\
(set-option :produce-models true)
(declare-datatypes ((Ty 0)) ((
  (ty-bool)
  (ty-int)
  (ty-real)
  (ty-bv (bv-width Int))
  (ty-enum (enum-id Int))
  (ty-arr (arr-index Ty) (arr-elem Ty)))))
"""


class _SmtEmitter:
    def __init__(self, cs: ClauseSet):
        self.cs = cs
        self.enum_ids: dict[tuple[str, ...], int] = {}
        # register every enum type and every singleton tag set that
        # appears, so tag membership can be a finite disjunction
        for c in cs.clauses:
            for lit in c.lits:
                a = lit.atom
                terms = (a.left, a.right) if isinstance(a, Eq) else (a.term,)
                for t in terms:
                    self._register(t)
                if isinstance(a, HasTag):
                    self._enum_id((a.tag,))

    def _register(self, t: TypeTerm) -> None:
        if isinstance(t, EnumType):
            self._enum_id(t.tags)
        elif isinstance(t, ArrayType):
            self._register(t.index)
            self._register(t.elem)

    def _enum_id(self, tags: tuple[str, ...]) -> int:
        tags = tuple(sorted(tags))
        return self.enum_ids.setdefault(tags, len(self.enum_ids))

    def term(self, t: TypeTerm) -> str:
        if isinstance(t, TVar):
            return f"t{t.tid}"
        if isinstance(t, BoolType):
            return "ty-bool"
        if isinstance(t, IntType):
            return "ty-int"
        if isinstance(t, RealType):
            return "ty-real"
        if isinstance(t, BVType):
            return f"(ty-bv {t.width})"
        if isinstance(t, EnumType):
            return f"(ty-enum {self._enum_id(t.tags)})"
        if isinstance(t, ArrayType):
            return f"(ty-arr {self.term(t.index)} {self.term(t.elem)})"
        raise TypeError(f"cannot emit {t!r}")

    def atom(self, a) -> str:
        if isinstance(a, Eq):
            return f"(= {self.term(a.left)} {self.term(a.right)})"
        if isinstance(a, Tester):
            return f"((_ is ty-{a.ctor}) {self.term(a.term)})"
        # HasTag: membership in any known enum id whose tag set has the tag
        ids = sorted(
            i for tags, i in self.enum_ids.items() if a.tag in tags
        )
        t = self.term(a.term)
        alts = " ".join(f"(= (enum-id {t}) {i})" for i in ids)
        return f"(and ((_ is ty-enum) {t}) (or {alts}))"

    def lit(self, l: Lit) -> str:
        body = self.atom(l.atom)
        return body if l.positive else f"(not {body})"

    def clause(self, c: Clause) -> str:
        if len(c.lits) == 1:
            return self.lit(c.lits[0])
        return "(or " + " ".join(self.lit(l) for l in c.lits) + ")"


def emit_smtlib(cs: ClauseSet) -> str:
    """SMT-LIB 2 rendering of the clause set with assert-soft weights.

    Indicator b<i> implies soft clause i; the optimum's falsified set is
    exactly the indicators assigned false.
    """
    em = _SmtEmitter(cs)
    lines = [SMT_PRELUDE.rstrip()]
    for tv in sorted(cs.tvar_table.values(), key=lambda t: t.tid):
        lines.append(f"(declare-const t{tv.tid} Ty)")
    soft = []
    for c in cs.clauses:
        if c.hard:
            lines.append(f"(assert {em.clause(c)})")
        else:
            lines.append(f"(declare-const b{c.index} Bool)")
            lines.append(f"(assert (=> b{c.index} {em.clause(c)}))")
            lines.append(f"(assert-soft b{c.index} :weight {c.weight})")
            soft.append(c.index)
    lines.append("(check-sat)")
    if soft:
        names = " ".join(f"b{i}" for i in soft)
        lines.append(f"(get-value ({names}))")
    return "\n".join(lines) + "\n"


class ExternalSolverError(RuntimeError):
    pass


_VALUE_RE = re.compile(r"\(\s*b(\d+)\s+(true|false)\s*\)")


def parse_solver_output(text: str) -> tuple[int, ...]:
    """Falsified soft-clause indices from solver output."""
    head = text.strip().splitlines()
    if not head or head[0].strip() not in ("sat", "unsat", "unknown"):
        raise ExternalSolverError(f"unrecognized solver output: {text[:200]!r}")
    if head[0].strip() != "sat":
        raise ExternalSolverError(f"solver answered {head[0].strip()}")
    return tuple(
        sorted(int(m.group(1)) for m in _VALUE_RE.finditer(text)
               if m.group(2) == "false")
    )


def solve_external(
    cs: ClauseSet,
    command: Optional[str] = None,
    timeout: float = 30.0,
) -> MaxSmtResult:
    """Solve with an external MAX-SMT solver, falling back to the
    built-in search on any failure.

    The command (or the UCLGEN_SMT_SOLVER environment variable) is run
    with the SMT-LIB file as its last argument.
    """
    command = command or os.environ.get("UCLGEN_SMT_SOLVER")
    if not command:
        return solve_maxsmt(cs)
    try:
        with tempfile.NamedTemporaryFile(
            "w", suffix=".smt2", delete=False
        ) as f:
            f.write(emit_smtlib(cs))
            path = f.name
        proc = subprocess.run(
            shlex.split(command) + [path],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
        falsified = parse_solver_output(proc.stdout)
    except (OSError, subprocess.TimeoutExpired, ExternalSolverError):
        return solve_maxsmt(cs)
    # derive model and forcing information internally from the answer;
    # a falsified clause is relaxed (dropped), not negated
    dropped = set(falsified)
    res = check_sat([c for c in cs.clauses if c.index not in dropped])
    if not res.sat:
        return solve_maxsmt(cs)
    cost = sum(c.weight for c in cs.clauses if c.index in set(falsified))
    all_tids = {tv.tid for tv in cs.tvar_table.values()}
    model = dict(res.model)
    for tid in all_tids - set(model):
        model[tid] = INT
    return MaxSmtResult(
        tuple(sorted(falsified)), cost, model, res.forced,
        frozenset(all_tids - set(res.forced)),
    )


def verify_solution(cs: ClauseSet, result: MaxSmtResult) -> bool:
    """True iff the model satisfies every clause outside the falsified set
    (falsified clauses are relaxed, so the model owes them nothing)."""
    bad = set(result.falsified)
    return all(
        eval_clause(c, result.model)
        for c in cs.clauses
        if c.index not in bad
    )
