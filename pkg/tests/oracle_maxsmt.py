"""Brute-force oracle for the weighted partial MAX-SMT solver.

The oracle enumerates total ground assignments over a fixed finite
universe of type terms and reports the cheapest falsification pattern
directly, without unification, cores, or branch and bound. The random
clause generator below only emits constraint shapes for which the finite
universe is as expressive as the unbounded term algebra, so the oracle
optimum equals the true optimum:

* every constructor class that can be forced apart by disequalities has
  at least as many universe members as there can be mutually-disequal
  variables (at most ``MAX_TVARS`` variables, and at most two negative
  equality literals per clause set);
* negative equalities never mention enum or array ground terms, and
  arrays are not generated at all, so no constraint can demand a term
  outside the universe;
* at most two negative tag-membership literals appear per clause set,
  and the universe carries every nonempty subset of the tag alphabet,
  so excluded tags always leave a universe witness.
"""

from __future__ import annotations

import itertools
import random
from typing import Optional

from uclgen.ast_core import BOOL, INT, REAL, BVType, EnumType, TypeTerm
from uclgen.constraints import ClauseSet, Eq, HasTag, Lit, Tester, eval_clause

TAGS = ("A", "B", "C")

UNIVERSE: tuple[TypeTerm, ...] = (
    BOOL,
    INT,
    REAL,
    BVType(2),
    BVType(3),
    BVType(4),
    EnumType(("A",)),
    EnumType(("B",)),
    EnumType(("C",)),
    EnumType(("A", "B")),
    EnumType(("A", "C")),
    EnumType(("B", "C")),
    EnumType(("A", "B", "C")),
)

MAX_TVARS = 3

#: generated tester constructors (arrays are excluded, see module doc)
_CTORS = ("bool", "int", "real", "bv", "enum")


def random_clause_set(rng: random.Random, max_soft: int = 14) -> ClauseSet:
    """A random clause set within the oracle-safe fragment."""
    cs = ClauseSet()
    n_tvars = rng.randint(1, MAX_TVARS)
    tvars = [cs.tvar(("var", f"v{i}")) for i in range(n_tvars)]
    budget = {"neg_tvar_eq": 2, "neg_ground_eq": 2, "neg_tag": 2}

    def literal() -> Optional[Lit]:
        kind = rng.choice(("eq_ground", "eq_tvar", "tester", "tag"))
        negative = rng.random() < 0.3
        if kind == "eq_ground":
            ground = rng.choice(UNIVERSE)
            if negative:
                if budget["neg_ground_eq"] == 0 or isinstance(ground, EnumType):
                    negative = False
                else:
                    budget["neg_ground_eq"] -= 1
            return Lit(Eq(rng.choice(tvars), ground), not negative)
        if kind == "eq_tvar":
            if n_tvars < 2:
                return None
            a, b = rng.sample(tvars, 2)
            if negative:
                if budget["neg_tvar_eq"] == 0:
                    negative = False
                else:
                    budget["neg_tvar_eq"] -= 1
            return Lit(Eq(a, b), not negative)
        if kind == "tester":
            return Lit(Tester(rng.choice(_CTORS), rng.choice(tvars)),
                       not negative)
        if negative:
            if budget["neg_tag"] == 0:
                negative = False
            else:
                budget["neg_tag"] -= 1
        return Lit(HasTag(rng.choice(TAGS), rng.choice(tvars)), not negative)

    def lits() -> list[Lit]:
        got = []
        for _ in range(rng.randint(1, 3)):
            lit = literal()
            if lit is not None:
                got.append(lit)
        return got or [Lit(Eq(tvars[0], INT))]

    for _ in range(rng.randint(0, 2)):
        cs.add_hard(lits(), "rnd:hard")
    for i in range(rng.randint(1, max_soft)):
        cs.add_soft(lits(), rng.randint(1, 8), origin=i, label="rnd:soft")
    return cs


def oracle_optimum(cs: ClauseSet) -> Optional[tuple[int, tuple[int, ...]]]:
    """(cost, lexicographically smallest falsified index tuple) over every
    universe assignment, or None when no assignment satisfies the hard
    clauses."""
    tids = sorted(tv.tid for tv in cs.tvar_table.values())
    hard = cs.hard
    soft = cs.soft
    best: Optional[tuple[int, tuple[int, ...]]] = None
    for combo in itertools.product(UNIVERSE, repeat=len(tids)):
        assignment = dict(zip(tids, combo))
        if not all(eval_clause(c, assignment) for c in hard):
            continue
        falsified = tuple(
            c.index for c in soft if not eval_clause(c, assignment)
        )
        cost = sum(c.weight for c in soft if c.index in set(falsified))
        cand = (cost, falsified)
        if best is None or cand < best:
            best = cand
    return best
