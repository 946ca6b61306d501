"""Brute-force model-enumeration oracle over tiny fuzzy interpretations.

Completely independent of the tableau + MIP pipeline: interpretations are
enumerated over a small domain with degrees restricted to a grid, concepts
are evaluated directly from the semantics of each constructor, and best
degree bounds come from minimising over all enumerated models.  Used to
cross-check satisfiability, entailment and glb answers at desk scale.

Defined concept names are evaluated structurally from their definition, so
only primitive names, role entries and feature successors are enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from fuzzalc.kb import (
    And,
    Atomic,
    Bottom,
    ConceptAssertion,
    Exists,
    Forall,
    Modified,
    Not,
    Or,
    PredicateAtom,
    PredicateRef,
    Top,
)
from fuzzalc.tableau import Semantics

F = Fraction
QUARTERS = (F(0), F(1, 4), F(1, 2), F(3, 4), F(1))


class SpaceTooLarge(Exception):
    pass


def t_norm(sem, a, b):
    if sem is Semantics.ZADEH:
        return min(a, b)
    return max(F(0), a + b - 1)


def t_conorm(sem, a, b):
    if sem is Semantics.ZADEH:
        return max(a, b)
    return min(F(1), a + b)


def implication(sem, a, b):
    # Kleene-Dienes for the Zadeh family, residuum for Lukasiewicz
    if sem is Semantics.ZADEH:
        return max(1 - a, b)
    return min(F(1), 1 - a + b)


@dataclass
class Interp:
    size: int
    ind_map: dict[str, int] = field(default_factory=dict)
    concept: dict[tuple[str, int], Fraction] = field(default_factory=dict)
    role: dict[tuple[str, int, int], Fraction] = field(default_factory=dict)
    feature: dict[tuple[str, int], tuple[int, Fraction]] = field(default_factory=dict)
    cfeature: dict[tuple[str, int], tuple[Fraction, Fraction]] = field(default_factory=dict)
    elem_value: dict[int, Fraction] = field(default_factory=dict)


class _Ctx:
    def __init__(self, kb):
        self.kb = kb
        self.defs = {ax.lhs: ax.rhs for ax in kb.tbox if ax.is_definition}


def eval_concept(c, elem, interp: Interp, sem, kb):
    return _eval(c, elem, interp, sem, _Ctx(kb))


def _eval(c, elem, interp: Interp, sem, ctx: _Ctx):
    if isinstance(c, Top):
        return F(1)
    if isinstance(c, Bottom):
        return F(0)
    if isinstance(c, Atomic):
        if c.name in ctx.defs:
            return _eval(ctx.defs[c.name], elem, interp, sem, ctx)
        return interp.concept.get((c.name, elem), F(0))
    if isinstance(c, PredicateAtom):
        return _pred_value(c.ref, interp.elem_value[elem], ctx.kb)
    if isinstance(c, And):
        return t_norm(
            sem,
            _eval(c.left, elem, interp, sem, ctx),
            _eval(c.right, elem, interp, sem, ctx),
        )
    if isinstance(c, Or):
        return t_conorm(
            sem,
            _eval(c.left, elem, interp, sem, ctx),
            _eval(c.right, elem, interp, sem, ctx),
        )
    if isinstance(c, Not):
        return 1 - _eval(c.body, elem, interp, sem, ctx)
    if isinstance(c, Modified):
        fn = ctx.kb.modifiers[c.modifier]
        return fn.evaluate(_eval(c.body, elem, interp, sem, ctx))
    if isinstance(c, (Exists, Forall)):
        decl = ctx.kb.roles[c.role]
        pairs = _successors(c.role, decl, elem, interp)
        if isinstance(c.filler, PredicateRef):
            values = [(deg, _pred_value(c.filler, obj, ctx.kb)) for obj, deg in pairs]
        else:
            values = [
                (deg, _eval(c.filler, obj, interp, sem, ctx)) for obj, deg in pairs
            ]
        if isinstance(c, Exists):
            out = F(0)  # absent pairs have degree 0, the neutral element
            for deg, val in values:
                out = max(out, t_norm(sem, deg, val))
            return out
        out = F(1)
        for deg, val in values:
            out = min(out, implication(sem, deg, val))
        return out
    raise TypeError(f"unknown concept {c!r}")


def _pred_value(ref: PredicateRef, value, kb):
    v = kb.predicates[ref.name].evaluate(value)
    return 1 - v if ref.negated else v


def _successors(role, decl, elem, interp):
    if decl.concrete:
        hit = interp.cfeature.get((role, elem))
        return [hit] if hit else []
    if decl.is_feature:
        hit = interp.feature.get((role, elem))
        return [hit] if hit else []
    return [(w, interp.role.get((role, elem, w), F(0))) for w in range(interp.size)]


def satisfies(kb, interp: Interp, sem) -> bool:
    ctx = _Ctx(kb)
    for ax in kb.tbox:
        if ax.is_definition:
            continue  # definitions hold structurally
        for u in range(interp.size):
            lv = _eval(Atomic(ax.lhs), u, interp, sem, ctx)
            rv = _eval(ax.rhs, u, interp, sem, ctx)
            if lv > rv:
                return False
    for fa in kb.abox:
        a = fa.assertion
        if isinstance(a, ConceptAssertion):
            val = _eval(a.concept, interp.ind_map[a.individual], interp, sem, ctx)
        else:
            decl = kb.roles[a.role]
            u, w = interp.ind_map[a.subject], interp.ind_map[a.obj]
            if decl.is_feature:
                hit = interp.feature.get((a.role, u))
                val = hit[1] if hit and hit[0] == w else F(0)
            else:
                val = interp.role.get((a.role, u, w), F(0))
        if val < fa.bound:
            return False
    for eq in kb.equalities:
        same = interp.ind_map[eq.a] == interp.ind_map[eq.b]
        if same != eq.equal:
            return False
    return True


def value_candidates(kb, degree_grid=QUARTERS) -> list[Fraction]:
    """Concrete values worth enumerating: every breakpoint plus every point
    where some linear piece crosses a grid degree (interval boundaries of any
    constraint profile over the predicates all lie in this set)."""
    if not kb.predicates:
        return [F(0)]
    lows = [fn.domain[0] for fn in kb.predicates.values()]
    highs = [fn.domain[1] for fn in kb.predicates.values()]
    lo, hi = min(lows), max(highs)
    points = {lo, hi}
    for fn in kb.predicates.values():
        points.update(fn.breakpoints())
        for piece in getattr(fn, "pieces", ()):
            if piece.slope != 0:
                for g in degree_grid:
                    x = (g - piece.intercept) / piece.slope
                    if piece.lo <= x <= piece.hi:
                        points.add(x)
    return sorted(p for p in points if lo <= p <= hi)


def _signature(kb, extra_concepts=()):
    """Primitive concept names, roles and predicate-atom usage reachable from
    the ABox, the TBox and the query concepts."""
    defs = {ax.lhs: ax.rhs for ax in kb.tbox if ax.is_definition}
    primitives: set[str] = set()
    roles: set[str] = set()
    preds_as_atoms = False
    seen_defs: set[str] = set()
    stack = [ax.rhs for ax in kb.tbox if not ax.is_definition]
    stack.extend(Atomic(ax.lhs) for ax in kb.tbox if not ax.is_definition)
    for fa in kb.abox:
        if isinstance(fa.assertion, ConceptAssertion):
            stack.append(fa.assertion.concept)
        else:
            roles.add(fa.assertion.role)
    stack.extend(extra_concepts)
    while stack:
        c = stack.pop()
        if isinstance(c, Atomic):
            if c.name in defs:
                if c.name not in seen_defs:
                    seen_defs.add(c.name)
                    stack.append(defs[c.name])
            else:
                primitives.add(c.name)
        elif isinstance(c, PredicateAtom):
            preds_as_atoms = True
        elif isinstance(c, (And, Or)):
            stack.extend((c.left, c.right))
        elif isinstance(c, (Not, Modified)):
            stack.append(c.body)
        elif isinstance(c, (Exists, Forall)):
            roles.add(c.role)
            if not isinstance(c.filler, PredicateRef):
                stack.append(c.filler)
    return sorted(primitives), sorted(roles), preds_as_atoms


@dataclass
class _Coordinate:
    kind: str
    key: tuple
    choices: list


def space_size(kb, size, degree_grid=QUARTERS, extra_concepts=()):
    coords = _coordinates(kb, size, degree_grid, extra_concepts)
    total = 1
    for c in coords:
        total *= len(c.choices)
    return total


def _coordinates(kb, size, degree_grid, extra_concepts):
    concepts, roles, preds_as_atoms = _signature(kb, extra_concepts)
    individuals = kb.individuals()
    values = value_candidates(kb, degree_grid)
    coords: list[_Coordinate] = []
    if individuals:
        coords.append(_Coordinate("ind", (individuals[0],), [0]))
        for name in individuals[1:]:
            coords.append(_Coordinate("ind", (name,), list(range(size))))
    for name in concepts:
        for u in range(size):
            coords.append(_Coordinate("concept", (name, u), list(degree_grid)))
    for role in roles:
        decl = kb.roles[role]
        if decl.concrete:
            pairs = [(v, d) for v in values for d in degree_grid]
            for u in range(size):
                coords.append(_Coordinate("cfeature", (role, u), pairs))
        elif decl.is_feature:
            pairs = [(w, d) for w in range(size) for d in degree_grid]
            for u in range(size):
                coords.append(_Coordinate("feature", (role, u), pairs))
        else:
            for u in range(size):
                for w in range(size):
                    coords.append(_Coordinate("role", (role, u, w), list(degree_grid)))
    if preds_as_atoms:
        for u in range(size):
            coords.append(_Coordinate("value", (u,), list(values)))
    return coords


def iter_models(kb, sem, size, degree_grid=QUARTERS, extra_concepts=(), budget=400_000):
    """Yield every model of the KB with the given domain size (grid degrees).

    The first named individual is pinned to element 0; everything else is
    permutation-symmetric, so no model class is lost.
    """
    coords = _coordinates(kb, size, degree_grid, extra_concepts)
    total = 1
    for c in coords:
        total *= len(c.choices)
        if total > budget:
            raise SpaceTooLarge(f"{total} interpretations exceed budget {budget}")
    for combo in itertools.product(*(c.choices for c in coords)):
        interp = Interp(size)
        for coord, choice in zip(coords, combo):
            if coord.kind == "ind":
                interp.ind_map[coord.key[0]] = choice
            elif coord.kind == "concept":
                interp.concept[coord.key] = choice
            elif coord.kind == "role":
                interp.role[coord.key] = choice
            elif coord.kind == "feature":
                interp.feature[coord.key] = choice
            elif coord.kind == "cfeature":
                interp.cfeature[coord.key] = choice
            else:
                interp.elem_value[coord.key[0]] = choice
        if satisfies(kb, interp, sem):
            yield interp


def oracle_satisfiable(kb, sem, sizes=(1, 2, 3), **kw) -> bool:
    for size in sizes:
        for _ in iter_models(kb, sem, size, **kw):
            return True
    return False


def oracle_glb_assertion(kb, individual, concept, sem, sizes=(1, 2, 3), **kw):
    """min over grid models of the asserted concept's degree; None when the
    KB has no grid model at all."""
    best = None
    ctx = _Ctx(kb)
    for size in sizes:
        for interp in iter_models(kb, sem, size, extra_concepts=[concept], **kw):
            val = _eval(concept, interp.ind_map[individual], interp, sem, ctx)
            if best is None or val < best:
                best = val
            if best == 0:
                return best
    return best


def oracle_glb_subsumption(kb, sub, sup, sem, sizes=(1, 2, 3), **kw):
    best = None
    ctx = _Ctx(kb)
    probe = [Atomic(sub), Atomic(sup)]
    for size in sizes:
        for interp in iter_models(kb, sem, size, extra_concepts=probe, **kw):
            deg = min(
                implication(
                    sem,
                    _eval(Atomic(sub), u, interp, sem, ctx),
                    _eval(Atomic(sup), u, interp, sem, ctx),
                )
                for u in range(interp.size)
            )
            if best is None or deg < best:
                best = deg
            if best == 0:
                return best
    return best
