"""Knowledge-base preprocessing: TBox normalization, eager expansion, NNF.

Inclusions are rewritten to definitions with a fresh auxiliary name, every
defined name is substituted away to fixpoint (acyclicity makes this
terminate, possibly with exponential growth), and all concepts are driven
into negation normal form, where negation sits only in front of atomic
names, modifier applications, and predicate references.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .kb import (
    And,
    Atomic,
    Bottom,
    Concept,
    ConceptAssertion,
    Exists,
    Forall,
    FuzzyAssertion,
    IndividualEquality,
    KnowledgeBase,
    Modified,
    Not,
    Or,
    PredicateAtom,
    PredicateRef,
    RoleDecl,
    TBoxAxiom,
    Top,
    BOTTOM,
    TOP,
)
from .membership import MembershipFn, PiecewiseLinearFn


def normalize_tbox(tbox, taken_names=()) -> list[TBoxAxiom]:
    """Replace each inclusion A <: C with the definition A = C and A*, where
    A* is a fresh name standing for the unspecified rest of A."""
    taken = set(taken_names) | {ax.lhs for ax in tbox}
    out = []
    for ax in tbox:
        if ax.is_definition:
            out.append(ax)
            continue
        aux = f"{ax.lhs}~rest"
        n = 0
        while aux in taken:
            n += 1
            aux = f"{ax.lhs}~rest{n}"
        taken.add(aux)
        out.append(TBoxAxiom(ax.lhs, And(ax.rhs, Atomic(aux)), True))
    return out


def _substitute(c: Concept, defs: Mapping[str, Concept]) -> Concept:
    if isinstance(c, Atomic):
        return defs.get(c.name, c)
    if isinstance(c, And):
        return And(_substitute(c.left, defs), _substitute(c.right, defs))
    if isinstance(c, Or):
        return Or(_substitute(c.left, defs), _substitute(c.right, defs))
    if isinstance(c, Not):
        return Not(_substitute(c.body, defs))
    if isinstance(c, Modified):
        return Modified(c.modifier, _substitute(c.body, defs))
    if isinstance(c, (Exists, Forall)) and not isinstance(c.filler, PredicateRef):
        cls = type(c)
        return cls(c.role, _substitute(c.filler, defs))
    return c


def expand_definitions(tbox) -> dict[str, Concept]:
    """Fully unfolded defining concept for each defined name."""
    raw = {ax.lhs: ax.rhs for ax in tbox}
    expanded: dict[str, Concept] = {}

    def resolve(name: str) -> Concept:
        if name not in expanded:
            expanded[name] = _substitute(
                raw[name], _LazyDefs(resolve, raw)
            )
        return expanded[name]

    for name in raw:
        resolve(name)
    return expanded


class _LazyDefs:
    """Mapping view that expands definitions on demand (acyclic, so safe)."""

    def __init__(self, resolve, raw):
        self._resolve = resolve
        self._raw = raw

    def get(self, name, default=None):
        if name in self._raw:
            return self._resolve(name)
        return default


def nnf(c: Concept) -> Concept:
    """Negation normal form; equivalent under the connective-closure laws the
    calculus assumes (de Morgan duality and quantifier duality)."""
    if isinstance(c, Not):
        return _nnf_negated(c.body)
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, Modified):
        return Modified(c.modifier, nnf(c.body))
    if isinstance(c, (Exists, Forall)):
        if isinstance(c.filler, PredicateRef):
            return c
        return type(c)(c.role, nnf(c.filler))
    return c


def _nnf_negated(c: Concept) -> Concept:
    if isinstance(c, Top):
        return BOTTOM
    if isinstance(c, Bottom):
        return TOP
    if isinstance(c, Atomic):
        return Not(c)
    if isinstance(c, PredicateAtom):
        return PredicateAtom(c.ref.negate())
    if isinstance(c, Not):
        return nnf(c.body)
    if isinstance(c, And):
        return Or(_nnf_negated(c.left), _nnf_negated(c.right))
    if isinstance(c, Or):
        return And(_nnf_negated(c.left), _nnf_negated(c.right))
    if isinstance(c, Exists):
        if isinstance(c.filler, PredicateRef):
            return Forall(c.role, c.filler.negate())
        return Forall(c.role, _nnf_negated(c.filler))
    if isinstance(c, Forall):
        if isinstance(c.filler, PredicateRef):
            return Exists(c.role, c.filler.negate())
        return Exists(c.role, _nnf_negated(c.filler))
    if isinstance(c, Modified):
        # negation parks in front of the modifier; the body is still normalized
        return Not(Modified(c.modifier, nnf(c.body)))
    raise TypeError(f"unknown concept node {c!r}")


@dataclass(frozen=True)
class ExpandedKB:
    """Definition-free view of a knowledge base, every concept in NNF."""

    abox: tuple[FuzzyAssertion, ...]
    equalities: tuple[IndividualEquality, ...]
    roles: Mapping[str, RoleDecl]
    predicates: Mapping[str, MembershipFn]
    modifiers: Mapping[str, PiecewiseLinearFn]
    definitions: Mapping[str, Concept]  # fully expanded, for query rewriting

    def prepare(self, c: Concept) -> Concept:
        """Expand defined names inside a query concept and normalize it."""
        return nnf(_substitute(c, self.definitions))

    def prepare_negated(self, c: Concept) -> Concept:
        return nnf(Not(_substitute(c, self.definitions)))


def expand(kb: KnowledgeBase) -> ExpandedKB:
    """Normalize the TBox, unfold every definition inside the ABox, NNF all."""
    normalized = normalize_tbox(
        kb.tbox,
        taken_names=set(kb.concept_decls)
        | set(kb.roles)
        | set(kb.predicates)
        | set(kb.modifiers),
    )
    defs = expand_definitions(normalized)
    new_abox = []
    for fa in kb.abox:
        a = fa.assertion
        if isinstance(a, ConceptAssertion):
            concept = nnf(_substitute(a.concept, defs))
            new_abox.append(
                FuzzyAssertion(ConceptAssertion(a.individual, concept), fa.bound)
            )
        else:
            new_abox.append(fa)
    return ExpandedKB(
        abox=tuple(new_abox),
        equalities=kb.equalities,
        roles=kb.roles,
        predicates=kb.predicates,
        modifiers=kb.modifiers,
        definitions=defs,
    )
