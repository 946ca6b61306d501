"""Abstract syntax and well-formedness of fuzzy ALC(D) knowledge bases.

Degrees are exact rationals in [0,1]; decimal input is converted exactly at
the parsing boundary, so values like 3/5 survive the whole pipeline without
rounding.  A knowledge base is immutable once built and may be shared freely
across concurrent queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

from .membership import MembershipFn, PiecewiseLinearFn

Degree = Fraction


def as_degree(value) -> Degree:
    d = Fraction(value)
    if not (0 <= d <= 1):
        raise ValueError(f"degree {d} outside [0,1]")
    return d


class KnowledgeBaseError(ValueError):
    """Raised by build_kb; carries every diagnostic found."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# concepts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "top"


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Atomic:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PredicateRef:
    """A fuzzy predicate or its pointwise negation."""

    name: str
    negated: bool = False

    def negate(self) -> "PredicateRef":
        return PredicateRef(self.name, not self.negated)

    def __str__(self) -> str:
        return f"not {self.name}" if self.negated else self.name


@dataclass(frozen=True)
class PredicateAtom:
    """A predicate used directly as a concept: the individual's own numeric
    value (a crisp, implicit feature) is tested against the predicate."""

    ref: PredicateRef

    def __str__(self) -> str:
        return str(self.ref)


@dataclass(frozen=True)
class And:
    left: "Concept"
    right: "Concept"

    def __str__(self) -> str:
        return f"({self.left} and {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Concept"
    right: "Concept"

    def __str__(self) -> str:
        return f"({self.left} or {self.right})"


@dataclass(frozen=True)
class Not:
    body: "Concept"

    def __str__(self) -> str:
        return f"not {self.body}"


@dataclass(frozen=True)
class Exists:
    """Existential restriction over an abstract role (Concept filler) or a
    concrete role (PredicateRef filler)."""

    role: str
    filler: Union["Concept", PredicateRef]

    def __str__(self) -> str:
        return f"some {self.role}.{self.filler}"


@dataclass(frozen=True)
class Forall:
    role: str
    filler: Union["Concept", PredicateRef]

    def __str__(self) -> str:
        return f"all {self.role}.{self.filler}"


@dataclass(frozen=True)
class Modified:
    modifier: str
    body: "Concept"

    def __str__(self) -> str:
        return f"{self.modifier}({self.body})"


Concept = Union[Top, Bottom, Atomic, PredicateAtom, And, Or, Not, Exists, Forall, Modified]

TOP = Top()
BOTTOM = Bottom()


def concept_names(c: Concept) -> set[str]:
    if isinstance(c, Atomic):
        return {c.name}
    if isinstance(c, (And, Or)):
        return concept_names(c.left) | concept_names(c.right)
    if isinstance(c, Not):
        return concept_names(c.body)
    if isinstance(c, Modified):
        return concept_names(c.body)
    if isinstance(c, (Exists, Forall)) and not isinstance(c.filler, PredicateRef):
        return concept_names(c.filler)
    return set()


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TBoxAxiom:
    lhs: str
    rhs: Concept
    is_definition: bool  # False: inclusion lhs <: rhs


@dataclass(frozen=True)
class ConceptAssertion:
    individual: str
    concept: Concept

    def __str__(self) -> str:
        return f"{self.individual} : {self.concept}"


@dataclass(frozen=True)
class RoleAssertion:
    subject: str
    obj: str
    role: str

    def __str__(self) -> str:
        return f"({self.subject},{self.obj}) : {self.role}"


@dataclass(frozen=True)
class FuzzyAssertion:
    """`assertion >= bound`; bound None marks an unweighted assertion, which
    only the alternate best-degree-bound modes accept."""

    assertion: Union[ConceptAssertion, RoleAssertion]
    bound: Optional[Degree]

    def __post_init__(self) -> None:
        if self.bound is not None and not (0 <= self.bound <= 1):
            raise ValueError(f"assertion bound {self.bound} outside [0,1]")


@dataclass(frozen=True)
class IndividualEquality:
    a: str
    b: str
    equal: bool  # False: asserted distinct


@dataclass(frozen=True)
class RoleDecl:
    name: str
    concrete: bool
    is_feature: bool
    domain: Optional[tuple[Fraction, Fraction]] = None  # concrete roles only


@dataclass(frozen=True)
class KnowledgeBase:
    tbox: tuple[TBoxAxiom, ...]
    abox: tuple[FuzzyAssertion, ...]
    equalities: tuple[IndividualEquality, ...]
    roles: Mapping[str, RoleDecl]
    predicates: Mapping[str, MembershipFn]
    modifiers: Mapping[str, PiecewiseLinearFn]
    concept_decls: frozenset[str]
    warnings: tuple[str, ...] = ()

    def individuals(self) -> list[str]:
        seen: dict[str, None] = {}
        for fa in self.abox:
            a = fa.assertion
            if isinstance(a, ConceptAssertion):
                seen.setdefault(a.individual)
            else:
                seen.setdefault(a.subject)
                seen.setdefault(a.obj)
        for eq in self.equalities:
            seen.setdefault(eq.a)
            seen.setdefault(eq.b)
        return list(seen)

    def defined_names(self) -> set[str]:
        return {ax.lhs for ax in self.tbox}


def check_acyclic(tbox: list[TBoxAxiom] | tuple[TBoxAxiom, ...]) -> bool:
    """True iff the lhs -> rhs-names dependency digraph has no cycle."""
    graph = {ax.lhs: concept_names(ax.rhs) for ax in tbox}
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {name: WHITE for name in graph}

    def visit(node: str) -> bool:
        colour[node] = GREY
        for nxt in graph.get(node, ()):
            state = colour.get(nxt, BLACK)
            if state == GREY:
                return False
            if state == WHITE and not visit(nxt):
                return False
        colour[node] = BLACK
        return True

    return all(visit(n) for n in graph if colour[n] == WHITE)


def _walk_concepts(c: Concept):
    yield c
    if isinstance(c, (And, Or)):
        yield from _walk_concepts(c.left)
        yield from _walk_concepts(c.right)
    elif isinstance(c, Not):
        yield from _walk_concepts(c.body)
    elif isinstance(c, Modified):
        yield from _walk_concepts(c.body)
    elif isinstance(c, (Exists, Forall)) and not isinstance(c.filler, PredicateRef):
        yield from _walk_concepts(c.filler)


def build_kb(
    tbox,
    abox,
    equalities=(),
    roles: Mapping[str, RoleDecl] | None = None,
    predicates: Mapping[str, MembershipFn] | None = None,
    modifiers: Mapping[str, PiecewiseLinearFn] | None = None,
    concept_decls=(),
) -> KnowledgeBase:
    """Validate and freeze a knowledge base; raises KnowledgeBaseError listing
    every diagnostic when anything is malformed."""
    roles = dict(roles or {})
    predicates = dict(predicates or {})
    modifiers = dict(modifiers or {})
    diagnostics: list[str] = []
    warnings: list[str] = []

    name_spaces = {
        "concept": set(concept_decls) | {ax.lhs for ax in tbox},
        "role": set(roles),
        "predicate": set(predicates),
        "modifier": set(modifiers),
    }
    for kind_a, names_a in name_spaces.items():
        for kind_b, names_b in name_spaces.items():
            if kind_a < kind_b:
                for clash in sorted(names_a & names_b):
                    diagnostics.append(
                        f"name {clash!r} declared both as {kind_a} and {kind_b}"
                    )

    seen_lhs: set[str] = set()
    for ax in tbox:
        if ax.lhs in seen_lhs:
            diagnostics.append(f"duplicate definition: {ax.lhs!r} has two axioms")
        seen_lhs.add(ax.lhs)

    if not check_acyclic(list(tbox)):
        diagnostics.append("cyclic definitions in the TBox")

    for name, fn in modifiers.items():
        if fn.domain != (Fraction(0), Fraction(1)):
            diagnostics.append(f"modifier {name!r} domain must be exactly [0,1]")

    declared_concepts = name_spaces["concept"]

    def check_concept(c: Concept, where: str) -> None:
        for sub in _walk_concepts(c):
            if isinstance(sub, Atomic):
                if sub.name not in declared_concepts:
                    diagnostics.append(f"{where}: undeclared concept {sub.name!r}")
            elif isinstance(sub, PredicateAtom):
                if sub.ref.name not in predicates:
                    diagnostics.append(f"{where}: undeclared predicate {sub.ref.name!r}")
            elif isinstance(sub, Modified):
                if sub.modifier not in modifiers:
                    diagnostics.append(f"{where}: undeclared modifier {sub.modifier!r}")
            elif isinstance(sub, (Exists, Forall)):
                decl = roles.get(sub.role)
                if decl is None:
                    diagnostics.append(f"{where}: undeclared role {sub.role!r}")
                    continue
                if isinstance(sub.filler, PredicateRef):
                    if not decl.concrete:
                        diagnostics.append(
                            f"{where}: role {sub.role!r} is abstract but has a predicate filler"
                        )
                    if sub.filler.name not in predicates:
                        diagnostics.append(
                            f"{where}: undeclared predicate {sub.filler.name!r}"
                        )
                elif decl.concrete:
                    diagnostics.append(
                        f"{where}: concrete role {sub.role!r} needs a predicate filler"
                    )

    for ax in tbox:
        check_concept(ax.rhs, f"definition of {ax.lhs}")

    defined = {ax.lhs for ax in tbox}
    for fa in abox:
        a = fa.assertion
        if isinstance(a, ConceptAssertion):
            check_concept(a.concept, f"assertion about {a.individual}")
            overlap = concept_names(a.concept) & defined
            for name in sorted(overlap):
                warnings.append(
                    f"assertion about {a.individual} uses defined concept {name!r}; "
                    "it is unfolded before reasoning"
                )
        else:
            decl = roles.get(a.role)
            if decl is None:
                diagnostics.append(f"role assertion uses undeclared role {a.role!r}")
            elif decl.concrete:
                diagnostics.append(
                    f"role assertion ({a.subject},{a.obj}) uses concrete role {a.role!r}; "
                    "only abstract roles may be asserted"
                )

    if diagnostics:
        raise KnowledgeBaseError(diagnostics)

    return KnowledgeBase(
        tbox=tuple(tbox),
        abox=tuple(abox),
        equalities=tuple(equalities),
        roles=roles,
        predicates=predicates,
        modifiers=modifiers,
        concept_decls=frozenset(declared_concepts),
        warnings=tuple(warnings),
    )
