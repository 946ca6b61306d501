"""Query orchestration: satisfiability, best degree bounds, entailment.

A `Reasoner` owns one expanded knowledge base and answers queries by
composing preprocessing, tableau saturation and the exact MIP solver.  Each
query builds its own constraint set, so distinct queries are independent and
may run concurrently over the shared immutable knowledge base.

Convention: when the knowledge base itself is unsatisfiable, every best
degree bound is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .kb import (
    And,
    Atomic,
    Concept,
    ConceptAssertion,
    KnowledgeBase,
    Not,
    RoleAssertion,
    _walk_concepts,
    as_degree,
    Exists,
    Forall,
    Modified,
    PredicateAtom,
    PredicateRef,
)
from .linexpr import LinearExpr, ONE
from .milp import MIPResult, SolverInternalError, Status, mip_feasible, mip_minimize
from .preprocess import ExpandedKB, expand, nnf
from .tableau import (
    BoundedAssertion,
    ConstraintSet,
    Semantics,
    init_constraint_set,
    load_abox,
    saturate,
)

Degree = Fraction


class QueryError(ValueError):
    """Unknown names, malformed query, or a weighted/unweighted ABox mismatch."""


@dataclass
class QueryStats:
    rule_applications: int = 0
    variables: int = 0
    constraints: int = 0
    solver_nodes: int = 0
    solver_pivots: int = 0


@dataclass
class SatAnswer:
    satisfiable: bool
    stats: QueryStats = field(default_factory=QueryStats)


@dataclass
class GlbAnswer:
    value: Degree
    stats: QueryStats = field(default_factory=QueryStats)

    @property
    def decimal(self) -> float:
        return float(self.value)


@dataclass
class EntailsAnswer:
    holds: bool
    glb: Degree
    threshold: Degree
    stats: QueryStats = field(default_factory=QueryStats)


def _stats_from(cs: ConstraintSet, mip: Optional[MIPResult] = None) -> QueryStats:
    return QueryStats(
        rule_applications=sum(cs.rule_counts.values()),
        variables=len(cs.pool),
        constraints=len(cs.constraints),
        solver_nodes=mip.nodes if mip else 0,
        solver_pivots=mip.pivots if mip else 0,
    )


class Reasoner:
    def __init__(self, kb: KnowledgeBase, semantics: Semantics = Semantics.ZADEH):
        self.kb = kb
        self.semantics = semantics
        self.ekb: ExpandedKB = expand(kb)
        self._sat: Optional[SatAnswer] = None
        self.last_completion: Optional[ConstraintSet] = None

    # -- validation ----------------------------------------------------------

    def _check_query_concept(self, c: Concept) -> None:
        for sub in _walk_concepts(c):
            if isinstance(sub, Atomic) and sub.name not in self.kb.concept_decls:
                raise QueryError(f"unknown concept {sub.name!r}")
            if isinstance(sub, Modified) and sub.modifier not in self.kb.modifiers:
                raise QueryError(f"unknown modifier {sub.modifier!r}")
            if isinstance(sub, PredicateAtom) and sub.ref.name not in self.kb.predicates:
                raise QueryError(f"unknown predicate {sub.ref.name!r}")
            if isinstance(sub, (Exists, Forall)):
                if sub.role not in self.kb.roles:
                    raise QueryError(f"unknown role {sub.role!r}")
                if isinstance(sub.filler, PredicateRef) and (
                    sub.filler.name not in self.kb.predicates
                ):
                    raise QueryError(f"unknown predicate {sub.filler.name!r}")

    def _require_weighted(self) -> None:
        if any(fa.bound is None for fa in self.kb.abox):
            raise QueryError(
                "the ABox contains unweighted assertions; "
                "use an alternate best-degree-bound mode"
            )

    # -- satisfiability -------------------------------------------------------

    def satisfiable(self) -> SatAnswer:
        """The knowledge base has a model iff its completion is clash-free and
        the accumulated linear constraints admit a solution."""
        if self._sat is None:
            self._require_weighted()
            cs = init_constraint_set(self.ekb, self.semantics)
            saturate(cs)
            self.last_completion = cs
            if cs.detect_clash() is not None:
                self._sat = SatAnswer(False, _stats_from(cs))
            else:
                feasible = mip_feasible(cs.to_problem())
                self._sat = SatAnswer(feasible, _stats_from(cs))
        return self._sat

    # -- best degree bounds ----------------------------------------------------

    def _minimize_query(
        self, cs: ConstraintSet, query_var: int
    ) -> tuple[Degree, QueryStats]:
        saturate(cs)
        self.last_completion = cs
        if cs.detect_clash() is not None:
            return Fraction(1), _stats_from(cs)
        result = mip_minimize(cs.to_problem(objective=query_var))
        if result.status is not Status.OPTIMAL:
            raise SolverInternalError(
                "query system infeasible although the knowledge base is satisfiable"
            )
        return result.value, _stats_from(cs, result)

    def glb_assertion(self, individual: str, concept: Concept) -> GlbAnswer:
        """Least degree the knowledge base forces on `individual : concept`."""
        self._check_query_concept(concept)
        if not self.satisfiable().satisfiable:
            return GlbAnswer(Fraction(1))
        cs = init_constraint_set(self.ekb, self.semantics)
        query_var = cs.pool.new_continuous("x[query]", 0, 1)
        cs.register_individual(individual)
        negated = self.ekb.prepare_negated(concept)
        cs.add_assertion(
            BoundedAssertion(
                ConceptAssertion(cs.rep(individual), negated),
                ONE - LinearExpr.var(query_var),
            )
        )
        value, stats = self._minimize_query(cs, query_var)
        return GlbAnswer(value, stats)

    def glb_subsumption(self, sub: str, sup: str) -> GlbAnswer:
        """Degree to which every instance of `sub` is an instance of `sup`.

        Only concept names are accepted; there is no calculus for graded
        inclusions between complex concepts.
        """
        for name in (sub, sup):
            if name not in self.kb.concept_decls:
                raise QueryError(
                    f"subsumption queries take declared concept names; unknown {name!r}"
                )
        if not self.satisfiable().satisfiable:
            return GlbAnswer(Fraction(1))
        cs = init_constraint_set(self.ekb, self.semantics)
        query_var = cs.pool.new_continuous("x[query]", 0, 1)
        witness = cs.fresh_individual(concrete=False)
        probe = self.ekb.prepare(And(Atomic(sub), Not(Atomic(sup))))
        cs.add_assertion(
            BoundedAssertion(
                ConceptAssertion(witness, probe), ONE - LinearExpr.var(query_var)
            )
        )
        value, stats = self._minimize_query(cs, query_var)
        return GlbAnswer(value, stats)

    def glb_role(self, subject: str, obj: str, role: str) -> GlbAnswer:
        """Role degrees are never derived: the best bound is the strongest
        asserted one (0 when none exists)."""
        if role not in self.kb.roles:
            raise QueryError(f"unknown role {role!r}")
        if not self.satisfiable().satisfiable:
            return GlbAnswer(Fraction(1))
        cs = self.last_completion
        rs, ro = cs.rep(subject), cs.rep(obj)
        best = Fraction(0)
        for fa in self.kb.abox:
            a = fa.assertion
            if (
                isinstance(a, RoleAssertion)
                and a.role == role
                and cs.rep(a.subject) == rs
                and cs.rep(a.obj) == ro
            ):
                best = max(best, fa.bound)
        return GlbAnswer(best)

    def entails(
        self,
        axiom: Union[ConceptAssertion, RoleAssertion, tuple[str, str]],
        degree,
    ) -> EntailsAnswer:
        """K entails the axiom at `degree` iff the best degree bound reaches it."""
        n = as_degree(degree)
        if isinstance(axiom, ConceptAssertion):
            answer = self.glb_assertion(axiom.individual, axiom.concept)
        elif isinstance(axiom, RoleAssertion):
            answer = self.glb_role(axiom.subject, axiom.obj, axiom.role)
        else:
            answer = self.glb_subsumption(*axiom)
        return EntailsAnswer(answer.value >= n, answer.value, n, answer.stats)

    # -- alternate best-degree-bound definitions -------------------------------

    def glb_alternate(self, individual: str, concept: Concept, mode: str) -> GlbAnswer:
        """Best degree bound for knowledge bases whose ABox carries no weights.

        mode "i": every assertion weighted 1.  mode "ii": every assertion
        weighted by the query variable itself, so the answer is the largest
        self-supporting degree.
        """
        if mode not in ("i", "ii"):
            raise QueryError(f"alternate mode must be 'i' or 'ii', not {mode!r}")
        if any(fa.bound is not None for fa in self.kb.abox):
            raise QueryError("alternate modes require an unweighted ABox")
        self._check_query_concept(concept)
        cs = ConstraintSet(self.ekb, self.semantics)
        query_var = cs.pool.new_continuous("x[query]", 0, 1)
        if mode == "i":
            weight = ONE
            # the weight-1 knowledge base must itself be satisfiable
            probe = ConstraintSet(self.ekb, self.semantics)
            load_abox(probe, unweighted_bound=ONE)
            saturate(probe)
            if probe.detect_clash() is not None or not mip_feasible(probe.to_problem()):
                return GlbAnswer(Fraction(1))
        else:
            weight = LinearExpr.var(query_var)
        load_abox(cs, unweighted_bound=weight)
        cs.register_individual(individual)
        negated = self.ekb.prepare_negated(concept)
        cs.add_assertion(
            BoundedAssertion(
                ConceptAssertion(cs.rep(individual), negated),
                ONE - LinearExpr.var(query_var),
            )
        )
        value, stats = self._minimize_query(cs, query_var)
        return GlbAnswer(value, stats)


# functional façade mirroring the operation names


def kb_satisfiable(kb: KnowledgeBase, semantics: Semantics = Semantics.ZADEH) -> bool:
    return Reasoner(kb, semantics).satisfiable().satisfiable


def glb_assertion(kb, individual, concept, semantics=Semantics.ZADEH) -> Degree:
    return Reasoner(kb, semantics).glb_assertion(individual, concept).value


def glb_subsumption(kb, sub, sup, semantics=Semantics.ZADEH) -> Degree:
    return Reasoner(kb, semantics).glb_subsumption(sub, sup).value


def glb_role(kb, subject, obj, role, semantics=Semantics.ZADEH) -> Degree:
    return Reasoner(kb, semantics).glb_role(subject, obj, role).value


def entails(kb, axiom, degree, semantics=Semantics.ZADEH) -> bool:
    return Reasoner(kb, semantics).entails(axiom, degree).holds


def glb_alternate(kb, individual, concept, mode, semantics=Semantics.ZADEH) -> Degree:
    return Reasoner(kb, semantics).glb_alternate(individual, concept, mode).value
