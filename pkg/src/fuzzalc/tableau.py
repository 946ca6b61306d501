"""Single-branch constraint-propagation calculus.

A constraint set holds fuzzy assertions bounded by linear expressions plus
plain linear constraints.  Saturation applies the completion rules to a
fixpoint, splicing membership-function graph encodings for predicates and
modifiers, so the end product of a query is exactly one mixed-integer
program.  Disjunctive choices become 0-1 control variables instead of
branches: there is never more than one constraint set alive.

Feature roles are functional; a second filler for the same (subject,
feature) pair is a fork and is merged into the older filler the moment it
appears.  Individual equalities are closed upfront and equal individuals
share variables.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .kb import (
    And,
    Atomic,
    Bottom,
    Concept,
    ConceptAssertion,
    Exists,
    Forall,
    Modified,
    Not,
    Or,
    PredicateAtom,
    PredicateRef,
    RoleAssertion,
    Top,
)
from .linexpr import LinearConstraint, LinearExpr, ONE, Rel, VariablePool, ZERO
from .membership import (
    CrispStepFn,
    encode_lower_graph,
    encode_upper_graph,
)
from .milp import MIPProblem
from .preprocess import ExpandedKB, nnf

_X1 = -1  # placeholder ids inside spliced graph encodings
_X2 = -2


class Semantics(enum.Enum):
    ZADEH = "zadeh"
    LUKASIEWICZ = "lukasiewicz"


@dataclass(frozen=True)
class PredicateAssertion:
    """A concrete individual's value lies under a (possibly negated) predicate."""

    individual: str
    ref: PredicateRef

    def __str__(self) -> str:
        return f"{self.individual} : {self.ref}"


AssertionKind = Union[ConceptAssertion, RoleAssertion, PredicateAssertion]


@dataclass(frozen=True)
class BoundedAssertion:
    assertion: AssertionKind
    bound: LinearExpr


@dataclass(frozen=True)
class Clash:
    kind: str  # "bottom" | "equality" | "fork"
    detail: str


class SaturationError(RuntimeError):
    pass


class ConstraintSet:
    def __init__(self, ekb: ExpandedKB, semantics: Semantics) -> None:
        self.ekb = ekb
        self.semantics = semantics
        self.pool = VariablePool()
        self.constraints: list[LinearConstraint] = []
        self.pending: deque[BoundedAssertion] = deque()
        self.seen: set[BoundedAssertion] = set()
        self.done: set[BoundedAssertion] = set()
        self.log: list[BoundedAssertion] = []
        self.atomic_vars: dict[tuple, int] = {}
        self.individual_seq: dict[str, int] = {}
        self.concrete_inds: set[str] = set()
        self.foralls: dict[tuple[str, str], list[BoundedAssertion]] = {}
        self.role_edges: dict[tuple[str, str], list[BoundedAssertion]] = {}
        self.feature_filler: dict[tuple[str, str], str] = {}
        self.applied_pairs: set[tuple[BoundedAssertion, BoundedAssertion]] = set()
        self.equal_rep: dict[str, str] = {}
        self.distinct: set[frozenset[str]] = set()
        self.equal_pairs: set[tuple[str, str]] = set()
        self.clash: Optional[Clash] = None
        self.rule_counts: dict[str, int] = {}
        self._fresh = itertools.count(1)
        if ekb.predicates:
            lows = [fn.domain[0] for fn in ekb.predicates.values()]
            highs = [fn.domain[1] for fn in ekb.predicates.values()]
            self.value_hull = (min(lows), max(highs))
        else:
            self.value_hull = (Fraction(0), Fraction(1))

    # -- individuals and variables ------------------------------------------

    def register_individual(self, name: str, concrete: bool = False) -> None:
        if name not in self.individual_seq:
            self.individual_seq[name] = len(self.individual_seq)
            if concrete:
                self.concrete_inds.add(name)

    def fresh_individual(self, concrete: bool) -> str:
        name = f"_{'c' if concrete else 'i'}{next(self._fresh)}"
        self.register_individual(name, concrete)
        return name

    def rep(self, ind: str) -> str:
        return self.equal_rep.get(ind, ind)

    def atomic_var(self, key: tuple, name: str, lo=0, hi=1) -> int:
        vid = self.atomic_vars.get(key)
        if vid is None:
            vid = self.pool.new_continuous(name, lo, hi)
            self.atomic_vars[key] = vid
        return vid

    def concept_var(self, ind: str, concept_name: str) -> int:
        return self.atomic_var(("concept", ind, concept_name), f"x[{ind}:{concept_name}]")

    def role_var(self, subj: str, obj: str, role: str) -> int:
        return self.atomic_var(("role", subj, obj, role), f"x[({subj},{obj}):{role}]")

    def value_var(self, ind: str, domain=None) -> int:
        lo, hi = domain if domain is not None else self.value_hull
        return self.atomic_var(("value", ind), f"val[{ind}]", lo, hi)

    def fresh_degree_var(self, tag: str = "x") -> int:
        return self.pool.new_continuous(f"{tag}{next(self._fresh)}", 0, 1)

    def fresh_control(self, tag: str = "y") -> int:
        return self.pool.new_binary(f"{tag}{next(self._fresh)}")

    def _count(self, rule: str) -> None:
        self.rule_counts[rule] = self.rule_counts.get(rule, 0) + 1

    # -- insertion -----------------------------------------------------------

    def add_constraint(self, con: LinearConstraint) -> None:
        self.constraints.append(con)

    def add_assertion(self, ba: BoundedAssertion) -> None:
        """Queue a bounded assertion; constant bounds <= 0 carry no
        information (degrees are nonnegative) and are dropped."""
        if ba.bound.is_constant and ba.bound.const <= 0:
            return
        if isinstance(ba.assertion, RoleAssertion):
            ba = self._fork_checked(ba)
            if ba is None:
                return
        if ba in self.seen:
            return
        self.seen.add(ba)
        self.pending.append(ba)

    # -- fork elimination ----------------------------------------------------

    def _fork_checked(self, ba: BoundedAssertion) -> Optional[BoundedAssertion]:
        a = ba.assertion
        decl = self.ekb.roles.get(a.role)
        if decl is None or not decl.is_feature:
            return ba
        key = (a.subject, a.role)
        existing = self.feature_filler.get(key)
        if existing is None or existing == a.obj:
            self.feature_filler[key] = a.obj
            return ba
        # two fillers for one feature: merge, newer individual into older
        old, new = a.obj, existing
        if self.individual_seq[old] < self.individual_seq[new]:
            old, new = new, old  # `old` is the newer one to be replaced
        if frozenset((self.rep(old), self.rep(new))) in self.distinct:
            self.clash = Clash(
                "fork",
                f"feature {a.role} forces {old} = {new}, asserted distinct",
            )
            return None
        self.rename_individual(old, new)
        renamed = _rename_ba(ba, {old: new})
        if renamed in self.seen:
            return None
        return renamed

    def eliminate_forks(self) -> None:
        """Scan for any remaining feature forks (insert-time handling makes
        this a no-op in normal operation)."""
        while self.clash is None:
            by_key: dict[tuple[str, str], set[str]] = {}
            for ba in list(self.seen):
                a = ba.assertion
                if isinstance(a, RoleAssertion):
                    decl = self.ekb.roles.get(a.role)
                    if decl is not None and decl.is_feature:
                        by_key.setdefault((a.subject, a.role), set()).add(a.obj)
            fork = next(
                (sorted(objs) for objs in by_key.values() if len(objs) > 1), None
            )
            if fork is None:
                return
            keep, drop = sorted(fork[:2], key=lambda i: self.individual_seq[i])
            if frozenset((self.rep(keep), self.rep(drop))) in self.distinct:
                self.clash = Clash("fork", f"{keep} = {drop} forced, asserted distinct")
                return
            self.rename_individual(drop, keep)

    def rename_individual(self, old: str, new: str) -> None:
        """Replace every occurrence of `old` by `new`, merging variables."""
        mapping = {old: new}
        var_sub: dict[int, int] = {}
        for key in [k for k in self.atomic_vars if old in k]:
            new_key = tuple(new if part == old else part for part in key)
            old_vid = self.atomic_vars.pop(key)
            if new_key in self.atomic_vars:
                var_sub[old_vid] = self.atomic_vars[new_key]
            else:
                self.atomic_vars[new_key] = old_vid
        for ov, nv in var_sub.items():
            self.pool.merge_alias(ov, nv)
        if var_sub:
            self.constraints = [c.rename(var_sub) for c in self.constraints]

        def fix(ba: BoundedAssertion) -> BoundedAssertion:
            out = _rename_ba(ba, mapping)
            if var_sub:
                out = BoundedAssertion(out.assertion, out.bound.rename(var_sub))
            return out

        self.pending = deque(fix(ba) for ba in self.pending)
        self.seen = {fix(ba) for ba in self.seen}
        self.done = {fix(ba) for ba in self.done}
        self.log = [fix(ba) for ba in self.log]
        self.foralls = {
            (new if s == old else s, r): [fix(ba) for ba in lst]
            for (s, r), lst in self.foralls.items()
        }
        merged_edges: dict[tuple[str, str], list[BoundedAssertion]] = {}
        for (s, r), lst in self.role_edges.items():
            k = (new if s == old else s, r)
            merged_edges.setdefault(k, []).extend(fix(ba) for ba in lst)
        self.role_edges = merged_edges
        self.feature_filler = {
            (new if s == old else s, r): (new if f == old else f)
            for (s, r), f in self.feature_filler.items()
        }
        self.applied_pairs = {(fix(a), fix(b)) for a, b in self.applied_pairs}
        self.concrete_inds = {new if i == old else i for i in self.concrete_inds}
        self.individual_seq.pop(old, None)

    # -- clash ---------------------------------------------------------------

    def detect_clash(self) -> Optional[Clash]:
        if self.clash is not None:
            return self.clash
        for ba in self.seen:
            a = ba.assertion
            if (
                isinstance(a, ConceptAssertion)
                and isinstance(a.concept, Bottom)
                and ba.bound.is_constant
                and ba.bound.const > 0
            ):
                return Clash("bottom", f"{a.individual} : bot >= {ba.bound.const}")
        for pair in self.distinct:
            if len(pair) == 1:
                (ind,) = pair
                return Clash("equality", f"{ind} equal and distinct")
            a, b = sorted(pair)
            if self.rep(a) == self.rep(b):
                return Clash("equality", f"{a} = {b} both asserted and denied")
        return None

    # -- problem view ---------------------------------------------------------

    def to_problem(self, objective: Optional[int] = None) -> MIPProblem:
        return MIPProblem(self.pool, list(self.constraints), objective)


def _rename_ba(ba: BoundedAssertion, mapping: dict[str, str]) -> BoundedAssertion:
    a = ba.assertion
    if isinstance(a, ConceptAssertion):
        if a.individual in mapping:
            a = ConceptAssertion(mapping[a.individual], a.concept)
    elif isinstance(a, RoleAssertion):
        if a.subject in mapping or a.obj in mapping:
            a = RoleAssertion(
                mapping.get(a.subject, a.subject), mapping.get(a.obj, a.obj), a.role
            )
    elif isinstance(a, PredicateAssertion):
        if a.individual in mapping:
            a = PredicateAssertion(mapping[a.individual], a.ref)
    return BoundedAssertion(a, ba.bound)


# ---------------------------------------------------------------------------
# initialisation
# ---------------------------------------------------------------------------


def init_constraint_set(ekb: ExpandedKB, semantics: Semantics) -> ConstraintSet:
    """S0: the ABox as bounded assertions with closed (in)equalities and the
    original forks already removed."""
    cs = ConstraintSet(ekb, semantics)
    load_abox(cs)
    return cs


def load_abox(cs: ConstraintSet, unweighted_bound: Optional[LinearExpr] = None) -> None:
    """Register individuals, close the equalities, insert the fuzzy assertions.

    `unweighted_bound` supplies the bound for weightless assertions (the
    alternate best-degree-bound modes weight them with 1 or with the query
    variable itself).
    """
    ekb = cs.ekb
    order: list[str] = []
    for fa in ekb.abox:
        a = fa.assertion
        names = [a.individual] if isinstance(a, ConceptAssertion) else [a.subject, a.obj]
        order.extend(names)
    for eq in ekb.equalities:
        order.extend((eq.a, eq.b))
    for name in order:
        cs.register_individual(name)

    # union-find closure of the equalities; representatives are the oldest
    parent: dict[str, str] = {name: name for name in cs.individual_seq}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for eq in ekb.equalities:
        if eq.equal:
            ra, rb = find(eq.a), find(eq.b)
            if ra != rb:
                older, newer = sorted((ra, rb), key=lambda i: cs.individual_seq[i])
                parent[newer] = older
            cs.equal_pairs.add((eq.a, eq.b))
    for name in parent:
        root = find(name)
        if root != name:
            cs.equal_rep[name] = root
    for eq in ekb.equalities:
        if not eq.equal:
            cs.distinct.add(frozenset((cs.rep(eq.a), cs.rep(eq.b))))

    for fa in ekb.abox:
        if fa.bound is None:
            if unweighted_bound is None:
                raise ValueError(
                    "unweighted assertion reached the tableau; "
                    "use an alternate best-degree-bound mode"
                )
            bound = unweighted_bound
        else:
            bound = LinearExpr.constant(fa.bound)
        a = fa.assertion
        if isinstance(a, ConceptAssertion):
            ba = BoundedAssertion(ConceptAssertion(cs.rep(a.individual), a.concept), bound)
        else:
            ba = BoundedAssertion(
                RoleAssertion(cs.rep(a.subject), cs.rep(a.obj), a.role), bound
            )
        cs.add_assertion(ba)


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


def _clamped(cs: ConstraintSet, expr: LinearExpr) -> Optional[LinearExpr]:
    """Turn an arbitrary resolved bound into a [0,1]-valued one.

    Constants clamp numerically; symbolic expressions go through a fresh
    [0,1] variable v with v >= expr, which is exact because assertion bounds
    act monotonically.
    """
    if expr.is_constant:
        if expr.const <= 0:
            return None
        if expr.const > 1:
            # a degree can never exceed 1: record plain infeasibility
            cs.add_constraint(LinearConstraint(ZERO, Rel.GE, ONE))
            return None
        return expr
    v = cs.fresh_degree_var("v")
    cs.add_constraint(LinearConstraint(LinearExpr.var(v), Rel.GE, expr))
    return LinearExpr.var(v)


def _splice_graph(
    cs: ConstraintSet,
    fn,
    lower: bool,
    x2_value: LinearExpr,
    x1_value: Optional[LinearExpr],
    label: str,
):
    """Instantiate a graph encoding, substituting the degree placeholder with
    `x2_value` and, when given, the argument placeholder with `x1_value`.

    Returns the constraints that still mention the argument placeholder; the
    caller resolves those into concept bounds (modifier rules).  All other
    constraints are added directly.
    """
    encode = encode_lower_graph if lower else encode_upper_graph
    enc = encode(fn, _X1, _X2, cs.pool, label=label)
    substitution = {_X2: x2_value}
    if x1_value is not None:
        substitution[_X1] = x1_value
    unresolved: list[LinearConstraint] = []
    for con in enc.constraints:
        con = con.substitute(substitution)
        expr, rel, b = con.normalized()
        if expr.is_constant and not expr.terms:
            if not rel.holds(ZERO.const, b):
                cs.add_constraint(LinearConstraint(ZERO, Rel.GE, ONE))
            continue
        if expr.coefficient(_X1) != 0:
            unresolved.append(LinearConstraint(expr, rel, LinearExpr.constant(b)))
        else:
            cs.add_constraint(LinearConstraint(expr, rel, LinearExpr.constant(b)))
    return unresolved


def _resolve_argument(con: LinearConstraint) -> tuple[Rel, LinearExpr]:
    """Rewrite `c*x1 + rest REL b` as `x1 REL' (b - rest)/c`."""
    expr, rel, b = con.normalized()
    coeff = expr.coefficient(_X1)
    rest = expr - LinearExpr.var(_X1, coeff)
    bound = (LinearExpr.constant(b) - rest) * (Fraction(1) / coeff)
    if coeff < 0:
        rel = rel.flipped()
    return rel, bound


class _Saturator:
    def __init__(self, cs: ConstraintSet):
        self.cs = cs

    def run(self) -> ConstraintSet:
        cs = self.cs
        steps = 0
        while cs.pending and cs.clash is None:
            ba = cs.pending.popleft()
            if ba in cs.done:
                continue
            cs.done.add(ba)
            cs.log.append(ba)
            self._process(ba)
            steps += 1
            if steps > 2_000_000:
                raise SaturationError("saturation failed to reach a fixpoint")
        return cs

    # each handler implements one completion rule family

    def _process(self, ba: BoundedAssertion) -> None:
        cs = self.cs
        a = ba.assertion
        if isinstance(a, RoleAssertion):
            self._atomic_role(ba)
            return
        if isinstance(a, PredicateAssertion):
            self._predicate(ba)
            return
        c = a.concept
        if isinstance(c, Top):
            return  # degree bounds never exceed 1, nothing to record
        if isinstance(c, Bottom):
            self._bottom(ba)
        elif isinstance(c, Atomic):
            cs._count("atomic")
            var = cs.concept_var(a.individual, c.name)
            cs.add_constraint(LinearConstraint(LinearExpr.var(var), Rel.GE, ba.bound))
        elif isinstance(c, Not) and isinstance(c.body, Atomic):
            cs._count("negated-atomic")
            var = cs.concept_var(a.individual, c.body.name)
            cs.add_constraint(
                LinearConstraint(LinearExpr.var(var), Rel.LE, ONE - ba.bound)
            )
        elif isinstance(c, PredicateAtom):
            cs._count("predicate-atom")
            cs.value_var(a.individual)
            self._predicate(
                BoundedAssertion(PredicateAssertion(a.individual, c.ref), ba.bound)
            )
        elif isinstance(c, And):
            self._conjunction(ba, c)
        elif isinstance(c, Or):
            self._disjunction(ba, c)
        elif isinstance(c, Exists):
            self._exists(ba, c)
        elif isinstance(c, Forall):
            self._forall_premise(ba, c)
        elif isinstance(c, Modified):
            self._modifier(ba, c, negated=False)
        elif isinstance(c, Not) and isinstance(c.body, Modified):
            self._modifier(ba, c.body, negated=True)
        else:
            raise SaturationError(f"assertion not in negation normal form: {a}")

    def _bottom(self, ba: BoundedAssertion) -> None:
        cs = self.cs
        cs._count("bottom")
        if ba.bound.is_constant:
            if ba.bound.const > 0:
                ind = ba.assertion.individual
                cs.clash = Clash("bottom", f"{ind} : bot >= {ba.bound.const}")
        else:
            # symbolic bound: the MIP decides whether it can be forced to 0
            cs.add_constraint(LinearConstraint(ba.bound, Rel.LE, ZERO))

    def _atomic_role(self, ba: BoundedAssertion) -> None:
        cs = self.cs
        cs._count("atomic")
        a = ba.assertion
        var = cs.role_var(a.subject, a.obj, a.role)
        cs.add_constraint(LinearConstraint(LinearExpr.var(var), Rel.GE, ba.bound))
        cs.role_edges.setdefault((a.subject, a.role), []).append(ba)
        for forall_ba in list(cs.foralls.get((a.subject, a.role), ())):
            self._forall_pair(forall_ba, ba)

    def _conjunction(self, ba: BoundedAssertion, c: And) -> None:
        cs = self.cs
        ind = ba.assertion.individual
        if cs.semantics is Semantics.ZADEH:
            cs._count("and")
            cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.left), ba.bound))
            cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.right), ba.bound))
            return
        cs._count("and")
        x1 = LinearExpr.var(cs.fresh_degree_var())
        x2 = LinearExpr.var(cs.fresh_degree_var())
        y = LinearExpr.var(cs.fresh_control())
        cs.add_constraint(LinearConstraint(y, Rel.LE, ONE - ba.bound))
        cs.add_constraint(LinearConstraint(x1, Rel.LE, ONE - y))
        cs.add_constraint(LinearConstraint(x2, Rel.LE, ONE - y))
        cs.add_constraint(LinearConstraint(x1 + x2, Rel.EQ, ba.bound + ONE - y))
        # implied at y integral; tightens the relaxation
        cs.add_constraint(LinearConstraint(x1 + x2, Rel.GE, ba.bound))
        cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.left), x1))
        cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.right), x2))

    def _disjunction(self, ba: BoundedAssertion, c: Or) -> None:
        cs = self.cs
        ind = ba.assertion.individual
        cs._count("or")
        x1 = LinearExpr.var(cs.fresh_degree_var())
        x2 = LinearExpr.var(cs.fresh_degree_var())
        if cs.semantics is Semantics.ZADEH:
            y = LinearExpr.var(cs.fresh_control())
            cs.add_constraint(LinearConstraint(x1 + x2, Rel.EQ, ba.bound))
            cs.add_constraint(LinearConstraint(x1, Rel.LE, y))
            cs.add_constraint(LinearConstraint(x2, Rel.LE, ONE - y))
        else:
            cs.add_constraint(LinearConstraint(x1 + x2, Rel.EQ, ba.bound))
        cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.left), x1))
        cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.right), x2))

    def _exists(self, ba: BoundedAssertion, c: Exists) -> None:
        cs = self.cs
        ind = ba.assertion.individual
        decl = cs.ekb.roles[c.role]
        cs._count("exists")
        concrete = isinstance(c.filler, PredicateRef)
        filler_ind = cs.fresh_individual(concrete)
        if concrete:
            fn = cs.ekb.predicates[c.filler.name]
            cs.value_var(filler_ind, fn.domain)

        def filler_assertion(bound: LinearExpr) -> BoundedAssertion:
            if concrete:
                return BoundedAssertion(PredicateAssertion(filler_ind, c.filler), bound)
            return BoundedAssertion(ConceptAssertion(filler_ind, c.filler), bound)

        if cs.semantics is Semantics.ZADEH:
            # filler first: a fork triggered by the role assertion renames the
            # fresh individual everywhere, including the queued filler assertion
            cs.add_assertion(filler_assertion(ba.bound))
            cs.add_assertion(
                BoundedAssertion(RoleAssertion(ind, filler_ind, c.role), ba.bound)
            )
            return
        x1 = LinearExpr.var(cs.fresh_degree_var())
        x2 = LinearExpr.var(cs.fresh_degree_var())
        y = LinearExpr.var(cs.fresh_control())
        cs.add_constraint(LinearConstraint(y, Rel.LE, ONE - ba.bound))
        cs.add_constraint(LinearConstraint(x1, Rel.LE, ONE - y))
        cs.add_constraint(LinearConstraint(x2, Rel.LE, ONE - y))
        cs.add_constraint(LinearConstraint(x1 + x2, Rel.EQ, ba.bound + ONE - y))
        # implied at y integral; tightens the relaxation
        cs.add_constraint(LinearConstraint(x1 + x2, Rel.GE, ba.bound))
        cs.add_assertion(filler_assertion(x2))
        cs.add_assertion(BoundedAssertion(RoleAssertion(ind, filler_ind, c.role), x1))

    def _forall_premise(self, ba: BoundedAssertion, c: Forall) -> None:
        cs = self.cs
        ind = ba.assertion.individual
        cs.foralls.setdefault((ind, c.role), []).append(ba)
        for role_ba in list(cs.role_edges.get((ind, c.role), ())):
            self._forall_pair(ba, role_ba)

    def _forall_pair(self, forall_ba: BoundedAssertion, role_ba: BoundedAssertion) -> None:
        """Two-premise rule: a universal restriction meets a role edge."""
        cs = self.cs
        key = (forall_ba, role_ba)
        if key in cs.applied_pairs:
            return
        cs.applied_pairs.add(key)
        cs._count("forall")
        c: Forall = forall_ba.assertion.concept
        filler_ind = role_ba.assertion.obj
        l1, l2 = forall_ba.bound, role_ba.bound
        x = LinearExpr.var(cs.fresh_degree_var())
        y = LinearExpr.var(cs.fresh_control())
        if cs.semantics is Semantics.ZADEH:
            cs.add_constraint(LinearConstraint(x + y, Rel.GE, l1))
            cs.add_constraint(LinearConstraint(x, Rel.LE, ONE - y))
            cs.add_constraint(LinearConstraint(l1 + l2, Rel.LE, ONE + ONE - y))
            # implied at y integral (x >= l1 when l1+l2 > 1, vacuous otherwise);
            # keeps the LP relaxation from dodging the propagation entirely
            cs.add_constraint(LinearConstraint(x, Rel.GE, l1 + l2 - ONE))
        else:
            # residuum propagation: the filler inherits max(0, l1 + l2 - 1)
            cs.add_constraint(LinearConstraint(x, Rel.GE, l1 + l2 - ONE))
            cs.add_constraint(LinearConstraint(x, Rel.LE, y))
            cs.add_constraint(LinearConstraint(l1 + l2 - ONE, Rel.LE, y))
            cs.add_constraint(LinearConstraint(l1 + l2, Rel.GE, y))
        if isinstance(c.filler, PredicateRef):
            cs.add_assertion(BoundedAssertion(PredicateAssertion(filler_ind, c.filler), x))
        else:
            cs.add_assertion(BoundedAssertion(ConceptAssertion(filler_ind, c.filler), x))

    def _modifier(self, ba: BoundedAssertion, c: Modified, negated: bool) -> None:
        cs = self.cs
        ind = ba.assertion.individual
        cs._count("modifier" if not negated else "negated-modifier")
        fn = cs.ekb.modifiers[c.modifier]
        x2_value = (ONE - ba.bound) if negated else ba.bound
        unresolved = _splice_graph(
            cs, fn, lower=not negated, x2_value=x2_value, x1_value=None,
            label=f"{c.modifier}#{next(cs._fresh)}"
        )
        for con in unresolved:
            rel, bound_expr = _resolve_argument(con)
            if rel is Rel.GE:
                bound = _clamped(cs, bound_expr)
                if bound is not None:
                    cs.add_assertion(BoundedAssertion(ConceptAssertion(ind, c.body), bound))
            elif rel is Rel.LE:
                bound = _clamped(cs, ONE - bound_expr)
                if bound is not None:
                    cs.add_assertion(
                        BoundedAssertion(ConceptAssertion(ind, nnf(Not(c.body))), bound)
                    )
            else:
                raise SaturationError("graph encodings emit inequalities only")

    def _predicate(self, ba: BoundedAssertion) -> None:
        cs = self.cs
        a = ba.assertion
        cs._count("predicate" if not a.ref.negated else "negated-predicate")
        fn = cs.ekb.predicates[a.ref.name]
        xc = LinearExpr.var(cs.value_var(a.individual))
        if a.ref.negated:
            _splice_graph(
                cs, fn, lower=False, x2_value=ONE - ba.bound, x1_value=xc,
                label=f"{a.ref.name}#{next(cs._fresh)}"
            )
        else:
            _splice_graph(
                cs, fn, lower=True, x2_value=ba.bound, x1_value=xc,
                label=f"{a.ref.name}#{next(cs._fresh)}"
            )


def saturate(cs: ConstraintSet) -> ConstraintSet:
    """Apply every applicable rule to fixpoint (at most once per instantiation)."""
    return _Saturator(cs).run()


def dump_completion(cs: ConstraintSet) -> str:
    """Stable text rendering of a completion, for golden tests and debugging."""
    names = cs.pool.names()
    lines = ["# individuals"]
    for ind, seq in sorted(cs.individual_seq.items(), key=lambda kv: kv[1]):
        kind = "concrete" if ind in cs.concrete_inds else "abstract"
        lines.append(f"ind {ind} {kind}")
    lines.append("# assertions")
    for ba in cs.log:
        lines.append(f"assert {ba.assertion} >= {ba.bound.render(names)}")
    lines.append("# constraints")
    for con in cs.constraints:
        lines.append(con.render(names))
    lines.append("# variables")
    for var in sorted(cs.pool, key=lambda v: v.vid):
        kind = "bin" if var.is_binary else f"cont {var.lo} {var.hi}"
        lines.append(f"var {var.name} {kind}")
    return "\n".join(lines) + "\n"
