"""fuzzalc: a reasoner for fuzzy ALC(D) knowledge bases.

Graded satisfiability, entailment and best-degree-bound queries are answered
by saturating a one-branch tableau into a bounded mixed-integer program that
is solved exactly over the rationals.
"""

from .kb import (
    And,
    Atomic,
    Bottom,
    BOTTOM,
    Concept,
    ConceptAssertion,
    Exists,
    Forall,
    FuzzyAssertion,
    IndividualEquality,
    KnowledgeBase,
    KnowledgeBaseError,
    Modified,
    Not,
    Or,
    PredicateAtom,
    PredicateRef,
    RoleAssertion,
    RoleDecl,
    TBoxAxiom,
    Top,
    TOP,
    as_degree,
    build_kb,
    check_acyclic,
)
from .membership import (
    CrispStepFn,
    GraphEncoding,
    MembershipFunctionError,
    PiecewiseLinearFn,
    builtin_very,
    encode_lower_graph,
    encode_upper_graph,
    from_polyline,
    left_shoulder,
    make_crisp,
    right_shoulder,
    trapezoid,
    triangle,
)
from .preprocess import ExpandedKB, expand, expand_definitions, nnf, normalize_tbox
from .reasoner import (
    EntailsAnswer,
    GlbAnswer,
    QueryError,
    Reasoner,
    SatAnswer,
    entails,
    glb_alternate,
    glb_assertion,
    glb_role,
    glb_subsumption,
    kb_satisfiable,
)
from .tableau import (
    BoundedAssertion,
    Clash,
    ConstraintSet,
    Semantics,
    dump_completion,
    init_constraint_set,
    saturate,
)

__version__ = "0.1.0"
