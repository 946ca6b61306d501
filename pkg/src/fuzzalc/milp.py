"""Bounded mixed-integer programming over exact rationals.

Feasibility and single-variable minimization for problems whose continuous
variables carry finite rational bounds and whose integer variables are 0-1.
The solver is a two-phase bounded-variable primal simplex wrapped in a
depth-first branch and bound; every optimum is certified by re-substituting
the assignment into the original constraints.  No floating point anywhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .linexpr import LinearConstraint, Rel, VariablePool

_ZERO = Fraction(0)
_ONE = Fraction(1)

# pivots before the pricing rule falls back from Dantzig to Bland (anti-cycling)
_BLAND_TRIGGER = 400
_PIVOT_CAP = 500_000


class SolverInternalError(Exception):
    """The solver produced an uncertifiable result; always a bug, never user error."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class MIPProblem:
    """Variables (from a pool), linear constraints, and an optional variable to minimize."""

    pool: VariablePool
    constraints: list[LinearConstraint]
    objective: Optional[int] = None

    def validate(self) -> None:
        for con in self.constraints:
            for vid in con.lhs.variables() + con.rhs.variables():
                if vid not in self.pool:
                    raise ValueError(f"constraint references undeclared variable v{vid}")
        if self.objective is not None and self.objective not in self.pool:
            raise ValueError("objective variable is not declared")


@dataclass
class LPResult:
    status: Status
    value: Optional[Fraction] = None
    assignment: dict[int, Fraction] = field(default_factory=dict)
    pivots: int = 0


@dataclass
class MIPResult:
    status: Status
    value: Optional[Fraction] = None
    assignment: dict[int, Fraction] = field(default_factory=dict)
    nodes: int = 0
    pivots: int = 0


Bounds = dict[int, tuple[Fraction, Fraction]]


def _effective_bounds(
    problem: MIPProblem, overrides: Mapping[int, tuple[Fraction, Fraction]] | None
) -> Bounds:
    bounds: Bounds = {}
    for var in problem.pool:
        lo, hi = var.lo, var.hi
        if overrides and var.vid in overrides:
            olo, ohi = overrides[var.vid]
            lo, hi = max(lo, olo), min(hi, ohi)
        bounds[var.vid] = (lo, hi)
    return bounds


def _fold_rows(
    rows: list[tuple[dict[int, Fraction], Rel, Fraction]], bounds: Bounds
) -> Optional[list[tuple[dict[int, Fraction], Rel, Fraction]]]:
    """Iteratively substitute fixed variables and fold single-variable rows
    into bounds.  Returns the residual multi-variable rows, or None when the
    bound propagation alone proves infeasibility."""
    for lo, hi in bounds.values():
        if lo > hi:
            return None
    pending = rows
    while True:
        changed = False
        residual: list[tuple[dict[int, Fraction], Rel, Fraction]] = []
        for coeffs, rel, b in pending:
            coeffs = dict(coeffs)
            for vid in list(coeffs):
                lo, hi = bounds[vid]
                if lo == hi:
                    b -= coeffs.pop(vid) * lo
                    changed = True
            if not coeffs:
                if not rel.holds(_ZERO, b):
                    return None
                continue
            if len(coeffs) == 1:
                (vid, a), = coeffs.items()
                val = b / a
                lo, hi = bounds[vid]
                if rel is Rel.EQ:
                    lo, hi = max(lo, val), min(hi, val)
                elif (rel is Rel.GE) == (a > 0):
                    lo = max(lo, val)
                else:
                    hi = min(hi, val)
                if lo > hi:
                    return None
                bounds[vid] = (lo, hi)
                changed = True
                continue
            residual.append((coeffs, rel, b))
        pending = residual
        if not changed:
            return pending


class _BoundedSimplex:
    """Two-phase primal simplex for `min c.x, A x = b, lo <= x <= hi`.

    Rows arrive as inequalities/equalities over external variable ids; slacks
    and (where needed) artificials are added internally.  Nonbasic variables
    rest on a bound; Dantzig pricing switches to Bland's rule after a fixed
    number of pivots so cycling cannot occur.
    """

    def __init__(
        self,
        rows: list[tuple[dict[int, Fraction], Rel, Fraction]],
        bounds: Bounds,
    ) -> None:
        self.ext_ids: list[int] = sorted({v for coeffs, _, _ in rows for v in coeffs})
        self.col_of = {vid: i for i, vid in enumerate(self.ext_ids)}
        n = len(self.ext_ids)
        self.lo: list[Fraction] = [bounds[v][0] for v in self.ext_ids]
        self.hi: list[Fraction] = [bounds[v][1] for v in self.ext_ids]
        self.rows: list[dict[int, Fraction]] = []
        self.beta: list[Fraction] = []
        self.basis: list[int] = []
        self.at_upper: set[int] = set()
        self.artificials: list[int] = []
        self.infeasible_setup = False
        self.pivots = 0
        self._bland = False

        for coeffs, rel, b in rows:
            minact = sum(
                (c * (self.lo[self.col_of[v]] if c > 0 else self.hi[self.col_of[v]]))
                for v, c in coeffs.items()
            )
            maxact = sum(
                (c * (self.hi[self.col_of[v]] if c > 0 else self.lo[self.col_of[v]]))
                for v, c in coeffs.items()
            )
            if rel is Rel.LE:
                slo, shi = _ZERO, b - minact
            elif rel is Rel.GE:
                slo, shi = b - maxact, _ZERO
            else:
                slo, shi = _ZERO, _ZERO
                if not (minact <= b <= maxact):
                    self.infeasible_setup = True
                    return
            if slo > shi:
                self.infeasible_setup = True
                return
            slack = self._new_col(slo, shi)
            row = {self.col_of[v]: c for v, c in coeffs.items()}
            row[slack] = _ONE
            sigma = b - sum(c * self._nb_value(self.col_of[v]) for v, c in coeffs.items())
            if slo <= sigma <= shi:
                self.rows.append(row)
                self.beta.append(sigma)
                self.basis.append(slack)
            else:
                clamped = shi if sigma > shi else slo
                if clamped == shi:
                    self.at_upper.add(slack)
                rho = sigma - clamped
                art = self._new_col(_ZERO, abs(rho))
                sign = _ONE if rho > 0 else -_ONE
                row[art] = sign
                if sign < 0:
                    row = {c: -v for c, v in row.items()}
                    # keep equality: negate handled via basis normalization below
                    row[art] = _ONE
                    self.rows.append(row)
                    self.beta.append(abs(rho))
                else:
                    self.rows.append(row)
                    self.beta.append(rho)
                self.basis.append(art)
                self.artificials.append(art)

    def _new_col(self, lo: Fraction, hi: Fraction) -> int:
        col = len(self.lo)
        self.lo.append(lo)
        self.hi.append(hi)
        return col

    def _nb_value(self, col: int) -> Fraction:
        return self.hi[col] if col in self.at_upper else self.lo[col]

    def _value_of(self, col: int) -> Fraction:
        for i, b in enumerate(self.basis):
            if b == col:
                return self.beta[i]
        return self._nb_value(col)

    def _cost_row(self, costs: dict[int, Fraction]) -> dict[int, Fraction]:
        z = dict(costs)
        for i, bi in enumerate(self.basis):
            cb = costs.get(bi, _ZERO)
            if cb != 0:
                for col, a in self.rows[i].items():
                    z[col] = z.get(col, _ZERO) - cb * a
        return {c: v for c, v in z.items() if v != 0}

    def _run(self, z: dict[int, Fraction]) -> None:
        basic_set = set(self.basis)
        while True:
            entering = None
            best_score = _ZERO
            for col, d in sorted(z.items()) if self._bland else z.items():
                if col in basic_set or self.lo[col] == self.hi[col]:
                    continue
                if col in self.at_upper:
                    if d > 0:
                        if self._bland:
                            entering = col
                            break
                        if entering is None or d > best_score or (
                            d == best_score and col < entering
                        ):
                            entering, best_score = col, d
                else:
                    if d < 0:
                        if self._bland:
                            entering = col
                            break
                        if entering is None or -d > best_score or (
                            -d == best_score and col < entering
                        ):
                            entering, best_score = col, -d
            if entering is None:
                return
            direction = -1 if entering in self.at_upper else 1
            span = self.hi[entering] - self.lo[entering]
            best_t = span
            leave = None
            leave_to_upper = False
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if not a:
                    continue
                delta = a * direction
                bi = self.basis[i]
                if delta > 0:
                    room = self.beta[i] - self.lo[bi]
                    to_upper = False
                else:
                    room = self.hi[bi] - self.beta[i]
                    to_upper = True
                t = room / abs(delta)
                if t < best_t or (
                    t == best_t and leave is not None and bi < self.basis[leave]
                ) or (t == best_t and leave is None and t < span):
                    best_t = t
                    leave = i
                    leave_to_upper = to_upper
            if best_t == span and leave is not None:
                # prefer the bound flip on ties: fewer basis changes
                pass
            step = best_t * direction
            if step != 0:
                for i, row in enumerate(self.rows):
                    a = row.get(entering)
                    if a:
                        self.beta[i] -= a * step
            if leave is None or best_t == span:
                # bound flip
                if entering in self.at_upper:
                    self.at_upper.discard(entering)
                else:
                    self.at_upper.add(entering)
                continue
            # pivot entering into the basis at row `leave`
            new_value = self._nb_value(entering) + step
            left_var = self.basis[leave]
            basic_set.discard(left_var)
            basic_set.add(entering)
            if leave_to_upper:
                self.at_upper.add(left_var)
            else:
                self.at_upper.discard(left_var)
            pivot_row = self.rows[leave]
            pa = pivot_row[entering]
            if pa != 1:
                self.rows[leave] = pivot_row = {
                    c: v / pa for c, v in pivot_row.items()
                }
            for i, row in enumerate(self.rows):
                if i == leave:
                    continue
                a = row.get(entering)
                if a:
                    for c, v in pivot_row.items():
                        nv = row.get(c, _ZERO) - a * v
                        if nv == 0:
                            row.pop(c, None)
                        else:
                            row[c] = nv
            zd = z.get(entering)
            if zd:
                for c, v in pivot_row.items():
                    nv = z.get(c, _ZERO) - zd * v
                    if nv == 0:
                        z.pop(c, None)
                    else:
                        z[c] = nv
            self.basis[leave] = entering
            self.beta[leave] = new_value
            self.pivots += 1
            if self.pivots >= _BLAND_TRIGGER:
                self._bland = True
            if self.pivots > _PIVOT_CAP:
                raise SolverInternalError("pivot cap exceeded; simplex is cycling")

    def solve(self, objective_col: Optional[int]) -> Optional[dict[int, Fraction]]:
        """Phase 1 (drive artificials to zero), then phase 2 on the objective.
        Returns the external assignment or None when infeasible."""
        if self.infeasible_setup:
            return None
        if self.artificials:
            z = self._cost_row({a: _ONE for a in self.artificials})
            self._run(z)
            if sum(self._value_of(a) for a in self.artificials) > 0:
                return None
            for a in self.artificials:
                self.lo[a] = self.hi[a] = _ZERO
                self.at_upper.discard(a)
        if objective_col is not None:
            z = self._cost_row({objective_col: _ONE})
            self._run(z)
        values: dict[int, Fraction] = {}
        for vid in self.ext_ids:
            values[vid] = self._nb_value(self.col_of[vid])
        for i, bcol in enumerate(self.basis):
            if bcol < len(self.ext_ids):
                values[self.ext_ids[bcol]] = self.beta[i]
        return values


def lp_minimize_exact(
    problem: MIPProblem,
    overrides: Mapping[int, tuple[Fraction, Fraction]] | None = None,
) -> LPResult:
    """Solve the LP relaxation exactly (binaries treated as continuous on [0,1]).

    All variables are bounded, so the outcome is either an optimal basic
    solution or infeasibility; unboundedness cannot arise.
    """
    bounds = _effective_bounds(problem, overrides)
    rows = []
    for con in problem.constraints:
        expr, rel, b = con.normalized()
        rows.append((dict(expr.terms), rel, b))
    residual = _fold_rows(rows, bounds)
    if residual is None:
        return LPResult(Status.INFEASIBLE)
    simplex = _BoundedSimplex(residual, bounds)
    obj_col = None
    obj = problem.objective
    if obj is not None and obj in simplex.col_of:
        obj_col = simplex.col_of[obj]
    solution = simplex.solve(obj_col)
    if solution is None:
        return LPResult(Status.INFEASIBLE, pivots=simplex.pivots)
    assignment: dict[int, Fraction] = {}
    for var in problem.pool:
        if var.vid in solution:
            assignment[var.vid] = solution[var.vid]
        else:
            assignment[var.vid] = bounds[var.vid][0]
    value = assignment[obj] if obj is not None else None
    return LPResult(Status.OPTIMAL, value, assignment, simplex.pivots)


def certify(
    problem: MIPProblem,
    assignment: Mapping[int, Fraction],
    expect_integral: bool = True,
) -> None:
    """Re-substitute an assignment into the original problem; raise on any violation."""
    for var in problem.pool:
        val = assignment[var.vid]
        if not (var.lo <= val <= var.hi):
            raise SolverInternalError(
                f"certification failed: {var.name}={val} outside [{var.lo},{var.hi}]"
            )
        if expect_integral and var.is_binary and val not in (_ZERO, _ONE):
            raise SolverInternalError(
                f"certification failed: binary {var.name}={val}"
            )
    for con in problem.constraints:
        if not con.satisfied_by(assignment):
            raise SolverInternalError(
                f"certification failed: violated {con.render(problem.pool.names())}"
            )


def _branch_and_bound(problem: MIPProblem, minimize: bool) -> MIPResult:
    problem.validate()
    binaries = sorted(v.vid for v in problem.pool if v.is_binary)
    stack: list[dict[int, tuple[Fraction, Fraction]]] = [{}]
    incumbent: Optional[LPResult] = None
    nodes = 0
    pivots = 0
    while stack:
        overrides = stack.pop()
        nodes += 1
        lp = lp_minimize_exact(problem, overrides)
        pivots += lp.pivots
        if lp.status is Status.INFEASIBLE:
            continue
        if minimize and incumbent is not None and lp.value >= incumbent.value:
            continue
        fractional = [
            vid for vid in binaries if lp.assignment[vid] not in (_ZERO, _ONE)
        ]
        if not fractional:
            certify(problem, lp.assignment)
            if not minimize:
                return MIPResult(
                    Status.OPTIMAL, None, dict(lp.assignment), nodes, pivots
                )
            incumbent = lp
            continue
        # branch on the fractional binary closest to 1/2, ties by lowest id
        half = Fraction(1, 2)
        branch = min(fractional, key=lambda v: (abs(lp.assignment[v] - half), v))
        prefer = _ONE if lp.assignment[branch] >= half else _ZERO
        other = _ONE - prefer
        stack.append({**overrides, branch: (other, other)})
        stack.append({**overrides, branch: (prefer, prefer)})
    if incumbent is None:
        return MIPResult(Status.INFEASIBLE, nodes=nodes, pivots=pivots)
    return MIPResult(
        Status.OPTIMAL, incumbent.value, dict(incumbent.assignment), nodes, pivots
    )


def mip_minimize(problem: MIPProblem) -> MIPResult:
    """Exact minimum of the objective variable, or infeasibility."""
    if problem.objective is None:
        raise ValueError("mip_minimize requires an objective variable")
    return _branch_and_bound(problem, minimize=True)


def mip_feasible(problem: MIPProblem) -> bool:
    """True iff some assignment (binaries integral) satisfies every constraint."""
    relaxed = MIPProblem(problem.pool, problem.constraints, None)
    return _branch_and_bound(relaxed, minimize=False).status is Status.OPTIMAL


def dump_problem(problem: MIPProblem) -> str:
    """Bit-exact text form: variable declarations, constraints, objective."""
    names = problem.pool.names()
    lines = []
    for var in sorted(problem.pool, key=lambda v: v.vid):
        if var.is_binary:
            lines.append(f"var {var.name} bin")
        else:
            lines.append(f"var {var.name} cont {var.lo} {var.hi}")
    for con in problem.constraints:
        expr, rel, b = con.normalized()
        terms = " + ".join(f"{c}*{names[v]}" for v, c in expr.terms) or "0"
        lines.append(f"con {terms} {rel.value} {b}")
    if problem.objective is not None:
        lines.append(f"min {names[problem.objective]}")
    return "\n".join(lines) + "\n"
