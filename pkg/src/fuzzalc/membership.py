"""Piecewise-linear membership functions and their mixed-integer graph encodings.

Fuzzy predicates and modifiers are continuous piecewise-linear maps from a
bounded rational interval into [0,1].  For the tableau they are compiled into
constraint blocks describing the lower graph {(x,d) : f(x) >= d} and upper
graph {(x,d) : f(x) <= d}: one linear system per piece, merged pairwise with
0-1 control variables whose blended right-hand sides deactivate the inactive
piece (no big-M constants; deactivation bounds are the tightest implied by
the domain box).

Crisp comparisons come in two flavours: `make_crisp` builds a continuous
ramp of width epsilon, while `CrispStepFn` is the exact discontinuous step.
The step only admits a lower-graph encoding (its upper graph is not a closed
polyhedral union), so negated exact steps are rejected with a clear error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .linexpr import LinearConstraint, LinearExpr, Rational, Rel, VariablePool

_ZERO = Fraction(0)
_ONE = Fraction(1)


class MembershipFunctionError(ValueError):
    """Invalid shape parameters or unsupported encoding request."""


def _frac(v: Rational) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class LinearPiece:
    """One linear segment: value on [lo, hi] is slope*x + intercept."""

    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction

    def value(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function on [domain_lo, domain_hi] with range in [0,1]."""

    domain_lo: Fraction
    domain_hi: Fraction
    pieces: tuple[LinearPiece, ...]

    def __post_init__(self) -> None:
        if not self.pieces:
            raise MembershipFunctionError("a membership function needs at least one piece")
        if self.pieces[0].lo != self.domain_lo or self.pieces[-1].hi != self.domain_hi:
            raise MembershipFunctionError("pieces must tile the whole domain")
        prev = None
        for p in self.pieces:
            if p.lo > p.hi:
                raise MembershipFunctionError("piece interval is reversed")
            for end in (p.lo, p.hi):
                v = p.value(end)
                if not (_ZERO <= v <= _ONE):
                    raise MembershipFunctionError(
                        f"value {v} at x={end} falls outside [0,1]"
                    )
            if prev is not None:
                if prev.hi != p.lo:
                    raise MembershipFunctionError("pieces leave a gap in the domain")
                if prev.value(p.lo) != p.value(p.lo):
                    raise MembershipFunctionError(
                        f"discontinuity at x={p.lo}: "
                        f"{prev.value(p.lo)} vs {p.value(p.lo)}"
                    )
            prev = p

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return (self.domain_lo, self.domain_hi)

    def evaluate(self, x: Rational) -> Fraction:
        x = _frac(x)
        if not (self.domain_lo <= x <= self.domain_hi):
            raise MembershipFunctionError(
                f"x={x} outside domain [{self.domain_lo},{self.domain_hi}]"
            )
        for p in self.pieces:
            if p.lo <= x <= p.hi:
                return p.value(x)
        raise AssertionError("unreachable: pieces tile the domain")

    def breakpoints(self) -> list[Fraction]:
        pts = [self.domain_lo]
        pts.extend(p.hi for p in self.pieces)
        return pts


def from_polyline(points: Sequence[tuple[Rational, Rational]]) -> PiecewiseLinearFn:
    """Build a function from breakpoint coordinates.

    Repeated x-coordinates must repeat the same y (a jump would be a
    discontinuity); collinear neighbouring segments are merged so the piece
    count, and with it the control-variable budget, stays minimal.
    """
    pts = [(_frac(x), _frac(y)) for x, y in points]
    if len(pts) < 2:
        raise MembershipFunctionError("a polyline needs at least two points")
    dedup: list[tuple[Fraction, Fraction]] = []
    for x, y in pts:
        if dedup:
            px, py = dedup[-1]
            if x < px:
                raise MembershipFunctionError("polyline x-coordinates must not decrease")
            if x == px:
                if y != py:
                    raise MembershipFunctionError(
                        f"discontinuity at x={x}: {py} vs {y}"
                    )
                continue
        dedup.append((x, y))
    if len(dedup) < 2:
        raise MembershipFunctionError("polyline covers a single point")
    pieces: list[LinearPiece] = []
    for (x0, y0), (x1, y1) in zip(dedup, dedup[1:]):
        slope = (y1 - y0) / (x1 - x0)
        intercept = y0 - slope * x0
        if pieces and pieces[-1].slope == slope and pieces[-1].intercept == intercept:
            pieces[-1] = LinearPiece(pieces[-1].lo, x1, slope, intercept)
        else:
            pieces.append(LinearPiece(x0, x1, slope, intercept))
    return PiecewiseLinearFn(dedup[0][0], dedup[-1][0], tuple(pieces))


def _check_domain(domain: tuple[Rational, Rational], *params: Fraction) -> tuple[Fraction, Fraction]:
    k1, k2 = _frac(domain[0]), _frac(domain[1])
    if k1 >= k2:
        raise MembershipFunctionError("domain must be a nondegenerate interval")
    for p in params:
        if not (k1 <= p <= k2):
            raise MembershipFunctionError(f"parameter {p} outside domain [{k1},{k2}]")
    return k1, k2


def _ordered(*params: Fraction) -> None:
    for a, b in zip(params, params[1:]):
        if a > b:
            raise MembershipFunctionError(f"shape parameters out of order: {a} > {b}")


def trapezoid(domain, a, b, c, d) -> PiecewiseLinearFn:
    """0 before a, rises to 1 on [a,b], plateau to c, falls to 0 on [c,d]."""
    a, b, c, d = map(_frac, (a, b, c, d))
    _ordered(a, b, c, d)
    k1, k2 = _check_domain(domain, a, b, c, d)
    return from_polyline([(k1, 0), (a, 0), (b, 1), (c, 1), (d, 0), (k2, 0)])


def triangle(domain, a, b, c) -> PiecewiseLinearFn:
    a, b, c = map(_frac, (a, b, c))
    _ordered(a, b, c)
    k1, k2 = _check_domain(domain, a, b, c)
    return from_polyline([(k1, 0), (a, 0), (b, 1), (c, 0), (k2, 0)])


def left_shoulder(domain, a, b) -> PiecewiseLinearFn:
    """1 up to a, falls to 0 at b, 0 afterwards."""
    a, b = _frac(a), _frac(b)
    _ordered(a, b)
    k1, k2 = _check_domain(domain, a, b)
    return from_polyline([(k1, 1), (a, 1), (b, 0), (k2, 0)])


def right_shoulder(domain, a, b) -> PiecewiseLinearFn:
    """0 up to a, rises to 1 at b, 1 afterwards."""
    a, b = _frac(a), _frac(b)
    _ordered(a, b)
    k1, k2 = _check_domain(domain, a, b)
    return from_polyline([(k1, 0), (a, 0), (b, 1), (k2, 1)])


def make_crisp(comparator: str, k: Rational, eps: Rational, domain) -> PiecewiseLinearFn:
    """Continuous stand-in for a crisp comparison, with a ramp of width eps.

    `<=`: 1 on [k1,k], ramp down on [k,k+eps]; `>=` mirrored; `=`: the
    triangular spike peaking at k.
    """
    k = _frac(k)
    eps = _frac(eps)
    if eps <= 0:
        raise MembershipFunctionError("epsilon must be positive")
    k1, k2 = _check_domain(domain, k)
    if comparator == "<=":
        if k + eps > k2:
            raise MembershipFunctionError("ramp exits the domain on the right")
        return from_polyline([(k1, 1), (k, 1), (k + eps, 0), (k2, 0)])
    if comparator == ">=":
        if k - eps < k1:
            raise MembershipFunctionError("ramp exits the domain on the left")
        return from_polyline([(k1, 0), (k - eps, 0), (k, 1), (k2, 1)])
    if comparator == "=":
        if k - eps < k1 or k + eps > k2:
            raise MembershipFunctionError("spike exits the domain")
        return from_polyline([(k1, 0), (k - eps, 0), (k, 1), (k + eps, 0), (k2, 0)])
    raise MembershipFunctionError(f"unknown comparator {comparator!r}")


@dataclass(frozen=True)
class CrispStepFn:
    """Exact crisp comparison (a 0/1 step).

    The lower graph is the closed union {x <= k} | {degree <= 0} (resp. the
    mirror) and is encoded exactly with one control variable.  The upper
    graph would need a strict inequality, so it has no encoding here; use
    `make_crisp` when the predicate appears negated.
    """

    comparator: str  # "<=" or ">="
    threshold: Fraction
    domain_lo: Fraction
    domain_hi: Fraction

    def __post_init__(self) -> None:
        if self.comparator not in ("<=", ">="):
            raise MembershipFunctionError(
                "exact steps support <= and >= only; use make_crisp for ="
            )
        if not (self.domain_lo <= self.threshold <= self.domain_hi):
            raise MembershipFunctionError("threshold outside domain")

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return (self.domain_lo, self.domain_hi)

    def evaluate(self, x: Rational) -> Fraction:
        x = _frac(x)
        if not (self.domain_lo <= x <= self.domain_hi):
            raise MembershipFunctionError(
                f"x={x} outside domain [{self.domain_lo},{self.domain_hi}]"
            )
        hit = x <= self.threshold if self.comparator == "<=" else x >= self.threshold
        return _ONE if hit else _ZERO

    def breakpoints(self) -> list[Fraction]:
        return [self.domain_lo, self.threshold, self.domain_hi]


MembershipFn = Union[PiecewiseLinearFn, CrispStepFn]


def builtin_very() -> PiecewiseLinearFn:
    """Piecewise-linear 'very': (2/3)x below 3/4, then 2x-1 up to 1."""
    return from_polyline([(0, 0), (Fraction(3, 4), Fraction(1, 2)), (1, 1)])


def eval_fn(fn: MembershipFn, x: Rational) -> Fraction:
    return fn.evaluate(x)


# ---------------------------------------------------------------------------
# graph encodings
# ---------------------------------------------------------------------------

Row = tuple[LinearExpr, Rel, Fraction]


@dataclass
class GraphEncoding:
    """Constraint block whose solutions project onto the requested graph."""

    constraints: list[LinearConstraint]
    controls: list[int]


def _canonical(expr: LinearExpr, rel: Rel, b: Fraction) -> Row:
    """Scale to integer coefficients with a positive leading term."""
    denoms = [c.denominator for _, c in expr.terms] + [b.denominator]
    lcm = 1
    for d in denoms:
        lcm = lcm * d // _gcd(lcm, d)
    expr, b = expr * lcm, b * lcm
    if expr.terms and expr.terms[0][1] < 0:
        expr, b, rel = -expr, -b, rel.flipped()
    return expr, rel, b


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _extreme(expr: LinearExpr, box: dict[int, tuple[Fraction, Fraction]], maximize: bool) -> Fraction:
    total = _ZERO
    for v, c in expr.terms:
        lo, hi = box[v]
        total += c * (hi if (c > 0) == maximize else lo)
    return total


def _deactivation(expr: LinearExpr, rel: Rel, box) -> Fraction:
    # a GE row is switched off by lowering its rhs to the expression minimum,
    # a LE row by raising it to the maximum
    return _extreme(expr, box, maximize=(rel is Rel.LE))


def _is_trivial(row: Row, box) -> bool:
    expr, rel, b = row
    w = _deactivation(expr, rel, box)
    return w >= b if rel is Rel.GE else w <= b


def _blend(
    active_at_zero: list[Row],
    active_at_one: list[Row],
    y: int,
    box,
    vx: int,
    zero_range: tuple[Fraction, Fraction],
    one_range: tuple[Fraction, Fraction],
) -> list[Row]:
    """Merge two systems with a fresh control y.

    A row's deactivation bound only has to cover the x-range of the opposite
    branch, which keeps the relaxation as tight as the piece intervals allow.
    """
    merged: list[Row] = []
    for rows, active_value in ((active_at_zero, 0), (active_at_one, 1)):
        opposite = one_range if active_value == 0 else zero_range
        for expr, rel, b in rows:
            if _is_trivial((expr, rel, b), box):
                continue
            w = _deactivation(expr, rel, {**box, vx: opposite})
            if active_value == 0:
                # rhs = (1-y)*b + y*w
                merged.append((expr + LinearExpr.var(y, b - w), rel, b))
            else:
                # rhs = y*b + (1-y)*w
                merged.append((expr + LinearExpr.var(y, w - b), rel, w))
    return merged


def _piece_systems(
    fn: MembershipFn, vx: int, vd: int, lower: bool
) -> list[tuple[list[Row], Fraction, Fraction]]:
    """Per-piece constraint systems, each with the piece's x-interval (the
    interval drives the tightest deactivation bounds during merging)."""
    if isinstance(fn, CrispStepFn):
        if not lower:
            raise MembershipFunctionError(
                "exact crisp steps have no upper-graph encoding; use make_crisp"
            )
        main_rel = Rel.LE if fn.comparator == "<=" else Rel.GE
        k1, k2 = fn.domain
        main_lo = k1 if fn.comparator == "<=" else fn.threshold
        main_hi = fn.threshold if fn.comparator == "<=" else k2
        return [
            ([_canonical(LinearExpr.var(vx), main_rel, fn.threshold)], main_lo, main_hi),
            ([_canonical(LinearExpr.var(vd), Rel.LE, _ZERO)], k1, k2),
        ]
    systems = []
    rel = Rel.GE if lower else Rel.LE
    for p in fn.pieces:
        rows = [
            # slope*x + intercept >= d  (lower), <= d (upper)
            _canonical(
                LinearExpr.of({vx: p.slope, vd: -1}), rel, -p.intercept
            ),
            _canonical(LinearExpr.var(vx), Rel.GE, p.lo),
            _canonical(LinearExpr.var(vx), Rel.LE, p.hi),
        ]
        systems.append((rows, p.lo, p.hi))
    return systems


def _encode(fn: MembershipFn, vx: int, vd: int, pool: VariablePool, lower: bool, label: str) -> GraphEncoding:
    k1, k2 = fn.domain
    box = {vx: (k1, k2), vd: (_ZERO, _ONE)}
    systems = _piece_systems(fn, vx, vd, lower)
    first_rows, merged_lo, merged_hi = systems[0]
    merged = [row for row in first_rows if not _is_trivial(row, box)]
    controls: list[int] = []
    for nxt_rows, nxt_lo, nxt_hi in systems[1:]:
        y = pool.new_binary(f"y[{label}.{len(controls)}]")
        box[y] = (_ZERO, _ONE)
        merged = _blend(
            merged,
            [row for row in nxt_rows if not _is_trivial(row, box)],
            y,
            box,
            vx,
            (merged_lo, merged_hi),
            (nxt_lo, nxt_hi),
        )
        merged_lo = min(merged_lo, nxt_lo)
        merged_hi = max(merged_hi, nxt_hi)
        controls.append(y)
    constraints = [
        LinearConstraint(LinearExpr.var(vx), Rel.GE, LinearExpr.constant(k1)),
        LinearConstraint(LinearExpr.var(vx), Rel.LE, LinearExpr.constant(k2)),
        LinearConstraint(LinearExpr.var(vd), Rel.GE, LinearExpr.constant(0)),
        LinearConstraint(LinearExpr.var(vd), Rel.LE, LinearExpr.constant(1)),
    ]
    for expr, rel, b in merged:
        constraints.append(
            LinearConstraint(expr, rel, LinearExpr.constant(b))
        )
    return GraphEncoding(constraints, controls)


def encode_lower_graph(
    fn: MembershipFn, vx: int, vd: int, pool: VariablePool, label: str = "f"
) -> GraphEncoding:
    """Constraints feasible at (vx=x, vd=d) exactly when x is in the domain and fn(x) >= d."""
    return _encode(fn, vx, vd, pool, lower=True, label=label)


def encode_upper_graph(
    fn: MembershipFn, vx: int, vd: int, pool: VariablePool, label: str = "f"
) -> GraphEncoding:
    """Constraints feasible at (vx=x, vd=d) exactly when x is in the domain and fn(x) <= d."""
    return _encode(fn, vx, vd, pool, lower=False, label=label)
