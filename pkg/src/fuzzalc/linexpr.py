"""Exact-rational linear expressions, constraints and variable registries.

Everything downstream of the tableau (membership-function encodings, the
constraint sets, the MIP solver) speaks this vocabulary.  Coefficients are
`fractions.Fraction` throughout; no floats enter the solve path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]


def _frac(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class LinearExpr:
    """Immutable linear expression: sum of coefficient*variable terms plus a constant.

    Terms are kept sorted by variable id with zero coefficients dropped, so
    structurally equal expressions compare and hash equal.
    """

    terms: tuple[tuple[int, Fraction], ...]
    const: Fraction

    @staticmethod
    def constant(value: Rational) -> "LinearExpr":
        return LinearExpr((), _frac(value))

    @staticmethod
    def var(vid: int, coeff: Rational = 1) -> "LinearExpr":
        c = _frac(coeff)
        if c == 0:
            return ZERO
        return LinearExpr(((vid, c),), Fraction(0))

    @staticmethod
    def of(coeffs: Mapping[int, Rational], const: Rational = 0) -> "LinearExpr":
        terms = tuple(
            sorted((vid, _frac(c)) for vid, c in coeffs.items() if _frac(c) != 0)
        )
        return LinearExpr(terms, _frac(const))

    def coefficient(self, vid: int) -> Fraction:
        for v, c in self.terms:
            if v == vid:
                return c
        return Fraction(0)

    def variables(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other: Union["LinearExpr", Rational]) -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.constant(other)
        coeffs: dict[int, Fraction] = dict(self.terms)
        for v, c in other.terms:
            coeffs[v] = coeffs.get(v, Fraction(0)) + c
        return LinearExpr.of(coeffs, self.const + other.const)

    def __radd__(self, other: Rational) -> "LinearExpr":
        return self + other

    def __sub__(self, other: Union["LinearExpr", Rational]) -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.constant(other)
        return self + other * -1

    def __rsub__(self, other: Rational) -> "LinearExpr":
        return LinearExpr.constant(other) - self

    def __mul__(self, scalar: Rational) -> "LinearExpr":
        s = _frac(scalar)
        if s == 0:
            return ZERO
        return LinearExpr(
            tuple((v, c * s) for v, c in self.terms), self.const * s
        )

    def __rmul__(self, scalar: Rational) -> "LinearExpr":
        return self * scalar

    def __neg__(self) -> "LinearExpr":
        return self * -1

    def substitute(self, mapping: Mapping[int, "LinearExpr"]) -> "LinearExpr":
        """Replace each variable in `mapping` by the given expression."""
        if not any(v in mapping for v, _ in self.terms):
            return self
        out = LinearExpr.constant(self.const)
        for v, c in self.terms:
            if v in mapping:
                out = out + mapping[v] * c
            else:
                out = out + LinearExpr.var(v, c)
        return out

    def rename(self, mapping: Mapping[int, int]) -> "LinearExpr":
        """Rename variable ids (used by fork elimination)."""
        if not any(v in mapping for v, _ in self.terms):
            return self
        coeffs: dict[int, Fraction] = {}
        for v, c in self.terms:
            nv = mapping.get(v, v)
            coeffs[nv] = coeffs.get(nv, Fraction(0)) + c
        return LinearExpr.of(coeffs, self.const)

    def evaluate(self, assignment: Mapping[int, Fraction]) -> Fraction:
        total = self.const
        for v, c in self.terms:
            total += c * assignment[v]
        return total

    def render(self, names: Mapping[int, str] | None = None) -> str:
        parts = []
        for v, c in self.terms:
            name = names[v] if names else f"v{v}"
            parts.append(f"{c}*{name}")
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()


ZERO = LinearExpr((), Fraction(0))
ONE = LinearExpr((), Fraction(1))


class Rel(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="

    def flipped(self) -> "Rel":
        if self is Rel.LE:
            return Rel.GE
        if self is Rel.GE:
            return Rel.LE
        return Rel.EQ

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Rel.LE:
            return lhs <= rhs
        if self is Rel.GE:
            return lhs >= rhs
        return lhs == rhs


@dataclass(frozen=True)
class LinearConstraint:
    """`lhs REL rhs` over linear expressions."""

    lhs: LinearExpr
    rel: Rel
    rhs: LinearExpr

    def normalized(self) -> tuple[LinearExpr, Rel, Fraction]:
        """Move all variable terms left and the constant right."""
        diff = self.lhs - self.rhs
        return LinearExpr(diff.terms, Fraction(0)), self.rel, -diff.const

    def substitute(self, mapping: Mapping[int, LinearExpr]) -> "LinearConstraint":
        return LinearConstraint(
            self.lhs.substitute(mapping), self.rel, self.rhs.substitute(mapping)
        )

    def rename(self, mapping: Mapping[int, int]) -> "LinearConstraint":
        return LinearConstraint(
            self.lhs.rename(mapping), self.rel, self.rhs.rename(mapping)
        )

    def satisfied_by(self, assignment: Mapping[int, Fraction]) -> bool:
        return self.rel.holds(
            self.lhs.evaluate(assignment), self.rhs.evaluate(assignment)
        )

    def render(self, names: Mapping[int, str] | None = None) -> str:
        return f"{self.lhs.render(names)} {self.rel.value} {self.rhs.render(names)}"

    def __str__(self) -> str:
        return self.render()


def constraint(
    coeffs: Mapping[int, Rational], rel: Rel, rhs: Rational
) -> LinearConstraint:
    """Shorthand for `sum(coeffs) REL rhs` with a constant right-hand side."""
    return LinearConstraint(LinearExpr.of(coeffs), rel, LinearExpr.constant(rhs))


@dataclass
class Variable:
    """A registered solver variable: continuous with finite rational bounds, or 0-1."""

    vid: int
    name: str
    is_binary: bool
    lo: Fraction
    hi: Fraction


class VariablePool:
    """Issues fresh variable ids and remembers each variable's class and bounds.

    A pool is owned by a single query (one tableau saturation / one MIP build);
    it is not safe to share a pool across concurrent saturations.
    """

    def __init__(self) -> None:
        self._vars: dict[int, Variable] = {}
        self._next = 0

    def new_continuous(
        self, name: str, lo: Rational = 0, hi: Rational = 1
    ) -> int:
        lo_f, hi_f = _frac(lo), _frac(hi)
        if lo_f > hi_f:
            raise ValueError(f"variable {name}: lower bound {lo_f} exceeds {hi_f}")
        vid = self._next
        self._next += 1
        self._vars[vid] = Variable(vid, name, False, lo_f, hi_f)
        return vid

    def new_binary(self, name: str) -> int:
        vid = self._next
        self._next += 1
        self._vars[vid] = Variable(vid, name, True, Fraction(0), Fraction(1))
        return vid

    def __getitem__(self, vid: int) -> Variable:
        return self._vars[vid]

    def __contains__(self, vid: int) -> bool:
        return vid in self._vars

    def __len__(self) -> int:
        return len(self._vars)

    def __iter__(self) -> Iterable[Variable]:
        return iter(self._vars.values())

    def variables(self) -> list[Variable]:
        return list(self._vars.values())

    def names(self) -> dict[int, str]:
        return {v.vid: v.name for v in self._vars.values()}

    def merge_alias(self, old: int, new: int) -> None:
        """Redirect `old` to `new` (fork elimination merges concrete fillers).

        The old registry entry is dropped; callers must rename constraints.
        """
        if old == new:
            return
        old_var = self._vars.pop(old)
        kept = self._vars[new]
        if old_var.is_binary != kept.is_binary:
            raise ValueError("cannot merge variables of different classes")
        # merged variable must satisfy both original bounds
        kept.lo = max(kept.lo, old_var.lo)
        kept.hi = min(kept.hi, old_var.hi)
