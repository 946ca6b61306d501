"""Shared helpers for the test suite: encoding feasibility probes and grids."""

from fractions import Fraction

from fuzzalc.linexpr import LinearConstraint, LinearExpr, Rel, VariablePool
from fuzzalc.membership import encode_lower_graph, encode_upper_graph
from fuzzalc.milp import MIPProblem, mip_feasible

F = Fraction


def graph_feasible(fn, x, d, lower=True):
    """Decide membership of (x, d) in the encoded lower/upper graph via the MIP solver."""
    pool = VariablePool()
    k1, k2 = fn.domain
    vx = pool.new_continuous("x", k1, k2)
    vd = pool.new_continuous("d", 0, 1)
    encode = encode_lower_graph if lower else encode_upper_graph
    enc = encode(fn, vx, vd, pool)
    cons = list(enc.constraints)
    cons.append(LinearConstraint(LinearExpr.var(vx), Rel.EQ, LinearExpr.constant(x)))
    cons.append(LinearConstraint(LinearExpr.var(vd), Rel.EQ, LinearExpr.constant(d)))
    return mip_feasible(MIPProblem(pool, cons))


def rational_grid(lo, hi, steps):
    lo, hi = F(lo), F(hi)
    return [lo + (hi - lo) * F(i, steps) for i in range(steps + 1)]


def check_grid_equivalence(fn, x_steps, d_steps, lower=True, upper=True):
    """Compare encoding feasibility against direct evaluation on a grid.

    Returns the number of (x, d) points checked; raises on the first mismatch.
    """
    k1, k2 = fn.domain
    xs = rational_grid(k1, k2, x_steps)
    ds = rational_grid(0, 1, d_steps)
    checked = 0
    for x in xs:
        value = fn.evaluate(x)
        for d in ds:
            if lower:
                got = graph_feasible(fn, x, d, lower=True)
                want = value >= d
                assert got == want, f"lower graph mismatch at ({x},{d}): {value}"
            if upper:
                got = graph_feasible(fn, x, d, lower=False)
                want = value <= d
                assert got == want, f"upper graph mismatch at ({x},{d}): {value}"
            checked += 1
    return checked
