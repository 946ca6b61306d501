from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzalc.linexpr import VariablePool
from fuzzalc.membership import (
    CrispStepFn,
    MembershipFunctionError,
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
from support import F, check_grid_equivalence, graph_feasible, rational_grid


def young(domain=(0, 200)):
    return left_shoulder(domain, 10, 30)


def high():
    return right_shoulder((0, 400), 80, 250)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_young_midslope():
    assert young().evaluate(20) == F(1, 2)


def test_young_plateau():
    assert young().evaluate(5) == 1


def test_high_at_243():
    # (243 - 80) / (250 - 80)
    assert high().evaluate(243) == F(163, 170)


def test_out_of_domain_rejected():
    with pytest.raises(MembershipFunctionError):
        young((0, 30)).evaluate(31)


def test_triangle_equals_degenerate_trapezoid():
    t1 = triangle((0, 10), 2, 5, 9)
    t2 = trapezoid((0, 10), 2, 5, 5, 9)
    for x in rational_grid(0, 10, 40):
        assert t1.evaluate(x) == t2.evaluate(x)


def test_left_shoulder_is_young():
    fn = young((0, 200))
    table = [(0, 1), (10, 1), (20, F(1, 2)), (30, 0), (200, 0)]
    for x, v in table:
        assert fn.evaluate(x) == v


def test_right_shoulder_endpoints():
    fn = high()
    assert fn.evaluate(80) == 0
    assert fn.evaluate(250) == 1


def test_shape_parameter_validation():
    with pytest.raises(MembershipFunctionError):
        trapezoid((0, 10), 5, 3, 6, 8)
    with pytest.raises(MembershipFunctionError):
        triangle((0, 10), 2, 5, 12)
    with pytest.raises(MembershipFunctionError):
        trapezoid((0, 10), 2, 2, 5, 8)  # jump 0 -> 1 at 2: discontinuous


def test_crisp_leq_values():
    fn = make_crisp("<=", 18, F(1, 10), (0, 150))
    assert fn.evaluate(18) == 1
    assert fn.evaluate(F(181, 10)) == 0
    assert fn.evaluate(18 + F(1, 20)) == F(1, 2)


def test_crisp_eq_spike():
    fn = make_crisp("=", 243, F(1, 10), (0, 400))
    assert fn.evaluate(243) == 1
    assert fn.evaluate(242) == 0


def test_crisp_validation():
    with pytest.raises(MembershipFunctionError):
        make_crisp("<=", 18, 0, (0, 150))
    with pytest.raises(MembershipFunctionError):
        make_crisp("<=", 150, F(1, 10), (0, 150))  # ramp exits domain
    with pytest.raises(MembershipFunctionError):
        make_crisp(">", 18, F(1, 10), (0, 150))


def test_step_values():
    fn = CrispStepFn("<=", F(18), F(0), F(200))
    assert fn.evaluate(18) == 1
    assert fn.evaluate(F(361, 20)) == 0
    ge = CrispStepFn(">=", F(350), F(0), F(400))
    assert ge.evaluate(350) == 1
    assert ge.evaluate(F(6999, 20)) == 0


def test_builtin_very_shape():
    fn = builtin_very()
    assert fn.domain == (0, 1)
    assert fn.evaluate(F(3, 4)) == F(1, 2)
    assert fn.evaluate(F(9, 17)) == F(6, 17)
    assert fn.evaluate(F(163, 170)) == F(78, 85)
    assert fn.evaluate(1) == 1


def test_polyline_merges_collinear():
    fn = from_polyline([(0, 0), (1, F(1, 2)), (2, 1), (3, 1)])
    assert len(fn.pieces) == 2  # the two rising segments share one line


def test_polyline_rejects_jump():
    with pytest.raises(MembershipFunctionError):
        from_polyline([(0, 0), (1, 0), (1, 1), (2, 1)])


def test_range_outside_unit_interval_rejected():
    with pytest.raises(MembershipFunctionError):
        from_polyline([(0, 0), (1, 2)])


# ---------------------------------------------------------------------------
# graph encodings
# ---------------------------------------------------------------------------


def test_constant_one_lower_graph_everywhere():
    fn = from_polyline([(0, 1), (1, 1)])
    for x in rational_grid(0, 1, 4):
        for d in rational_grid(0, 1, 4):
            assert graph_feasible(fn, x, d, lower=True)


def test_young_lower_graph_points():
    fn = young((0, 30))
    assert graph_feasible(fn, 20, F(1, 4), lower=True)
    assert not graph_feasible(fn, 20, F(3, 4), lower=True)


def test_young_upper_graph_points():
    fn = young((0, 30))
    assert graph_feasible(fn, 20, F(1, 2), lower=False)
    assert not graph_feasible(fn, 5, 0, lower=False)


def test_constant_zero_upper_graph_everywhere():
    fn = from_polyline([(0, 0), (1, 0)])
    for d in rational_grid(0, 1, 4):
        assert graph_feasible(fn, F(1, 2), d, lower=False)


def test_young_upper_graph_block_matches_published_form():
    """The two-piece upper graph of Young on [0,30] must use one control and
    contain the blended rows x2 >= 1-y, x1 <= 10+20y, x1 >= 10y, x1+20x2 >= 30y."""
    pool = VariablePool()
    vx = pool.new_continuous("x1", 0, 30)
    vd = pool.new_continuous("x2", 0, 1)
    enc = encode_upper_graph(young((0, 30)), vx, vd, pool, label="Y")
    assert len(enc.controls) == 1
    names = pool.names()
    rendered = {c.render(names) for c in enc.constraints}
    y = names[enc.controls[0]]
    expected = {
        f"1*x2 + 1*{y} >= 1",
        f"1*x1 + -20*{y} <= 10",
        f"1*x1 + -10*{y} >= 0",
        f"1*x1 + 20*x2 + -30*{y} >= 0",
    }
    assert expected <= rendered
    # plus only the domain rows
    extra = rendered - expected
    assert extra == {
        "1*x1 >= 0",
        "1*x1 <= 30",
        "1*x2 >= 0",
        "1*x2 <= 1",
    }


def test_control_budget():
    # five pieces (zero plateau, rise, top, fall, zero plateau): four controls
    fn = trapezoid((0, 100), 10, 20, 30, 40)
    pool = VariablePool()
    vx = pool.new_continuous("x", 0, 100)
    vd = pool.new_continuous("d", 0, 1)
    assert len(fn.pieces) == 5
    assert len(encode_lower_graph(fn, vx, vd, pool).controls) == 4
    # Young extended over [0,200] has three pieces: two controls
    fn2 = young((0, 200))
    assert len(fn2.pieces) == 3
    pool2 = VariablePool()
    vx2 = pool2.new_continuous("x", 0, 200)
    vd2 = pool2.new_continuous("d", 0, 1)
    assert len(encode_upper_graph(fn2, vx2, vd2, pool2).controls) == 2


def test_step_lower_graph_exact():
    fn = CrispStepFn("<=", F(18), F(0), F(200))
    for x in [0, 17, 18, F(361, 20), 19, 200]:
        for d in rational_grid(0, 1, 4):
            want = fn.evaluate(x) >= d
            assert graph_feasible(fn, x, d, lower=True) == want, (x, d)
    ge = CrispStepFn(">=", F(350), F(0), F(400))
    for x in [0, 349, 350, 400]:
        for d in [F(0), F(1, 2), F(1)]:
            assert graph_feasible(ge, x, d, lower=True) == (ge.evaluate(x) >= d)


def test_step_upper_graph_unsupported():
    fn = CrispStepFn("<=", F(18), F(0), F(200))
    pool = VariablePool()
    vx = pool.new_continuous("x", 0, 200)
    vd = pool.new_continuous("d", 0, 1)
    with pytest.raises(MembershipFunctionError):
        encode_upper_graph(fn, vx, vd, pool)


def test_grid_equivalence_small():
    # the heavyweight >=1000-point sweep lives in the acceptance suite;
    # here a coarse sweep over every shape family keeps the unit tests fast
    shapes = [
        trapezoid((0, 40), 5, 10, 20, 30),
        triangle((0, 12), 2, 5, 9),
        young((0, 200)),
        high(),
        make_crisp("<=", 6, F(1, 2), (0, 12)),
        builtin_very(),
    ]
    for fn in shapes:
        check_grid_equivalence(fn, x_steps=8, d_steps=4)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=12),
            st.fractions(min_value=0, max_value=1),
        ),
        min_size=2,
        max_size=5,
    )
)
def test_polyline_evaluation_stays_in_unit_interval(points):
    points = sorted(points)
    xs = [x for x, _ in points]
    if len(set(xs)) < 2:
        return
    dedup = {}
    for x, y in points:
        dedup.setdefault(x, y)
    pts = sorted(dedup.items())
    fn = from_polyline(pts)
    for x in rational_grid(pts[0][0], pts[-1][0], 7):
        assert 0 <= fn.evaluate(x) <= 1
    # continuity at interior breakpoints
    for a, b in zip(fn.pieces, fn.pieces[1:]):
        assert a.value(b.lo) == b.value(b.lo)
