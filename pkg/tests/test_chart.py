from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fiberchart.chart import (
    CUSP_PAIRS,
    RULE_CROSSING,
    RULE_DANGLING,
    RULE_EVENT,
    RULE_MALFORMED,
    RULE_SLOPE,
    RULE_VERTICAL,
    Chart,
    ChartError,
    ChartEvent,
    EventKind,
    SingKind,
    SingType,
    chart_from_dict,
    chart_to_dict,
    circle,
    crossings,
    make_arc,
    opposite_type,
    perturb,
    shortest_delta,
    slope_of,
    type_from_slope,
    validate_chart,
)

from helpers import library_blocks

C, D, HC, HD, BW = SingKind.CONE, SingKind.DOT, SingKind.HALF_CONE, SingKind.HALF_DOT, SingKind.BOWL


def test_type_from_slope_agreeing_types():
    assert type_from_slope(C, 1, 1) == SingType.I
    assert type_from_slope(C, 2, 1) == SingType.II
    assert type_from_slope(D, 0, 1) == SingType.ZERO
    assert type_from_slope(D, 3, 1) == SingType.III
    assert type_from_slope(BW, 0, 1) == SingType.IB
    assert type_from_slope(BW, 2, 1) == SingType.IIB


def test_type_from_slope_disagreeing_types():
    assert type_from_slope(C, 1, -1) == SingType.II
    assert type_from_slope(HC, 2, -1) == SingType.I
    assert type_from_slope(HD, 0, -1) == SingType.III
    assert type_from_slope(BW, 2, -1) == SingType.IB


def test_type_from_slope_rejects_bad_index():
    with pytest.raises(ChartError):
        type_from_slope(C, 0, 1)
    with pytest.raises(ChartError):
        type_from_slope(BW, 1, 1)


@given(st.sampled_from([(C, 1), (C, 2), (D, 0), (D, 3), (HC, 1), (HC, 2), (HD, 0), (HD, 3), (BW, 0), (BW, 2)]),
       st.sampled_from([1, -1]))
def test_slope_of_inverts_type_from_slope(ki, sign):
    kind, index = ki
    assert slope_of(kind, index, type_from_slope(kind, index, sign)) == sign


def test_opposite_type():
    assert opposite_type(C, SingType.I) == SingType.II
    assert opposite_type(D, SingType.III) == SingType.ZERO
    assert opposite_type(BW, SingType.IB) == SingType.IIB


def test_cusp_pairs_are_handle_neighbours():
    assert frozenset((SingType.ZERO, SingType.I)) in CUSP_PAIRS
    assert frozenset((SingType.II, SingType.III)) in CUSP_PAIRS
    assert frozenset((SingType.ZERO, SingType.III)) not in CUSP_PAIRS


@given(st.fractions(0, 1), st.fractions(0, 1))
def test_shortest_delta_range(a, b):
    a, b = circle(a), circle(b)
    d = shortest_delta(a, b)
    assert -F(1, 2) < d <= F(1, 2)
    assert circle(a + d) == b


# ---------------------------------------------------------------------------
# validation on small hand-built charts


def _cusp_chart(type_b=SingType.II, index_b=2, theta_b=F(1, 5)):
    a = make_arc("a", C, 1, SingType.I, [(F(1, 2), F(1, 2)), (0, F(3, 10))])
    b = make_arc("b", C, index_b, type_b, [(F(1, 2), F(1, 2)), (0, theta_b)])
    ev = ChartEvent(EventKind.PAIR_CUSP, F(1, 2), F(1, 2), ("a", "b"))
    return Chart((a, b), (ev,))


def test_valid_cusp():
    assert validate_chart(_cusp_chart()).valid


def test_cusp_with_mismatched_slopes_is_rejected():
    # index-2 cone of type I must move the other way
    ch = _cusp_chart(type_b=SingType.I, index_b=2, theta_b=F(7, 10))
    rep = validate_chart(ch)
    assert RULE_EVENT in rep.rules()


def test_cusp_with_non_cancelling_types_is_rejected():
    a = make_arc("a", D, 0, SingType.ZERO, [(F(1, 2), F(1, 2)), (0, F(3, 10))])
    b = make_arc("b", D, 3, SingType.III, [(F(1, 2), F(1, 2)), (0, F(1, 5))])
    ev = ChartEvent(EventKind.PAIR_CUSP, F(1, 2), F(1, 2), ("a", "b"))
    assert RULE_EVENT in validate_chart(Chart((a, b), (ev,))).rules()


def test_vertical_segment_is_rejected():
    a = make_arc("a", C, 1, SingType.I, [(1, F(1, 2)), (F(1, 2), F(1, 2)), (0, F(1, 4))])
    assert validate_chart(Chart((a,))).rules() == {RULE_VERTICAL}


def test_wrong_slope_is_rejected():
    a = make_arc("a", C, 1, SingType.I, [(1, F(1, 4)), (0, F(1, 2))])
    assert validate_chart(Chart((a,))).rules() == {RULE_SLOPE}


def test_dangling_endpoint_is_rejected():
    a = make_arc("a", C, 1, SingType.I, [(1, F(1, 2)), (F(1, 2), F(1, 4))])
    assert validate_chart(Chart((a,))).rules() == {RULE_DANGLING}


def test_half_turn_segment_is_malformed():
    a = make_arc("a", C, 1, SingType.I, [(1, F(3, 4)), (0, F(1, 4))])
    assert RULE_MALFORMED in validate_chart(Chart((a,))).rules()


def test_tangency_is_rejected_and_crossing_accepted():
    a = make_arc("a", C, 1, SingType.I, [(1, F(5, 8)), (0, F(3, 8))])
    touch = make_arc("b", C, 1, SingType.I, [(1, F(3, 4)), (F(1, 2), F(1, 2)), (0, F(7, 16))])
    assert RULE_CROSSING in validate_chart(Chart((a, touch))).rules()
    cross = make_arc("b", C, 1, SingType.I, [(1, F(9, 16)), (0, F(7, 16))])
    ch = Chart((a, cross))
    assert validate_chart(ch).valid
    assert crossings(ch) == [(F(1, 2), F(1, 2), "a", "b")]


def test_events_on_interface_are_rejected():
    ch = _cusp_chart()
    ch = Chart(ch.arcs, ch.events, (F(0), F(1, 2)))
    assert RULE_EVENT in validate_chart(ch).rules()


def test_violations_are_sorted():
    a = make_arc("a", C, 1, SingType.I, [(1, F(1, 4)), (0, F(1, 2))])
    b = make_arc("b", C, 1, SingType.I, [(1, F(1, 2)), (F(1, 2), F(1, 4))])
    vs = validate_chart(Chart((a, b))).violations
    assert [v.rule for v in vs] == sorted(v.rule for v in vs)


def test_library_charts_are_valid():
    for name, block in library_blocks():
        rep = validate_chart(block.chart)
        assert rep.valid, (name, [str(v) for v in rep.violations])


# ---------------------------------------------------------------------------
# crossings against an independent segment-intersection oracle


def _segments(arc):
    """Segments of the arc unrolled into the plane, with a lifted copy per shift."""
    pts = [arc.path[0]]
    for (_, a), (t, b) in zip(arc.path, arc.path[1:]):
        pts.append((t, pts[-1][1] + shortest_delta(a, b)))
    return list(zip(pts, pts[1:]))


def _intersect(p, q, r, s):
    # p + u (q - p) = r + v (s - r); Cramer's rule on (t, theta) coordinates
    d1 = (q[0] - p[0], q[1] - p[1])
    d2 = (s[0] - r[0], s[1] - r[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0:
        return None
    w = (r[0] - p[0], r[1] - p[1])
    u = (w[0] * d2[1] - w[1] * d2[0]) / den
    v = (w[0] * d1[1] - w[1] * d1[0]) / den
    if 0 <= u <= 1 and 0 <= v <= 1:
        return (p[0] + u * d1[0], p[1] + u * d1[1])
    return None


def _oracle_crossings(a, b):
    hits = set()
    for p, q in _segments(a):
        for r, s in _segments(b):
            for n in range(-3, 4):
                x = _intersect(p, q, (r[0], r[1] + n), (s[0], s[1] + n))
                if x is not None:
                    hits.add((x[0], circle(x[1])))
    return hits


_theta = st.fractions(0, 1, max_denominator=24).map(circle)
_step = st.fractions(F(1, 24), F(11, 24), max_denominator=24)


@st.composite
def _arc(draw, name):
    sign = draw(st.sampled_from([1, -1]))
    th = draw(_theta)
    path = [(F(1), th)]
    mid = draw(st.fractions(F(1, 8), F(7, 8), max_denominator=16))
    for t in (mid, F(0)):
        th = circle(th - sign * draw(_step))
        path.append((t, th))
    typ = SingType.I if sign > 0 else SingType.II
    return make_arc(name, C, 1, typ, path)


@settings(max_examples=300)
@given(_arc("a"), _arc("b"))
def test_crossings_match_segment_oracle(a, b):
    ch = Chart((a, b))
    try:
        found = crossings(ch)
    except ChartError:
        assume(False)
    expect = {x for x in _oracle_crossings(a, b) if 0 < x[0] < 1}
    assert {(t, th) for t, th, _, _ in found} == expect


# ---------------------------------------------------------------------------
# perturbation and serialization


def test_perturb_repairs_tangency_within_eps():
    a = make_arc("a", C, 1, SingType.I, [(1, F(5, 8)), (0, F(3, 8))])
    b = make_arc("b", C, 1, SingType.I, [(1, F(3, 4)), (F(1, 2), F(1, 2)), (0, F(7, 16))])
    eps = F(1, 100)
    out = perturb(Chart((a, b)), eps)
    assert validate_chart(out).valid
    moved = out.arc("b")
    for t, th in moved.path:
        orig = [x for x in b.path if x[0] == t]
        if orig:
            assert abs(shortest_delta(orig[0][1], th)) <= eps


def test_perturb_leaves_valid_chart_unchanged():
    ch = _cusp_chart()
    assert perturb(ch, F(1, 100)) == ch


def test_perturb_seed_changes_direction():
    a = make_arc("a", C, 1, SingType.I, [(1, F(5, 8)), (0, F(3, 8))])
    b = make_arc("b", C, 1, SingType.I, [(1, F(3, 4)), (F(1, 2), F(1, 2)), (0, F(7, 16))])
    ups = {perturb(Chart((a, b)), F(1, 100), seed=s).arc("b").path for s in range(6)}
    assert len(ups) == 2
    for s in range(6):
        assert validate_chart(perturb(Chart((a, b)), F(1, 100), seed=s)).valid


def test_perturb_is_idempotent_on_its_output():
    a = make_arc("a", C, 1, SingType.I, [(1, F(5, 8)), (0, F(3, 8))])
    b = make_arc("b", C, 1, SingType.I, [(1, F(3, 4)), (F(1, 2), F(1, 2)), (0, F(7, 16))])
    once = perturb(Chart((a, b)), F(1, 100))
    assert perturb(once, F(1, 100)) == once


def test_round_trip_library_charts():
    for _, block in library_blocks():
        ch = block.chart
        assert chart_from_dict(chart_to_dict(ch)) == ch


def test_chart_from_dict_rejects_malformed_documents():
    with pytest.raises(ChartError):
        chart_from_dict({"arcs": []})
    with pytest.raises(ChartError):
        chart_from_dict({"t_range": ["0", "1"], "arcs": [{"id": "a", "kind": "Blob"}]})
    with pytest.raises(ChartError):
        chart_from_dict({"t_range": ["0", "1"], "arcs": [
            {"id": "a", "kind": "Cone", "index": "1", "type": "I", "path": [["1", "0"], ["0", "1/2"]]}]})


def test_slice_at_reports_theta():
    a = make_arc("a", C, 1, SingType.I, [(1, F(5, 8)), (0, F(3, 8))])
    ((arc, th),) = Chart((a,)).slice_at(F(1, 2))
    assert arc.id == "a" and th == F(1, 2)
