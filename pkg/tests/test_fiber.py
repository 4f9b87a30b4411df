from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fiberchart.chart import Chart, ChartError, ChartEvent, EventKind, SingKind, SingType, make_arc
from fiberchart.fiber import (
    ANY_GENERIC,
    AVOID_BAND_II,
    CertificationError,
    HandleProfile,
    IndexCounts,
    admissible_intervals,
    attaching_circles,
    check_torus_identities,
    choose_theta0,
    euler_of,
    handle_profile,
    index_counts,
    is_generic,
    reduce,
)

C, D, BW, HD = SingKind.CONE, SingKind.DOT, SingKind.BOWL, SingKind.HALF_DOT


def _line(arc_id, kind, index, typ, top, bottom, tag=None):
    return make_arc(arc_id, kind, index, typ, [(1, top), (0, bottom)], tag)


def _chart():
    return Chart((
        _line("c1", C, 1, SingType.I, F(5, 8), F(3, 8)),
        _line("c2", C, 2, SingType.II, F(3, 4), F(5, 8), tag="disk:d"),
        _line("d3", D, 3, SingType.III, F(1, 8), F(0)),
        _line("bw", BW, 2, SingType.IIB, F(7, 8), F(13, 16)),
        _line("hd", HD, 0, SingType.ZERO, F(1, 4), F(1, 8)),
    ))


def test_handle_profile_counts_crossings():
    prof = handle_profile(_chart(), F(1, 2))
    assert prof.counts() == (0, 1, 0, 0)
    assert [h.arc_id for h in prof.handles] == ["c1"]
    assert prof.handles[0].t == F(1, 2)


def test_handle_profile_walks_down_in_t():
    ch = Chart((
        _line("a", C, 1, SingType.I, F(5, 8), F(3, 8)),
        _line("b", C, 2, SingType.II, F(9, 16), F(5, 16)),
    ))
    prof = handle_profile(ch, F(1, 2))
    assert [h.arc_id for h in prof.handles] == ["b", "a"]
    assert prof.counts() == (0, 1, 1, 0)


def test_bowl_iib_counts_as_two_handle_and_half_dot_as_boundary():
    prof = handle_profile(_chart(), F(27, 32))
    assert prof.h2 == 1
    prof = handle_profile(_chart(), F(3, 16))
    assert prof.boundary_h == {"HalfDot:Zero": 1}


def test_theta0_through_vertex_is_rejected():
    with pytest.raises(ChartError):
        handle_profile(_chart(), F(5, 8))
    assert not is_generic(_chart(), F(3, 8))


def test_admissible_intervals_avoid_band_type_two_arcs():
    ch = Chart((
        _line("b", C, 2, SingType.II, F(2, 5), F(1, 5), tag="band:x"),
        _line("c", C, 2, SingType.II, F(9, 10), F(7, 10), tag="disk:y"),
    ))
    assert admissible_intervals(ch) == [(F(2, 5), F(6, 5))]
    assert admissible_intervals(ch, ANY_GENERIC) == [(F(0), F(1))]


def test_admissible_intervals_avoid_bowls():
    ch = Chart((_line("w", BW, 2, SingType.IIB, F(3, 4), F(1, 2)),))
    assert admissible_intervals(ch) == [(F(3, 4), F(3, 2))]


def test_choose_theta0_is_generic_and_admissible():
    ch = _chart()
    th = choose_theta0(ch, AVOID_BAND_II)
    assert is_generic(ch, th)
    (lo, hi), = admissible_intervals(ch)
    assert lo < th < hi or lo < th + 1 < hi


def test_choose_theta0_on_empty_chart():
    assert choose_theta0(Chart()) == 0


def test_index_counts():
    # boundary arcs are not counted
    assert index_counts(_chart(), F(1, 2)).as_tuple() == (0, 1, 1, 1)


def test_index_counts_refuses_event_heights():
    ch = Chart(_chart().arcs, (ChartEvent(EventKind.PAIR_CUSP, F(1, 2), F(0), ("c1", "c2")),))
    with pytest.raises(ChartError):
        index_counts(ch, F(1, 2))


@given(st.integers(0, 5), st.integers(0, 5))
def test_torus_identities(a, b):
    assert check_torus_identities(IndexCounts(a, a, b, b))
    assert not check_torus_identities(IndexCounts(a + 1, a, b, b))


def test_euler_of_handlebody_profile():
    # genus-2 base surface times an interval plus two 2-handles
    assert euler_of(2, HandleProfile(0, 0, 2, 0)) == -1
    assert euler_of(0, HandleProfile()) == 1


def _profile_with(ones, twos):
    ch = Chart(tuple(
        [_line(f"a{i}", C, 1, SingType.I, F(5, 8) + F(i, 100), F(3, 8) + F(i, 100), tag="band:b") for i in range(ones)]
        + [_line(f"b{i}", C, 2, SingType.II, F(5, 8) + F(i, 100) + F(1, 200), F(3, 8) + F(i, 100) + F(1, 200),
                 tag=f"disk:d{i}") for i in range(twos)]
    ))
    return handle_profile(ch, F(1, 2))


def test_reduce_certifies_matched_profile():
    prof = _profile_with(1, 3)
    cert = [(prof.of_index(1)[0].id, prof.of_index(2)[0].id)]
    assert reduce(prof, cert, 2) == 2
    assert len(attaching_circles(prof, cert)) == 2


def test_reduce_rejects_unpaired_one_handles():
    prof = _profile_with(2, 3)
    cert = [(prof.of_index(1)[0].id, prof.of_index(2)[0].id)]
    with pytest.raises(CertificationError, match="unpaired"):
        reduce(prof, cert, 1)


def test_reduce_rejects_reused_two_handles():
    prof = _profile_with(2, 3)
    one, two = prof.of_index(1), prof.of_index(2)
    cert = [(one[0].id, two[0].id), (one[1].id, two[0].id)]
    with pytest.raises(CertificationError, match="reused"):
        reduce(prof, cert, 1)


def test_reduce_rejects_too_few_circles():
    prof = _profile_with(1, 2)
    cert = [(prof.of_index(1)[0].id, prof.of_index(2)[0].id)]
    with pytest.raises(CertificationError, match="too few"):
        reduce(prof, cert, 2)
