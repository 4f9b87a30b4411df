import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiberchart.chart import validate_chart
from fiberchart.fiber import CertificationError, check_torus_identities, index_counts
from fiberchart.ribbon import (
    Incidence,
    PipelineError,
    PresentationError,
    brute_force_perfect,
    build_chart,
    compile_movie,
    concordance_report,
    example_presentations,
    fiber_report,
    glue_double,
    hall_check,
    incidence_of,
    perfect_matching,
    phase_heights,
    presentation,
    presentation_from_dict,
    presentation_to_dict,
    validate_presentation,
)

from helpers import random_presentation


@st.composite
def _graphs(draw, n_max=5):
    n = draw(st.integers(0, n_max))
    cells = [(i, j) for i in range(n + 1) for j in range(n)]
    edges = draw(st.sets(st.sampled_from(cells))) if cells else set()
    return Incidence(n, n + 1, frozenset(edges))


@settings(max_examples=400)
@given(_graphs())
def test_hall_check_agrees_with_brute_force(g):
    assert hall_check(g).ok == brute_force_perfect(g)


@settings(max_examples=200)
@given(_graphs())
def test_hall_violator_is_a_witness(g):
    res = hall_check(g)
    if not res.ok:
        assert len(g.neighbours(res.violator)) < len(res.violator)


@settings(max_examples=200)
@given(_graphs())
def test_perfect_matching_uses_edges_once(g):
    if not hall_check(g).ok:
        with pytest.raises(PresentationError):
            perfect_matching(g)
        return
    m = perfect_matching(g)
    assert sorted(j for j, _ in m.pairs) == list(range(g.n_bands))
    assert len({i for _, i in m.pairs}) == g.n_bands
    assert all((i, j) in g.edges for j, i in m.pairs)
    assert len(m.leftover) == g.n_disks - g.n_bands


def test_hall_check_exhaustive_for_two_bands():
    cells = [(i, j) for i in range(3) for j in range(2)]
    for r in range(len(cells) + 1):
        for edges in itertools.combinations(cells, r):
            g = Incidence(2, 3, frozenset(edges))
            assert hall_check(g).ok == brute_force_perfect(g)


def test_fusion_band_fails_hall():
    # both bands meet only the first disk
    p = presentation(1, [[1, 1], [0, 0], [0, 0]])
    rep = validate_presentation(p)
    assert not rep.valid
    assert "Hall" in rep.errors[0]
    with pytest.raises(PipelineError) as exc:
        fiber_report(p)
    assert exc.value.stage == "validate"


def test_validate_presentation_structural_errors():
    assert "disks" in validate_presentation(presentation(0, [[1]])).errors[0]
    assert not validate_presentation(presentation(-1, [[1], [0]])).valid
    assert not validate_presentation(presentation(0, [[1], [0]], transverse=[False])).valid
    assert not validate_presentation(presentation(0, [[-1], [1]])).valid


def test_genus_bound_is_enforced():
    rep = validate_presentation(presentation(3, [[2], [0]]))
    assert not rep.valid and "fewer than the genus" in rep.errors[0]


def test_trivial_cancellation_removes_untouched_pair():
    p = presentation(0, [[0, 0], [0, 1], [1, 0]], boundary_touch=[[True, False], [False, False], [False, False]])
    rep = validate_presentation(p)
    assert rep.valid
    assert rep.cancelled == (("d1", "b1"),)
    assert rep.reduced.n == 1


def test_presentation_dict_round_trip():
    p = presentation(2, [[2, 0], [1, 1], [0, 3]], boundary_touch=[[False, True], [False, False], [True, False]])
    assert presentation_from_dict(presentation_to_dict(p)) == p
    with pytest.raises(PresentationError):
        presentation_from_dict({"genus": "two"})


@pytest.mark.parametrize("name, genus", [("8_20", 2), ("square", 2), ("unknot", 0), ("11n_74", 2)])
def test_example_presentations_certify(name, genus):
    r = fiber_report(example_presentations()[name])
    assert r.certified
    assert r.reduced_genus == genus
    assert len(r.circles) == genus
    assert r.euler == 1 - genus


def test_820_has_two_attaching_circles_and_one_matched_disk():
    r = fiber_report(example_presentations()["8_20"])
    assert r.profile.h1 == 0 and r.profile.h2 == 2
    assert r.matching == {"b1": "d1", "leftover": ["d2"]}


def test_compiled_chart_is_valid_and_balanced_after_disks():
    p = presentation(0, [[2, 0], [0, 1], [1, 1]])
    m = perfect_matching(incidence_of(p))
    script = compile_movie(p, m)
    chart = build_chart(script)
    assert validate_chart(chart).valid
    _, t_disk = phase_heights(script)
    counts = index_counts(chart, t_disk)
    ks = sum(sum(p.incidence[m.disk_of(j)]) for j in range(p.n))
    assert counts.k1 + counts.k2 == counts.k0 + counts.k3 == 2 * p.n + ks
    assert check_torus_identities(counts)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_presentations_certify(seed):
    p = random_presentation(random.Random(seed), n_max=3, k_max=3)
    r = fiber_report(p, check=False)
    assert r.certified and r.reduced_genus == 0


def test_concordance_report_bounds_the_genus():
    r = concordance_report(presentation(2, [[2]]))
    assert r.genus_k == 2
    assert 0 <= r.genus_j <= r.genus_k
    assert r.two_handles == r.genus_k - r.genus_j


def test_glue_double_of_11n74():
    r = fiber_report(example_presentations()["11n_74"])
    g = glue_double(r, r)
    assert g.heegaard_genus == 2 and g.euler == 0


def test_glue_rejects_genus_mismatch():
    a = fiber_report(example_presentations()["8_20"])
    b = fiber_report(example_presentations()["unknot"])
    with pytest.raises(CertificationError):
        glue_double(a, b)
