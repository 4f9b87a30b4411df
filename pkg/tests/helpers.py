"""Shared builders for the test suite: the movie library sweep, mutations and random presentations."""

from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction as F

from fiberchart.chart import Chart, SingularityArc, _Geo, opposite_type
from fiberchart.movies import (
    BOUNDARY_MOVIES,
    INTERIOR_SINGULARITY_MOVIES,
    mirror,
    mk_band_movie,
    mk_boundary_destab,
    mk_boundary_movie,
    mk_boundary_stab,
    mk_cancel_boundary,
    mk_cancellation,
    mk_disk_movie,
    mk_interior_destab,
    mk_interior_singularity_movie,
    mk_interior_stab,
    mk_maximum,
    mk_minimum,
    mk_position,
    mk_saddle,
)
from fiberchart.ribbon import hall_check, incidence_of, presentation

PAIRS = [(0, 1), (1, 2), (2, 3)]
VARIANTS = ["agree", "disagree"]
STABS = [mk_interior_stab, mk_interior_destab, mk_boundary_stab, mk_boundary_destab]


def library_blocks() -> list[tuple[str, object]]:
    """One block per generator and parameter choice."""
    out = []
    for pair in PAIRS:
        for v in VARIANTS:
            for fn in STABS:
                out.append((f"{fn.__name__}{pair}{v}", fn(pair, v, F(1, 3))))
    for name in BOUNDARY_MOVIES:
        out.append((name, mk_boundary_movie(name, F(1, 5))))
    for name in INTERIOR_SINGULARITY_MOVIES:
        out.append((name, mk_interior_singularity_movie(name, F(2, 5))))
    out.append(("position_dot", mk_position("dot_along_arc", "x", F(1, 3))))
    out.append(("position_cone_reparam", mk_position("cone_along_arc", "x", F(1, 3), reparam=True)))
    out.append(("position_cone_disk", mk_position("cone_along_disk", "x", F(1, 3), wraps=1)))
    for kind in ("cone_halfcone", "cone_halfdot"):
        for d in ("birth", "death"):
            for r in (False, True):
                out.append((f"{kind}_{d}_{r}", mk_cancel_boundary(kind, d, reparam=r)))
    out.append(("saddle", mk_saddle(F(1, 4), F(3, 4))))
    out.append(("minimum", mk_minimum()))
    out.append(("maximum", mk_maximum()))
    out.append(("cancel_simple", mk_cancellation(True, "c", "d")))
    out.append(("cancel_generalized", mk_cancellation(False, "c", "d")))
    out.append(("cancel_index1", mk_cancellation(True, "c", "d", cone=(2, "I"), dot=(3, "Zero"))))
    out.append(("band", mk_band_movie(F(1, 2), F(1, 4))))
    for k in range(1, 7):
        out.append((f"disk{k}", mk_disk_movie(k)))
    out.append(("mirror_band", mirror(mk_band_movie(F(1, 2), F(1, 4)))))
    return out


# ---------------------------------------------------------------------------
# mutations


def _swap_arc(chart: Chart, arc: SingularityArc) -> Chart:
    return replace(chart, arcs=tuple(arc if a.id == arc.id else a for a in chart.arcs))


def mutate_vertical(chart: Chart) -> Chart:
    """Insert a vertex making the first segment of the first arc vertical."""
    a = sorted(chart.arcs, key=lambda x: x.id)[0]
    (t0, h0), (t1, _) = a.path[0], a.path[1]
    mid = (t0, h0), ((t0 + t1) / 2, h0)
    return _swap_arc(chart, replace(a, path=mid + a.path[1:]))


def mutate_flip_type(chart: Chart) -> Chart:
    a = sorted(chart.arcs, key=lambda x: x.id)[0]
    return _swap_arc(chart, replace(a, type_label=opposite_type(a.kind, a.type_label)))


def mutate_drop_member(chart: Chart) -> Chart:
    ev = chart.events[0]
    dropped = replace(ev, arcs=ev.arcs[1:])
    return replace(chart, events=(dropped,) + chart.events[1:])


def mutate_tangent(chart: Chart) -> Chart:
    """Add a short arc touching the first arc at an interior point without crossing it."""
    a = sorted(chart.arcs, key=lambda x: x.id)[0]
    g = _Geo(a)
    t_hi, t_lo = g.ts[1], g.ts[0]  # lowest segment in ascending order
    tm = (t_hi + t_lo) / 2
    h = (t_hi - t_lo) / 4
    x = g.at(tm)
    r = (g.at(t_hi) - g.at(t_lo)) / (t_hi - t_lo)
    path = ((tm + h, x + 2 * r * h), (tm, x), (tm - h, x - r * h / 2))
    path = tuple((t, th % 1) for t, th in path)
    touch = replace(a, id=a.id + "~touch", path=path)
    return replace(chart, arcs=chart.arcs + (touch,))


# ---------------------------------------------------------------------------
# presentations


def random_presentation(rng: random.Random, n_max: int = 5, k_max: int = 4, genus=None):
    """A Hall-valid presentation with n <= n_max bands and entries <= k_max."""
    while True:
        n = rng.randint(1, n_max)
        inc = [[rng.randint(1, k_max) if rng.random() < 0.5 else 0 for _ in range(n)] for _ in range(n + 1)]
        p = presentation(0, inc)
        if not hall_check(incidence_of(p)).ok:
            continue
        return p if genus is None else presentation(genus, inc)
