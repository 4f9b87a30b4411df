"""Singularity charts: typed arcs in the (theta, t) cylinder and their validity.

A chart lives in S^1 x [t_lo, t_hi].  The horizontal coordinate theta is an
exact rational taken mod 1; t decreases along every arc.  Arcs are
piecewise linear.  A segment is read as the short way round the circle, so
every segment must move strictly less than half a turn.

Slope convention: an arc has positive slope when theta decreases as t
decreases.  Positive slope means the type agrees with the index.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

HALF = Fraction(1, 2)


class SingKind(str, Enum):
    CONE = "Cone"
    DOT = "Dot"
    HALF_CONE = "HalfCone"
    HALF_DOT = "HalfDot"
    BOWL = "Bowl"

    @property
    def boundary(self) -> bool:
        return self in (SingKind.HALF_CONE, SingKind.HALF_DOT, SingKind.BOWL)


class SingType(str, Enum):
    ZERO = "Zero"
    I = "I"
    II = "II"
    III = "III"
    IB = "IB"
    IIB = "IIB"


class EventKind(str, Enum):
    PAIR_CUSP = "PairCusp"
    PAIR_EXTREMUM = "PairExtremum"
    TRIPLE_JOIN = "TripleJoin"
    BOUNDARY_CONVERSION = "BoundaryConversion"


# kind -> (index with agreeing type, ...) ; Table-1 rows
_AGREE = {
    SingKind.CONE: {1: SingType.I, 2: SingType.II},
    SingKind.HALF_CONE: {1: SingType.I, 2: SingType.II},
    SingKind.DOT: {0: SingType.ZERO, 3: SingType.III},
    SingKind.HALF_DOT: {0: SingType.ZERO, 3: SingType.III},
    SingKind.BOWL: {0: SingType.IB, 2: SingType.IIB},
}

HANDLE = {
    SingType.ZERO: 0,
    SingType.I: 1,
    SingType.IB: 1,
    SingType.II: 2,
    SingType.IIB: 2,
    SingType.III: 3,
}

# unordered type pairs that may meet at a cusp
CUSP_PAIRS = frozenset(
    frozenset(p)
    for p in [
        (SingType.ZERO, SingType.I),
        (SingType.I, SingType.II),
        (SingType.II, SingType.III),
        (SingType.IB, SingType.II),
        (SingType.I, SingType.IIB),
    ]
)

RULE_VERTICAL = "vertical arc"
RULE_SLOPE = "slope/type"
RULE_DANGLING = "dangling endpoint"
RULE_EVENT = "event configuration"
RULE_CROSSING = "non-transverse crossing"
RULE_MALFORMED = "malformed arc"


class ChartError(ValueError):
    """Raised for inadmissible singularity data or irreparable charts."""


def circle(x) -> Fraction:
    """Reduce a rational to its CirclePos representative in [0, 1)."""
    return Fraction(x) % 1


def admissible_indices(kind: SingKind) -> tuple[int, ...]:
    return tuple(sorted(_AGREE[SingKind(kind)]))


def type_from_slope(kind: SingKind, index: int, slope_sign: int) -> SingType:
    """Type of a singularity from its index and the sign of its chart slope."""
    kind = SingKind(kind)
    table = _AGREE[kind]
    if index not in table:
        raise ChartError(f"index {index} is not admissible for {kind.value}")
    if slope_sign not in (1, -1):
        raise ChartError("slope sign must be +1 or -1")
    if slope_sign > 0:
        return table[index]
    other = [i for i in table if i != index][0]
    return table[other]


def slope_of(kind: SingKind, index: int, type_label: SingType) -> int:
    """Slope sign demanded by (kind, index, type); raises if inconsistent."""
    for s in (1, -1):
        if type_from_slope(kind, index, s) == SingType(type_label):
            return s
    raise ChartError(f"type {SingType(type_label).value} impossible for {SingKind(kind).value}")


def opposite_type(kind: SingKind, type_label: SingType) -> SingType:
    """The Table-1 partner type for the same kind."""
    table = _AGREE[SingKind(kind)]
    types = list(table.values())
    if type_label not in types:
        raise ChartError(f"type {type_label} impossible for {kind}")
    return types[1] if types[0] == type_label else types[0]


def partner_index(kind: SingKind, index: int) -> int:
    return [i for i in _AGREE[SingKind(kind)] if i != index][0]


def arc_admissible(kind: SingKind, index: int, type_label: SingType) -> bool:
    table = _AGREE.get(SingKind(kind))
    return index in table and SingType(type_label) in table.values()


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class SingularityArc:
    id: str
    kind: SingKind
    index: int
    type_label: SingType
    path: tuple[tuple[Fraction, Fraction], ...]
    boundary: bool
    tag: str | None = None

    @property
    def top(self) -> tuple[Fraction, Fraction]:
        return self.path[0]

    @property
    def bottom(self) -> tuple[Fraction, Fraction]:
        return self.path[-1]

    @property
    def slope_sign(self) -> int:
        return slope_of(self.kind, self.index, self.type_label)


@dataclass(frozen=True)
class ChartEvent:
    kind: EventKind
    t: Fraction
    theta: Fraction
    arcs: tuple[str, ...]

    @property
    def label(self) -> str:
        return f"{self.kind.value}@{self.t},{self.theta}"


@dataclass(frozen=True)
class Chart:
    arcs: tuple[SingularityArc, ...] = ()
    events: tuple[ChartEvent, ...] = ()
    t_range: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))

    def arc(self, arc_id: str) -> SingularityArc:
        for a in self.arcs:
            if a.id == arc_id:
                return a
        raise KeyError(arc_id)

    def slice_at(self, t) -> list[tuple[SingularityArc, Fraction]]:
        """Arcs meeting the horizontal line at height t, with their theta."""
        t = Fraction(t)
        out = []
        for a in self.arcs:
            if a.bottom[0] <= t <= a.top[0]:
                out.append((a, circle(_Geo(a).at(t))))
        out.sort(key=lambda p: (p[1], p[0].id))
        return out


@dataclass(frozen=True)
class Violation:
    subject: str
    rule: str
    t: Fraction
    theta: Fraction
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.subject} at (t={self.t}, theta={self.theta}): {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}


def make_arc(
    arc_id: str,
    kind,
    index: int,
    type_label,
    path: Iterable[tuple],
    tag: str | None = None,
) -> SingularityArc:
    kind = SingKind(kind)
    pts = tuple((Fraction(t), circle(th)) for t, th in path)
    return SingularityArc(arc_id, kind, index, SingType(type_label), pts, kind.boundary, tag)


# ---------------------------------------------------------------------------
# geometry


def shortest_delta(a: Fraction, b: Fraction) -> Fraction:
    """Signed displacement from a to b on R/Z, in (-1/2, 1/2]."""
    d = (b - a) % 1
    if d > HALF:
        d -= 1
    return d


class _Geo:
    """An arc as a continuous lifted function theta(t)."""

    __slots__ = ("arc", "ts", "ths", "lo", "hi", "th_min", "th_max")

    def __init__(self, arc: SingularityArc):
        self.arc = arc
        ts = [p[0] for p in arc.path]
        ths = [arc.path[0][1]]
        for (_, a), (_, b) in zip(arc.path, arc.path[1:]):
            ths.append(ths[-1] + shortest_delta(a, b))
        # ascending t for bisect
        self.ts = ts[::-1]
        self.ths = ths[::-1]
        self.lo = self.ts[0]
        self.hi = self.ts[-1]
        self.th_min = min(ths)
        self.th_max = max(ths)

    def at(self, t: Fraction) -> Fraction:
        ts = self.ts
        i = bisect.bisect_left(ts, t)
        if i < len(ts) and ts[i] == t:
            return self.ths[i]
        if i == 0 or i == len(ts):
            raise ChartError(f"t={t} outside arc {self.arc.id}")
        t0, t1 = ts[i - 1], ts[i]
        h0, h1 = self.ths[i - 1], self.ths[i]
        return h0 + (h1 - h0) * (t - t0) / (t1 - t0)

    def covers_circle(self) -> bool:
        return self.th_max - self.th_min >= 1


def _footprints_meet(a: _Geo, b: _Geo) -> bool:
    if a.covers_circle() or b.covers_circle():
        return True
    lo = math.ceil(a.th_min - b.th_max)
    hi = math.floor(a.th_max - b.th_min)
    return lo <= hi


@dataclass(frozen=True)
class Contact:
    """A point (or stretch) where two arcs share a theta value."""

    a: str
    b: str
    t: Fraction
    theta: Fraction
    kind: str  # "cross", "touch", "overlap", "endpoint"
    t_end: Fraction | None = None


def _window(g: _Geo, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Vertices of g restricted to [lo, hi], with interpolated ends."""
    i = bisect.bisect_right(g.ts, lo)
    j = bisect.bisect_left(g.ts, hi)
    pts = [(lo, g.at(lo))]
    pts.extend((g.ts[k], g.ths[k]) for k in range(i, j))
    if hi != lo:
        pts.append((hi, g.at(hi)))
    return pts


def _sample(pts: list[tuple[Fraction, Fraction]], ts: list[Fraction]) -> list[Fraction]:
    """Piecewise-linear values of pts at the ascending times ts, all within range."""
    out = []
    k = 0
    for t in ts:
        while pts[k + 1][0] < t:
            k += 1
        (t0, h0), (t1, h1) = pts[k], pts[k + 1]
        out.append(h1 if t == t1 else h0 + (h1 - h0) * (t - t0) / (t1 - t0))
    return out


def _pair_contacts(a: _Geo, b: _Geo) -> list[Contact]:
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi or not _footprints_meet(a, b):
        return []
    ida, idb = a.arc.id, b.arc.id
    if lo == hi:
        f = a.at(lo) - b.at(lo)
        if f.denominator == 1:
            return [Contact(ida, idb, lo, circle(a.at(lo)), "endpoint")]
        return []
    wa, wb = _window(a, lo, hi), _window(b, lo, hi)
    amin, amax = min(p[1] for p in wa), max(p[1] for p in wa)
    bmin, bmax = min(p[1] for p in wb), max(p[1] for p in wb)
    if math.ceil(amin - bmax) > math.floor(amax - bmin):
        return []
    ts = sorted({p[0] for p in wa} | {p[0] for p in wb})
    fs = [x - y for x, y in zip(_sample(wa, ts), _sample(wb, ts))]
    out: list[Contact] = []
    zeros: dict[Fraction, int] = {}
    overlap_pts: set[Fraction] = set()
    for i in range(len(ts) - 1):
        f0, f1 = fs[i], fs[i + 1]
        if f0 == f1:
            if f0.denominator == 1:
                out.append(Contact(ida, idb, ts[i + 1], circle(a.at(ts[i + 1])), "overlap", ts[i]))
                overlap_pts.update((ts[i], ts[i + 1]))
            continue
        for n in range(math.ceil(min(f0, f1)), math.floor(max(f0, f1)) + 1):
            tz = ts[i] + (n - f0) * (ts[i + 1] - ts[i]) / (f1 - f0)
            zeros[tz] = n
    for tz in sorted(zeros):
        if tz in overlap_pts:
            continue
        n = zeros[tz]
        th = circle(a.at(tz))
        if tz == lo or tz == hi:
            out.append(Contact(ida, idb, tz, th, "endpoint"))
            continue
        j = bisect.bisect_left(ts, tz)
        below_t = ts[j - 1] if ts[j] == tz else ts[j - 1]
        above_t = ts[j + 1] if ts[j] == tz else ts[j]
        fb = a.at((tz + below_t) / 2) - b.at((tz + below_t) / 2) - n
        fa = a.at((tz + above_t) / 2) - b.at((tz + above_t) / 2) - n
        kind = "cross" if (fa > 0) != (fb > 0) else "touch"
        out.append(Contact(ida, idb, tz, th, kind))
    return out


def _all_contacts(chart: Chart) -> list[Contact]:
    geos = sorted((_Geo(a) for a in chart.arcs), key=lambda g: g.arc.id)
    out = []
    for i, ga in enumerate(geos):
        for gb in geos[i + 1 :]:
            out.extend(_pair_contacts(ga, gb))
    return out


def _endpoint_events(chart: Chart) -> dict[tuple[str, Fraction, Fraction], list[ChartEvent]]:
    ends: dict[tuple[str, Fraction, Fraction], list[ChartEvent]] = {}
    for ev in chart.events:
        for aid in ev.arcs:
            ends.setdefault((aid, ev.t, ev.theta), []).append(ev)
    return ends


def _contact_allowed(chart: Chart, c: Contact, ends, arcs_by_id) -> bool:
    if c.kind == "cross":
        return True
    if c.kind != "endpoint":
        return False
    a, b = arcs_by_id[c.a], arcs_by_id[c.b]
    pa = [p for p in (a.top, a.bottom) if p[0] == c.t and p[1] == c.theta]
    pb = [p for p in (b.top, b.bottom) if p[0] == c.t and p[1] == c.theta]
    if not pa or not pb:
        return False
    ea = {id(e) for e in ends.get((a.id, c.t, c.theta), [])}
    eb = {id(e) for e in ends.get((b.id, c.t, c.theta), [])}
    return bool(ea & eb)


def crossings(chart: Chart) -> list[tuple[Fraction, Fraction, str, str]]:
    """All transverse interior crossings as (t, theta, arc_id, arc_id).

    Raises ChartError on a tangency, an overlap, or an endpoint lying on
    another arc; such charts must be perturbed first.
    """
    ends = _endpoint_events(chart)
    by_id = {a.id: a for a in chart.arcs}
    out = []
    for c in _all_contacts(chart):
        if c.kind == "cross":
            out.append((c.t, c.theta, c.a, c.b))
        elif not _contact_allowed(chart, c, ends, by_id):
            raise ChartError(f"{c.kind} contact between {c.a} and {c.b} at t={c.t}, theta={c.theta}")
    out.sort(key=lambda x: (-x[0], x[1], x[2], x[3]))
    return out


# ---------------------------------------------------------------------------
# validation


def _side(arc: SingularityArc, ev: ChartEvent) -> str | None:
    if arc.top == (ev.t, ev.theta):
        return "below"
    if arc.bottom == (ev.t, ev.theta):
        return "above"
    return None


def _safe_slope(arc: SingularityArc) -> int | None:
    try:
        return arc.slope_sign
    except ChartError:
        return None


def _check_event(ev: ChartEvent, members: list[SingularityArc], sides: list[str]) -> str | None:
    kind = ev.kind
    slopes = [_safe_slope(m) for m in members]
    if None in slopes:
        return "member arc has inadmissible labels"
    if kind in (EventKind.PAIR_CUSP, EventKind.PAIR_EXTREMUM) and len(members) != 2:
        return f"{kind.value} needs exactly two arcs"
    if kind == EventKind.PAIR_CUSP:
        a, b = members
        if sides[0] != sides[1]:
            return "cusp arcs must lie on the same side in t"
        if a.boundary != b.boundary:
            return "cusp joins an interior and a boundary arc"
        if slopes[0] != slopes[1]:
            return "cusp arcs must share a slope sign"
        if frozenset((a.type_label, b.type_label)) not in CUSP_PAIRS:
            return f"types ({a.type_label.value},{b.type_label.value}) do not cancel"
        return None
    if kind == EventKind.PAIR_EXTREMUM:
        a, b = members
        if sides[0] != sides[1]:
            return "extremum arcs must lie on the same side in t"
        if a.kind != b.kind or a.type_label != b.type_label:
            return "extremum arcs must share kind and type"
        if a.index == b.index:
            return "extremum arcs must have opposite indices"
        return None
    if kind == EventKind.BOUNDARY_CONVERSION and len(members) == 2:
        a, b = members
        if sides[0] == sides[1]:
            return "conversion arcs must lie on opposite sides in t"
        if a.boundary == b.boundary:
            return "conversion needs one interior and one boundary arc"
        inner, outer = (a, b) if not a.boundary else (b, a)
        pairs = {(SingKind.CONE, SingKind.HALF_CONE), (SingKind.DOT, SingKind.HALF_DOT)}
        if (inner.kind, outer.kind) not in pairs:
            return "conversion kinds do not correspond"
        if inner.index != outer.index:
            return "conversion must preserve the index"
        return None
    if kind in (EventKind.TRIPLE_JOIN, EventKind.BOUNDARY_CONVERSION):
        if len(members) != 3:
            return f"{kind.value} needs three arcs"
        ups = [m for m, s in zip(members, sides) if s == "above"]
        downs = [m for m, s in zip(members, sides) if s == "below"]
        if len(ups) == 1:
            cont, pair = ups[0], downs
        elif len(downs) == 1:
            cont, pair = downs[0], ups
        else:
            return "three arcs on one side"
        if not cont.boundary:
            return "continuation arc must be a boundary arc"
        inner = [m for m in pair if not m.boundary]
        outer = [m for m in pair if m.boundary]
        if len(inner) != 1 or len(outer) != 1:
            return "joined pair must be one interior and one boundary arc"
        inner, outer = inner[0], outer[0]
        if inner.slope_sign != outer.slope_sign:
            return "joined pair must share a slope sign"
        k, j = HANDLE[inner.type_label], HANDLE[outer.type_label]
        if abs(k - j) != 1:
            return f"handles {k} and {j} do not cancel"
        if HANDLE[cont.type_label] not in (k, j):
            return f"continuation handle {HANDLE[cont.type_label]} not in {{{k},{j}}}"
        if kind == EventKind.BOUNDARY_CONVERSION:
            if inner.kind != SingKind.CONE:
                return "conversion needs an interior cone"
            if outer.kind == SingKind.HALF_CONE:
                if cont.kind != SingKind.HALF_CONE or cont.index != inner.index:
                    return "cone and half-cone must continue as a half-cone of the cone's index"
            elif outer.kind == SingKind.HALF_DOT:
                if cont.kind != SingKind.BOWL:
                    return "cone and half-dot must continue as a bowl"
            else:
                return "conversion partner must be a half-cone or half-dot"
        return None
    return "unknown event kind"


def validate_chart(chart: Chart) -> ValidationReport:
    """Check every validity rule; all problems become report entries."""
    vs: list[Violation] = []
    t_lo, t_hi = chart.t_range
    seen_ids: set[str] = set()
    good_arcs = []
    for a in chart.arcs:
        loc = a.path[0] if a.path else (t_hi, Fraction(0))
        if a.id in seen_ids:
            vs.append(Violation(a.id, RULE_MALFORMED, loc[0], loc[1], "duplicate arc id"))
            continue
        seen_ids.add(a.id)
        if len(a.path) < 2:
            vs.append(Violation(a.id, RULE_MALFORMED, loc[0], loc[1], "path needs two points"))
            continue
        if any(t1 >= t0 for (t0, _), (t1, _) in zip(a.path, a.path[1:])):
            vs.append(Violation(a.id, RULE_MALFORMED, loc[0], loc[1], "t must strictly decrease"))
            continue
        if a.top[0] > t_hi or a.bottom[0] < t_lo:
            vs.append(Violation(a.id, RULE_MALFORMED, loc[0], loc[1], "path leaves the chart t-range"))
            continue
        if a.boundary != a.kind.boundary:
            vs.append(Violation(a.id, RULE_MALFORMED, loc[0], loc[1], "boundary flag contradicts kind"))
        if not arc_admissible(a.kind, a.index, a.type_label):
            vs.append(
                Violation(a.id, RULE_SLOPE, loc[0], loc[1],
                          f"({a.kind.value}, {a.index}, {a.type_label.value}) is inadmissible")
            )
            continue
        want = a.slope_sign
        bad_geom = False
        for (t0, h0), (t1, h1) in zip(a.path, a.path[1:]):
            d = shortest_delta(h0, h1)
            if d == 0:
                vs.append(Violation(a.id, RULE_VERTICAL, t1, h1, "segment has constant theta"))
                bad_geom = True
                break
            if d == HALF:
                vs.append(Violation(a.id, RULE_MALFORMED, t1, h1, "segment spans half a turn"))
                bad_geom = True
                break
        if not bad_geom:
            for (t0, h0), (t1, h1) in zip(a.path, a.path[1:]):
                sign = -1 if shortest_delta(h0, h1) > 0 else 1
                if sign != want:
                    vs.append(
                        Violation(a.id, RULE_SLOPE, t1, h1,
                                  f"slope sign {sign:+d} contradicts type {a.type_label.value}")
                    )
                    break
            good_arcs.append(a)

    by_id = {a.id: a for a in chart.arcs}
    incident: dict[tuple[str, str], list[ChartEvent]] = {}
    for ev in chart.events:
        if not (t_lo < ev.t < t_hi):
            vs.append(Violation(ev.label, RULE_EVENT, ev.t, ev.theta, "event on the chart's top or bottom slice"))
        members = []
        sides = []
        problem = None
        if len(set(ev.arcs)) != len(ev.arcs):
            problem = "repeated member"
        for aid in ev.arcs:
            arc = by_id.get(aid)
            if arc is None or len(arc.path) < 2:
                problem = problem or f"unknown arc {aid}"
                continue
            side = _side(arc, ev)
            if side is None:
                problem = problem or f"arc {aid} has no endpoint here"
                continue
            members.append(arc)
            sides.append(side)
            incident.setdefault((aid, side), []).append(ev)
        if problem is None:
            problem = _check_event(ev, members, sides)
        if problem:
            vs.append(Violation(ev.label, RULE_EVENT, ev.t, ev.theta, problem))

    for a in good_arcs:
        for end, side, bound in ((a.top, "below", t_hi), (a.bottom, "above", t_lo)):
            evs = incident.get((a.id, side), [])
            if end[0] == bound:
                if evs:
                    vs.append(Violation(a.id, RULE_EVENT, end[0], end[1], "interface endpoint used by an event"))
                continue
            if not evs:
                vs.append(Violation(a.id, RULE_DANGLING, end[0], end[1], "endpoint belongs to no event"))
            elif len(evs) > 1:
                vs.append(Violation(a.id, RULE_EVENT, end[0], end[1], "endpoint belongs to several events"))

    clean = Chart(tuple(good_arcs), chart.events, chart.t_range)
    ends = _endpoint_events(clean)
    for c in _all_contacts(clean):
        if not _contact_allowed(clean, c, ends, by_id):
            vs.append(Violation(f"{c.a}|{c.b}", RULE_CROSSING, c.t, c.theta, f"{c.kind} contact"))

    vs.sort(key=lambda v: (v.rule, v.subject, -v.t, v.theta, v.message))
    return ValidationReport(tuple(vs))


# ---------------------------------------------------------------------------
# perturbation


def _bump(arc: SingularityArc, t_top: Fraction, t_bot: Fraction, budget: Fraction, sign: int = 1) -> SingularityArc:
    """Shift the part of arc between t_bot and t_top in theta by a small amount."""
    pts = list(arc.path)
    g = _Geo(arc)
    a_top, a_bot = arc.top[0], arc.bottom[0]
    if not (a_bot < t_bot <= t_top < a_top):
        raise ChartError(f"arc {arc.id}: contact touches its endpoint, cannot perturb")
    ts_desc = [p[0] for p in pts]
    above = min(t for t in ts_desc if t > t_top)
    below = max(t for t in ts_desc if t < t_bot)
    r_hi = t_top + (above - t_top) / 2
    r_lo = t_bot - (t_bot - below) / 2
    lifted = {t: g.at(t) for t in set(ts_desc) | {r_hi, r_lo, t_top, t_bot}}
    ramp_hi = abs(lifted[r_hi] - lifted[t_top])
    ramp_lo = abs(lifted[t_bot] - lifted[r_lo])
    delta = min(budget, ramp_hi / 2, ramp_lo / 2)
    keys = sorted({t for t in ts_desc} | {r_hi, r_lo, t_top, t_bot}, reverse=True)
    new = []
    for t in keys:
        th = lifted[t]
        if t_bot <= t <= t_top:
            th += sign * delta
        new.append((t, circle(th)))
    return replace(arc, path=tuple(new))


def perturb(chart: Chart, eps, seed: int = 0) -> Chart:
    """Resolve tangencies and overlaps by theta displacements below eps.

    The higher arc id of each offending pair moves; with seed 0 it moves up
    in theta, otherwise the seed picks the direction per pair.  A chart with
    only transverse crossings is returned unchanged.
    """
    eps = Fraction(eps)
    for a in chart.arcs:
        signs = set()
        for (_, h0), (_, h1) in zip(a.path, a.path[1:]):
            d = shortest_delta(h0, h1)
            if d != 0:
                signs.add(d > 0)
        if len(signs) > 1:
            raise ChartError(f"arc {a.id} changes slope sign; perturbation cannot repair it")
    current = chart
    moves: dict[str, int] = {}
    for _ in range(10_000):
        ends = _endpoint_events(current)
        by_id = {a.id: a for a in current.arcs}
        bad = [c for c in _all_contacts(current) if not _contact_allowed(current, c, ends, by_id)]
        if not bad:
            return current
        c = min(bad, key=lambda c: (c.a, c.b, -c.t))
        t_top = c.t_end if c.kind == "overlap" else c.t
        t_bot = c.t
        order = [c.b, c.a]
        arc = None
        for aid in order:
            cand = by_id[aid]
            if cand.bottom[0] < t_bot and t_top < cand.top[0]:
                arc = cand
                break
        if arc is None:
            raise ChartError(f"contact of {c.a} and {c.b} at t={c.t} sits on endpoints of both arcs")
        m = moves.get(arc.id, 0)
        moves[arc.id] = m + 1
        budget = eps / 2 ** (m + 1)
        sign = 1 if seed == 0 else random.Random(f"{seed}:{c.a}:{c.b}").choice((1, -1))
        moved = _bump(arc, t_top, t_bot, budget, sign)
        current = replace(current, arcs=tuple(moved if x.id == arc.id else x for x in current.arcs))
    raise ChartError("perturbation did not converge")


# ---------------------------------------------------------------------------
# serialization


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, bool):
        raise ChartError("boolean is not a rational")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ChartError(f"bad rational {s!r}") from exc
    raise ChartError(f"rationals must be strings 'p/q', got {s!r}")


def chart_to_dict(chart: Chart) -> dict:
    arcs = []
    for a in chart.arcs:
        d = {
            "id": a.id,
            "kind": a.kind.value,
            "index": a.index,
            "type": a.type_label.value,
            "boundary": a.boundary,
            "path": [[frac_str(t), frac_str(th)] for t, th in a.path],
        }
        if a.tag is not None:
            d["tag"] = a.tag
        arcs.append(d)
    events = [
        {"kind": e.kind.value, "t": frac_str(e.t), "theta": frac_str(e.theta), "arcs": list(e.arcs)}
        for e in chart.events
    ]
    return {"t_range": [frac_str(chart.t_range[0]), frac_str(chart.t_range[1])], "arcs": arcs, "events": events}


def chart_from_dict(data: dict) -> Chart:
    try:
        lo, hi = (parse_frac(x) for x in data["t_range"])
        arcs = []
        for d in data["arcs"]:
            kind = SingKind(d["kind"])
            path = tuple((parse_frac(t), circle(parse_frac(th))) for t, th in d["path"])
            boundary = d.get("boundary", kind.boundary)
            if not isinstance(boundary, bool):
                raise ChartError("boundary must be a boolean")
            index = d["index"]
            if not isinstance(index, int) or isinstance(index, bool):
                raise ChartError("index must be an integer")
            arcs.append(
                SingularityArc(str(d["id"]), kind, index, SingType(d["type"]), path, boundary, d.get("tag"))
            )
        events = tuple(
            ChartEvent(EventKind(e["kind"]), parse_frac(e["t"]), circle(parse_frac(e["theta"])),
                       tuple(str(x) for x in e["arcs"]))
            for e in data.get("events", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ChartError):
            raise
        raise ChartError(f"malformed chart document: {exc}") from exc
    return Chart(tuple(arcs), events, (lo, hi))


def slice_signature(chart: Chart, t) -> list[tuple[str, int, str]]:
    """Sorted multiset of (kind, index, type) of arcs meeting height t."""
    return sorted((a.kind.value, a.index, a.type_label.value) for a, _ in chart.slice_at(t))
