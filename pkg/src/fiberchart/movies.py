"""Chart fragments for the building-block movies and the stacker.

Every generator returns a ChartBlock over t in [0, 1].  A block is played
from t = 1 down to t = 0 in equal phases; each phase performs one action
(a birth, a death, a conversion or a move).  Arcs not involved in an action
drift slowly in the direction forced by their type, so they are never
vertical.  Generators take the incoming interface as ``top`` so that blocks
can be chained; persisting arcs keep their keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .chart import (
    Chart,
    ChartError,
    ChartEvent,
    EventKind,
    SingKind,
    SingType,
    SingularityArc,
    circle,
    perturb,
    slope_of,
    validate_chart,
    RULE_CROSSING,
)

DEFAULT_EPS = Fraction(1, 2048)
QUARTER = Fraction(1, 4)

C, D, HC, HD, BW = SingKind.CONE, SingKind.DOT, SingKind.HALF_CONE, SingKind.HALF_DOT, SingKind.BOWL
T0, T1, T2, T3, TB1, TB2 = (
    SingType.ZERO,
    SingType.I,
    SingType.II,
    SingType.III,
    SingType.IB,
    SingType.IIB,
)


class InterfaceMismatch(ChartError):
    """Adjacent blocks do not agree on the arcs crossing their common slice."""


@dataclass(frozen=True)
class Strand:
    """One arc crossing an interface slice."""

    key: str
    kind: SingKind
    index: int
    type_label: SingType
    theta: Fraction
    tag: str | None = None

    def signature(self) -> tuple[str, int, str, Fraction]:
        return (self.kind.value, self.index, self.type_label.value, self.theta)


InterfaceSlice = tuple[Strand, ...]


@dataclass(frozen=True)
class ChartBlock:
    chart: Chart
    top: InterfaceSlice
    bottom: InterfaceSlice
    name: str
    params: dict = field(default_factory=dict)

    def counts(self, where: str = "bottom") -> dict[str, int]:
        return interior_counts(getattr(self, where))


def interior_counts(strands: Iterable[Strand]) -> dict[str, int]:
    out = {"cones": 0, "dots": 0, "boundary": 0}
    for s in strands:
        if s.kind == C:
            out["cones"] += 1
        elif s.kind == D:
            out["dots"] += 1
        else:
            out["boundary"] += 1
    return out


def strand(key, kind, index, type_label, theta, tag=None) -> Strand:
    return Strand(key, SingKind(kind), index, SingType(type_label), circle(theta), tag)


# ---------------------------------------------------------------------------
# block builder


class _Lane:
    __slots__ = ("key", "kind", "index", "type_label", "tag", "dir", "pts")

    def __init__(self, key, kind, index, type_label, tag, t, theta):
        self.key = key
        self.kind = SingKind(kind)
        self.index = index
        self.type_label = SingType(type_label)
        self.tag = tag
        self.dir = -slope_of(self.kind, index, self.type_label)
        self.pts: list[tuple[Fraction, Fraction]] = [(Fraction(t), Fraction(theta))]


class _Builder:
    """Plays actions phase by phase from t = 1 to t = 0."""

    def __init__(self, top: Sequence[Strand], phases: int, eps, prefix: str = ""):
        if phases < 1:
            raise ValueError("a block needs at least one phase")
        self.eps = Fraction(eps)
        if self.eps <= 0:
            raise ValueError("drift must be positive")
        self.prefix = prefix
        self.n = phases
        self.k = 0
        self.top = tuple(top)
        self.live: dict[str, _Lane] = {}
        self.done: list[_Lane] = []
        self.events: list[ChartEvent] = []
        self.used: set[str] = set()
        for s in self.top:
            if s.key in self.live:
                raise InterfaceMismatch(f"duplicate interface key {s.key}")
            self.live[s.key] = _Lane(s.key, s.kind, s.index, s.type_label, s.tag, 1, s.theta)
            self.used.add(s.key)

    # bookkeeping -----------------------------------------------------------
    def new_key(self, local: str) -> str:
        key = self.prefix + local
        if key in self.used:
            raise ChartError(f"lane key {key} already in use")
        self.used.add(key)
        return key

    def lane(self, key: str) -> _Lane:
        try:
            return self.live[key]
        except KeyError:
            raise ChartError(f"no live arc {key!r} at this point of the movie") from None

    def phase(self) -> tuple[Fraction, Fraction, Fraction]:
        if self.k >= self.n:
            raise RuntimeError("block has no phases left")
        ta = 1 - Fraction(self.k, self.n)
        tb = 1 - Fraction(self.k + 1, self.n)
        self.k += 1
        return ta, (ta + tb) / 2, tb

    def pos(self, lane: _Lane, t: Fraction) -> Fraction:
        t0, th0 = lane.pts[-1]
        return th0 + lane.dir * self.eps * (t0 - t)

    def theta(self, key: str, t=None) -> Fraction:
        lane = self.lane(key)
        return self.pos(lane, lane.pts[-1][0] if t is None else t)

    def touch(self, lane: _Lane, t: Fraction) -> Fraction:
        if t < lane.pts[-1][0]:
            lane.pts.append((t, self.pos(lane, t)))
        return lane.pts[-1][1]

    def go(self, lane: _Lane, t: Fraction, theta: Fraction) -> None:
        t0, th0 = lane.pts[-1]
        d = theta - th0
        if d == 0 or (d > 0) != (lane.dir > 0):
            raise ChartError(f"arc {lane.key} cannot move by {d} with its type {lane.type_label.value}")
        pieces = max(1, math.ceil(abs(d) / QUARTER))
        for i in range(1, pieces + 1):
            lane.pts.append((t0 + (t - t0) * i / pieces, th0 + d * i / pieces))

    def forward(self, lane: _Lane, cur: Fraction, target) -> Fraction:
        """Distance travelled in the lane's direction from cur to the circle point target."""
        return (lane.dir * (Fraction(target) - cur)) % 1

    def spawn(self, local, kind, index, type_label, tag, t, theta) -> _Lane:
        key = self.new_key(local)
        lane = _Lane(key, kind, index, type_label, tag, t, theta)
        self.live[key] = lane
        return lane

    def end(self, lane: _Lane) -> None:
        del self.live[lane.key]
        self.done.append(lane)

    # actions ---------------------------------------------------------------
    def move(self, key: str, dist) -> None:
        ta, _, tb = self.phase()
        lane = self.lane(key)
        cur = self.touch(lane, ta)
        self.go(lane, tb, cur + lane.dir * Fraction(dist))

    def move_to(self, key: str, target, wraps: int = 0) -> None:
        ta, _, tb = self.phase()
        lane = self.lane(key)
        cur = self.touch(lane, ta)
        dist = self.forward(lane, cur, target) + wraps
        if dist == 0:
            return
        self.go(lane, tb, cur + lane.dir * dist)

    def idle(self) -> None:
        self.phase()

    def event(self, kind: EventKind, point, ending: Sequence[str], starting: Sequence[tuple]) -> list[str]:
        """Lanes in ``ending`` converge on point; lanes in ``starting`` leave it.

        Each starting entry is (local_name, kind, index, type, distance, tag).
        """
        ta, tm, tb = self.phase()
        point = Fraction(point)
        members = []
        for key in ending:
            lane = self.lane(key)
            cur = self.touch(lane, ta)
            dist = self.forward(lane, cur, point)
            if dist == 0:
                raise ChartError(f"arc {key} already sits on the event point")
            self.go(lane, tm, cur + lane.dir * dist)
            self.end(lane)
            members.append(key)
        for local, akind, index, type_label, dist, tag in starting:
            lane = self.spawn(local, akind, index, type_label, tag, tm, point)
            self.go(lane, tb, point + lane.dir * Fraction(dist))
            members.append(lane.key)
        self.events.append(ChartEvent(kind, tm, circle(point), tuple(members)))
        return members[len(ending):]

    def converge_point(self, trail: str, lead: str, frac=QUARTER) -> Fraction:
        """Meeting point when trail catches lead; lead moves a fraction of the gap."""
        ta = 1 - Fraction(self.k, self.n)
        lt, ll = self.lane(trail), self.lane(lead)
        if lt.dir != ll.dir:
            raise ChartError(f"arcs {trail} and {lead} move in opposite directions")
        pt, pl = self.pos(lt, ta), self.pos(ll, ta)
        gap = (lt.dir * (pl - pt)) % 1
        if gap == 0:
            raise ChartError(f"arcs {trail} and {lead} coincide")
        return pl + ll.dir * gap * Fraction(frac)

    def trailer(self, k1: str, k2: str) -> tuple[str, str]:
        """Order two same-direction lanes as (trail, lead) with the shorter chase."""
        ta = 1 - Fraction(self.k, self.n)
        l1, l2 = self.lane(k1), self.lane(k2)
        g = (l1.dir * (self.pos(l2, ta) - self.pos(l1, ta))) % 1
        return (k1, k2) if g <= Fraction(1, 2) else (k2, k1)

    def extremum_point(self, k1: str, k2: str) -> Fraction:
        ta = 1 - Fraction(self.k, self.n)
        l1, l2 = self.lane(k1), self.lane(k2)
        if l1.dir == l2.dir:
            raise ChartError(f"arcs {k1} and {k2} move the same way; no extremum")
        p, n = (l1, l2) if l1.dir < 0 else (l2, l1)
        gap = (self.pos(p, ta) - self.pos(n, ta)) % 1
        if gap == 0:
            raise ChartError(f"arcs {k1} and {k2} coincide")
        return self.pos(p, ta) - gap / 2

    # output ----------------------------------------------------------------
    def block(self, name: str, params: dict) -> ChartBlock:
        while self.k < self.n:
            self.phase()
        bottom = []
        for lane in self.live.values():
            self.touch(lane, Fraction(0))
            bottom.append(Strand(lane.key, lane.kind, lane.index, lane.type_label, circle(lane.pts[-1][1]), lane.tag))
        arcs = []
        for lane in sorted(self.done + list(self.live.values()), key=lambda x: x.key):
            path = tuple((t, circle(th)) for t, th in lane.pts)
            arcs.append(SingularityArc(lane.key, lane.kind, lane.index, lane.type_label, path, lane.kind.boundary, lane.tag))
        chart = Chart(tuple(arcs), tuple(self.events), (Fraction(0), Fraction(1)))
        return ChartBlock(chart, _sorted(self.top), _sorted(bottom), name, dict(params))


def _sorted(strands) -> InterfaceSlice:
    return tuple(sorted(strands, key=lambda s: (s.theta, s.key)))


def _room(top: Sequence[Strand], theta) -> Fraction:
    """Circular distance from theta to the nearest interface arc (1/2 if none)."""
    theta = circle(theta)
    best = Fraction(1, 2)
    for s in top:
        d = (s.theta - theta) % 1
        best = min(best, d, 1 - d)
    return best


def default_theta(top: Sequence[Strand]) -> Fraction:
    """Midpoint of the largest gap between interface arcs (1/2 when empty)."""
    ths = sorted({s.theta for s in top})
    if not ths:
        return Fraction(1, 2)
    best, where = Fraction(-1), Fraction(0)
    for i, a in enumerate(ths):
        b = ths[(i + 1) % len(ths)]
        gap = (b - a) % 1 or Fraction(1)
        if gap > best:
            best, where = gap, a + gap / 2
    return circle(where)


def _unit(top, theta, unit, cap=Fraction(1, 16), divisor=8) -> Fraction:
    if unit is not None:
        return Fraction(unit)
    return min(cap, _room(top, theta) / divisor)


def _pick(top: Sequence[Strand], key: str | None, pred: Callable[[Strand], bool], what: str) -> Strand:
    cands = [s for s in top if (key is None or s.key == key) and pred(s)]
    if not cands:
        raise ChartError(f"top interface has no {what}" + (f" with key {key!r}" if key else ""))
    return cands[0]


# ---------------------------------------------------------------------------
# stabilizations

_STAB = {
    # (pair, variant) -> ((kind_lo, idx_lo, type_lo), (kind_hi, idx_hi, type_hi))
    ((0, 1), "agree"): ((D, 0, T0), (C, 1, T1)),
    ((0, 1), "disagree"): ((D, 0, T3), (C, 1, T2)),
    ((1, 2), "agree"): ((C, 1, T1), (C, 2, T2)),
    ((1, 2), "disagree"): ((C, 1, T2), (C, 2, T1)),
    ((2, 3), "agree"): ((C, 2, T2), (D, 3, T3)),
    ((2, 3), "disagree"): ((C, 2, T1), (D, 3, T0)),
}

_BOUNDARY_OF = {C: HC, D: HD}


def stab_arcs(pair, variant: str, boundary: bool = False) -> tuple[tuple, tuple]:
    """(kind, index, type) of the two arcs created by a stabilization."""
    pair = tuple(pair)
    try:
        lo, hi = _STAB[(pair, variant)]
    except KeyError:
        raise ChartError(f"unknown stabilization {pair} {variant}") from None
    if not boundary:
        return lo, hi
    if pair == (1, 2):
        # a half-cone and a bowl
        if variant == "agree":
            return (HC, 1, T1), (BW, 2, TB2)
        return (HC, 1, T2), (BW, 2, TB1)
    return tuple((_BOUNDARY_OF[k], i, t) for k, i, t in (lo, hi))


def _stab_top(pair, variant, boundary, theta, u, prefix):
    lo, hi = stab_arcs(pair, variant, boundary)
    d = -slope_of(*lo)
    # trailer sits behind the leader in the direction of motion
    return (
        strand(prefix + "s0", *lo, theta - d * 2 * u),
        strand(prefix + "s1", *hi, theta - d * u),
    )


def _stab(pair, variant, theta_center, boundary, top, eps, prefix, unit, tag, name):
    top = tuple(top or ())
    theta = circle(theta_center if theta_center is not None else default_theta(top))
    u = _unit(top, theta, unit)
    lo, hi = stab_arcs(pair, variant, boundary)
    b = _Builder(top, 1, eps, prefix)
    b.event(
        EventKind.PAIR_CUSP,
        theta,
        [],
        [("s0", *lo, u, tag), ("s1", *hi, 2 * u, tag)],
    )
    return b.block(name, {"pair": list(pair), "variant": variant, "theta_center": theta})


def _destab(pair, variant, theta_center, boundary, top, keys, eps, prefix, unit, name):
    lo, hi = stab_arcs(pair, variant, boundary)
    if top is None:
        theta = circle(theta_center if theta_center is not None else Fraction(1, 2))
        u = _unit((), theta, unit)
        top = _stab_top(pair, variant, boundary, theta, u, prefix)
    top = tuple(top)
    k0 = _pick(top, keys[0] if keys else None, lambda s: (s.kind, s.index, s.type_label) == lo, f"{lo} arc").key
    k1 = _pick(top, keys[1] if keys else None, lambda s: (s.kind, s.index, s.type_label) == hi, f"{hi} arc").key
    b = _Builder(top, 1, eps, prefix)
    trail, lead = b.trailer(k0, k1)
    b.event(EventKind.PAIR_CUSP, b.converge_point(trail, lead), [trail, lead], [])
    return b.block(name, {"pair": list(pair), "variant": variant, "keys": [k0, k1]})


def mk_interior_stab(pair, variant, theta_center=None, *, top=None, eps=DEFAULT_EPS, prefix="", unit=None, tag=None):
    """Birth of an interior cancelling pair; both types agree or both disagree with their index."""
    return _stab(pair, variant, theta_center, False, top, eps, prefix, unit, tag, "interior_stab")


def mk_interior_destab(pair, variant, theta_center=None, *, top=None, keys=None, eps=DEFAULT_EPS, prefix="", unit=None):
    """Death of an interior cancelling pair taken from the top interface."""
    return _destab(pair, variant, theta_center, False, top, keys, eps, prefix, unit, "interior_destab")


def mk_boundary_stab(pair, variant, theta_center=None, *, top=None, eps=DEFAULT_EPS, prefix="", unit=None, tag=None):
    return _stab(pair, variant, theta_center, True, top, eps, prefix, unit, tag, "boundary_stab")


def mk_boundary_destab(pair, variant, theta_center=None, *, top=None, keys=None, eps=DEFAULT_EPS, prefix="", unit=None):
    return _destab(pair, variant, theta_center, True, top, keys, eps, prefix, unit, "boundary_destab")


# ---------------------------------------------------------------------------
# births and deaths of like-typed pairs

# name -> (boundary kind, type, birth?)  and the interior analogue
_BOUNDARY_MOVIES = {
    "Fusion1": (HC, T2, True),
    "Fusion2": (BW, TB1, False),
    "Fusion3": (HC, T1, True),
    "Fusion4": (HD, T0, False),
    "Birth1": (BW, TB1, True),
    "Birth2": (HD, T0, True),
    "Compression1": (HC, T1, False),
    "Compression2": (BW, TB2, True),
    "Compression3": (HC, T2, False),
    "Compression4": (HD, T3, True),
    "Death1": (BW, TB2, False),
    "Death2": (HD, T3, False),
}
BOUNDARY_MOVIES = tuple(_BOUNDARY_MOVIES)

_INTERIOR_KIND = {HC: C, HD: D, BW: C}
_INTERIOR_TYPE = {TB1: T1, TB2: T2}

# interior singularity movie names, keyed by the boundary movie they double
INTERIOR_SINGULARITY_MOVIES = {
    "Index-2 birth": "Fusion1",
    "Index-1 death": "Fusion2",
    "First index-1 birth": "Fusion3",
    "Index-0 death": "Fusion4",
    "Second index-1 birth": "Birth1",
    "Index-0 birth": "Birth2",
    "Index-1 death (compression)": "Compression1",
    "Index-2 birth (compression)": "Compression2",
    "First index-2 death": "Compression3",
    "Index-3 birth": "Compression4",
    "Second index-2 death": "Death1",
    "Index-3 death": "Death2",
}


def _indices(kind) -> tuple[int, int]:
    return {C: (1, 2), HC: (1, 2), D: (0, 3), HD: (0, 3), BW: (0, 2)}[kind]


def _pair_movie(kind, type_label, birth, theta, top, keys, eps, prefix, unit, tag, name, params):
    i, j = _indices(kind)
    # the lane of positive slope is the one whose type agrees with its index
    pos_idx = i if slope_of(kind, i, type_label) > 0 else j
    neg_idx = j if pos_idx == i else i
    if birth:
        top = tuple(top or ())
        theta = circle(theta if theta is not None else default_theta(top))
        u = _unit(top, theta, unit)
        b = _Builder(top, 1, eps, prefix)
        b.event(
            EventKind.PAIR_EXTREMUM,
            theta,
            [],
            [("p", kind, pos_idx, type_label, u, tag), ("n", kind, neg_idx, type_label, u, tag)],
        )
        return b.block(name, params)
    if top is None:
        theta = circle(theta if theta is not None else Fraction(1, 2))
        u = _unit((), theta, unit)
        top = (
            strand(prefix + "p", kind, pos_idx, type_label, theta + u, tag),
            strand(prefix + "n", kind, neg_idx, type_label, theta - u, tag),
        )
    top = tuple(top)
    like = lambda idx: (lambda s: s.kind == kind and s.type_label == type_label and s.index == idx)
    kp = _pick(top, keys[0] if keys else None, like(pos_idx), f"{kind.value} {type_label.value} arc").key
    kn = _pick(top, keys[1] if keys else None, like(neg_idx), f"{kind.value} {type_label.value} arc").key
    b = _Builder(top, 1, eps, prefix)
    b.event(EventKind.PAIR_EXTREMUM, b.extremum_point(kp, kn), [kp, kn], [])
    return b.block(name, params)


def mk_boundary_movie(which: str, theta=None, *, top=None, keys=None, eps=DEFAULT_EPS, prefix="", unit=None, tag=None):
    """Birth or death of two like-typed boundary arcs of opposite index."""
    try:
        kind, type_label, birth = _BOUNDARY_MOVIES[which]
    except KeyError:
        raise ChartError(f"unknown boundary movie {which!r}") from None
    return _pair_movie(kind, type_label, birth, theta, top, keys, eps, prefix, unit, tag,
                       "boundary_movie", {"which": which})


def mk_interior_singularity_movie(name: str, theta=None, *, top=None, keys=None, eps=DEFAULT_EPS, prefix="", unit=None, tag=None):
    """Doubled boundary movie: the boundary pair becomes an interior pair."""
    src = INTERIOR_SINGULARITY_MOVIES.get(name) or _lookup_ci(name)
    kind, type_label, birth = _BOUNDARY_MOVIES[src]
    return _pair_movie(_INTERIOR_KIND[kind], _INTERIOR_TYPE.get(type_label, type_label), birth, theta, top,
                       keys, eps, prefix, unit, tag, "interior_singularity", {"name": name})


def _lookup_ci(name: str) -> str:
    for k, v in INTERIOR_SINGULARITY_MOVIES.items():
        if k.lower() == name.lower() or v.lower() == name.lower():
            return v
    raise ChartError(f"unknown interior singularity movie {name!r}")


# ---------------------------------------------------------------------------
# positioning

_POSITION = {
    # kind -> (arc kind, type default, type reparametrized)
    "dot_along_arc": (D, None, None),
    "cone_along_arc": (C, T1, T2),
    "cone_along_disk": (C, T2, T1),
}


def mk_position(kind: str, arc_id: str, target_theta, reparam: bool = False, *, top=None, wraps: int = 0,
                eps=DEFAULT_EPS, prefix="", source_theta=None, index=None):
    """Move one arc in the direction forced by its type until it reaches target_theta."""
    try:
        akind, t_def, t_rep = _POSITION[kind]
    except KeyError:
        raise ChartError(f"unknown positioning movie {kind!r}") from None
    want = t_rep if reparam else t_def
    if top is None:
        if want is None:
            want = T3
        if index is None:
            index = 1 if akind == C else 3
        top = (strand(arc_id, akind, index, want, source_theta if source_theta is not None else 0),)
    top = tuple(top)
    s = _pick(top, arc_id, lambda s: s.kind == akind, f"{akind.value} arc")
    if want is not None and s.type_label != want:
        raise ChartError(f"{kind} needs a type {want.value} arc, {arc_id} is {s.type_label.value}")
    b = _Builder(top, 1, eps, prefix)
    target = circle(target_theta)
    if target == s.theta and wraps == 0:
        b.idle()
    else:
        b.move_to(s.key, target, wraps)
    return b.block("position", {"kind": kind, "arc_id": arc_id, "target_theta": target, "reparam": reparam})


# ---------------------------------------------------------------------------
# cone / boundary cancellations


def _cancel_boundary_data(kind: str, reparam: bool, i: int):
    if kind == "cone_halfcone":
        cone = (C, 3 - i, T2)
        half = (HC, i, T1)
        if slope_of(*cone) != slope_of(*half):
            cone, half = (C, 3 - i, T1), (HC, i, T2)
        cont = (HC, 3 - i, cone[2])
        return cone, half, cont
    if kind == "cone_halfdot":
        if reparam:
            return (C, 2, T2), (HD, 3, T3), (BW, 2, TB2)
        return (C, 1, T1), (HD, 0, T0), (BW, 0, TB1)
    raise ChartError(f"unknown boundary cancellation {kind!r}")


def mk_cancel_boundary(kind: str, direction: str = "death", theta=None, *, top=None, keys=None, reparam=False,
                       index: int = 1, eps=DEFAULT_EPS, prefix="", unit=None, tag=None):
    """A cone meets a half-cone (giving a half-cone) or a half-dot (giving a bowl); or the reverse."""
    cone, half, cont = _cancel_boundary_data(kind, reparam, index)
    params = {"kind": kind, "direction": direction, "reparam": reparam}
    if direction == "death":
        if top is None:
            theta = circle(theta if theta is not None else Fraction(1, 2))
            u = _unit((), theta, unit)
            d = -slope_of(*cone)
            top = (strand(prefix + "cone", *cone, theta - d * 2 * u, tag), strand(prefix + "half", *half, theta - d * u, tag))
        top = tuple(top)
        kc = _pick(top, keys[0] if keys else None, lambda s: (s.kind, s.index, s.type_label) == cone, "cone").key
        kh = _pick(top, keys[1] if keys else None, lambda s: (s.kind, s.index, s.type_label) == half, "boundary arc").key
        b = _Builder(top, 1, eps, prefix)
        trail, lead = b.trailer(kc, kh)
        p = b.converge_point(trail, lead)
        u = _unit(top, p, unit)
        b.event(EventKind.BOUNDARY_CONVERSION, p, [trail, lead], [("cont", *cont, u, tag)])
        return b.block("cancel_boundary", params)
    if direction != "birth":
        raise ChartError(f"direction must be birth or death, not {direction!r}")
    if top is None:
        theta = circle(theta if theta is not None else Fraction(1, 2))
        u = _unit((), theta, unit)
        top = (strand(prefix + "cont", *cont, theta - (-slope_of(*cont)) * u, tag),)
    top = tuple(top)
    kt = _pick(top, keys[0] if keys else None, lambda s: (s.kind, s.index, s.type_label) == cont, "boundary arc").key
    b = _Builder(top, 1, eps, prefix)
    lane = b.lane(kt)
    u = _unit([s for s in top if s.key != kt], lane.pts[-1][1], unit)
    p = lane.pts[-1][1] + lane.dir * u / 2
    b.event(EventKind.BOUNDARY_CONVERSION, p, [kt], [("cone", *cone, u, tag), ("half", *half, 2 * u, tag)])
    return b.block("cancel_boundary", params)


# ---------------------------------------------------------------------------
# saddle, minimum, maximum


def _saddle_actions(b: _Builder, key: str, theta_bottom, bottom_type: SingType, local: str, end_margin,
                    direction: int | None = None) -> str:
    """Three phases: cone -> half-cone, travel, half-cone -> cone ending at theta_bottom."""
    cone = b.lane(key)
    idx, tag = cone.index, cone.tag
    ta = 1 - Fraction(b.k, b.n)
    start = b.pos(cone, ta)
    target = circle(theta_bottom)
    new_dir = -slope_of(C, idx, bottom_type)
    # conversion point of the return trip, chosen so the new cone reaches
    # target at the bottom of the block after its own move and idle drift
    t_after = 1 - Fraction(b.k + 3, b.n)
    back = new_dir * (end_margin + b.eps * t_after)
    p_final = target - back
    m = min(end_margin, Fraction(1, 64))
    # direction of travel for the half-cone: the short way round
    fwd_plus = (p_final - start) % 1
    hdir = direction or (1 if fwd_plus <= Fraction(1, 2) else -1)
    htype = SingType(_type_for_dir(HC, idx, hdir))
    p1 = start + cone.dir * m
    [hkey] = b.event(EventKind.BOUNDARY_CONVERSION, p1, [key], [(local + "h", HC, idx, htype, m, tag)])
    half = b.lane(hkey)
    ta2 = 1 - Fraction(b.k, b.n)
    here = b.pos(half, ta2)
    travel = (half.dir * (p_final - here)) % 1
    b.move(hkey, travel * Fraction(1, 2))
    [ckey] = b.event(EventKind.BOUNDARY_CONVERSION, p_final, [hkey], [(local, C, idx, bottom_type, end_margin, tag)])
    return ckey


def _type_for_dir(kind, index, direction: int) -> SingType:
    from .chart import type_from_slope

    return type_from_slope(kind, index, -direction)


def mk_saddle(theta_top_cone, theta_bottom_cone, *, top=None, key=None, bottom_type=None, eps=DEFAULT_EPS,
              prefix="", tag=None, direction=None):
    """A cone becomes a boundary half-cone, travels, and returns as a cone of the same index."""
    theta_top, theta_bottom = circle(theta_top_cone), circle(theta_bottom_cone)
    if theta_top == theta_bottom:
        raise ChartError("saddle needs different top and bottom cone positions")
    if top is None:
        top = (strand(prefix + "cone", C, 1, T1, theta_top, tag),)
    top = tuple(top)
    s = _pick(top, key, lambda s: s.kind == C, "cone")
    bt = SingType(bottom_type) if bottom_type is not None else s.type_label
    b = _Builder(top, 3, eps, prefix)
    margin = min(Fraction(1, 64), _room([x for x in top if x.key != s.key], theta_bottom) / 4 or Fraction(1, 64))
    _saddle_actions(b, s.key, theta_bottom, bt, "saddle", margin, direction)
    return b.block("saddle", {"theta_top_cone": theta_top, "theta_bottom_cone": theta_bottom})


MIN_PHASES = 6


def _minimum_actions(b: _Builder, c: Fraction, u: Fraction, tag, local="min", dot_tag=None) -> tuple[str, str]:
    """Two III half-dots are born, stabilizations feed cones into them, the bowls die.

    Net effect: a Dot of index 0 and a Dot of index 3, both of type III.
    """
    dot_tag = dot_tag if dot_tag is not None else tag
    h3, h0 = b.event(
        EventKind.PAIR_EXTREMUM, c, [],
        [(local + ".h3", HD, 3, T3, 3 * u, tag), (local + ".h0", HD, 0, T3, 3 * u, tag)],
    )
    # near h0 (right side, moving right): cone and dot move right
    x0 = c + Fraction(3, 2) * u
    d0, c1 = b.event(
        EventKind.PAIR_CUSP, x0, [],
        [(local + ".d0", D, 0, T3, u / 4, dot_tag), (local + ".c1", C, 1, T2, u / 2, tag)],
    )
    x3 = c - Fraction(3, 2) * u
    c2, d3 = b.event(
        EventKind.PAIR_CUSP, x3, [],
        [(local + ".c2", C, 2, T2, u / 2, tag), (local + ".d3", D, 3, T3, u / 4, dot_tag)],
    )
    [bw2] = b.event(EventKind.BOUNDARY_CONVERSION, b.converge_point(c1, h0), [c1, h0],
                    [(local + ".b2", BW, 2, TB2, u / 4, tag)])
    [bw0] = b.event(EventKind.BOUNDARY_CONVERSION, b.converge_point(c2, h3), [c2, h3],
                    [(local + ".b0", BW, 0, TB2, u / 4, tag)])
    b.event(EventKind.PAIR_EXTREMUM, b.extremum_point(bw2, bw0), [bw2, bw0], [])
    return d0, d3


def mk_minimum(theta_center=None, *, top=None, unit=None, eps=DEFAULT_EPS, prefix="", tag=None):
    """Net birth of two interior dots of type III (index 0 and index 3)."""
    top = tuple(top or ())
    c = circle(theta_center if theta_center is not None else default_theta(top))
    u = _unit(top, c, unit, cap=Fraction(1, 32), divisor=4)
    b = _Builder(top, MIN_PHASES, eps, prefix)
    _minimum_actions(b, c, u, tag)
    return b.block("minimum", {"theta_center": c})


def _maximum_actions(b: _Builder, k0: str, k3: str, u: Fraction, tag, local="max") -> None:
    """Inverse of the minimum: two III dots are absorbed and the boundary closes up."""
    l0, l3 = b.lane(k0), b.lane(k3)
    ta = 1 - Fraction(b.k, b.n)
    p0, p3 = b.pos(l0, ta), b.pos(l3, ta)
    # bowls are born half way from the index-3 dot to the index-0 dot
    c = p3 + ((p0 - p3) % 1) / 2
    bw2, bw0 = b.event(
        EventKind.PAIR_EXTREMUM, c, [],
        [(local + ".b2", BW, 2, TB2, u, tag), (local + ".b0", BW, 0, TB2, u, tag)],
    )
    # each bowl splits into a cone (trailing) and a half-dot (leading)
    lb0 = b.lane(bw0)
    c1, h0 = b.event(EventKind.BOUNDARY_CONVERSION, b.pos(lb0, 1 - Fraction(b.k, b.n)) + lb0.dir * u / 4, [bw0],
                     [(local + ".c1", C, 1, T2, u / 8, tag), (local + ".h0", HD, 0, T3, u / 2, tag)])
    lb2 = b.lane(bw2)
    c2, h3 = b.event(EventKind.BOUNDARY_CONVERSION, b.pos(lb2, 1 - Fraction(b.k, b.n)) + lb2.dir * u / 4, [bw2],
                     [(local + ".c2", C, 2, T2, u / 8, tag), (local + ".h3", HD, 3, T3, u / 2, tag)])
    t1, l1 = b.trailer(c1, k0)
    b.event(EventKind.PAIR_CUSP, b.converge_point(t1, l1), [t1, l1], [])
    t2, l2 = b.trailer(c2, k3)
    b.event(EventKind.PAIR_CUSP, b.converge_point(t2, l2), [t2, l2], [])
    b.event(EventKind.PAIR_EXTREMUM, b.extremum_point(h3, h0), [h3, h0], [])


def mk_maximum(theta_center=None, *, top=None, keys=None, unit=None, eps=DEFAULT_EPS, prefix="", tag=None):
    """Net death of an index-0 and an index-3 dot of type III."""
    if top is None:
        c = circle(theta_center if theta_center is not None else Fraction(1, 2))
        u = _unit((), c, unit, cap=Fraction(1, 32), divisor=4)
        top = (strand(prefix + "d0", D, 0, T3, c + 2 * u, tag), strand(prefix + "d3", D, 3, T3, c - 2 * u, tag))
    top = tuple(top)
    k0 = _pick(top, keys[0] if keys else None, lambda s: (s.kind, s.index, s.type_label) == (D, 0, T3), "index-0 III dot").key
    k3 = _pick(top, keys[1] if keys else None, lambda s: (s.kind, s.index, s.type_label) == (D, 3, T3), "index-3 III dot").key
    th0 = next(s.theta for s in top if s.key == k0)
    th3 = next(s.theta for s in top if s.key == k3)
    span = (th0 - th3) % 1
    u = Fraction(unit) if unit is not None else min(Fraction(1, 32), span / 8)
    b = _Builder(top, MIN_PHASES, eps, prefix)
    _maximum_actions(b, k0, k3, u, tag)
    return b.block("maximum", {"keys": [k0, k3]})


# ---------------------------------------------------------------------------
# cone / dot cancellation

CANCELLING = (frozenset((T2, T3)), frozenset((T1, T0)))


def mk_cancellation(simple: bool, cone_arc: str, dot_arc: str, *, top=None, gap=None, cone_travel=None,
                    eps=DEFAULT_EPS, prefix="", cone=None, dot=None):
    """A dot is brought up behind a cone and the pair dies in a cusp.

    In the generalized form the cone travels first.  ``cone``/``dot`` give
    (index, type) for a standalone block when ``top`` is omitted.
    """
    if top is None:
        ci, ct = cone or (1, T2)
        di, dt = dot or (0, T3)
        top = (strand(cone_arc, C, ci, ct, Fraction(1, 2)), strand(dot_arc, D, di, dt, Fraction(1, 4)))
    top = tuple(top)
    sc = _pick(top, cone_arc, lambda s: s.kind == C, "cone")
    sd = _pick(top, dot_arc, lambda s: s.kind == D, "dot")
    if frozenset((sc.type_label, sd.type_label)) not in CANCELLING:
        raise ChartError(f"types {sc.type_label.value} and {sd.type_label.value} do not cancel")
    if slope_of(sc.kind, sc.index, sc.type_label) != slope_of(sd.kind, sd.index, sd.type_label):
        raise ChartError(f"cone index {sc.index} and dot index {sd.index} do not form a cancelling pair")
    b = _Builder(top, 2 if simple else 3, eps, prefix)
    lc, ld = b.lane(sc.key), b.lane(sd.key)
    if not simple:
        travel = Fraction(cone_travel) if cone_travel is not None else _room([s for s in top if s.key != sc.key], sc.theta) / 2
        b.move(sc.key, travel)
    ta = 1 - Fraction(b.k, b.n)
    tb = ta - Fraction(1, b.n)
    g = Fraction(gap) if gap is not None else min(Fraction(1, 64), _room([s for s in top if s.key != sc.key], sc.theta) / 4)
    cone_at = b.pos(lc, tb)
    behind = cone_at - lc.dir * g
    here = b.pos(ld, ta)
    if (ld.dir * (behind - here)) % 1 == 0:
        b.idle()
    else:
        b.move_to(sd.key, circle(behind))
    b.event(EventKind.PAIR_CUSP, b.converge_point(sd.key, sc.key), [sd.key, sc.key], [])
    return b.block("cancellation", {"simple": simple, "cone_arc": sc.key, "dot_arc": sd.key})


# ---------------------------------------------------------------------------
# band and disk movies

BAND_PHASES = 5


def mk_band_movie(theta_stab=None, theta_final=None, *, theta_park=None, top=None, eps=DEFAULT_EPS, prefix="",
                  unit=None, tag="band", saddle_dir=None):
    """Stabilize a (1,2) pair, park one cone, pass the other through a saddle.

    The result is two new interior cones of type II, one of each index.
    Lanes: ``B`` (index 2) and ``A`` (index 1, after the saddle).
    """
    top = tuple(top or ())
    th_s = circle(theta_stab if theta_stab is not None else default_theta(top))
    u = _unit(top, th_s, unit)
    th_f = circle(theta_final if theta_final is not None else th_s - 4 * u)
    if th_f == th_s:
        raise ChartError("band movie needs theta_final different from theta_stab")
    th_p = circle(theta_park if theta_park is not None else th_s + 4 * u)
    b = _Builder(top, BAND_PHASES, eps, prefix)
    ka, kb = b.event(EventKind.PAIR_CUSP, th_s, [], [("A0", C, 1, T1, u / 4, tag), ("B", C, 2, T2, u / 2, tag)])
    b.move_to(kb, th_f)
    _saddle_actions(b, ka, th_p, T2, "A", min(u / 4, Fraction(1, 64)), saddle_dir)
    return b.block("band", {"theta_stab": th_s, "theta_final": th_f, "theta_park": th_p})


def disk_phases(k: int) -> int:
    return 2 * k + MIN_PHASES


def mk_disk_movie(k: int, theta_list=None, *, theta_center=None, stab_thetas=None, wraps=0, top=None, unit=None,
                  eps=DEFAULT_EPS, prefix="", tag="disk"):
    """k stabilizations whose cones are swept into place, then a minimum.

    Adds k type-II cones and k + 2 type-III dots.  Stabilizations alternate
    between (0,1)-disagree and (2,3)-agree so the cone indices alternate 1, 2.
    """
    if not isinstance(k, int) or k < 1:
        raise ChartError("disk movie needs k >= 1")
    top = tuple(top or ())
    c = circle(theta_center if theta_center is not None else default_theta(top))
    u = _unit(top, c, unit, cap=Fraction(1, 32), divisor=4 * (k + 4))
    if stab_thetas is None:
        stab_thetas = [c + (4 + 2 * i) * u * (1 if i % 2 == 0 else -1) for i in range(k)]
    if theta_list is None:
        theta_list = [s + (2 * u if i % 2 == 0 else -2 * u) for i, s in enumerate(stab_thetas)]
    if len(theta_list) != k or len(stab_thetas) != k:
        raise ChartError("disk movie needs k cone targets and k stabilization positions")
    if isinstance(wraps, int):
        wraps = [wraps] * k
    b = _Builder(top, disk_phases(k), eps, prefix)
    for i in range(k):
        pair, variant = ((0, 1), "disagree") if i % 2 == 0 else ((2, 3), "agree")
        lo, hi = stab_arcs(pair, variant)
        made = b.event(
            EventKind.PAIR_CUSP, circle(stab_thetas[i]), [],
            [(f"s{i}.lo", *lo, u / 4 if lo[0] == D else u / 2, tag),
             (f"s{i}.hi", *hi, u / 4 if hi[0] == D else u / 2, tag)],
        )
        cone_key = made[0] if lo[0] == C else made[1]
        b.move_to(cone_key, circle(theta_list[i]), wraps[i])
    _minimum_actions(b, c, u, tag)
    return b.block("disk", {"k": k, "theta_center": c})


# ---------------------------------------------------------------------------
# mirror and stacking


def mirror(block: ChartBlock) -> ChartBlock:
    """Reflect t -> 1 - t and theta -> -theta; types are preserved."""
    arcs = []
    for a in block.chart.arcs:
        path = tuple((1 - t, circle(-th)) for t, th in reversed(a.path))
        arcs.append(replace(a, path=path))
    events = tuple(replace(e, t=1 - e.t, theta=circle(-e.theta)) for e in block.chart.events)
    flip = lambda sl: _sorted(replace(s, theta=circle(-s.theta)) for s in sl)
    chart = Chart(tuple(arcs), events, block.chart.t_range)
    return ChartBlock(chart, flip(block.bottom), flip(block.top), "mirror:" + block.name, dict(block.params))


GENERATORS: dict[str, Callable[..., ChartBlock]] = {
    "interior_stab": mk_interior_stab,
    "interior_destab": mk_interior_destab,
    "boundary_stab": mk_boundary_stab,
    "boundary_destab": mk_boundary_destab,
    "boundary_movie": mk_boundary_movie,
    "interior_singularity": mk_interior_singularity_movie,
    "position": mk_position,
    "cancel_boundary": mk_cancel_boundary,
    "saddle": mk_saddle,
    "minimum": mk_minimum,
    "maximum": mk_maximum,
    "cancellation": mk_cancellation,
    "band": mk_band_movie,
    "disk": mk_disk_movie,
}

CLOSURE = "closure"


def _leaves(script) -> int:
    n = 0
    for item in script:
        if isinstance(item, list):
            n += _leaves(item)
        elif isinstance(item, dict) and item.get("movie") == CLOSURE:
            continue
        else:
            n += 1
    return n


def _coerce_params(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, str) and k.startswith("theta"):
            out[k] = Fraction(v)
        elif isinstance(v, list) and k in ("theta_list", "stab_thetas"):
            out[k] = [Fraction(x) for x in v]
        else:
            out[k] = v
    return out


@dataclass
class _Acc:
    arcs: dict[str, list]
    meta: dict[str, SingularityArc]
    events: list[ChartEvent]
    names: list[str]
    closed: bool = False


def _splice(acc: _Acc, block: ChartBlock, lo: Fraction, hi: Fraction) -> None:
    scale = hi - lo
    for a in block.chart.arcs:
        pts = [(lo + t * scale, th) for t, th in a.path]
        if a.id in acc.arcs:
            prev = acc.arcs[a.id]
            meta = acc.meta[a.id]
            if prev[-1] != pts[0]:
                raise InterfaceMismatch(f"arc {a.id} does not continue across t={lo + scale}")
            if (meta.kind, meta.index, meta.type_label) != (a.kind, a.index, a.type_label):
                raise InterfaceMismatch(f"arc {a.id} changes labels across t={lo + scale}")
            prev.extend(pts[1:])
        else:
            acc.arcs[a.id] = pts
            acc.meta[a.id] = a
    for e in block.chart.events:
        acc.events.append(replace(e, t=lo + e.t * scale))
    acc.names.append(block.name)


def _play(script, top, lo, hi, acc: _Acc, eps, counter: list[int]) -> InterfaceSlice:
    items = [x for x in script if not (isinstance(x, dict) and x.get("movie") == CLOSURE)]
    if any(isinstance(x, dict) and x.get("movie") == CLOSURE for x in script):
        acc.closed = True
    if not items:
        return top
    step = (hi - lo) / len(items)
    for i, item in enumerate(items):
        b_hi = hi - i * step
        b_lo = b_hi - step
        if isinstance(item, list):
            top = _play(item, top, b_lo, b_hi, acc, eps, counter)
            continue
        if isinstance(item, ChartBlock):
            block = item
            _check_match(top, block.top)
        else:
            name = item["movie"]
            if name not in GENERATORS:
                raise ChartError(f"unknown movie {name!r}")
            params = _coerce_params(dict(item.get("params", {})))
            prefix = item.get("prefix", f"m{counter[0]}.")
            block = GENERATORS[name](**params, top=top, eps=eps, prefix=prefix)
        counter[0] += 1
        _splice(acc, block, b_lo, b_hi)
        top = block.bottom
    return top


def _check_match(upper: InterfaceSlice, lower: InterfaceSlice) -> None:
    a = sorted(s.signature() for s in upper)
    b = sorted(s.signature() for s in lower)
    if a != b:
        missing = [x for x in a if x not in b] or [x for x in b if x not in a]
        raise InterfaceMismatch(f"interfaces differ; first unmatched arc {missing[0]}")


def compose(script, *, eps=None, check: bool = True, seed: int = 0) -> ChartBlock:
    """Stack a (possibly nested) script into one block over t in [0, 1].

    Blocks share the t-range equally at each nesting level.  With ``check``
    the result is validated, perturbed if only crossing rules fail, and
    rejected with ChartError if still invalid.
    """
    script = list(script)
    n = max(1, _leaves(script))
    eps = Fraction(eps) if eps is not None else Fraction(1, 64 * n)
    acc = _Acc({}, {}, [], [])
    bottom = _play(script, (), Fraction(0), Fraction(1), acc, eps, [0])
    arcs = []
    for key in sorted(acc.arcs):
        m = acc.meta[key]
        arcs.append(replace(m, path=tuple(acc.arcs[key])))
    chart = Chart(tuple(arcs), tuple(acc.events), (Fraction(0), Fraction(1)))
    if check:
        chart = ensure_valid(chart, eps / 4, seed)
    return ChartBlock(chart, (), bottom, "stack", {"blocks": acc.names, "closed": acc.closed})


def ensure_valid(chart: Chart, eps, seed: int = 0) -> Chart:
    report = validate_chart(chart)
    if report.valid:
        return chart
    if report.rules() == {RULE_CROSSING}:
        chart = perturb(chart, eps, seed)
        report = validate_chart(chart)
        if report.valid:
            return chart
    raise ChartError("stacked chart is invalid: " + "; ".join(str(v) for v in report.violations[:5]))


def stack(script, *, eps=None, check: bool = True, seed: int = 0) -> Chart:
    """Stack a script of movie invocations into a single chart."""
    return compose(script, eps=eps, check=check, seed=seed).chart


def stack_blocks(blocks: Sequence[ChartBlock], *, check: bool = True) -> ChartBlock:
    """Stack prebuilt blocks; interfaces must agree exactly in position and labels.

    Keys of persisting arcs are renamed to their upper-block keys, and keys of
    arcs born in block i get the prefix ``s{i}.``.
    """
    if not blocks:
        return ChartBlock(Chart(), (), (), "stack")
    renamed = []
    prev_bottom: InterfaceSlice | None = None
    for i, blk in enumerate(blocks):
        mapping: dict[str, str] = {}
        if prev_bottom is not None:
            _check_match(prev_bottom, blk.top)
            by_sig = {s.signature(): s.key for s in prev_bottom}
            for s in blk.top:
                mapping[s.key] = by_sig[s.signature()]
        else:
            for s in blk.top:
                mapping[s.key] = s.key
        ren = lambda k: mapping.get(k, f"s{i}.{k}")
        arcs = tuple(replace(a, id=ren(a.id)) for a in blk.chart.arcs)
        events = tuple(replace(e, arcs=tuple(ren(x) for x in e.arcs)) for e in blk.chart.events)
        top = tuple(replace(s, key=ren(s.key)) for s in blk.top)
        bottom = tuple(replace(s, key=ren(s.key)) for s in blk.bottom)
        renamed.append(ChartBlock(Chart(arcs, events, blk.chart.t_range), top, bottom, blk.name, blk.params))
        prev_bottom = bottom
    acc = _Acc({}, {}, [], [])
    step = Fraction(1, len(renamed))
    for i, blk in enumerate(renamed):
        _splice(acc, blk, 1 - (i + 1) * step, 1 - i * step)
    arcs = tuple(replace(acc.meta[k], path=tuple(acc.arcs[k])) for k in sorted(acc.arcs))
    chart = Chart(arcs, tuple(acc.events), (Fraction(0), Fraction(1)))
    if check:
        chart = ensure_valid(chart, DEFAULT_EPS)
    return ChartBlock(chart, renamed[0].top, renamed[-1].bottom, "stack", {"blocks": [b.name for b in renamed]})
