"""Handle structure of the fiber over a vertical line theta = theta0 of a chart."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .chart import Chart, ChartError, SingKind, SingType, SingularityArc, circle, _Geo

AVOID_BAND_II = "avoid_band_II"
ANY_GENERIC = "any_generic"
BAND_TAG = "band"


class CertificationError(ValueError):
    """The handle cancellation certificate does not establish a handlebody."""


@dataclass(frozen=True)
class Handle:
    """One crossing of the line theta = theta0 with an arc."""

    id: str
    arc_id: str
    t: Fraction
    type_label: SingType
    tag: str | None


@dataclass(frozen=True)
class HandleProfile:
    h0: int = 0
    h1: int = 0
    h2: int = 0
    h3: int = 0
    boundary_h: dict = field(default_factory=dict)
    handles: tuple[Handle, ...] = ()

    def counts(self) -> tuple[int, int, int, int]:
        return (self.h0, self.h1, self.h2, self.h3)

    def of_index(self, k: int) -> list[Handle]:
        return [h for h in self.handles if _HANDLE_INDEX.get(h.type_label) == k]


@dataclass(frozen=True)
class IndexCounts:
    k0: int = 0
    k1: int = 0
    k2: int = 0
    k3: int = 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.k0, self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class FiberReport:
    theta0: Fraction
    profile: HandleProfile
    base_genus: int
    euler: int
    reduced_genus: int | None
    certificate: tuple[tuple[str, str], ...] = ()
    circles: tuple[str, ...] = ()
    dependent_circles: int = 0
    closed: bool = False
    matching: dict = field(default_factory=dict)
    chart: Chart | None = None

    @property
    def certified(self) -> bool:
        return self.reduced_genus is not None


# interior handle index contributed by a crossing of each type; the bowl
# type IIB contributes a 2-handle as well
_HANDLE_INDEX = {
    SingType.ZERO: 0,
    SingType.I: 1,
    SingType.II: 2,
    SingType.IIB: 2,
    SingType.III: 3,
}


def _hits(chart: Chart, theta0: Fraction) -> list[tuple[Fraction, SingularityArc]]:
    hits = []
    for a in chart.arcs:
        for (_, th) in a.path:
            if th == theta0:
                raise ChartError(f"theta0={theta0} passes through a vertex of arc {a.id}")
        g = _Geo(a)
        for i in range(len(g.ts) - 1):
            t0, t1 = g.ts[i], g.ts[i + 1]
            h0, h1 = g.ths[i], g.ths[i + 1]
            lo, hi = min(h0, h1), max(h0, h1)
            for n in range(math.ceil(lo - theta0), math.floor(hi - theta0) + 1):
                x = theta0 + n
                if x == h0 or x == h1:
                    continue
                t = t0 + (x - h0) * (t1 - t0) / (h1 - h0)
                hits.append((t, a))
    return hits


def handle_profile(chart: Chart, theta0) -> HandleProfile:
    """Count arc crossings of the vertical line theta = theta0, walking t downward."""
    theta0 = circle(theta0)
    for e in chart.events:
        if e.theta == theta0:
            raise ChartError(f"theta0={theta0} passes through an event")
    hits = _hits(chart, theta0)
    seen: set[Fraction] = set()
    for t, a in hits:
        if t in seen:
            raise ChartError(f"theta0={theta0} passes through a crossing at t={t}")
        seen.add(t)
    hits.sort(key=lambda x: (-x[0], x[1].id))
    h = [0, 0, 0, 0]
    bdy: dict[str, int] = {}
    handles = []
    for t, a in hits:
        k = _HANDLE_INDEX.get(a.type_label)
        if a.kind == SingKind.BOWL and a.type_label == SingType.IIB:
            h[2] += 1
        elif a.boundary:
            name = f"{a.kind.value}:{a.type_label.value}"
            bdy[name] = bdy.get(name, 0) + 1
            continue
        elif k is not None:
            h[k] += 1
        handles.append(Handle(f"{a.id}@{t}", a.id, t, a.type_label, a.tag))
    return HandleProfile(h[0], h[1], h[2], h[3], dict(sorted(bdy.items())), tuple(handles))


def is_generic(chart: Chart, theta0) -> bool:
    try:
        handle_profile(chart, theta0)
    except ChartError:
        return False
    return True


def _blocking(chart: Chart, policy: str) -> list[SingularityArc]:
    if policy == ANY_GENERIC:
        return []
    if policy != AVOID_BAND_II:
        raise ValueError(f"unknown policy {policy!r}")
    out = []
    for a in chart.arcs:
        band = a.tag is not None and a.tag.split(":")[0] == BAND_TAG
        if (band and a.type_label == SingType.II and not a.boundary) or a.type_label == SingType.IIB:
            out.append(a)
    return out


def admissible_intervals(chart: Chart, policy: str = AVOID_BAND_II) -> list[tuple[Fraction, Fraction]]:
    """Open circular intervals (lo, hi), hi possibly past 1, avoiding the blocking arcs."""
    spans = []
    for a in _blocking(chart, policy):
        g = _Geo(a)
        if g.covers_circle():
            return []
        s = g.th_min % 1
        spans.append((s, s + (g.th_max - g.th_min)))
    if not spans:
        return [(Fraction(0), Fraction(1))]
    line = sorted(x for s, e in spans for x in ((s - 1, e - 1), (s, e), (s + 1, e + 1)))
    merged: list[list[Fraction]] = []
    for s, e in line:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    # each gap between merged spans appears once per turn; keep the copy starting in [0, 1)
    out = []
    for cur, nxt in zip(merged, merged[1:]):
        if 0 <= cur[1] < 1 and nxt[0] > cur[1]:
            out.append((cur[1], nxt[0]))
    return sorted(out)


def _candidates(lo: Fraction, hi: Fraction) -> Iterable[Fraction]:
    w = hi - lo
    yield lo + w / 2
    for depth in range(2, 12):
        den = 2 ** depth
        for num in range(1, den, 2):
            yield lo + w * Fraction(num, den)


def choose_theta0(chart: Chart, policy: str = AVOID_BAND_II) -> Fraction:
    """A generic theta0: midpoint of the largest admissible gap, nudged if needed."""
    if not chart.arcs:
        return Fraction(0)
    ivs = admissible_intervals(chart, policy)
    if not ivs:
        ids = ", ".join(a.id for a in _blocking(chart, policy))
        raise ChartError(f"no admissible theta0; blocked by {ids}")
    if policy == ANY_GENERIC:
        ivs = _vertex_gaps(chart)
    ivs = sorted(ivs, key=lambda iv: (-(iv[1] - iv[0]), iv[0]))
    for lo, hi in ivs:
        for x in _candidates(lo, hi):
            if is_generic(chart, x):
                return circle(x)
    raise ChartError("no generic theta0 found in the admissible region")


def _vertex_gaps(chart: Chart) -> list[tuple[Fraction, Fraction]]:
    ths = sorted({th for a in chart.arcs for _, th in a.path})
    if not ths:
        return [(Fraction(0), Fraction(1))]
    out = []
    for i, a in enumerate(ths):
        b = ths[(i + 1) % len(ths)]
        gap = (b - a) % 1 or Fraction(1)
        out.append((a, a + gap))
    return out


def index_counts(chart: Chart, t) -> IndexCounts:
    """Interior arcs meeting the slice at height t, grouped by Morse index."""
    t = Fraction(t)
    if any(e.t == t for e in chart.events):
        raise ChartError(f"t={t} is the height of an event")
    k = [0, 0, 0, 0]
    for a, _ in chart.slice_at(t):
        if not a.boundary:
            k[a.index] += 1
    return IndexCounts(*k)


def check_torus_identities(counts: IndexCounts) -> bool:
    k0, k1, k2, k3 = counts.as_tuple()
    return k0 - k1 + k2 - k3 == 0 and k0 + k3 == k1 + k2


def euler_of(base_genus: int, profile: HandleProfile) -> int:
    """Euler characteristic of (once-punctured genus-g surface) x I with the profile's handles."""
    return 1 - 2 * base_genus + profile.h0 - profile.h1 + profile.h2 - profile.h3


def reduce(profile: HandleProfile, certificate: Sequence[tuple[str, str]], base_genus: int) -> int:
    """Genus of the handlebody certified by pairing every 1-handle with a distinct 2-handle.

    The attaching circles left after cancelling must number at least the
    genus of the base surface, so that the fiber's boundary closes up to a
    genus-g surface.
    """
    ones = {h.id for h in profile.of_index(1)}
    twos = {h.id for h in profile.of_index(2)}
    paired1 = [p[0] for p in certificate]
    paired2 = [p[1] for p in certificate]
    if set(paired1) != ones or len(paired1) != len(ones):
        missing = sorted(ones - set(paired1))
        raise CertificationError(f"handlebody not certified: unpaired 1-handles {missing}")
    if len(set(paired2)) != len(paired2) or not set(paired2) <= twos:
        raise CertificationError("handlebody not certified: 2-handles reused or unknown")
    net = profile.h2 - profile.h1 - profile.h3 + profile.h0
    if net < base_genus:
        raise CertificationError(
            f"handlebody not certified: too few attaching circles ({net}) for genus {base_genus}"
        )
    return base_genus


def attaching_circles(profile: HandleProfile, certificate: Sequence[tuple[str, str]]) -> tuple[str, ...]:
    """Provenance tags of the 2-handles left after cancelling the certified pairs."""
    used = {p[1] for p in certificate}
    return tuple(h.tag or h.arc_id for h in profile.of_index(2) if h.id not in used)
