"""Ribbon-disk presentations, band/disk matching, and the handlebody fiber pipeline."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .chart import Chart, ChartError, validate_chart
from .fiber import (
    AVOID_BAND_II,
    CertificationError,
    FiberReport,
    HandleProfile,
    attaching_circles,
    choose_theta0,
    euler_of,
    handle_profile,
    reduce,
)
from .movies import CLOSURE, compose, ensure_valid


class PresentationError(ValueError):
    """The presentation breaks a structural rule."""


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class Band:
    id: str
    transverse: bool = True


@dataclass(frozen=True)
class Disk:
    id: str


@dataclass(frozen=True)
class RibbonPresentation:
    """Fission bands b_1..b_n and minimum disks d_1..d_{n+1} of a ribbon disk.

    ``incidence[i][j]`` counts the arcs of d_i crossing the interior of b_j.
    """

    genus: int
    bands: tuple[Band, ...]
    disks: tuple[Disk, ...]
    incidence: tuple[tuple[int, ...], ...]
    boundary_touch: tuple[tuple[bool, ...], ...] | None = None

    @property
    def n(self) -> int:
        return len(self.bands)


def presentation(genus: int, incidence: Sequence[Sequence[int]], *, n_bands: int | None = None,
                 transverse: Sequence[bool] | None = None, boundary_touch=None,
                 band_ids=None, disk_ids=None) -> RibbonPresentation:
    """Convenience constructor with default ids b1.. and d1.."""
    rows = tuple(tuple(int(x) for x in r) for r in incidence)
    n = n_bands if n_bands is not None else (len(rows[0]) if rows else 0)
    band_ids = band_ids or [f"b{j + 1}" for j in range(n)]
    disk_ids = disk_ids or [f"d{i + 1}" for i in range(len(rows))]
    transverse = transverse if transverse is not None else [True] * n
    bt = tuple(tuple(bool(x) for x in r) for r in boundary_touch) if boundary_touch is not None else None
    return RibbonPresentation(
        genus,
        tuple(Band(b, bool(t)) for b, t in zip(band_ids, transverse)),
        tuple(Disk(d) for d in disk_ids),
        rows,
        bt,
    )


def presentation_from_dict(data: dict) -> RibbonPresentation:
    try:
        bands = tuple(Band(str(b["id"]), bool(b.get("transverse", True))) for b in data.get("bands", []))
        disks = tuple(Disk(str(d["id"])) for d in data.get("disks", []))
        inc = tuple(tuple(int(x) for x in row) for row in data.get("incidence", []))
        bt = data.get("boundary_touch")
        bt = tuple(tuple(bool(x) for x in row) for row in bt) if bt is not None else None
        genus = data["genus"]
        if not isinstance(genus, int) or isinstance(genus, bool):
            raise PresentationError("genus must be an integer")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PresentationError):
            raise
        raise PresentationError(f"malformed presentation: {exc}") from exc
    return RibbonPresentation(genus, bands, disks, inc, bt)


def presentation_to_dict(p: RibbonPresentation) -> dict:
    out = {
        "genus": p.genus,
        "bands": [{"id": b.id, "transverse": b.transverse} for b in p.bands],
        "disks": [{"id": d.id} for d in p.disks],
        "incidence": [list(r) for r in p.incidence],
    }
    if p.boundary_touch is not None:
        out["boundary_touch"] = [list(r) for r in p.boundary_touch]
    return out


# ---------------------------------------------------------------------------
# incidence graph and matching


@dataclass(frozen=True)
class Incidence:
    """Bipartite graph: band j is adjacent to disk i when incidence[i][j] > 0."""

    n_bands: int
    n_disks: int
    edges: frozenset[tuple[int, int]]  # (disk, band)

    def disks_of(self, band: int) -> list[int]:
        return sorted(i for i, j in self.edges if j == band)

    def neighbours(self, bands) -> set[int]:
        bs = set(bands)
        return {i for i, j in self.edges if j in bs}


def incidence_of(p: RibbonPresentation | Sequence[Sequence[int]]) -> Incidence:
    rows = p.incidence if isinstance(p, RibbonPresentation) else tuple(tuple(r) for r in p)
    n_b = p.n if isinstance(p, RibbonPresentation) else (len(rows[0]) if rows else 0)
    edges = frozenset((i, j) for i, r in enumerate(rows) for j, k in enumerate(r) if k > 0)
    return Incidence(n_b, len(rows), edges)


@dataclass(frozen=True)
class HallResult:
    ok: bool
    violator: tuple[int, ...] = ()


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]  # (band, disk)
    leftover: tuple[int, ...]

    def disk_of(self, band: int) -> int:
        return dict(self.pairs)[band]


def _kuhn(g: Incidence) -> dict[int, int]:
    """Maximum matching band -> disk by augmenting paths, lowest disk id first."""
    adj = {j: g.disks_of(j) for j in range(g.n_bands)}
    owner: dict[int, int] = {}

    def augment(j: int, seen: set[int]) -> bool:
        for i in adj[j]:
            if i in seen:
                continue
            seen.add(i)
            if i not in owner or augment(owner[i], seen):
                owner[i] = j
                return True
        return False

    for j in range(g.n_bands):
        augment(j, set())
    return {j: i for i, j in owner.items()}


def hall_check(g: Incidence) -> HallResult:
    """Confirm |N(X)| >= |X| for all band sets X, or return a smallest violator."""
    match = _kuhn(g)
    if len(match) == g.n_bands:
        return HallResult(True)
    if g.n_bands <= 12:
        for size in range(1, g.n_bands + 1):
            for xs in itertools.combinations(range(g.n_bands), size):
                if len(g.neighbours(xs)) < size:
                    return HallResult(False, xs)
    # alternating-path witness from an unmatched band
    free = next(j for j in range(g.n_bands) if j not in match)
    owner = {i: j for j, i in match.items()}
    xs, stack = {free}, [free]
    while stack:
        j = stack.pop()
        for i in g.disks_of(j):
            k = owner.get(i)
            if k is not None and k not in xs:
                xs.add(k)
                stack.append(k)
    return HallResult(False, tuple(sorted(xs)))


def perfect_matching(g: Incidence) -> Matching:
    """A matching saturating every band; the unmatched disks are the leftover."""
    res = hall_check(g)
    if not res.ok:
        raise PresentationError(f"Hall condition fails for bands {list(res.violator)}")
    m = _kuhn(g)
    used = set(m.values())
    return Matching(tuple(sorted(m.items())), tuple(i for i in range(g.n_disks) if i not in used))


def brute_force_perfect(g: Incidence) -> bool:
    """Exhaustive search for a band-saturating matching (small graphs only)."""
    for perm in itertools.permutations(range(g.n_disks), g.n_bands):
        if all((perm[j], j) in g.edges for j in range(g.n_bands)):
            return True
    return g.n_bands == 0


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class PresentationReport:
    valid: bool
    errors: tuple[str, ...] = ()
    reduced: RibbonPresentation | None = None
    cancelled: tuple[tuple[str, str], ...] = ()


def _trivial_cancel(p: RibbonPresentation) -> tuple[RibbonPresentation, tuple[tuple[str, str], ...]]:
    if p.boundary_touch is None:
        return p, ()
    gone_d: set[int] = set()
    gone_b: set[int] = set()
    out = []
    for i, row in enumerate(p.boundary_touch):
        for j, touch in enumerate(row):
            if touch and p.incidence[i][j] == 0 and i not in gone_d and j not in gone_b:
                gone_d.add(i)
                gone_b.add(j)
                out.append((p.disks[i].id, p.bands[j].id))
    if not out:
        return p, ()
    keep_d = [i for i in range(len(p.disks)) if i not in gone_d]
    keep_b = [j for j in range(p.n) if j not in gone_b]
    inc = tuple(tuple(p.incidence[i][j] for j in keep_b) for i in keep_d)
    bt = tuple(tuple(p.boundary_touch[i][j] for j in keep_b) for i in keep_d)
    return RibbonPresentation(
        p.genus, tuple(p.bands[j] for j in keep_b), tuple(p.disks[i] for i in keep_d), inc, bt
    ), tuple(out)


def validate_presentation(p: RibbonPresentation, *, annulus: bool = False) -> PresentationReport:
    """Structural checks; a trivial disk/band cancellation pass gives the reduced presentation.

    For a disk (``annulus`` false) there must be n + 1 disks; for a
    concordance annulus there are n.  The used disks must meet the bands at
    least genus-many times in total so the fiber can carry the base surface.
    """
    errs = []
    n = p.n
    want = n if annulus else n + 1
    if p.genus < 0:
        errs.append("genus must be non-negative")
    if len(p.disks) != want:
        errs.append(f"{n} bands need {want} disks, found {len(p.disks)}")
    if len(p.incidence) != len(p.disks) or any(len(r) != n for r in p.incidence):
        errs.append("incidence must have one row per disk and one column per band")
    if any(x < 0 for r in p.incidence for x in r):
        errs.append("incidence entries must be non-negative")
    if p.boundary_touch is not None and (
        len(p.boundary_touch) != len(p.incidence) or any(len(r) != n for r in p.boundary_touch)
    ):
        errs.append("boundary_touch must match the incidence shape")
    for b in p.bands:
        if not b.transverse:
            errs.append(f"band {b.id} is not transverse to the fibration")
    if len({b.id for b in p.bands}) != n or len({d.id for d in p.disks}) != len(p.disks):
        errs.append("band and disk ids must be unique")
    if errs:
        return PresentationReport(False, tuple(errs))
    reduced, cancelled = _trivial_cancel(p)
    g = incidence_of(reduced)
    hall = hall_check(g)
    if not hall.ok:
        names = [reduced.bands[j].id for j in hall.violator]
        errs.append(f"Hall condition fails for bands {names}: some band is a fusion band")
    else:
        m = perfect_matching(g)
        used = sum(sum(reduced.incidence[i]) for _, i in m.pairs)
        if used < reduced.genus:
            errs.append(f"used disks meet the bands {used} times, fewer than the genus {reduced.genus}")
    return PresentationReport(not errs, tuple(errs), reduced, cancelled)


# ---------------------------------------------------------------------------
# movie compilation


@dataclass(frozen=True)
class MovieScript:
    items: tuple[dict, ...]
    band_end: int  # index of the first item after the band phase
    disk_end: int  # index of the first item after the disk phase
    groups: tuple[dict, ...] = ()
    eps: Fraction = Fraction(1, 1024)

    def to_json(self) -> list[dict]:
        return [json.loads(json.dumps(x, default=str)) for x in self.items]


ZONE_LO = Fraction(1, 8)
ZONE_HI = Fraction(3, 4)


def compile_movie(p: RibbonPresentation, m: Matching, *, simple: bool = True, annulus: bool = False) -> MovieScript:
    """Band movies, then disk movies for the matched disks, then cone/dot cancellations.

    All structure is kept in a zone Z = [1/8, 3/4] bounded by the first band;
    each disk cone sweeps once across the complement, so any theta0 in the
    complement meets exactly the disk cones.
    """
    for b in p.bands:
        if not b.transverse:
            raise PresentationError(f"band {b.id} is not transverse")
    n = p.n
    if n == 0:
        return MovieScript(() if annulus else ({"movie": CLOSURE},), 0, 0)
    ks = [sum(p.incidence[m.disk_of(j)]) for j in range(n)]
    if any(k < 1 for k in ks):
        raise PresentationError("a matched disk meets no band")
    n_right = [1 + (k + 1) // 2 for k in ks]  # index-1 cones per group
    n_left = [1 + k // 2 for k in ks]  # index-2 cones per group
    cells = [(2 if j else 0) + (k // 2 + 4) + ((k + 1) // 2 + 4) + 1 for j, k in enumerate(ks)]
    units = sum(n_left) + 1 + sum(cells) + 1 + sum(n_right) + 1
    u = (ZONE_HI - ZONE_LO) / units
    n_blocks = 2 * n + sum(2 + 2 * k for k in ks)
    eps = u / (16 * n_blocks)

    # slots: band cones nearest the zone edges, band 0 outermost
    left_slots = iter(ZONE_LO + s * u for s in range(sum(n_left)))
    right_slots = iter(ZONE_HI - (1 + s) * u for s in range(sum(n_right)))
    b_slot = [next(left_slots) for _ in range(n)]
    a_slot = [next(right_slots) for _ in range(n)]
    cell_x = []
    x = ZONE_LO + (sum(n_left) + 1) * u
    for j in range(n):
        cell_x.append(x)
        x += cells[j] * u

    items: list[dict] = []
    groups = []
    for j in range(n):
        tag = f"band:{p.bands[j].id}"
        th_s = ZONE_HI if j == 0 else cell_x[j] + u
        items.append({
            "movie": "band",
            "prefix": f"band{j}.",
            "params": {"theta_stab": th_s, "theta_final": b_slot[j], "theta_park": a_slot[j], "unit": u,
                       "tag": tag, "saddle_dir": -1 if j == 0 else 1},
        })
    band_end = len(items)
    for j in range(n):
        k = ks[j]
        disk = p.disks[m.disk_of(j)]
        tag = f"disk:{disk.id}"
        base = cell_x[j] + (2 * u if j else 0)
        nl, nr = k // 2, (k + 1) // 2
        c = base + (nl + 4) * u
        stabs, targets = [], []
        cones1, cones2, dots0, dots3 = [f"band{j}.A"], [f"band{j}.B"], [], []
        for i in range(k):
            r = i // 2
            if i % 2 == 0:
                stabs.append(c + (4 + r) * u)
                targets.append(next(right_slots))
                dots0.append(f"disk{j}.s{i}.lo")
                cones1.append(f"disk{j}.s{i}.hi")
            else:
                stabs.append(c - (4 + r) * u)
                targets.append(next(left_slots))
                cones2.append(f"disk{j}.s{i}.lo")
                dots3.append(f"disk{j}.s{i}.hi")
        dots0.append(f"disk{j}.min.d0")
        dots3.append(f"disk{j}.min.d3")
        items.append({
            "movie": "disk",
            "prefix": f"disk{j}.",
            "params": {"k": k, "theta_list": targets, "theta_center": c, "stab_thetas": stabs, "wraps": 1,
                       "unit": u, "tag": tag},
        })
        groups.append({"band": p.bands[j].id, "disk": disk.id, "k": k,
                       "index1": list(zip(cones1, dots0)), "index2": list(zip(cones2, dots3))})
    disk_end = len(items)
    order = list(range(1, n)) + [0]
    for j in order:
        for cone, dot in _interleave(groups[j]["index1"], groups[j]["index2"]):
            items.append({
                "movie": "cancellation",
                "params": {"simple": simple, "cone_arc": cone, "dot_arc": dot, "gap": u / 3},
            })
    if not annulus:
        items.append({"movie": CLOSURE})
    return MovieScript(tuple(items), band_end, disk_end, tuple(groups), eps)


def _interleave(a: list, b: list) -> list:
    out = []
    for x, y in itertools.zip_longest(a, b):
        if x is not None:
            out.append(x)
        if y is not None:
            out.append(y)
    return out


def build_chart(script: MovieScript, *, check: bool = True) -> Chart:
    return compose(list(script.items), eps=script.eps, check=check).chart


def phase_heights(script: MovieScript) -> tuple[Fraction, Fraction]:
    """Heights of the slices right after the band phase and right after the disk phase."""
    blocks = [x for x in script.items if x.get("movie") != CLOSURE]
    n = len(blocks)
    if n == 0:
        return Fraction(1), Fraction(1)
    return 1 - Fraction(script.band_end, n), 1 - Fraction(script.disk_end, n)


# ---------------------------------------------------------------------------
# reports


def _certificate(profile: HandleProfile, p: RibbonPresentation, m: Matching) -> tuple[tuple[str, str], ...]:
    """Pair each band 1-handle with a distinct 2-handle from its matched disk."""
    band_of = {f"band:{p.bands[j].id}": f"disk:{p.disks[i].id}" for j, i in m.pairs}
    free = [h for h in profile.of_index(2)]
    used: set[str] = set()
    pairs = []
    for h in profile.of_index(1):
        want = band_of.get(h.tag or "")
        pick = next((x for x in free if x.id not in used and x.tag == want), None)
        if pick is None:
            continue
        used.add(pick.id)
        pairs.append((h.id, pick.id))
    return tuple(pairs)


def _run(stage: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (ChartError, CertificationError, PresentationError, ValueError) as exc:
        raise PipelineError(stage, str(exc)) from exc


@dataclass(frozen=True)
class PipelineChart:
    """The reduced presentation, its band/disk matching and the stacked chart."""

    presentation: RibbonPresentation
    matching: Matching
    script: MovieScript
    chart: Chart


def pipeline_chart(p: RibbonPresentation, *, simple: bool = True, check: bool = True, seed: int = 0) -> PipelineChart:
    """Validate, match, compile and stack; with ``check`` the chart is repaired until valid."""
    rep = validate_presentation(p)
    if not rep.valid:
        raise PipelineError("validate", "; ".join(rep.errors))
    q = rep.reduced
    m = _run("matching", perfect_matching, incidence_of(q))
    script = _run("compile", compile_movie, q, m, simple=simple)
    chart = _run("stack", build_chart, script, check=False)
    if check:
        chart = _run("validate_chart", ensure_valid, chart, script.eps / 4, seed)
    return PipelineChart(q, m, script, chart)


def certify(pc: PipelineChart, theta0=None) -> FiberReport:
    """Read the fiber over theta0 and certify it as a handlebody."""
    q, m, chart = pc.presentation, pc.matching, pc.chart
    th = _run("theta0", choose_theta0, chart, AVOID_BAND_II) if theta0 is None else Fraction(theta0)
    profile = _run("profile", handle_profile, chart, th)
    cert = _certificate(profile, q, m)
    genus = _run("reduce", reduce, profile, cert, q.genus)
    circles = attaching_circles(profile, cert)
    matching = {q.bands[j].id: q.disks[i].id for j, i in m.pairs}
    matching["leftover"] = [q.disks[i].id for i in m.leftover]
    return FiberReport(
        theta0=th,
        profile=profile,
        base_genus=q.genus,
        euler=euler_of(q.genus, profile),
        reduced_genus=genus,
        certificate=cert,
        circles=circles,
        dependent_circles=len(circles) - genus,
        closed=True,
        matching=matching,
        chart=chart,
    )


def fiber_report(p: RibbonPresentation, *, theta0=None, simple: bool = True, check: bool = True,
                 seed: int = 0) -> FiberReport:
    """Run the pipeline and certify the handlebody fiber of the disk complement."""
    return certify(pipeline_chart(p, simple=simple, check=check, seed=seed), theta0)


@dataclass(frozen=True)
class CompressionReport:
    genus_k: int
    genus_j: int
    two_handles: int
    theta0: Fraction
    profile: HandleProfile
    chart: Chart | None = None


def concordance_report(p: RibbonPresentation, *, check: bool = True, seed: int = 0) -> CompressionReport:
    """Fiber of a ribbon concordance complement: a compression body from genus g(K) to g(J)."""
    rep = validate_presentation(p, annulus=True)
    if not rep.valid and not all("fewer than the genus" in e for e in rep.errors):
        raise PipelineError("validate", "; ".join(rep.errors))
    q = rep.reduced
    m = _run("matching", perfect_matching, incidence_of(q))
    if m.leftover:
        raise PipelineError("matching", "an annulus presentation has no leftover disk")
    script = _run("compile", compile_movie, q, m, annulus=True)
    chart = _run("stack", build_chart, script, check=False)
    if check:
        chart = _run("validate_chart", ensure_valid, chart, script.eps / 4, seed)
    th = _run("theta0", choose_theta0, chart, AVOID_BAND_II)
    profile = _run("profile", handle_profile, chart, th)
    cert = _certificate(profile, q, m)
    if len(cert) != profile.h1:
        raise PipelineError("reduce", "compression body not certified: unpaired 1-handles")
    extra = profile.h2 - profile.h1 - profile.h3 + profile.h0
    gj = q.genus - extra
    if gj < 0:
        raise PipelineError("reduce", f"genus bound violated: {extra} 2-handles exceed genus {q.genus}")
    return CompressionReport(q.genus, gj, extra, th, profile, chart)


@dataclass(frozen=True)
class TwoKnotReport:
    heegaard_genus: int
    euler: int
    circles: tuple[tuple[str, ...], tuple[str, ...]]


def glue_double(r1: FiberReport, r2: FiberReport) -> TwoKnotReport:
    """Closed fiber of the 2-knot formed by two disks: two handlebodies glued along the fiber surface."""
    if not (r1.certified and r2.certified):
        raise CertificationError("both reports must be certified handlebodies")
    if r1.base_genus != r2.base_genus:
        raise CertificationError(f"genus mismatch: {r1.base_genus} vs {r2.base_genus}")
    g = r1.base_genus
    # a closed orientable 3-manifold has Euler characteristic 0:
    # chi(H1) + chi(H2) - chi(closed genus-g surface) = (1-g) + (1-g) - (2-2g)
    euler = (1 - r1.reduced_genus) + (1 - r2.reduced_genus) - (2 - 2 * g)
    return TwoKnotReport(g, euler, (r1.circles, r2.circles))


# ---------------------------------------------------------------------------
# presentations read off standard pictures

def example_presentations() -> dict[str, RibbonPresentation]:
    return {
        "8_20": presentation(2, [[2], [1]]),
        "square": presentation(2, [[1, 0], [0, 1], [0, 0]]),
        "unknot": presentation(0, [[]], n_bands=0),
        "11n_74": presentation(2, [[2], [0]]),
    }
