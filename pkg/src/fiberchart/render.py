"""Deterministic SVG drawings of singularity charts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from xml.sax.saxutils import escape

from .chart import Chart, SingKind, SingularityArc, shortest_delta

_PALETTE = ("#1f4e9c", "#b3362b", "#2e7d32", "#8e5a00", "#6a3d9a", "#00838f")
_KINDS = (SingKind.CONE, SingKind.DOT, SingKind.HALF_CONE, SingKind.HALF_DOT, SingKind.BOWL)


@dataclass(frozen=True)
class RenderOptions:
    width: int = 640
    height: int = 480
    dash: str = "6,4"
    labels: str = "midpoint"  # or "none"
    color_seed: int = 0
    margin: int = 40


def _color(kind: SingKind, seed: int) -> str:
    return _PALETTE[(_KINDS.index(kind) + seed) % len(_PALETTE)]


def _num(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pieces(arc: SingularityArc) -> list[list[tuple[Fraction, Fraction]]]:
    """The arc as polylines in [0,1] x [0,1], split where it wraps past theta = 0."""
    pts = list(arc.path)
    pieces = [[pts[0]]]
    for (t0, h0), (t1, h1) in zip(pts, pts[1:]):
        d = shortest_delta(h0, h1)
        end = h0 + d
        if 0 <= end < 1:
            pieces[-1].append((t1, end))
            continue
        edge = Fraction(1) if end >= 1 else Fraction(0)
        tw = t0 + (t1 - t0) * (edge - h0) / d
        pieces[-1].append((tw, edge))
        pieces.append([(tw, 1 - edge), (t1, h1)])
    return pieces


def render_svg(chart: Chart, options: RenderOptions | None = None) -> str:
    """SVG with theta across and t decreasing downward; boundary arcs dashed."""
    o = options or RenderOptions()
    lo, hi = chart.t_range
    span = hi - lo or Fraction(1)
    w, h, m = o.width, o.height, o.margin
    pw, ph = w - 2 * m, h - 2 * m

    def xy(t: Fraction, th: Fraction) -> tuple[str, str]:
        return _num(m + float(th) * pw), _num(m + float((hi - t) / span) * ph)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="#000" stroke-width="1"/>',
        f'<text x="{m}" y="{h - m / 3:.0f}" font-size="12">0</text>',
        f'<text x="{w - m}" y="{h - m / 3:.0f}" font-size="12" text-anchor="end">1</text>',
        f'<text x="{w / 2:.0f}" y="{h - m / 3:.0f}" font-size="12" text-anchor="middle">theta</text>',
        f'<text x="{m / 2:.0f}" y="{m}" font-size="12" text-anchor="middle">{escape(str(hi))}</text>',
        f'<text x="{m / 2:.0f}" y="{h - m}" font-size="12" text-anchor="middle">{escape(str(lo))}</text>',
        f'<text x="{m / 2:.0f}" y="{h / 2:.0f}" font-size="12" text-anchor="middle">t</text>',
    ]
    for arc in sorted(chart.arcs, key=lambda a: a.id):
        color = _color(arc.kind, o.color_seed)
        dash = f' stroke-dasharray="{o.dash}"' if arc.boundary else ""
        pieces = _pieces(arc)
        for i, piece in enumerate(pieces):
            coords = " ".join(",".join(xy(t, th)) for t, th in piece)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}>'
                f"<title>{escape(arc.id)}</title></polyline>"
            )
            if i:
                x, y = xy(*piece[0])
                out.append(f'<circle cx="{x}" cy="{y}" r="2" fill="none" stroke="{color}"/>')
        if o.labels == "midpoint":
            longest = max(pieces, key=len)
            t, th = longest[len(longest) // 2]
            x, y = xy(t, th)
            out.append(f'<text x="{x}" y="{y}" font-size="10" fill="{color}">{escape(arc.type_label.value)}</text>')
    for ev in sorted(chart.events, key=lambda e: (-e.t, e.theta, e.kind.value)):
        x, y = xy(ev.t, ev.theta)
        out.append(f'<circle cx="{x}" cy="{y}" r="3" fill="#000"><title>{escape(ev.kind.value)}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
