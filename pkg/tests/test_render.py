import xml.etree.ElementTree as ET
from fractions import Fraction as F
from pathlib import Path

from fiberchart.chart import Chart, SingKind, SingType, make_arc
from fiberchart.render import RenderOptions, render_svg
from fiberchart.ribbon import example_presentations, fiber_report

GOLDEN = Path(__file__).parent / "golden" / "820.svg"
NS = "{http://www.w3.org/2000/svg}"


def _chart():
    a = make_arc("a", SingKind.CONE, 1, SingType.I, [(1, F(7, 8)), (0, F(1, 8))])  # wraps past 0
    b = make_arc("b", SingKind.HALF_DOT, 0, SingType.ZERO, [(1, F(1, 4)), (0, F(3, 8))])
    return Chart((a, b))


def test_render_is_deterministic():
    assert render_svg(_chart()) == render_svg(_chart())


def test_render_is_well_formed_xml():
    root = ET.fromstring(render_svg(_chart()))
    assert root.tag == NS + "svg"


def test_boundary_arcs_are_dashed_and_wraps_marked():
    root = ET.fromstring(render_svg(_chart()))
    lines = root.findall(NS + "polyline")
    dashed = {ln.find(NS + "title").text for ln in lines if ln.get("stroke-dasharray")}
    assert dashed == {"b"}
    # the wrapping arc is drawn in two pieces with one wrap marker
    assert sum(ln.find(NS + "title").text == "a" for ln in lines) == 2
    assert len(root.findall(NS + "circle")) == 1


def test_labels_can_be_switched_off():
    on = render_svg(_chart())
    off = render_svg(_chart(), RenderOptions(labels="none"))
    assert ">I</text>" in on and ">I</text>" not in off


def test_color_seed_rotates_palette():
    assert render_svg(_chart(), RenderOptions(color_seed=1)) != render_svg(_chart())


def test_empty_chart_draws_axes_only():
    root = ET.fromstring(render_svg(Chart()))
    assert root.findall(NS + "polyline") == []
    assert len(root.findall(NS + "rect")) == 1


def test_820_pipeline_chart_matches_golden():
    chart = fiber_report(example_presentations()["8_20"]).chart
    assert render_svg(chart) == GOLDEN.read_text()
