"""Command-line interface: fiberchart <command> ...

Exit codes: 0 success, 1 domain failure (invalid chart, Hall violation,
uncertified or non-fibered result), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .chart import ChartError, chart_from_dict, chart_to_dict, frac_str, parse_frac, validate_chart
from .fiber import (
    ANY_GENERIC,
    AVOID_BAND_II,
    CertificationError,
    FiberReport,
    HandleProfile,
    choose_theta0,
    euler_of,
    handle_profile,
)
from .movies import compose
from .render import RenderOptions, render_svg
from .ribbon import (
    PipelineError,
    PresentationError,
    concordance_report,
    fiber_report,
    glue_double,
    presentation_from_dict,
)
from .twobridge import (
    DEFAULT_CONVENTION,
    MINUS,
    PLUS,
    FractionError,
    cf_eval,
    cf_strict,
    enumerate_fibered_ribbon,
    family_of,
    is_fibered,
    knot_name,
    parse_coeffs,
)

OK, DOMAIN, USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input file or argument; exits with status 2."""


def _seed() -> int:
    raw = os.environ.get("FIBERCHART_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FIBERCHART_SEED must be an integer, got {raw!r}")


def _read_json(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")


def _load_chart(path: str):
    data = _read_json(path)
    try:
        return chart_from_dict(data)
    except ChartError as exc:
        raise UsageError(f"{path}: {exc}")


def _load_presentation(path: str):
    data = _read_json(path)
    try:
        return presentation_from_dict(data)
    except (PresentationError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed presentation: {exc}")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=False))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def profile_to_dict(p: HandleProfile) -> dict:
    return {
        "h0": p.h0, "h1": p.h1, "h2": p.h2, "h3": p.h3,
        "boundary": p.boundary_h,
        "handles": [{"id": h.id, "arc": h.arc_id, "t": frac_str(h.t), "type": h.type_label.value, "tag": h.tag}
                    for h in p.handles],
    }


def fiber_report_to_dict(r: FiberReport) -> dict:
    return {
        "theta0": frac_str(r.theta0),
        "base_genus": r.base_genus,
        "reduced_genus": r.reduced_genus,
        "certified": r.certified,
        "euler": r.euler,
        "profile": profile_to_dict(r.profile),
        "certificate": [list(x) for x in r.certificate],
        "attaching_circles": list(r.circles),
        "dependent_circles": r.dependent_circles,
        "matching": r.matching,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    chart = _load_chart(args.chart)
    report = validate_chart(chart)
    _emit({"valid": report.valid, "violations": len(report.violations)})
    for v in report.violations:
        _emit({"rule": v.rule, "subject": v.subject, "t": frac_str(v.t) if v.t is not None else None,
               "theta": frac_str(v.theta) if v.theta is not None else None, "message": v.message})
    return OK if report.valid else DOMAIN


def cmd_compose(args) -> int:
    script = _read_json(args.script)
    if not isinstance(script, list):
        raise UsageError(f"{args.script}: a movie script is a JSON list")
    try:
        block = compose(script, eps=parse_frac(args.eps) if args.eps else None, seed=_seed())
    except ChartError as exc:
        print(f"compose: {exc}", file=sys.stderr)
        return DOMAIN
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.script}: bad movie script: {exc}")
    _write(args.output, json.dumps(chart_to_dict(block.chart)) + "\n")
    return OK


def cmd_fiber(args) -> int:
    chart = _load_chart(args.chart)
    try:
        th = parse_frac(args.theta0) if args.theta0 else choose_theta0(chart, args.policy)
        profile = handle_profile(chart, th)
    except ChartError as exc:
        print(f"fiber: {exc}", file=sys.stderr)
        return DOMAIN
    out = {
        "theta0": frac_str(th),
        "policy": args.policy,
        "base_genus": args.genus,
        "euler": euler_of(args.genus, profile),
        "profile": profile_to_dict(profile),
    }
    # without a band/disk matching only a profile free of 1-handles certifies
    out["reduced_genus"] = args.genus if profile.h1 == 0 and profile.h2 - profile.h3 + profile.h0 >= args.genus else None
    _emit(out)
    return OK


def _pipeline_failure(exc: PipelineError) -> int:
    _emit({"certified": False, "stage": exc.stage, "error": str(exc)})
    return DOMAIN


def cmd_ribbon(args) -> int:
    p = _load_presentation(args.presentation)
    try:
        r = fiber_report(p, theta0=parse_frac(args.theta0) if args.theta0 else None, seed=_seed())
    except PipelineError as exc:
        return _pipeline_failure(exc)
    out = fiber_report_to_dict(r)
    out["chart_path"] = args.emit_chart
    if args.emit_chart:
        _write(args.emit_chart, json.dumps(chart_to_dict(r.chart)) + "\n")
    if args.render:
        _write(args.render, render_svg(r.chart))
    _emit(out)
    return OK


def cmd_concordance(args) -> int:
    p = _load_presentation(args.presentation)
    try:
        r = concordance_report(p, seed=_seed())
    except PipelineError as exc:
        return _pipeline_failure(exc)
    _emit({"genus_k": r.genus_k, "genus_j": r.genus_j, "two_handles": r.two_handles,
           "theta0": frac_str(r.theta0), "profile": profile_to_dict(r.profile)})
    return OK


def cmd_glue(args) -> int:
    p1 = _load_presentation(args.first)
    p2 = _load_presentation(args.second)
    try:
        r1 = fiber_report(p1, seed=_seed())
        r2 = fiber_report(p2, seed=_seed())
        g = glue_double(r1, r2)
    except PipelineError as exc:
        return _pipeline_failure(exc)
    except CertificationError as exc:
        _emit({"certified": False, "error": str(exc)})
        return DOMAIN
    _emit({"heegaard_genus": g.heegaard_genus, "euler": g.euler,
           "attaching_circles": [list(c) for c in g.circles]})
    return OK


def _bridge_line(cs, convention: str) -> tuple[dict, bool]:
    f = cf_eval(cs, convention)
    fam = family_of(cs)
    fibered = is_fibered(fam) if fam is not None else None
    line = {
        "coeffs": list(cs.coeffs),
        "family": fam.family if fam else None,
        "params": fam.to_dict() if fam else None,
        "fraction": str(f),
        "knot": f.is_knot,
        "fibered": fibered,
        "knot_name": knot_name(f),
        "convention": convention,
    }
    return line, bool(fibered)


def cmd_twobridge(args) -> int:
    conv = args.convention
    try:
        if args.action == "enumerate":
            for k in enumerate_fibered_ribbon(args.max, conv):
                d = k.to_dict(conv)
                _emit({"family": k.family.family, "params": k.family.to_dict(), "coeffs": d["coeffs"],
                       "fraction": d["fraction"], "fibered": True, "knot_name": d["knot"],
                       "members": d["members"], "convention": conv})
            return OK
        cs = parse_coeffs(args.coeffs)
        line, fibered = _bridge_line(cs, conv)
        if args.action == "eval":
            if args.strict:
                line["strict"] = list(cf_strict(cs, conv).coeffs)
            _emit(line)
            return OK
        _emit(line)
        return OK if fibered else DOMAIN
    except FractionError as exc:
        raise UsageError(str(exc))


def cmd_render(args) -> int:
    chart = _load_chart(args.chart)
    report = validate_chart(chart)
    if not report.valid:
        print(f"render: refusing an invalid chart ({len(report.violations)} violations)", file=sys.stderr)
        return DOMAIN
    opts = RenderOptions(width=args.width, height=args.height,
                         labels="none" if args.no_labels else "midpoint", color_seed=args.color_seed)
    _write(args.output, render_svg(chart, opts))
    return OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fiberchart", description="Singularity charts, ribbon pipelines and 2-bridge knots.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a chart file")
    p.add_argument("chart", help="chart JSON file or - for stdin")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("compose", help="stack a movie script into a chart")
    p.add_argument("script")
    p.add_argument("-o", "--output")
    p.add_argument("--eps")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("fiber", help="handle profile of the fiber over theta0")
    p.add_argument("chart")
    p.add_argument("--theta0")
    p.add_argument("--policy", choices=[AVOID_BAND_II, ANY_GENERIC], default=AVOID_BAND_II)
    p.add_argument("--genus", type=int, default=0)
    p.set_defaults(fn=cmd_fiber)

    p = sub.add_parser("ribbon", help="certify the handlebody fiber of a ribbon disk complement")
    p.add_argument("presentation")
    p.add_argument("--theta0")
    p.add_argument("--emit-chart")
    p.add_argument("--render")
    p.set_defaults(fn=cmd_ribbon)

    p = sub.add_parser("concordance", help="compression body fiber of a ribbon concordance")
    p.add_argument("presentation")
    p.set_defaults(fn=cmd_concordance)

    p = sub.add_parser("glue", help="closed fiber of the 2-knot double of two disks")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(fn=cmd_glue)

    p = sub.add_parser("twobridge", help="continued fractions of 2-bridge knots")
    tb = p.add_subparsers(dest="action", required=True)
    for name in ("eval", "classify"):
        q = tb.add_parser(name)
        q.add_argument("coeffs", help='coefficient list such as "[2,2,2,-2,-2,-2]"')
        q.add_argument("--convention", choices=[MINUS, PLUS], default=DEFAULT_CONVENTION)
        if name == "eval":
            q.add_argument("--strict", action="store_true", help="also print a strict expansion")
        q.set_defaults(fn=cmd_twobridge)
    q = tb.add_parser("enumerate")
    q.add_argument("--max", type=int, default=1)
    q.add_argument("--convention", choices=[MINUS, PLUS], default=DEFAULT_CONVENTION)
    q.set_defaults(fn=cmd_twobridge)

    p = sub.add_parser("render", help="draw a chart as SVG")
    p.add_argument("chart")
    p.add_argument("-o", "--output")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("--color-seed", type=int, default=0)
    p.set_defaults(fn=cmd_render)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "twobridge" and args.action == "enumerate" and args.max < 1:
        print("fiberchart: --max must be at least 1", file=sys.stderr)
        return USAGE
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"fiberchart: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
