"""Walk the 8_20 ribbon disk through the pipeline and print what each stage produces.

Usage: python demos/ribbon_820.py [out.svg]
"""

import sys

from fiberchart.chart import validate_chart
from fiberchart.fiber import admissible_intervals, index_counts
from fiberchart.render import render_svg
from fiberchart.ribbon import certify, example_presentations, phase_heights, pipeline_chart


def main(argv):
    p = example_presentations()["8_20"]
    print(f"presentation: {p.n} band, {len(p.disks)} disks, incidence {[list(r) for r in p.incidence]}, genus {p.genus}")

    pc = pipeline_chart(p)
    print(f"matching: band -> disk {pc.matching.pairs}, leftover disks {pc.matching.leftover}")
    print(f"movie script: {len(pc.script.items)} items, band phase ends at {pc.script.band_end}, "
          f"disk phase at {pc.script.disk_end}")

    rep = validate_chart(pc.chart)
    print(f"chart: {len(pc.chart.arcs)} arcs, {len(pc.chart.events)} events, valid={rep.valid}")

    t_band, t_disk = phase_heights(pc.script)
    print(f"singularities after the band phase (t={t_band}): {index_counts(pc.chart, t_band).as_tuple()}")
    print(f"singularities after the disk phase (t={t_disk}): {index_counts(pc.chart, t_disk).as_tuple()}")

    print(f"admissible theta0 intervals: {[(str(a), str(b)) for a, b in admissible_intervals(pc.chart)]}")
    r = certify(pc)
    print(f"fiber over theta0={r.theta0}: handles {r.profile.counts()}, euler {r.euler}")
    print(f"certified handlebody of genus {r.reduced_genus} with attaching circles {list(r.circles)}")

    if len(argv) > 1:
        with open(argv[1], "w", encoding="utf-8") as fh:
            fh.write(render_svg(pc.chart))
        print(f"chart drawn to {argv[1]}")


if __name__ == "__main__":
    main(sys.argv)
