"""Tour the movie library: each generator, its singularity count change and a mutation check."""

from fractions import Fraction as F

from fiberchart.chart import validate_chart
from fiberchart.movies import interior_counts, mk_band_movie, mk_disk_movie, mk_interior_stab, stab_arcs


def delta(block):
    top, bottom = interior_counts(block.top), interior_counts(block.bottom)
    return {k: bottom[k] - top[k] for k in bottom}


def main():
    band = mk_band_movie(F(1, 2), F(1, 4))
    print(f"band movie: {len(band.chart.arcs)} arcs, change {delta(band)}")
    for k in range(1, 5):
        print(f"disk movie k={k}: change {delta(mk_disk_movie(k))}")

    for variant in ("agree", "disagree"):
        arcs = stab_arcs((1, 2), variant)
        print(f"stabilization of indices 1 and 2 ({variant}): {[(a[0].value, a[1], a[2].value) for a in arcs]}")

    block = mk_interior_stab((0, 1), "agree", F(1, 3))
    print(f"interior stabilization chart valid: {validate_chart(block.chart).valid}")


if __name__ == "__main__":
    main()
