"""List the fibered members of the ribbon 2-bridge families and the knots they give."""

from fiberchart.twobridge import cf_strict, enumerate_fibered_ribbon, family_template


def main(n=3):
    for k in enumerate_fibered_ribbon(n):
        cf = family_template(k.family)
        members = ", ".join(f"F{m.family}{list(m.params)}" for m in k.members)
        print(f"{k.to_dict()['knot']:>8}  {str(k.fraction):>7}  {list(cf.coeffs)}  members: {members}")
    print("strict expansion of 7/3:", list(cf_strict([3, 2, 2]).coeffs))


if __name__ == "__main__":
    main()
