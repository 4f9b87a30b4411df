"""Continued fractions of 2-bridge knots and the three ribbon families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

MINUS = "minus"  # a1 - 1/(a2 - 1/(...))
PLUS = "plus"  # a1 + 1/(a2 + 1/(...))
DEFAULT_CONVENTION = MINUS
_SIGN = {MINUS: -1, PLUS: 1}


class FractionError(ValueError):
    """A coefficient list that does not evaluate to a 2-bridge fraction."""


@dataclass(frozen=True)
class ContinuedFraction:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    def __len__(self) -> int:
        return len(self.coeffs)

    def mirror(self) -> "ContinuedFraction":
        return ContinuedFraction(tuple(-c for c in self.coeffs))


@dataclass(frozen=True)
class TwoBridgeFraction:
    """p/q with p > 0 and 0 <= q < p; q = 0 only for p = 1."""

    p: int
    q: int

    @property
    def is_knot(self) -> bool:
        return self.p % 2 == 1

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class BridgeFamily:
    """A ribbon family match: family 1 with params c, or families 2/3 with params (a, b)."""

    family: int
    params: tuple[int, ...]
    mirrored: bool = False

    def to_dict(self) -> dict:
        if self.family == 1:
            return {"family": 1, "c": list(self.params), "mirrored": self.mirrored}
        a, b = self.params
        return {"family": self.family, "a": a, "b": b, "mirrored": self.mirrored}


def _coeffs(cf) -> tuple[int, ...]:
    if isinstance(cf, ContinuedFraction):
        return cf.coeffs
    return tuple(int(c) for c in cf)


def normalize(num: int, den: int) -> TwoBridgeFraction:
    """The fraction num/den reduced and normalized to p > 0, 0 <= q < p."""
    if den == 0 or num == 0:
        raise FractionError(f"{num}/{den} is not a 2-bridge fraction")
    g = math.gcd(num, den)
    num, den = num // g, den // g
    if num < 0:
        num, den = -num, -den
    return TwoBridgeFraction(num, den % num)


def cf_value(cf, convention: str = DEFAULT_CONVENTION) -> Fraction:
    """Exact value of the continued fraction, evaluated right to left."""
    cs = _coeffs(cf)
    if not cs:
        raise FractionError("empty continued fraction")
    s = _SIGN[convention]
    v = Fraction(cs[-1])
    for a in reversed(cs[:-1]):
        if v == 0:
            raise FractionError("zero denominator during evaluation")
        v = a + s / v
    return v


def cf_eval(cf, convention: str = DEFAULT_CONVENTION) -> TwoBridgeFraction:
    v = cf_value(cf, convention)
    return normalize(v.numerator, v.denominator)


def fraction_equivalent(f1: TwoBridgeFraction, f2: TwoBridgeFraction, mirror: bool = False) -> bool:
    """Same 2-bridge link: p1 = p2 and q2 = q1^(+-1) mod p, or -q1^(+-1) when mirror is allowed."""
    if f1.p != f2.p:
        return False
    p = f1.p
    if p == 1:
        return True
    q1, q2 = f1.q % p, f2.q % p
    inv = pow(q1, -1, p)
    ok = {q1, inv}
    if mirror:
        ok |= {(-q1) % p, (-inv) % p}
    return q2 in ok


def mirror_fraction(f: TwoBridgeFraction) -> TwoBridgeFraction:
    return TwoBridgeFraction(f.p, (-f.q) % f.p if f.p > 1 else 0)


# ---------------------------------------------------------------------------
# strict expansions


def strictness_violations(cf) -> list[str]:
    """Reasons the list is not strict (positions counted from 1)."""
    cs = _coeffs(cf)
    out = []
    for i, d in enumerate(cs, start=1):
        if d == 0:
            out.append(f"entry {i} is zero")
        if i % 2 == 1 and d % 2:
            out.append(f"odd-position entry {i} is odd")
        if i % 2 == 1 and abs(d) == 2 and i < len(cs) and d * cs[i] >= 0:
            out.append(f"entry {i} is {d} but entry {i + 1} does not have the opposite sign")
    return out


def is_strict(cf) -> bool:
    return not strictness_violations(cf)


def _strict_search(x: Fraction, s: int) -> list[int] | None:
    """Depth-first search for a strict expansion of x, preferring near choices.

    Every step picks d within distance 1 of the current value, so the
    denominator of the remainder strictly decreases and the search ends.
    """
    memo: dict[tuple[Fraction, bool, int], list[int] | None] = {}

    def go(x: Fraction, odd: bool, need: int) -> list[int] | None:
        key = (x, odd, need)
        if key in memo:
            return memo[key]
        memo[key] = None
        fl = math.floor(x)
        cands = [fl, fl + 1] if x.denominator > 1 else [fl, fl - 1, fl + 1]
        cands.sort(key=lambda d: (abs(x - d), -abs(d)))
        for d in cands:
            if d == 0 or (odd and d % 2) or (need and d * need < 0):
                continue
            nxt = -1 if d > 0 else 1
            nxt = nxt if odd and abs(d) == 2 else 0
            if x == d:
                res = [d]
            else:
                rest = go(Fraction(s) / (x - d), not odd, nxt)
                res = [d] + rest if rest is not None else None
            if res is not None:
                memo[key] = res
                return res
        return None

    return go(x, True, 0)


def cf_strict(cf, convention: str = DEFAULT_CONVENTION) -> ContinuedFraction:
    """A strict expansion of an equivalent fraction; strict input comes back unchanged.

    Strict means all entries nonzero, odd-position entries even, and an
    odd-position entry of absolute value 2 followed by an entry of the
    opposite sign.  Knots get even length; an odd length marks a link.
    The unknot (p = 1) has no strict expansion.
    """
    cs = _coeffs(cf)
    f = cf_eval(cs, convention)
    if is_strict(cs):
        return ContinuedFraction(cs)
    s = _SIGN[convention]
    p = f.p
    if p == 1:
        # a strict list carries a minimal Seifert surface of positive genus
        raise FractionError("the unknot has no strict expansion")
    qs = {f.q, pow(f.q, -1, p)}
    starts = sorted({Fraction(p, r) for q in qs for r in (q, q - p)}, key=lambda v: (v.denominator, v))
    best = None
    for x in starts:
        res = _strict_search(x, s)
        if res is not None and (best is None or len(res) < len(best)):
            best = res
    if best is None:
        raise FractionError(f"no strict expansion found for {f}")
    return ContinuedFraction(tuple(best))


# ---------------------------------------------------------------------------
# ribbon families


def family_template(fam: BridgeFamily) -> ContinuedFraction:
    """The coefficient list a family member is written with."""
    if fam.family == 1:
        if len(fam.params) % 2 == 0 or any(c <= 0 for c in fam.params):
            raise ValueError("family 1 needs an odd number of positive parameters")
        head = [c if i % 2 == 0 else -c for i, c in enumerate(fam.params)]
        cs = head + [-1] + [-c for c in reversed(head)]
    elif fam.family in (2, 3):
        a, b = fam.params
        if fam.family == 2:
            cs = [2 * a, 2, 2 * b, -2, -2 * a, -2 * b]
        else:
            cs = [2 * a, 2, 2 * b, -2 * a, -2, -2 * b]
    else:
        raise ValueError(f"unknown family {fam.family}")
    out = ContinuedFraction(tuple(cs))
    return out.mirror() if fam.mirrored else out


def _match_literal(cs: tuple[int, ...]) -> BridgeFamily | None:
    if len(cs) == 6 and cs[0] % 2 == 0 and cs[2] % 2 == 0:
        a, b = cs[0] // 2, cs[2] // 2
        if a and b and cs[1] == 2 and cs[5] == -2 * b:
            if cs[3] == -2 and cs[4] == -2 * a:
                return BridgeFamily(2, (a, b))
            if cs[3] == -2 * a and cs[4] == -2:
                return BridgeFamily(3, (a, b))
    if len(cs) % 4 == 3 and len(cs) >= 3:
        m = len(cs) // 2
        head, mid, tail = cs[:m], cs[m], cs[m + 1 :]
        c = [x if i % 2 == 0 else -x for i, x in enumerate(head)]
        if mid == -1 and all(x > 0 for x in c) and list(tail) == [-x for x in reversed(head)]:
            return BridgeFamily(1, tuple(c))
    return None


def family_of(cf) -> BridgeFamily | None:
    """Match the literal family templates, trying the list, its reverse and their mirrors."""
    cs = _coeffs(cf)
    for cand, mirrored in ((cs, False), (cs[::-1], False), (tuple(-x for x in cs), True),
                           (tuple(-x for x in cs[::-1]), True)):
        fam = _match_literal(cand)
        if fam is not None:
            return BridgeFamily(fam.family, fam.params, mirrored)
    return None


def is_fibered(fam: BridgeFamily | None) -> bool:
    """Family 1 members never fiber; families 2 and 3 fiber exactly when |a| = |b| = 1."""
    if fam is None:
        raise ValueError("not a ribbon family member")
    if fam.family == 1:
        return False
    a, b = fam.params
    return abs(a) == 1 and abs(b) == 1


# 2-bridge fractions identified independently from census data
KNOWN_KNOTS = {
    "8_9": TwoBridgeFraction(25, 7),
    "9_27": TwoBridgeFraction(49, 19),
    "10_42": TwoBridgeFraction(81, 31),
    "11a_96": TwoBridgeFraction(121, 46),
    "12a_477": TwoBridgeFraction(169, 70),
}


def knot_name(f: TwoBridgeFraction) -> str | None:
    for name, g in KNOWN_KNOTS.items():
        if fraction_equivalent(f, g, mirror=True):
            return name
    return None


@dataclass(frozen=True)
class FiberedRibbonKnot:
    family: BridgeFamily
    fraction: TwoBridgeFraction
    members: tuple[BridgeFamily, ...]

    def to_dict(self, convention: str = DEFAULT_CONVENTION) -> dict:
        return {
            **self.family.to_dict(),
            "coeffs": list(family_template(self.family).coeffs),
            "fraction": str(self.fraction),
            "fibered": True,
            "knot": knot_name(self.fraction),
            "members": [m.to_dict() for m in self.members],
            "convention": convention,
        }


def _signed(n: int) -> Iterable[int]:
    for k in range(1, n + 1):
        yield k
        yield -k


def enumerate_fibered_ribbon(n: int, convention: str = DEFAULT_CONVENTION) -> list[FiberedRibbonKnot]:
    """Fibered members of families 2 and 3 with 0 < |a|, |b| <= n, up to mirroring."""
    if n < 1:
        raise ValueError("n must be at least 1")
    classes: list[list] = []
    for fam_no in (2, 3):
        for a in _signed(n):
            for b in _signed(n):
                fam = BridgeFamily(fam_no, (a, b))
                if not is_fibered(fam):
                    continue
                f = cf_eval(family_template(fam), convention)
                for c in classes:
                    if fraction_equivalent(c[1], f, mirror=True):
                        c[2].append(fam)
                        break
                else:
                    classes.append([fam, f, [fam]])
    out = [FiberedRibbonKnot(fam, f, tuple(ms)) for fam, f, ms in classes]
    return sorted(out, key=lambda k: (k.fraction.p, k.fraction.q))


def parse_coeffs(text: str) -> ContinuedFraction:
    """Parse "[2,2,-2]" or "2 2 -2"."""
    body = text.strip().strip("[]")
    parts = [x for x in body.replace(",", " ").split()]
    try:
        return ContinuedFraction(tuple(int(x) for x in parts))
    except ValueError as e:
        raise FractionError(f"bad coefficient list {text!r}") from e
