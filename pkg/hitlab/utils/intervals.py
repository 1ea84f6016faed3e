"""
Exact interval helpers on the line and on the circle R/Z.

Arcs are (start, length) pairs of Fractions read as the half-open set
[start, start + length) mod 1. A length of 1 or more covers the whole circle.
"""

from fractions import Fraction
from math import ceil, floor
from typing import List, Tuple

Arc = Tuple[Fraction, Fraction]

HALF = Fraction(1, 2)


def circle_norm(t: Fraction) -> Fraction:
    r = t % 1
    return min(r, 1 - r)


def circle_distance(a: Fraction, b: Fraction) -> Fraction:
    return circle_norm(a - b)


def sup_circle_norm(lo: Fraction, hi: Fraction) -> Fraction:
    """Supremum of the circle norm over [lo, hi]"""
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo >= 1:
        return HALF
    if floor(hi - HALF) >= ceil(lo - HALF):
        return HALF
    return max(circle_norm(lo), circle_norm(hi))


def arc_pieces(s1: Fraction, l1: Fraction, s2: Fraction, l2: Fraction, closed: bool = False) -> List[Arc]:
    """Intersection of two arcs as a list of arcs

    With ``closed`` the closures are intersected and degenerate (zero-length)
    pieces are kept.
    """
    s1, s2 = s1 % 1, s2 % 1
    if l1 >= 1 and l2 >= 1:
        return [(Fraction(0), Fraction(1))]
    if l1 >= 1:
        return [(s2, l2)]
    if l2 >= 1:
        return [(s1, l1)]
    pieces: List[Arc] = []
    for k in (-1, 0, 1):
        lo = max(s1, s2 + k)
        hi = min(s1 + l1, s2 + k + l2)
        if lo < hi or (closed and lo == hi):
            pieces.append((lo % 1, hi - lo))
    return pieces


def arcs_meet(s1: Fraction, l1: Fraction, s2: Fraction, l2: Fraction, closed: bool = False) -> bool:
    return bool(arc_pieces(s1, l1, s2, l2, closed=closed))


def arc_contains(start: Fraction, length: Fraction, t: Fraction) -> bool:
    if length >= 1:
        return True
    return (t - start) % 1 < length


def segments_meet(a: Fraction, b: Fraction, c: Fraction, d: Fraction, closed: bool = False) -> bool:
    """[a, b) meets [c, d) on the line; closures with ``closed``"""
    lo, hi = max(a, c), min(b, d)
    return lo < hi or (closed and lo <= hi)


__all__ = [
    "Arc",
    "circle_norm",
    "circle_distance",
    "sup_circle_norm",
    "arc_pieces",
    "arcs_meet",
    "arc_contains",
    "segments_meet",
]
