"""Exact closed intervals in [0, 1], finite unions of them, and the Hausdorff metric.

All endpoints are exact rationals (gmpy2 ``mpq``, interchangeable with
:class:`fractions.Fraction`); nothing here touches floating point.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq
from typing import Iterable, Sequence

from .errors import DomainError, MalformedInputError

Q = mpq
Rational = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)


def as_rational(x) -> Rational:
    """Coerce ints, Fractions, Decimals and "p/q" strings to an exact rational.

    Floats are rejected: they would silently smuggle binary rounding into exact geometry.
    """
    if type(x) is Rational:
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, bool):
        raise MalformedInputError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, float):
        raise MalformedInputError(f"floats are not accepted as exact input: {x!r}")
    if isinstance(x, str):
        try:
            q = Fraction(x.strip())
            return mpq(q.numerator, q.denominator)
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInputError(f"cannot parse rational {x!r}") from exc
    try:
        q = Fraction(x)
        return mpq(q.numerator, q.denominator)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"not a rational: {x!r}") from exc


def as_fraction(x) -> Fraction:
    """Exact value as a stdlib Fraction with plain int parts."""
    q = as_rational(x)
    return Fraction(int(q.numerator), int(q.denominator))


def fmt_rational(x: Rational) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, slots=True)
class Interval:
    lo: Rational
    hi: Rational

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo > hi:
            raise MalformedInputError(f"interval with lo > hi: [{lo}, {hi}]")
        if lo < 0 or hi > 1:
            raise DomainError(f"interval [{lo}, {hi}] not inside [0, 1]")

    @property
    def diam(self) -> Rational:
        return self.hi - self.lo

    @property
    def mid(self) -> Rational:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval", strict: bool = False) -> bool:
        if strict:
            return self.lo < other.lo and other.hi < self.hi
        return self.lo <= other.lo and other.hi <= self.hi

    def interior_contains(self, x) -> bool:
        return self.lo < x < self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def to_json(self) -> list[str]:
        return [fmt_rational(self.lo), fmt_rational(self.hi)]

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


class CompactSet:
    """A finite union of pairwise disjoint closed intervals, sorted by left endpoint.

    Construct through :func:`normalize` (or ``CompactSet.of``) unless the parts are
    already canonical; the constructor re-checks the canonical-form invariant.
    """

    __slots__ = ("parts", "_los")

    def __init__(self, parts: Sequence[Interval] = ()):
        parts = tuple(parts)
        for a, b in zip(parts, parts[1:]):
            if not a.hi < b.lo:
                raise MalformedInputError("CompactSet parts must be sorted, disjoint and non-adjacent")
        self.parts = parts
        self._los = [p.lo for p in parts]

    @classmethod
    def of(cls, *pairs) -> "CompactSet":
        return normalize([p if isinstance(p, Interval) else Interval(*p) for p in pairs])

    @classmethod
    def points(cls, xs: Iterable) -> "CompactSet":
        return normalize([Interval(x, x) for x in xs])

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, CompactSet) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return "CompactSet(" + ", ".join(map(repr, self.parts)) + ")"

    def _locate(self, x) -> int:
        """Index of the last part with lo <= x, or -1."""
        return bisect_right(self._los, x) - 1

    def __contains__(self, x) -> bool:
        i = self._locate(x)
        return i >= 0 and x <= self.parts[i].hi

    def interior_contains(self, x) -> bool:
        i = self._locate(x)
        return i >= 0 and self.parts[i].lo < x < self.parts[i].hi

    @property
    def measure(self) -> Rational:
        return sum((p.diam for p in self.parts), ZERO)

    @property
    def lo(self) -> Rational:
        return self.parts[0].lo

    @property
    def hi(self) -> Rational:
        return self.parts[-1].hi

    def gaps(self) -> list[tuple[Rational, Rational]]:
        return [(a.hi, b.lo) for a, b in zip(self.parts, self.parts[1:])]

    def union(self, other: "CompactSet") -> "CompactSet":
        return normalize(list(self.parts) + list(other.parts))

    __or__ = union

    def intersection(self, other: "CompactSet") -> "CompactSet":
        out = []
        i = j = 0
        A, B = self.parts, other.parts
        while i < len(A) and j < len(B):
            lo = max(A[i].lo, B[j].lo)
            hi = min(A[i].hi, B[j].hi)
            if lo <= hi:
                out.append(Interval(lo, hi))
            if A[i].hi < B[j].hi:
                i += 1
            else:
                j += 1
        return normalize(out)

    __and__ = intersection

    def intersects(self, other) -> bool:
        if isinstance(other, Interval):
            other = CompactSet((other,))
        return bool(self.intersection(other))

    def inflate(self, t) -> "CompactSet":
        """Closed t-neighbourhood, clipped to [0, 1]."""
        t = as_rational(t)
        if t < 0:
            raise DomainError("negative inflation radius")
        return normalize([Interval(max(ZERO, p.lo - t), min(ONE, p.hi + t)) for p in self.parts])

    def complement_closure(self) -> "CompactSet":
        """Closure of [0, 1] minus this set."""
        out = []
        cur = ZERO
        for p in self.parts:
            if p.lo > cur:
                out.append(Interval(cur, p.lo))
            cur = max(cur, p.hi)
        if cur < ONE:
            out.append(Interval(cur, ONE))
        return normalize(out)

    def to_json(self) -> list[list[str]]:
        return [p.to_json() for p in self.parts]

    @classmethod
    def from_json(cls, data) -> "CompactSet":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, list):
            raise MalformedInputError("CompactSet JSON must be an array of [lo, hi] pairs")
        raw = []
        for k, pair in enumerate(data):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise MalformedInputError(f"CompactSet entry {k} is not a [lo, hi] pair")
            raw.append(Interval(as_rational(pair[0]), as_rational(pair[1])))
        return normalize(raw)


def normalize(raw: Iterable[Interval]) -> CompactSet:
    """Canonical sorted disjoint union with the same point set as ``raw``."""
    items = sorted(raw, key=lambda p: (p.lo, p.hi))
    merged: list[Interval] = []
    for p in items:
        if merged and p.lo <= merged[-1].hi:
            last = merged[-1]
            if p.hi > last.hi:
                merged[-1] = Interval(last.lo, p.hi)
        else:
            merged.append(p)
    return CompactSet(merged)


def dist_point(A: CompactSet, x) -> Rational:
    if not A:
        raise DomainError("distance to an empty set")
    x = as_rational(x)
    i = A._locate(x)
    best = None
    if i >= 0:
        p = A.parts[i]
        if x <= p.hi:
            return ZERO
        best = x - p.hi
    if i + 1 < len(A.parts):
        d = A.parts[i + 1].lo - x
        best = d if best is None else min(best, d)
    return best


def _directed(A: CompactSet, B: CompactSet) -> Rational:
    """sup over a in A of dist(a, B).

    dist(., B) is piecewise linear with local maxima only at midpoints of gaps of B,
    so the sup over each part of A is attained at its endpoints or at such midpoints.
    """
    mids = [(lo + hi) / 2 for lo, hi in B.gaps()]
    best = ZERO
    for p in A.parts:
        cands = [p.lo, p.hi]
        k = bisect_right(mids, p.lo)
        while k < len(mids) and mids[k] <= p.hi:
            cands.append(mids[k])
            k += 1
        for x in cands:
            d = dist_point(B, x)
            if d > best:
                best = d
    return best


def hausdorff(A: CompactSet, B: CompactSet) -> Rational:
    if not A or not B:
        raise DomainError("Hausdorff distance needs nonempty operands")
    return max(_directed(A, B), _directed(B, A))


def contains(A: CompactSet, B: CompactSet) -> bool:
    """True iff B is a subset of A."""
    for p in B.parts:
        i = A._locate(p.lo)
        if i < 0 or A.parts[i].hi < p.hi:
            return False
    return True
