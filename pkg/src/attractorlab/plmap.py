"""Continuous piecewise-linear self-maps of [0, 1] with exact rational data."""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .errors import DegenerateFixedSetError, DomainError, MalformedInputError, PreconditionError, ResourceError
from .intervals import Interval, ONE, Q, Rational, ZERO, as_rational, fmt_rational

DEFAULT_PIECE_CAP = 10**6


@dataclass(frozen=True, eq=True)
class PLMap:
    """Linear interpolation of the pairs (breakpoints[i], values[i]).

    breakpoints start at 0, end at 1 and strictly increase; values lie in [0, 1].
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(as_rational(b) for b in self.breakpoints)
        vals = tuple(as_rational(v) for v in self.values)
        if len(bps) < 2 or len(bps) != len(vals):
            raise MalformedInputError("need >= 2 breakpoints and one value per breakpoint")
        if bps[0] != 0 or bps[-1] != 1:
            raise MalformedInputError("breakpoints must start at 0 and end at 1")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise MalformedInputError(f"breakpoints not strictly increasing at {a}, {b}")
        for v in vals:
            if v < 0 or v > 1:
                raise MalformedInputError(f"value {v} outside [0, 1]")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def identity(cls) -> "PLMap":
        return cls((ZERO, ONE), (ZERO, ONE))

    @classmethod
    def constant(cls, c) -> "PLMap":
        c = as_rational(c)
        return cls((ZERO, ONE), (c, c))

    @classmethod
    def tent(cls) -> "PLMap":
        return cls((ZERO, Q(1, 2), ONE), (ZERO, ONE, ZERO))

    @classmethod
    def from_json(cls, data) -> "PLMap":
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise MalformedInputError(f"PLMap JSON parse error at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict) or "breakpoints" not in data or "values" not in data:
            raise MalformedInputError('PLMap JSON needs "breakpoints" and "values"')
        return cls(tuple(as_rational(b) for b in data["breakpoints"]),
                   tuple(as_rational(v) for v in data["values"]))

    def to_json(self) -> dict:
        return {"breakpoints": [fmt_rational(b) for b in self.breakpoints],
                "values": [fmt_rational(v) for v in self.values]}

    # -- basic structure --------------------------------------------------------

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) - 1

    @cached_property
    def slopes(self) -> tuple:
        b, v = self.breakpoints, self.values
        return tuple((v[i + 1] - v[i]) / (b[i + 1] - b[i]) for i in range(len(b) - 1))

    def pieces(self) -> Iterator[tuple[Rational, Rational, Rational, Rational]]:
        b, v = self.breakpoints, self.values
        for i in range(len(b) - 1):
            yield b[i], b[i + 1], v[i], v[i + 1]

    def __call__(self, x) -> Rational:
        return self.eval(x)

    def eval(self, x) -> Rational:
        x = as_rational(x)
        if x < 0 or x > 1:
            raise DomainError(f"x = {x} outside [0, 1]")
        b, v = self.breakpoints, self.values
        i = bisect_right(b, x) - 1
        if i >= len(b) - 1:
            return v[-1]
        if x == b[i]:
            return v[i]
        return v[i] + (v[i + 1] - v[i]) * (x - b[i]) / (b[i + 1] - b[i])

    def iterate(self, x, n: int) -> Rational:
        x = as_rational(x)
        for _ in range(n):
            x = self.eval(x)
        return x

    def max_slope(self) -> Rational:
        return max(abs(s) for s in self.slopes)

    def min_abs_slope(self) -> Rational:
        return min(abs(s) for s in self.slopes)

    def critical_points(self) -> tuple:
        """Interior breakpoints where the map turns or meets a flat piece."""
        s = self.slopes
        out = []
        for i in range(1, len(self.breakpoints) - 1):
            left, right = s[i - 1], s[i]
            if left * right < 0 or (left == 0) != (right == 0):
                out.append(self.breakpoints[i])
        return tuple(out)

    # -- algebra ---------------------------------------------------------------

    def simplified(self) -> "PLMap":
        """Drop breakpoints between collinear pieces."""
        b, v = self.breakpoints, self.values
        nb, nv = [b[0]], [v[0]]
        for i in range(1, len(b) - 1):
            # keep b[i] unless (nb[-1], nv[-1]), (b[i], v[i]), (b[i+1], v[i+1]) are collinear
            if (v[i] - nv[-1]) * (b[i + 1] - b[i]) != (v[i + 1] - v[i]) * (b[i] - nb[-1]):
                nb.append(b[i])
                nv.append(v[i])
        nb.append(b[-1])
        nv.append(v[-1])
        if len(nb) == len(b):
            return self
        return PLMap(tuple(nb), tuple(nv))

    def compose(self, inner: "PLMap", piece_cap: int = DEFAULT_PIECE_CAP) -> "PLMap":
        """self o inner, exactly."""
        fb, fv = self.breakpoints, self.values
        nb: list[Rational] = []
        nv: list[Rational] = []
        for x0, x1, y0, y1 in inner.pieces():
            nb.append(x0)
            nv.append(self.eval(y0))
            if y0 != y1:
                lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
                i, j = bisect_right(fb, lo), bisect_left(fb, hi)
                idx = range(i, j) if y0 < y1 else range(j - 1, i - 1, -1)
                dx_dy = (x1 - x0) / (y1 - y0)
                for k in idx:
                    nb.append(x0 + (fb[k] - y0) * dx_dy)
                    nv.append(fv[k])
            if len(nb) > piece_cap:
                raise ResourceError(f"composition exceeds piece cap {piece_cap}")
        nb.append(ONE)
        nv.append(self.eval(inner.values[-1]))
        return PLMap(tuple(nb), tuple(nv)).simplified()

    def power(self, K: int, piece_cap: int = DEFAULT_PIECE_CAP) -> "PLMap":
        if K < 1:
            raise DomainError("power needs K >= 1")
        out = self
        for _ in range(K - 1):
            out = self.compose(out, piece_cap)
        return out

    def image_interval(self, I: Interval) -> Interval:
        """Exact [min, max] of the map over I."""
        b, v = self.breakpoints, self.values
        a, c = self.eval(I.lo), self.eval(I.hi)
        lo, hi = min(a, c), max(a, c)
        i, j = bisect_right(b, I.lo), bisect_left(b, I.hi)
        if i < j:
            inner = v[i:j]
            lo, hi = min(lo, min(inner)), max(hi, max(inner))
        return Interval(lo, hi)

    def image_interval_iter(self, I: Interval, n: int) -> Interval:
        """Image of I under the n-th iterate, computed without materializing the power."""
        for _ in range(n):
            I = self.image_interval(I)
        return I

    def add_scaled(self, other: "PLMap", t, clamp: bool = True) -> "PLMap":
        """self + t*other, optionally clipped back into [0, 1]."""
        t = as_rational(t)
        xs, ys = [], []
        for x, a, b in merged_walk(self, other):
            xs.append(x)
            ys.append(a + t * b)
        return _clamped(xs, ys) if clamp else PLMap(tuple(xs), tuple(ys))

    def __repr__(self) -> str:
        n = len(self.breakpoints)
        if n <= 6:
            pts = ", ".join(f"({b}, {v})" for b, v in zip(self.breakpoints, self.values))
            return f"PLMap({pts})"
        return f"PLMap(<{n - 1} pieces>)"


def _clamped(xs: list, ys: list) -> PLMap:
    nb, nv = [xs[0]], [min(ONE, max(ZERO, ys[0]))]
    for i in range(1, len(xs)):
        x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
        for level in (ZERO, ONE):
            if (y0 - level) * (y1 - level) < 0:
                nb.append(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
                nv.append(level)
        if nb[-1] == x1:
            continue
        nb.append(x1)
        nv.append(min(ONE, max(ZERO, y1)))
    pairs = sorted(zip(nb, nv))
    return PLMap(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)).simplified()


def merged_walk(f: PLMap, g: PLMap) -> Iterator[tuple[Rational, Rational, Rational]]:
    """Yield (x, f(x), g(x)) at every breakpoint of either map, in increasing x.

    Two-pointer walk: no bisection, so it is linear in the total piece count.
    """
    fb, fv, gb, gv = f.breakpoints, f.values, g.breakpoints, g.values
    i = j = 0
    nf, ng = len(fb), len(gb)
    while i < nf and j < ng:
        x = min(fb[i], gb[j])
        if fb[i] == x:
            a = fv[i]
        else:
            a = fv[i - 1] + (fv[i] - fv[i - 1]) * (x - fb[i - 1]) / (fb[i] - fb[i - 1])
        if gb[j] == x:
            b = gv[j]
        else:
            b = gv[j - 1] + (gv[j] - gv[j - 1]) * (x - gb[j - 1]) / (gb[j] - gb[j - 1])
        yield x, a, b
        if fb[i] == x:
            i += 1
        if gb[j] == x:
            j += 1


def sup_distance(f: PLMap, g: PLMap) -> Rational:
    """Exact sup norm of f - g; |f - g| is PL on the merged refinement."""
    return max(abs(a - b) for _, a, b in merged_walk(f, g))


def argmax_distance(f: PLMap, g: PLMap) -> tuple[Rational, Rational]:
    best_x, best = ZERO, Q(-1)
    for x, a, b in merged_walk(f, g):
        d = abs(a - b)
        if d > best:
            best_x, best = x, d
    return best_x, best


def fixed_points(F: PLMap) -> tuple:
    """All exact solutions of F(x) = x, F already materialized."""
    roots = set()
    for x0, x1, y0, y1 in F.pieces():
        h0, h1 = y0 - x0, y1 - x1
        if h0 == 0 and h1 == 0:
            raise DegenerateFixedSetError(f"piece [{x0}, {x1}] lies on the diagonal")
        if h0 == 0:
            roots.add(x0)
        if h1 == 0:
            roots.add(x1)
        if h0 * h1 < 0:
            roots.add(x0 + h0 * (x1 - x0) / (h0 - h1))
    return tuple(sorted(roots))


def fixed_points_of_power(f: PLMap, K: int, piece_cap: int = DEFAULT_PIECE_CAP) -> tuple:
    return fixed_points(f.power(K, piece_cap))


def prime_period(f: PLMap, x, K: int) -> int:
    x = as_rational(x)
    if K < 1:
        raise DomainError("K must be positive")
    orbit = [x]
    for _ in range(K):
        orbit.append(f.eval(orbit[-1]))
    if orbit[K] != x:
        raise PreconditionError(f"{x} is not {K}-periodic")
    for p in range(1, K + 1):
        if K % p == 0 and orbit[p] == x:
            return p
    raise AssertionError("unreachable")


def hat_bump() -> PLMap:
    """Fixed perturbation profile: 1 - |2x - 1|."""
    return PLMap.tent()


def load_map(path) -> PLMap:
    with open(path) as fh:
        text = fh.read()
    return PLMap.from_json(text)


def grid_map(values: Sequence) -> PLMap:
    """Map with equally spaced breakpoints taking the given values."""
    n = len(values) - 1
    return PLMap(tuple(Q(i, n) for i in range(n + 1)), tuple(as_rational(v) for v in values))
