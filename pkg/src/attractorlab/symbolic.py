"""Shift-level counterexample: the sequences x_c and exact cylinder frequencies.

x_c = A_0 B_0 w_0 A_1 B_1 w_1 ... with A_n = 0^{k_{2n}} and |B_n w_n| = k_{2n+1}.
Horizons reach doubly exponential lengths, so everything here counts from the run structure
with Python ints; the materialized prefix exists only as a test oracle.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import MalformedInputError, ResourceError
from .intervals import Interval, as_rational

MATERIALIZE_CAP = 10**7


# -- words, k_n, milestones --------------------------------------------------------


def word_at(n: int) -> str:
    """n-th binary word: shorter first, then by binary value."""
    if n < 0:
        raise ValueError("word index must be >= 0")
    L = 1
    while n >= 2 ** (L + 1) - 2:
        L += 1
    return format(n - (2**L - 2), f"0{L}b")


def all_words(max_len: int) -> list[str]:
    return ["".join(p) for L in range(1, max_len + 1) for p in product("01", repeat=L)]


# k_n = 2^(2^(n + shift)); shift=1 gives k_0 = 4 and a_1 = 276, shift=0 gives k_0 = 2
DEFAULT_SHIFT = 1


@lru_cache(maxsize=None)
def k(n: int, shift: int = DEFAULT_SHIFT) -> int:
    return 2 ** (2 ** (n + shift))


@lru_cache(maxsize=None)
def a(n: int, shift: int = DEFAULT_SHIFT) -> int:
    return sum(k(i, shift) for i in range(2 * n + 1))


@lru_cache(maxsize=None)
def b(n: int, shift: int = DEFAULT_SHIFT) -> int:
    return a(n, shift) + k(2 * n + 1, shift)


# -- the target sequence c -----------------------------------------------------------

_C_RE = re.compile(r"^([01]*)\(([01]+)\)$")


@dataclass(frozen=True)
class CSeq:
    """An eventually periodic binary sequence: ``prefix`` then ``tail`` repeated forever."""

    prefix: str
    tail: str

    @classmethod
    def parse(cls, text: str) -> "CSeq":
        m = _C_RE.match(text.strip().replace("^inf", ""))
        if not m:
            raise MalformedInputError(f'cannot parse c={text!r}; expected "prefix(tail)", e.g. "(1)" or "01(10)"')
        return cls(m.group(1), m.group(2))

    def head(self, L: int) -> str:
        if L <= len(self.prefix):
            return self.prefix[:L]
        rest = L - len(self.prefix)
        reps = -(-rest // len(self.tail))
        return self.prefix + (self.tail * reps)[:rest]

    def __str__(self) -> str:
        return f"{self.prefix}({self.tail})"


# -- block plans -------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    n: int
    A_start: int
    A_len: int
    B_symbol: str
    B_len: int
    w: str

    @property
    def match(self) -> bool:
        return self.B_symbol == "1"


@dataclass
class BlockPlan:
    c: CSeq
    n_max: int = 4
    shift: int = DEFAULT_SHIFT
    blocks: list = field(default_factory=list)
    _runs: list | None = None

    def __post_init__(self):
        if isinstance(self.c, str):
            self.c = CSeq.parse(self.c)
        self.extend(self.n_max + 1)

    def extend(self, n_hi: int) -> None:
        for n in range(len(self.blocks), n_hi + 1):
            w = word_at(n)
            sym = "1" if w == self.c.head(len(w)) else "0"
            sh = self.shift
            start = b(n - 1, sh) if n else 0
            self.blocks.append(Block(n, start, k(2 * n, sh), sym, k(2 * n + 1, sh) - len(w), w))
            self._runs = None

    def match_levels(self, n_hi: int | None = None) -> list[int]:
        n_hi = self.n_max if n_hi is None else n_hi
        self.extend(n_hi)
        return [n for n in range(n_hi + 1) if self.blocks[n].match]

    def runs(self) -> list[tuple[str, int, int]]:
        """Maximal runs (symbol, start, length) covering x_c up to the last built block."""
        if self._runs is None:
            raw = []
            for blk in self.blocks:
                raw.append(("0", blk.A_len))
                if blk.B_len:
                    raw.append((blk.B_symbol, blk.B_len))
                raw.extend((s, 1) for s in blk.w)
            runs = []
            pos = 0
            for s, L in raw:
                if runs and runs[-1][0] == s:
                    sym, st, ln = runs[-1]
                    runs[-1] = (sym, st, ln + L)
                else:
                    runs.append((s, pos, L))
                pos += L
            self._runs = runs
            self._starts = [r[1] for r in runs]
        return self._runs

    @property
    def built_length(self) -> int:
        return b(len(self.blocks) - 1, self.shift)

    def ensure(self, upto: int) -> None:
        n = len(self.blocks) - 1
        while b(n, self.shift) < upto:
            n += 1
        if n >= len(self.blocks):
            self.extend(n)

    def symbol_at(self, j: int) -> str:
        runs = self.runs()
        i = bisect_right(self._starts, j) - 1
        return runs[i][0]

    def window(self, j: int, L: int) -> str:
        self.ensure(j + L)
        runs = self.runs()
        i = bisect_right(self._starts, j) - 1
        out = []
        pos = j
        while pos < j + L:
            s, st, ln = runs[i]
            take = min(st + ln, j + L) - pos
            out.append(s * take)
            pos += take
            i += 1
        return "".join(out)

    def to_json(self) -> dict:
        return {
            "c": str(self.c), "n_max": self.n_max,
            "blocks": [{"n": blk.n, "A_len": str(blk.A_len), "B_symbol": blk.B_symbol,
                        "B_len": str(blk.B_len), "w": blk.w} for blk in self.blocks[: self.n_max + 1]],
        }


def xc_prefix(plan: BlockPlan, L: int, cap: int = MATERIALIZE_CAP) -> str:
    if L > cap:
        raise ResourceError(f"prefix length {L} above materialization cap {cap}; use counting")
    plan.ensure(L)
    out = []
    for s, st, ln in plan.runs():
        if st >= L:
            break
        out.append(s * min(ln, L - st))
    return "".join(out)


def xc_array(plan: BlockPlan, L: int, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """First L symbols as a uint8 array (oracle use)."""
    if L > cap:
        raise ResourceError(f"prefix length {L} above materialization cap {cap}")
    plan.ensure(L)
    x = np.zeros(L, dtype=np.uint8)
    for s, st, ln in plan.runs():
        if st >= L:
            break
        if s == "1":
            x[st:min(st + ln, L)] = 1
    return x


# -- counting -------------------------------------------------------------------------------


def match_ranges(plan: BlockPlan, v: str, upto: int) -> list[tuple[int, int]]:
    """Sorted disjoint inclusive ranges [lo, hi] of start positions j < upto with x_c[j:j+|v|] = v."""
    if not v or set(v) - {"0", "1"}:
        raise MalformedInputError(f"not a binary word: {v!r}")
    L = len(v)
    plan.ensure(upto + L)
    runs = plan.runs()
    out = []
    if v == v[0] * L:
        for s, st, ln in runs:
            if st >= upto:
                break
            if s == v[0] and ln >= L:
                hi = min(st + ln - L, upto - 1)
                if hi >= st:
                    out.append((st, hi))
        return out
    # a non-constant window straddles a run boundary
    cands = set()
    for _, st, _ in runs[1:]:
        if st - L + 1 >= upto:
            break
        for j in range(max(0, st - L + 1), st):
            if j < upto:
                cands.add(j)
    for j in sorted(cands):
        if plan.window(j, L) == v:
            out.append((j, j))
    return out


def _count_from_ranges(ranges: list[tuple[int, int]], N: int) -> int:
    total = 0
    for lo, hi in ranges:
        if lo >= N:
            break
        total += min(hi, N - 1) - lo + 1
    return total


def count_occurrences(plan: BlockPlan, v: str, N: int, offset: int = 0) -> int:
    """#{0 <= j < N : (T^offset x_c)[j:j+|v|] = v}."""
    if N < 0 or offset < 0:
        raise ValueError("N and offset must be >= 0")
    ranges = match_ranges(plan, v, offset + N)
    return _count_from_ranges(ranges, offset + N) - _count_from_ranges(ranges, offset)


def counts_upto(plan: BlockPlan, v: str, n_hi: int) -> np.ndarray:
    """counts[N] = count_occurrences(plan, v, N) for every N <= n_hi (vectorized)."""
    edge = np.zeros(n_hi + 1, dtype=np.int64)
    for lo, hi in match_ranges(plan, v, n_hi):
        edge[lo] += 1
        edge[min(hi, n_hi - 1) + 1] -= 1
    hits = np.cumsum(edge[:n_hi])
    return np.concatenate(([0], np.cumsum(hits)))


def frequency_schedule(plan: BlockPlan, v: str, milestones, offset: int = 0) -> list[Fraction]:
    return [Fraction(count_occurrences(plan, v, N, offset), N) for N in milestones]


# -- growth ratios of the block lengths ------------------------------------------------------------


@dataclass(frozen=True)
class E1Result:
    n: int
    a_ratio: Fraction
    b_ratio: Fraction
    a_bound: Fraction | None
    b_bound: Fraction

    @property
    def holds(self) -> bool:
        ok = self.a_ratio >= 1 and self.b_ratio >= 1 and self.b_ratio <= self.b_bound
        return ok and (self.a_bound is None or self.a_ratio <= self.a_bound)


def verify_E1(n: int, shift: int = DEFAULT_SHIFT) -> E1Result:
    s = shift
    a_bound = 1 + Fraction(2, k(2 * n - 1, s)) if n >= 1 else None
    return E1Result(n, Fraction(a(n, s), k(2 * n, s)), Fraction(b(n, s), k(2 * n + 1, s)), a_bound,
                    1 + Fraction(2, k(2 * n, s)))


def verify_E2(n: int, shift: int = DEFAULT_SHIFT) -> Fraction:
    return Fraction(sum(k(2 * i + 1, shift) for i in range(n)), a(n, shift))


def E2_bound(n: int, shift: int = DEFAULT_SHIFT) -> Fraction:
    return Fraction(2, k(2 * n - 1, shift))


# -- frequency checks ----------------------------------------------------------------------------------


@dataclass
class SigmaVerdict:
    K: int
    zeros: list          # (n, count, freq, lower bound k_{2n} - K)
    ones: list           # (n, count, freq, lower bound) on match levels, horizon b_n
    nonconstant: dict    # v -> list of (n, count at b_n, freq, upper bound)
    zeros_ok: bool
    ones_ok: bool | None
    nonconstant_ok: bool

    @property
    def passed(self) -> bool:
        return self.zeros_ok and self.ones_ok is not False and self.nonconstant_ok


def sigma_symbolic(plan: BlockPlan, K: int, n_max: int | None = None) -> SigmaVerdict:
    n_max = plan.n_max if n_max is None else n_max
    zeros, ones, nonconst = [], [], {}
    sh = plan.shift
    z = "0" * K
    for n in range(1, n_max + 1):
        cnt = count_occurrences(plan, z, a(n, sh))
        zeros.append((n, cnt, Fraction(cnt, a(n, sh)), k(2 * n, sh) - K))
    # the trend to 1 is carried by the exact lower bounds, which increase with n
    lf = [Fraction(r[3], a(r[0], sh)) for r in zeros]
    zeros_ok = all(r[1] >= r[3] for r in zeros) and all(x < y for x, y in zip(lf, lf[1:]))

    o = "1" * K
    for n in plan.match_levels(n_max):
        blk = plan.blocks[n]
        cnt = count_occurrences(plan, o, b(n, sh))
        ones.append((n, cnt, Fraction(cnt, b(n, sh)), max(0, blk.B_len - K + 1)))
    of = [r[2] for r in ones if r[0] >= 1]
    ones_ok = None if not of else all(r[1] >= r[3] for r in ones) and all(x <= y for x, y in zip(of, of[1:]))

    nonconstant_ok = True
    for L in range(2, K + 1):
        for v in all_words(L)[2 ** L - 2:]:
            if v == v[0] * L:
                continue
            rows = []
            for n in range(n_max + 1):
                cnt = count_occurrences(plan, v, b(n, sh))
                bound = sum(len(word_at(i)) + 2 * L for i in range(n + 1))
                rows.append((n, cnt, Fraction(cnt, b(n, sh)), bound))
            nonconst[v] = rows
            fr = [r[2] for r in rows[1:]]
            nonconstant_ok &= all(r[1] <= r[3] for r in rows) and all(x >= y for x, y in zip(fr, fr[1:]))
    return SigmaVerdict(K, zeros, ones, nonconst, zeros_ok, ones_ok, nonconstant_ok)


@dataclass
class EssentialVerdict:
    U: str
    horizons: str
    table: list         # (plan c, offset, n, N, count, freq)
    max_freq: dict      # n -> max freq over plans/offsets
    bound_ok: bool | None
    verdict: str


def essential_symbolic(plans, U: str, n_max: int = 3, horizons: str = "a") -> EssentialVerdict:
    """Frequencies of the cylinder [U] along a_n (or b_n on match levels) for shifted plans.

    ``plans`` holds (BlockPlan, offset) pairs. For U = 1^j the exact bound
    count <= sum_{i<n} k_{2i+1} + offset is checked at every a_n.
    """
    table = []
    max_freq: dict[int, Fraction] = {}
    bound_ok = True if set(U) == {"1"} and horizons == "a" else None
    for plan, offset in plans:
        if horizons == "a":
            levels = range(1, n_max + 1)
        else:
            levels = [n for n in plan.match_levels(n_max) if n >= 1]
        for n in levels:
            sh = plan.shift
            N = a(n, sh) if horizons == "a" else b(n, sh)
            cnt = count_occurrences(plan, U, N, offset)
            fr = Fraction(cnt, N)
            table.append((str(plan.c), offset, n, N, cnt, fr))
            max_freq[n] = max(max_freq.get(n, Fraction(0)), fr)
            if bound_ok is not None:
                bound_ok &= cnt <= sum(k(2 * i + 1, sh) for i in range(n)) + offset
    ns = sorted(max_freq)
    seq = [max_freq[n] for n in ns]
    if not seq:
        verdict = "undetermined"
    elif horizons == "a" and bound_ok and seq[-1] <= 2 * E2_bound(ns[-1], sh) + Fraction(max(o for _, o in plans), a(ns[-1], sh)):
        verdict = "not essential along the tested schedule"
    elif seq[-1] >= Fraction(1, 2) and all(x >= Fraction(1, 2) for x in seq[1:]):
        verdict = "essential-like"
    else:
        verdict = "undetermined"
    return EssentialVerdict(U, horizons, table, max_freq, bound_ok, verdict)


# -- tent-map coding ---------------------------------------------------------------------------------

HALF = Fraction(1, 2)


def tent_code(x, n: int) -> str:
    """First n symbols of the tent itinerary of x; 1/2 is coded 0."""
    x = as_rational(x)
    if x < 0 or x > 1:
        raise MalformedInputError(f"x = {x} outside [0, 1]")
    out = []
    for _ in range(n):
        if x <= HALF:
            out.append("0")
            x = 2 * x
        else:
            out.append("1")
            x = 2 - 2 * x
    return "".join(out)


def cylinder_to_interval(w: str) -> Interval:
    """Closure of the set of points whose tent itinerary starts with w."""
    lo, hi = Fraction(0), Fraction(1)
    for s in reversed(w):
        if s == "0":
            lo, hi = lo / 2, hi / 2
        elif s == "1":
            lo, hi = 1 - hi / 2, 1 - lo / 2
        else:
            raise MalformedInputError(f"not a binary word: {w!r}")
    return Interval(lo, hi)


def frequency_rows(plan: BlockPlan, n_max: int, max_len: int) -> list[dict]:
    """Rows for the frequency report: every word up to max_len at every a_n and b_n, n <= n_max."""
    rows = []
    for v in all_words(max_len):
        ranges = match_ranges(plan, v, b(n_max, plan.shift))
        for n in range(n_max + 1):
            for name, N in ((f"a_{n}", a(n, plan.shift)), (f"b_{n}", b(n, plan.shift))):
                cnt = _count_from_ranges(ranges, N)
                fr = Fraction(cnt, N)
                rows.append({"word": v, "horizon": name, "N": str(N), "count": str(cnt),
                             "freq": f"{fr.numerator}/{fr.denominator}", "freq_approx": f"{float(fr):.6g}"})
    return rows
