"""Certificates for finite solenoidal towers and the covering bound for the F-blocks.

A certificate lists levels from coarsest to finest. Each level holds one or more
cycles of closed intervals; a verified tower of s levels is all that is ever claimed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CertificateError, DomainError, MalformedCertificateError
from .intervals import CompactSet, Interval, as_fraction, as_rational, contains, fmt_rational, normalize
from .partition import Partition, _log2_exact
from .perturbation import block_image_target
from .plmap import PLMap


@dataclass
class CycleVerdict:
    passed: bool
    strict: bool
    failures: list = field(default_factory=list)   # (j, image, target)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _pairwise_disjoint(intervals) -> bool:
    s = sorted(intervals, key=lambda I: I.lo)
    return all(a.hi < b.lo for a, b in zip(s, s[1:]))


def verify_cycle(f: PLMap, intervals, strict: bool = True) -> CycleVerdict:
    """f(I_j) inside I_{j+1 mod k} for every j; inside the interior when ``strict``."""
    intervals = list(intervals)
    if not intervals:
        return CycleVerdict(False, strict, reason="empty cycle")
    if not _pairwise_disjoint(intervals):
        return CycleVerdict(False, strict, reason="intervals not pairwise disjoint")
    failures = []
    k = len(intervals)
    for j, I in enumerate(intervals):
        img = f.image_interval(I)
        tgt = intervals[(j + 1) % k]
        if not tgt.contains_interval(img, strict=strict):
            failures.append((j, img, tgt))
    return CycleVerdict(not failures, strict, failures)


@dataclass
class Cycle:
    intervals: tuple
    pinned: bool = False

    @property
    def union(self) -> CompactSet:
        return normalize(self.intervals)

    @property
    def max_diam(self) -> Fraction:
        return max(as_fraction(I.diam) for I in self.intervals)


@dataclass
class Level:
    cycles: list
    label: str = ""
    cycle_ok: bool | None = None
    nesting_ok: bool | None = None
    invariant_ok: bool | None = None

    @property
    def union(self) -> CompactSet:
        return normalize([I for c in self.cycles for I in c.intervals])

    @property
    def max_diam(self) -> Fraction:
        return max(c.max_diam for c in self.cycles)

    @property
    def pinned_union(self) -> CompactSet:
        return normalize([I for c in self.cycles if c.pinned for I in c.intervals])


@dataclass
class SolenoidCertificate:
    levels: list                                   # coarsest first
    verified: bool = False
    diam_trend: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def to_json(self) -> dict:
        return {
            "claim": f"verified {self.depth}-level solenoidal tower",
            "orientation": "coarse-first",
            "verified": self.verified,
            "levels": [
                {
                    "label": lv.label,
                    "cycle_ok": lv.cycle_ok, "nesting_ok": lv.nesting_ok, "invariant_ok": lv.invariant_ok,
                    "max_diam": fmt_rational(lv.max_diam),
                    "max_diam_approx": float(lv.max_diam),
                    "cycles": [{"period": len(c.intervals), "pinned": c.pinned,
                                "intervals": [I.to_json() for I in c.intervals]} for c in lv.cycles],
                }
                for lv in self.levels
            ],
            "diam_trend": [fmt_rational(d) for d in self.diam_trend],
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, data) -> "SolenoidCertificate":
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise MalformedCertificateError(f"certificate JSON error at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
        try:
            levels = []
            for lv in data["levels"]:
                cycles = [Cycle(tuple(Interval(as_rational(a), as_rational(b)) for a, b in c["intervals"]),
                                bool(c.get("pinned", False))) for c in lv["cycles"]]
                levels.append(Level(cycles, lv.get("label", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedCertificateError(f"malformed certificate: {exc}") from exc
        orient = data.get("orientation", "coarse-first")
        if orient == "fine-first":
            levels.reverse()
        elif orient != "coarse-first":
            raise MalformedCertificateError(f"unknown orientation {orient!r}")
        return cls(levels)


@dataclass
class NestingVerdict:
    passed: bool
    per_pair: list

    def __bool__(self) -> bool:
        return self.passed


def verify_nesting(cert: SolenoidCertificate) -> NestingVerdict:
    """Each level's union lies inside the previous (coarser) level's union."""
    pairs = []
    for i in range(len(cert.levels) - 1):
        outer, inner = cert.levels[i].union, cert.levels[i + 1].union
        ok = contains(outer, inner)
        if not ok and contains(inner, outer) and inner != outer:
            raise MalformedCertificateError(
                f"levels {i} and {i + 1} are nested finest-first; certificates are stored coarse-first")
        pairs.append(ok)
    return NestingVerdict(all(pairs), pairs)


def diam_trend(cert: SolenoidCertificate) -> list:
    return [lv.max_diam for lv in cert.levels]


def strictly_decreasing(xs) -> bool:
    return all(a > b for a, b in zip(xs, xs[1:]))


def verify_certificate(f: PLMap, cert: SolenoidCertificate, strict: bool = True) -> SolenoidCertificate:
    """Run every check in place and record the verdicts."""
    for lv in cert.levels:
        lv.cycle_ok = all(verify_cycle(f, c.intervals, strict) for c in lv.cycles)
        U = lv.union
        lv.invariant_ok = all(contains(U, CompactSet((f.image_interval(I),))) for c in lv.cycles for I in c.intervals)
    nest = verify_nesting(cert)
    cert.levels[0].nesting_ok = True
    for i, ok in enumerate(nest.per_pair):
        cert.levels[i + 1].nesting_ok = ok
    cert.diam_trend = diam_trend(cert)
    cert.verified = (all(lv.cycle_ok and lv.invariant_ok for lv in cert.levels) and nest.passed
                     and strictly_decreasing(cert.diam_trend))
    return cert


# -- from a construction ----------------------------------------------------------------------


def block_map(g: PLMap, P: Partition) -> list:
    """T[i] = j with g(E^i) inside F^j (T[0] unused); raises if some block has no target."""
    T = [0] * (P.M + 1)
    for i in range(1, P.M + 1):
        _, j = block_image_target(g, P, i)
        if j is None:
            raise CertificateError(f"g(E^{i}) is not inside a single F-block at level m={P.m}")
        T[i] = j
    return T


def periodic_cycles(T: list) -> list[list[int]]:
    """All cycles of a self-map of {1..len(T)-1}, each listed from its smallest element."""
    n = len(T) - 1
    state = [0] * (n + 1)
    out = []
    for s in range(1, n + 1):
        path = []
        x = s
        while state[x] == 0:
            state[x] = 1
            path.append(x)
            x = T[x]
        if state[x] == 1:
            cyc = path[path.index(x):]
            k = cyc.index(min(cyc))
            out.append(cyc[k:] + cyc[:k])
        for p in path:
            state[p] = 2
    return sorted(out)


def certificate_from_construction(g: PLMap, towers) -> SolenoidCertificate:
    """Assemble the F-block cycles of each level; ``towers`` holds (Partition, pins) pairs, coarsest first.

    Every periodic cycle of the block map i -> j (g(E^i) in F^j) is recorded, with the
    cycles through pinned blocks flagged.
    """
    levels = []
    for P, pins in towers:
        T = block_map(g, P)
        pinned = {i for pin in pins for i in pin.indices}
        cycles = [Cycle(tuple(P.F_block(i) for i in cyc), bool(pinned & set(cyc))) for cyc in periodic_cycles(T)]
        levels.append(Level(cycles, f"m={P.m}"))
    cert = verify_certificate(g, SolenoidCertificate(levels))
    if not all(lv.cycle_ok for lv in cert.levels):
        bad = [lv.label for lv in cert.levels if not lv.cycle_ok]
        raise CertificateError(f"strict cycle check failed at {bad}")
    return cert


# -- covering bound -----------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class PowerOfTwo:
    """The number 2**exponent, kept symbolically (exponent is an exact rational)."""

    exponent: Fraction

    def __float__(self) -> float:
        e = float(self.exponent)
        return 2.0**e if e > -1074 else 0.0

    def exact(self) -> Fraction:
        if self.exponent.denominator != 1:
            raise ValueError("2**exponent is irrational for a non-integer exponent")
        e = int(self.exponent)
        return Fraction(2**e) if e >= 0 else Fraction(1, 2 ** (-e))

    def __str__(self) -> str:
        return f"2^({self.exponent})"


def covering_sum(P: Partition, s) -> PowerOfTwo:
    """sum over the M blocks F^i of diam(F^i)^s = M * (2 eta)^s."""
    s = as_fraction(s)
    if s <= 0:
        raise DomainError("covering exponent s must be positive")
    logM = _log2_exact(as_rational(P.M))
    logd = _log2_exact(as_rational(2 * P.eta))
    if logM is None or logd is None:
        raise DomainError("partition sizes are not powers of two")
    return PowerOfTwo(Fraction(logM) + s * logd)
