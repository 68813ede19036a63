"""The level-m block system on [0, 1]: E, F and H blocks, parity unions and centers.

Blocks are produced from closed-form index arithmetic, so a Partition at large m
costs nothing until a list of blocks is actually requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .errors import DomainError, ResourceError
from .intervals import CompactSet, Interval, ONE, Q, Rational, ZERO, as_rational, contains, normalize

DEFAULT_M_CAP = 8


def eta_of(m: int) -> Rational:
    return Q(1, 2 ** (2 * m * (m + 1)))


@dataclass(frozen=True)
class Partition:
    m: int
    M: int = field(init=False)
    eta: Rational = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "M", 2**self.m)
        object.__setattr__(self, "eta", eta_of(self.m))

    # -- single blocks, indices as in the construction (1-based; H from 0) -----

    def a(self, i: int) -> Rational:
        return Q(i, self.M)

    def c(self, i: int) -> Rational:
        return Q(2 * i - 1, 2 * self.M)

    def E_block(self, i: int) -> Interval:
        return Interval(Q(i - 1, self.M) + self.eta, Q(i, self.M) - self.eta)

    def F_block(self, i: int) -> Interval:
        c = self.c(i)
        return Interval(c - self.eta, c + self.eta)

    def H_block(self, i: int) -> Interval:
        """Closed hull of H^i; H^0 and H^M are half-open at 0 and 1 (see H_open_ends)."""
        if i == 0:
            return Interval(ZERO, self.eta)
        if i == self.M:
            return Interval(ONE - self.eta, ONE)
        a = Q(i, self.M)
        return Interval(a - self.eta, a + self.eta)

    @staticmethod
    def H_open_ends(i: int, M: int) -> tuple[bool, bool]:
        """(left endpoint excluded, right endpoint excluded) for H^i."""
        if i == 0:
            return False, True
        if i == M:
            return True, False
        return True, True

    # -- the lists and unions of the notation ------------------------------------

    @cached_property
    def a_list(self) -> tuple:
        return tuple(self.a(i) for i in range(1, self.M + 1))

    @cached_property
    def centers(self) -> tuple:
        return tuple(self.c(i) for i in range(1, self.M + 1))

    @cached_property
    def E(self) -> tuple:
        return tuple(self.E_block(i) for i in range(1, self.M + 1))

    @cached_property
    def F(self) -> tuple:
        return tuple(self.F_block(i) for i in range(1, self.M + 1))

    @cached_property
    def H(self) -> tuple:
        return tuple(self.H_block(i) for i in range(0, self.M + 1))

    @cached_property
    def L(self) -> CompactSet:
        return normalize(self.E[0::2])

    @cached_property
    def R(self) -> CompactSet:
        return normalize(self.E[1::2])

    @cached_property
    def G(self) -> CompactSet:
        return normalize(self.F[0::2])

    @cached_property
    def D(self) -> CompactSet:
        return normalize(self.F[1::2])

    @cached_property
    def C(self) -> tuple:
        return self.centers

    @cached_property
    def E_union(self) -> CompactSet:
        return normalize(self.E)

    @cached_property
    def F_union(self) -> CompactSet:
        return normalize(self.F)

    @property
    def diam_E(self) -> Rational:
        return Q(1, self.M) - 2 * self.eta

    @property
    def diam_H(self) -> Rational:
        return 2 * self.eta

    def to_json(self) -> dict:
        from .intervals import fmt_rational

        return {
            "m": self.m,
            "M": self.M,
            "eta": fmt_rational(self.eta),
            "a": [fmt_rational(x) for x in self.a_list],
            "c": [fmt_rational(x) for x in self.centers],
            "E": [b.to_json() for b in self.E],
            "F": [b.to_json() for b in self.F],
            "H": [b.to_json() for b in self.H],
            "H_half_open": {"H0": "[0, eta)", "HM": "(1-eta, 1]"},
            "L": self.L.to_json(),
            "R": self.R.to_json(),
            "G": self.G.to_json(),
            "D": self.D.to_json(),
            "C": CompactSet.points(self.centers).to_json(),
        }


@lru_cache(maxsize=32)
def _build(m: int) -> Partition:
    return Partition(m)


def build(m: int, cap: int = DEFAULT_M_CAP) -> Partition:
    if m < 1:
        raise DomainError("partition level m must be >= 1")
    if m > cap:
        raise ResourceError(f"partition level m={m} above cap {cap}")
    return _build(m)


def classify(P: Partition, x) -> tuple[str, int]:
    """Innermost block containing x: C before F before E before H."""
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError(f"x = {x} outside [0, 1]")
    M, eta = P.M, P.eta
    k = min(int(x * M), M)  # a_k <= x < a_{k+1}
    left = x - Q(k, M)
    if left < eta:
        return ("H", k)
    if k == M:
        return ("H", M)
    right = Q(k + 1, M) - x
    if right < eta:
        return ("H", k + 1)
    i = k + 1
    c = P.c(i)
    if x == c:
        return ("C", i)
    if abs(x - c) <= eta:
        return ("F", i)
    return ("E", i)


def block_index_of_point(P: Partition, x) -> int | None:
    """Index i with x in E^i, else None."""
    kind, i = classify(P, x)
    return None if kind == "H" else i


# -- property verification ----------------------------------------------------


def _log2_exact(q: Rational) -> int | None:
    if q <= 0:
        return None
    n, d = q.numerator, q.denominator
    if n & (n - 1) == 0 and d & (d - 1) == 0:
        return (n.bit_length() - 1) - (d.bit_length() - 1)
    return None


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_upper_bound(q: Rational, m: int, bits: int = 64) -> Rational:
    """A rational u with u**m >= q, certified by exact arithmetic."""
    scale = 2 ** (bits * m)
    r = _iroot((q.numerator * scale) // q.denominator, m)
    u = Q(r + 1, 2**bits)
    assert u**m >= q
    return u


def root_sum_below(diams, m: int, bound: Rational) -> bool:
    """Certify sum(d ** (1/m)) < bound using exact rational upper bounds on the roots."""
    groups: dict[Rational, int] = {}
    for d in diams:
        groups[d] = groups.get(d, 0) + 1
    total = sum((n * root_upper_bound(d, m) for d, n in groups.items()), Q(0))
    return total < bound


def _components_meeting(lo: Rational, hi: Rational, Pn: Partition) -> tuple[int, int]:
    """Index range [j0, j1] of level-n F-blocks meeting [lo, hi]."""
    Mn, en = Pn.M, Pn.eta
    # F^j = [(2j-1)/(2Mn) - en, (2j-1)/(2Mn) + en]
    t0 = (2 * Mn * (lo - en) + 1) / 2
    j0 = max(1, -((-t0.numerator) // t0.denominator))
    t1 = (2 * Mn * (hi + en) + 1) / 2
    j1 = min(Mn, t1.numerator // t1.denominator)
    return j0, j1


def check_property5(P: Partition, n: int) -> bool:
    Pn = Partition(n)
    for i in range(1, P.M + 1):
        Fi = P.F_block(i)
        j0, j1 = _components_meeting(Fi.lo, Fi.hi, Pn)
        if j0 > j1:
            return False
        parities = {j % 2 for j in range(j0, min(j1, j0 + 1) + 1)}
        if parities != {0, 1}:
            return False
        for j in {j0, j1}:
            if not Fi.contains_interval(Pn.F_block(j)):
                return False
    return True


@dataclass(frozen=True)
class PropertyReport:
    tiling: bool
    nesting: bool
    h_small: bool
    f_small: bool
    level_nesting: bool
    disjoint: bool
    n: int

    def all(self) -> bool:
        return all((self.tiling, self.nesting, self.h_small, self.f_small, self.level_nesting, self.disjoint))

    def as_dict(self) -> dict:
        return {
            "tiling": self.tiling,
            "F in E, D in R, G in L": self.nesting,
            "H diameters": self.h_small,
            "F diameters": self.f_small,
            f"level nesting n={self.n}": self.level_nesting,
            "L/R and D/G disjoint": self.disjoint,
        }


def verify_properties(P: Partition, n: int | None = None) -> PropertyReport:
    m, M = P.m, P.M
    n = 2 * m * (m + 1) if n is None else n

    # H^0, E^1, H^1, ..., E^M, H^M tile [0, 1] end to end
    tiling = P.H_block(0).lo == 0 and P.H_block(M).hi == 1
    for i in range(1, M + 1):
        tiling &= P.H_block(i - 1).hi == P.E_block(i).lo and P.E_block(i).hi == P.H_block(i).lo
    tiling &= sum((P.E_block(i).diam for i in range(1, M + 1)), Q(0)) + P.H_block(0).diam + P.H_block(M).diam + sum((P.H_block(i).diam for i in range(1, M)), Q(0)) == 1

    # nesting of F in E and of the parity unions
    nesting = all(P.E_block(i).contains_interval(P.F_block(i)) for i in range(1, M + 1))
    nesting &= contains(P.R, P.D) and contains(P.L, P.G)

    # H and F blocks: diam < 2^-m and sum of m-th roots < 2^-m
    bound = Q(1, 2**m)
    h_diams = [P.H_block(i).diam for i in range(1, M + 1)]
    f_diams = [P.F_block(i).diam for i in range(1, M + 1)]
    h_small = all(d < bound for d in h_diams) and root_sum_below(h_diams, m, bound)
    f_small = all(d < bound for d in f_diams) and root_sum_below(f_diams, m, bound)

    # F-blocks of level n sit inside level-m F-blocks, both parities
    level_nesting = n >= 2 * m * (m + 1) and check_property5(P, n)

    # blocks are sorted and separated, so parity unions are disjoint
    disjoint = all(P.E_block(i).hi < P.E_block(i + 1).lo for i in range(1, M))
    disjoint &= not P.L.intersects(P.R) and not P.D.intersects(P.G)
    return PropertyReport(tiling, nesting, h_small, f_small, level_nesting, disjoint, n)
