"""Certified construction of the block perturbations f~ and f^ of a seed map f.

Pipeline: ``validate_FK`` -> ``select_params`` -> ``build_tilde`` -> ``build_hat``;
``verify_fixg`` then checks maps in the rho-ball around f^. Every quantitative claim
made along the way is re-checked with exact rational arithmetic and recorded as an
:class:`Inequality` so reports can show both sides.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from math import ceil

from .errors import (
    ApproximationError,
    CertificateError,
    ConstructionError,
    NotInBallError,
    PreconditionError,
    ResourceError,
)
from .intervals import CompactSet, Interval, ONE, Q, Rational, ZERO, as_rational, fmt_rational, hausdorff
from .partition import Partition, eta_of
from .plmap import DEFAULT_PIECE_CAP, PLMap, fixed_points, prime_period, sup_distance

log = logging.getLogger(__name__)

DEFAULT_M_CAP = 24
MIN_SLOPE = Q(3)


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: Rational
    op: str
    rhs: Rational

    @property
    def holds(self) -> bool:
        return {"<": self.lhs < self.rhs, "<=": self.lhs <= self.rhs,
                ">": self.lhs > self.rhs, ">=": self.lhs >= self.rhs}[self.op]

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": fmt_rational(self.lhs), "op": self.op,
                "rhs": fmt_rational(self.rhs), "lhs_approx": float(self.lhs),
                "rhs_approx": float(self.rhs), "holds": self.holds}


# -- F_K membership -------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    passed: bool
    reasons: tuple = ()

    def __bool__(self) -> bool:
        return self.passed


def validate_FK(f: PLMap, K: int) -> Verdict:
    """Slope >= 3 everywhere, no k-periodic critical point and no k-periodic endpoint, k <= K."""
    reasons = []
    s = f.min_abs_slope()
    if s < MIN_SLOPE:
        reasons.append(f"min |slope| = {s} < 3")
    for name, x in [("endpoint 0", ZERO), ("endpoint 1", ONE)] + [(f"critical point {c}", c) for c in f.critical_points()]:
        y = x
        for k in range(1, K + 1):
            y = f.eval(y)
            if y == x:
                reasons.append(f"{name} is {k}-periodic")
                break
    return Verdict(not reasons, tuple(reasons))


# -- parameters -----------------------------------------------------------------


@dataclass(frozen=True)
class ParamSet:
    K: int
    gamma: Rational
    beta: Rational
    alpha: Rational
    delta: Rational
    m_K: int
    M_K: int
    eta: Rational
    rho: Rational
    theta: Rational
    gamma0: Rational = None
    gamma_halvings: int = 0

    def to_json(self) -> dict:
        out = {}
        for k in ("K", "m_K", "M_K", "gamma_halvings"):
            out[k] = getattr(self, k)
        for k in ("gamma0", "gamma", "beta", "alpha", "delta", "eta", "rho", "theta"):
            v = getattr(self, k)
            out[k] = fmt_rational(v)
            out[k + "_approx"] = float(v)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "ParamSet":
        kw = {k: int(d[k]) for k in ("K", "m_K", "M_K")}
        kw["gamma_halvings"] = int(d.get("gamma_halvings", 0))
        for k in ("gamma0", "gamma", "beta", "alpha", "delta", "eta", "rho", "theta"):
            kw[k] = as_rational(d[k]) if d.get(k) is not None else None
        return cls(**kw)


def _slope_sum(theta: Rational, K: int) -> Rational:
    return sum((theta**i for i in range(K)), Q(0))


def _min_abs_on(F: PLMap, lo: Rational, hi: Rational) -> Rational:
    """Exact min of |F(x) - x| over [lo, hi]."""
    best = None
    pts = [lo] + [b for b in F.breakpoints if lo < b < hi] + [hi]
    vals = [F.eval(x) - x for x in pts]
    for a, b in zip(vals, vals[1:]):
        if a * b <= 0:
            return ZERO
    for v in vals:
        if best is None or abs(v) < best:
            best = abs(v)
    return best


def fix_stability_holds(F: PLMap, fix: tuple, crit: tuple, gamma: Rational, theta: Rational, K: int) -> bool:
    """Certify ||h - f|| < gamma  =>  d_H(Fix(h^K), Fix(f^K)) < 1/(4K).

    ||h^K - f^K|| < gamma * sum_{i<K} theta^i =: D.
    (a) each y in Fix(f^K) sits in a monotone stretch of f^K of radius t = D / (3^K - 1),
        on which |f^K(x) - x| grows at least like (3^K - 1)|x - y|; so h^K has a fixed
        point within t < 1/(4K) of y.
    (b) |f^K(x) - x| > D away from the 1/(4K)-neighbourhoods of Fix(f^K), so h^K has
        no fixed point there.
    """
    D = gamma * _slope_sum(theta, K)
    t = D / (3**K - 1)
    r = Q(1, 4 * K)
    if not t < r:
        return False
    for y in fix:
        if y - t < 0 or y + t > 1:
            return False
        if any(y - t <= c <= y + t for c in crit):
            return False
    # complement of the open r-neighbourhoods, as closed (possibly degenerate) intervals
    cur = ZERO
    pieces = []
    for y in fix:
        if y - r >= cur:
            pieces.append((cur, y - r))
        cur = max(cur, y + r)
    if cur <= 1:
        pieces.append((cur, ONE))
    for lo, hi in pieces:
        if not _min_abs_on(F, lo, hi) > D:
            return False
    return True


def fix_and_crit(f: PLMap, K: int, piece_cap: int = DEFAULT_PIECE_CAP) -> tuple[PLMap, tuple, tuple]:
    F = f.power(K, piece_cap)
    fix = fixed_points(F)
    crit = tuple(sorted(set(F.critical_points()) | {ZERO, ONE}))
    return F, fix, crit


def minimal_level(theta: Rational, alpha: Rational, delta: Rational, K: int, m_cap: int) -> int:
    m = K + 1
    while True:
        M = 2**m
        if Q(4, M) < delta / 4 and M > 4 / (K * alpha) and (2 * theta + 3) / M < alpha / 4:
            return m
        m += 1
        if m > m_cap:
            raise ResourceError(f"m_K would exceed cap {m_cap}")


def select_params(f: PLMap, K: int, gamma0, m_cap: int = DEFAULT_M_CAP,
                  piece_cap: int = DEFAULT_PIECE_CAP, min_m: int | None = None) -> ParamSet:
    gamma0 = as_rational(gamma0)
    verdict = validate_FK(f, K)
    if not verdict:
        raise PreconditionError("map not in F_K: " + "; ".join(verdict.reasons))
    F, fix, crit = fix_and_crit(f, K, piece_cap)
    if not fix or not crit:
        raise ConstructionError("Fix(f^K) or Crit(f^K) empty")
    theta = f.max_slope()

    gamma, halvings = gamma0, 0
    while not fix_stability_holds(F, fix, crit, gamma, theta, K):
        gamma /= 2
        halvings += 1
        if halvings > 200:
            raise ConstructionError("could not certify Fix-stability by shrinking gamma")

    beta = hausdorff(CompactSet.points(fix), CompactSet.points(crit)) / 2
    alpha = min(beta, gamma / 2, Q(1, K)) / 2
    delta = alpha / (8 * theta**K)
    m = minimal_level(theta, alpha, delta, K, m_cap)
    if min_m is not None and min_m > m:
        if min_m > m_cap:
            raise ResourceError(f"m_K would exceed cap {m_cap}")
        m = min_m
    M = 2**m
    eta = eta_of(m)
    diam_E = Q(1, M) - 2 * eta
    rho = min(eta, diam_E / 2, gamma / 4) / 2
    params = ParamSet(K, gamma, beta, alpha, delta, m, M, eta, rho, theta, gamma0, halvings)
    failed = [q for q in check_params(params, f) if not q.holds]
    if failed:
        raise CertificateError("parameter certificate failed: " + ", ".join(q.name for q in failed))
    return params


def check_params(params: ParamSet, f: PLMap, piece_cap: int = DEFAULT_PIECE_CAP) -> list[Inequality]:
    """Independent re-check of every parameter inequality from the raw map."""
    K, th = params.K, params.theta
    F, fix, crit = fix_and_crit(f, K, piece_cap)
    beta = hausdorff(CompactSet.points(fix), CompactSet.points(crit)) / 2
    M = 2**params.m_K
    eta = eta_of(params.m_K)
    diam_E = Q(1, M) - 2 * eta
    a, d = params.alpha, params.delta
    out = [
        Inequality("theta is the max slope", params.theta, "<=", f.max_slope()),
        Inequality("max slope is theta", f.max_slope(), "<=", params.theta),
        Inequality("beta = d_H(Fix, Crit)/2", params.beta, "<=", beta),
        Inequality("beta = d_H(Fix, Crit)/2 (reverse)", beta, "<=", params.beta),
        Inequality("beta > 0", ZERO, "<", params.beta),
        Inequality("gamma <= gamma0", params.gamma, "<=", params.gamma0 if params.gamma0 is not None else params.gamma),
        Inequality("Fix(f^K) stable under gamma-perturbation", ZERO, "<" if fix_stability_holds(F, fix, crit, params.gamma, th, K) else ">", ONE),
        Inequality("alpha < beta", a, "<", params.beta),
        Inequality("alpha < gamma/2", a, "<", params.gamma / 2),
        Inequality("alpha < 1/K", a, "<", Q(1, K)),
        Inequality("delta < alpha", d, "<", a),
        Inequality("theta^K delta < alpha/4", th**K * d, "<", a / 4),
        Inequality("sum_{j<K} theta^j delta < alpha/4", _slope_sum(th, K) * d, "<", a / 4),
        Inequality("m_K > K", Q(params.m_K), ">", Q(K)),
        Inequality("M_K = 2^m_K", Q(params.M_K), "<=", Q(M)),
        Inequality("4/M_K < delta/4", Q(4, M), "<", d / 4),
        Inequality("M_K > 4/(K alpha)", Q(M), ">", 4 / (K * a)),
        Inequality("(2 theta + 3)/M_K < alpha/4", (2 * th + 3) / M, "<", a / 4),
        Inequality("rho < eta", params.rho, "<", eta),
        Inequality("rho < diam(E)/2", params.rho, "<", diam_E / 2),
        Inequality("rho < gamma/4", params.rho, "<", params.gamma / 4),
    ]
    # f^i((y - delta, y + delta)) inside (f^i(y) - alpha, f^i(y) + alpha), i <= K
    worst = ZERO
    for y in fix:
        I = Interval(max(ZERO, y - d), min(ONE, y + d))
        fy = y
        for _ in range(K):
            I = f.image_interval(I)
            fy = f.eval(fy)
            worst = max(worst, fy - I.lo, I.hi - fy)
    out.append(Inequality("pseudo-orbit window radius < alpha", worst, "<", a))
    return out


# -- f~ and f^ as block-value maps ---------------------------------------------


@dataclass(frozen=True)
class BlockValues:
    """A map that is constant on every E-block and linear on every H-block."""

    left: Rational
    values: tuple  # values[i-1] is the constant value on E^i
    right: Rational

    def to_plmap(self, P: Partition) -> PLMap:
        eta, M = P.eta, P.M
        bps = [ZERO]
        vals = [self.left]
        for i in range(1, M + 1):
            bps.append(Q(i - 1, M) + eta)
            bps.append(Q(i, M) - eta)
            v = self.values[i - 1]
            vals.append(v)
            vals.append(v)
        bps.append(ONE)
        vals.append(self.right)
        return PLMap(tuple(bps), tuple(vals))


def nearest_center(P: Partition, y: Rational, parity: int | None = None) -> int:
    """Index of the center closest to y (restricted to i % 2 == parity); ties go to the lower one."""
    M = P.M
    t = (2 * M * y + 1) / 2  # c_t = y
    base = t.numerator // t.denominator
    cands = [j for j in range(base - 2, base + 4) if 1 <= j <= M and (parity is None or j % 2 == parity)]
    return min(cands, key=lambda j: (abs(P.c(j) - y), j))


def center_index(P: Partition, c: Rational) -> int:
    t = (2 * P.M * c + 1) / 2
    assert t.denominator == 1
    return int(t)


def tilde_values(f: PLMap, P: Partition) -> BlockValues:
    vals = []
    for i in range(1, P.M + 1):
        j = nearest_center(P, f.eval(P.c(i)), parity=i % 2)
        vals.append(P.c(j))
    left = P.c(nearest_center(P, f.eval(ZERO)))
    right = P.c(nearest_center(P, f.eval(ONE)))
    return BlockValues(left, tuple(vals), right)


def build_tilde(f: PLMap, P: Partition, alpha=None) -> PLMap:
    """f~: nearest same-parity center on each E-block, linear across H-blocks.

    With ``alpha`` given, certifies ||f - f~|| <= alpha/4 and raises CertificateError otherwise.
    """
    bv = tilde_values(f, P)
    tilde = bv.to_plmap(P)
    if alpha is not None:
        d = sup_distance(f, tilde)
        if not d <= as_rational(alpha) / 4:
            raise CertificateError(f"||f - f~|| = {float(d):.3g} > alpha/4; m_K too small")
    return tilde


@dataclass(frozen=True)
class PinRecord:
    y: Rational
    p: int
    indices: tuple
    pinned_block: int
    target: Rational

    def to_json(self) -> dict:
        return {"y": fmt_rational(self.y), "y_approx": float(self.y), "p": self.p,
                "indices": list(self.indices), "pinned_block": self.pinned_block,
                "target": fmt_rational(self.target)}

    @classmethod
    def from_json(cls, d: dict) -> "PinRecord":
        return cls(as_rational(d["y"]), int(d["p"]), tuple(int(i) for i in d["indices"]),
                   int(d["pinned_block"]), as_rational(d["target"]))


def periodic_orbits(f: PLMap, fix: tuple) -> list[tuple]:
    """Partition Fix(f^K) into f-orbits, each listed from its smallest point."""
    seen = set()
    out = []
    for y in fix:
        if y in seen:
            continue
        orb = [y]
        z = f.eval(y)
        while z != y:
            orb.append(z)
            z = f.eval(z)
        seen.update(orb)
        out.append(tuple(orb))
    return out


def entry_block(P: Partition, y: Rational, delta: Rational) -> int:
    """E-block nearest to y among those inside (y - delta, y + delta); ties to the lower index."""
    k = int(y * P.M)
    best = None
    for i in range(max(1, k - 3), min(P.M, k + 4) + 1):
        E = P.E_block(i)
        if not (y - delta < E.lo and E.hi < y + delta):
            continue
        d = ZERO if y in E else min(abs(E.lo - y), abs(E.hi - y))
        if best is None or (d, i) < best:
            best = (d, i)
    if best is None:
        raise ConstructionError(f"no E-block inside the delta-window of {y}")
    return best[1]


def hat_values(f: PLMap, tilde: BlockValues, params: ParamSet, P: Partition) -> tuple[BlockValues, list[PinRecord]]:
    F, fix, _ = fix_and_crit(f, params.K)
    pins = []
    used: dict[int, int] = {}
    vals = list(tilde.values)
    for orb in periodic_orbits(f, fix):
        y, p = orb[0], len(orb)
        idx = [entry_block(P, y, params.delta)]
        for _ in range(p - 1):
            idx.append(center_index(P, tilde.values[idx[-1] - 1]))
        if len(set(idx)) != p:
            raise ConstructionError(f"f~-orbit of the entry center for y={y} revisits a block before step {p}: {idx}")
        for i in idx:
            if i in used:
                raise ConstructionError(f"pin for y={y} collides with pin {used[i]} on block {i}")
            used[i] = len(pins)
        target = P.c(idx[0])
        vals[idx[-1] - 1] = target
        pins.append(PinRecord(y, p, tuple(idx), idx[-1], target))
    return BlockValues(tilde.left, tuple(vals), tilde.right), pins


def build_hat(f: PLMap, tilde: PLMap | BlockValues, params: ParamSet, P: Partition) -> tuple[PLMap, list[PinRecord]]:
    if isinstance(tilde, PLMap):
        tilde_bv = tilde_values(f, P)
        tilde_map = tilde
    else:
        tilde_bv, tilde_map = tilde, tilde.to_plmap(P)
    hat_bv, pins = hat_values(f, tilde_bv, params, P)
    hat = hat_bv.to_plmap(P)
    certs = hat_certificates(f, tilde_map, hat, params, P, pins)
    bad = [c for c in certs if not c.holds]
    if bad:
        raise CertificateError("f^ certificate failed: " + ", ".join(c.name for c in bad))
    return hat, pins


def hat_certificates(f: PLMap, tilde: PLMap, hat: PLMap, params: ParamSet, P: Partition,
                     pins: list[PinRecord]) -> list[Inequality]:
    a, M = params.alpha, P.M
    out = [
        Inequality("||f - f~|| <= alpha/4", sup_distance(f, tilde), "<=", a / 4),
        Inequality("||f~ - f^|| <= alpha/2 + 1/M_K", sup_distance(tilde, hat), "<=", a / 2 + Q(1, M)),
        Inequality("||f - f^|| <= alpha", sup_distance(f, hat), "<=", a),
        Inequality("alpha < gamma/2", a, "<", params.gamma / 2),
    ]
    orbits = []
    for pin in pins:
        c = pin.target
        per = prime_period(hat, c, pin.p) if hat.iterate(c, pin.p) == c else 0
        out.append(Inequality(f"pin y={float(pin.y):.6g}: prime period of c_{pin.indices[0]}",
                              Q(per), "<=", Q(pin.p)))
        out.append(Inequality(f"pin y={float(pin.y):.6g}: prime period of c_{pin.indices[0]} (reverse)",
                              Q(pin.p), "<=", Q(per)))
        out.append(Inequality(f"pin y={float(pin.y):.6g}: p divides K", Q(params.K % pin.p), "<=", ZERO))
        orb = {c}
        z = hat.eval(c)
        while z != c and len(orb) <= pin.p:
            orb.add(z)
            z = hat.eval(z)
        orbits.append(orb)
    overlaps = sum(len(o1 & o2) for i, o1 in enumerate(orbits) for o2 in orbits[i + 1:])
    out.append(Inequality("pinned f^-orbits pairwise disjoint (shared points)", Q(overlaps), "<=", ZERO))
    for pin in pins:
        for i in pin.indices:
            k = i % 2
            if pin.indices[0] % 2 != k:
                out.append(Inequality(f"pin parity at block {i}", ONE, "<=", ZERO))
    return out


# -- the ball property around f^ ------------------------------------------------


@dataclass
class FixgReport:
    distance: Rational
    rho: Rational
    pinned: dict = field(default_factory=dict)   # i_c -> (image of E under g^K, contained in F, fixed point certified)
    plain_ok: bool = True
    plain_failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.plain_ok and all(ok and fx for _, ok, fx in self.pinned.values())

    def to_json(self) -> dict:
        return {
            "distance": fmt_rational(self.distance), "rho": fmt_rational(self.rho),
            "distance_approx": float(self.distance), "rho_approx": float(self.rho),
            "pinned": {str(i): {"image": v[0].to_json(), "in_F": v[1], "fixed_point": v[2]}
                       for i, v in sorted(self.pinned.items())},
            "plain_blocks_map_into_F": self.plain_ok,
            "plain_failures": self.plain_failures[:20],
            "passed": self.passed,
        }


def block_image_target(g: PLMap, P: Partition, i: int) -> tuple[Interval, int | None]:
    """Image of E^i under g and the F-block containing it (None if no single F-block does)."""
    img = g.image_interval(P.E_block(i))
    j = nearest_center(P, img.mid)
    return img, (j if P.F_block(j).contains_interval(img) else None)


def verify_fixg(g: PLMap, hat: PLMap, params: ParamSet, P: Partition, pins: list[PinRecord],
                check_plain: bool = True) -> FixgReport:
    d = sup_distance(g, hat)
    if not d < params.rho:
        raise NotInBallError(f"||g - f^|| = {float(d):.3g} is not < rho = {float(params.rho):.3g}")
    rep = FixgReport(d, params.rho)
    K = params.K
    for pin in pins:
        for ic in pin.indices:
            E = P.E_block(ic)
            img = g.image_interval_iter(E, K)
            in_F = P.F_block(ic).contains_interval(img)
            # g^K maps E into itself, so g^K(x) - x changes sign on E
            fx = g.iterate(E.lo, K) >= E.lo and g.iterate(E.hi, K) <= E.hi
            rep.pinned[ic] = (img, in_F, fx)
    if check_plain:
        for i in range(1, P.M + 1):
            _, j = block_image_target(g, P, i)
            if j is None:
                rep.plain_ok = False
                rep.plain_failures.append(i)
    return rep


def random_ball_member(hat: PLMap, rho: Rational, seed: int, extra_points: int = 64) -> PLMap:
    """A random PL map strictly inside the open rho-ball around ``hat``.

    Every breakpoint value of ``hat`` (plus ``extra_points`` random new breakpoints) is moved
    by a random rational in (-rho, rho), then clipped to [0, 1].
    """
    rng = random.Random(seed)
    scale = 2**30
    shrink = Q(scale - 1, scale)
    xs = set(hat.breakpoints)
    for _ in range(extra_points):
        xs.add(Q(rng.randrange(1, scale), scale))
    xs = sorted(xs)
    ys = []
    for x in xs:
        u = Q(rng.randrange(-scale, scale + 1), scale) * shrink
        ys.append(min(ONE, max(ZERO, hat.eval(x) + u * rho)))
    return PLMap(tuple(xs), tuple(ys))


# -- density witness: slope >= 3 approximations ---------------------------------


def _sci(n: int) -> str:
    d = str(n)
    return d if len(d) <= 7 else f"{d[0]}.{d[1:3]}e{len(d) - 1}"


def _saw_piece_count(f: PLMap, amp: Rational) -> int:
    n = 0
    for (x0, x1, _, _), s in zip(f.pieces(), f.slopes):
        if abs(s) >= MIN_SLOPE:
            n += 1
        else:
            w = amp / (4 + abs(s))
            n += 2 * ceil((x1 - x0) / (2 * w))
    return n


def saw_approximate(f: PLMap, eps, K: int, piece_cap: int = DEFAULT_PIECE_CAP, retries: int = 24) -> PLMap:
    """A map in F_K within eps of f.

    Pieces with |slope| < 3 get a zig-zag of amplitude eps/4 whose teeth are steep
    enough (|slope| >= 4 before nudging); periodic endpoints or critical points are then
    broken by moving the offending value by a small rational amount.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ApproximationError("eps must be positive")
    if validate_FK(f, K):
        return f
    amp = eps / 4
    need = _saw_piece_count(f, amp)
    if need > piece_cap:
        raise ResourceError(f"slope-3 approximation within eps needs about {_sci(need)} pieces (> cap {piece_cap})")
    xs, ys = [f.breakpoints[0]], [f.values[0]]
    for (x0, x1, y0, y1), s in zip(f.pieces(), f.slopes):
        if abs(s) >= MIN_SLOPE:
            xs.append(x1)
            ys.append(y1)
            continue
        w = amp / (4 + abs(s))
        n = ceil((x1 - x0) / (2 * w))
        step = (x1 - x0) / (2 * n)
        for k in range(1, 2 * n + 1):
            x = x0 + k * step
            base = y0 + s * (x - x0)
            if k % 2:
                base = base + amp if base + amp <= 1 else base - amp
            xs.append(x)
            ys.append(base)
    h = PLMap(tuple(xs), tuple(ys))

    nudge = amp / 8
    for attempt in range(retries):
        verdict = validate_FK(h, K)
        if verdict:
            break
        h = _nudge(h, K, nudge / (attempt + 1), attempt)
    else:
        raise ApproximationError("could not break periodic endpoints/critical points within eps")
    if not validate_FK(h, K):
        raise ApproximationError("approximation failed final F_K validation")
    d = sup_distance(f, h)
    if not d < eps:
        raise ApproximationError(f"approximation drifted to {float(d):.3g} >= eps")
    return h


def _nudge(h: PLMap, K: int, nu: Rational, attempt: int) -> PLMap:
    vals = list(h.values)
    bps = h.breakpoints
    index = {b: i for i, b in enumerate(bps)}
    bad = [0, len(bps) - 1] + [index[c] for c in h.critical_points()]
    s = h.slopes
    for i in bad:
        x = bps[i]
        y = x
        periodic = False
        for _ in range(K):
            y = h.eval(y)
            if y == x:
                periodic = True
                break
        if not periodic:
            continue
        # push peaks up and valleys down when possible: that only steepens the teeth
        if i == 0:
            up = s[0] < 0
        elif i == len(bps) - 1:
            up = s[-1] > 0
        else:
            up = s[i - 1] > 0 or s[i] < 0
        step = nu * (1 + Q(attempt, 7))
        v = vals[i] + step if up else vals[i] - step
        if v > 1 or v < 0:
            v = vals[i] - step if up else vals[i] + step
        vals[i] = min(ONE, max(ZERO, v))
    return PLMap(bps, tuple(vals))


# -- the whole pipeline ------------------------------------------------------------


@dataclass
class Construction:
    f: PLMap
    params: ParamSet
    partition: Partition
    tilde: PLMap
    hat: PLMap
    pins: list
    certificates: list
    retries: int = 0

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.certificates)


def construct(f: PLMap, K: int, gamma0, m_cap: int = DEFAULT_M_CAP, piece_cap: int = DEFAULT_PIECE_CAP,
              max_retries: int = 3) -> Construction:
    params = select_params(f, K, gamma0, m_cap=m_cap, piece_cap=piece_cap)
    retries = 0
    while True:
        P = Partition(params.m_K)
        tilde_bv = tilde_values(f, P)
        tilde = tilde_bv.to_plmap(P)
        try:
            hat_bv, pins = hat_values(f, tilde_bv, params, P)
        except ConstructionError:
            if retries >= max_retries:
                raise
            retries += 1
            log.info("pin collision at m_K=%d, retrying one level finer", params.m_K)
            params = select_params(f, K, gamma0, m_cap=m_cap, piece_cap=piece_cap, min_m=params.m_K + 1)
            continue
        hat = hat_bv.to_plmap(P)
        certs = check_params(params, f, piece_cap) + hat_certificates(f, tilde, hat, params, P, pins)
        return Construction(f, params, P, tilde, hat, pins, certs, retries)
