"""Orbit statistics and empirical attractor estimates.

Orbits run in ``decimal`` arithmetic at a configurable precision. Binary floats are a
poor fit here: the tent map and the dyadic block maps collapse onto 0 within ~60
steps in double precision. Every estimate is a union of closed bins of width r,
returned as an exact :class:`CompactSet`.

Constructed maps contract every E-block onto a center, so most orbits become
exactly periodic after a short transient. ``trajectory`` detects the repeat and the
statistics fast-forward over the remaining horizon.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal, localcontext
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .intervals import ONE, ZERO, CompactSet, Interval, Q, as_fraction, as_rational, dist_point, hausdorff, normalize
from .plmap import DEFAULT_PIECE_CAP, PLMap, fixed_points_of_power, hat_bump

DEFAULT_PRECISION_BITS = 128
EXACT_REVERIFY_MAX_STEPS = 400


def digits_for(bits: int) -> int:
    return max(20, math.ceil(bits * math.log10(2)))


def default_schedule(N: int) -> tuple:
    out = []
    n = 1000
    while n < N:
        out.append(n)
        n *= 2
    out.append(N)
    return tuple(out)


@dataclass(frozen=True)
class EstimatorConfig:
    samples: int = 200
    N: int = 100_000
    schedule: tuple | None = None
    burn_in: int | None = None
    r: Fraction = Fraction(1, 1024)
    tau: Fraction | None = None
    eps: Fraction | None = None
    delta: Fraction = Fraction(1, 100)
    seed: int = 0
    precision_bits: int = DEFAULT_PRECISION_BITS
    stratified: bool = False
    workers: int = 1

    def __post_init__(self):
        r = as_fraction(self.r)
        object.__setattr__(self, "r", r)
        if r <= 0 or r > 1 or r.numerator != 1:
            raise DomainError("resolution r must be 1/n for a positive integer n")
        sched = tuple(self.schedule) if self.schedule else default_schedule(self.N)
        if any(a >= b for a, b in zip(sched, sched[1:])) or sched[-1] != self.N or sched[0] < 1:
            raise DomainError("schedule must increase strictly and end at N")
        object.__setattr__(self, "schedule", sched)
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.N // 2)
        if self.tau is None:
            object.__setattr__(self, "tau", r / 4)
        if self.eps is None:
            object.__setattr__(self, "eps", self.tau)
        for name in ("tau", "eps", "delta"):
            v = as_fraction(getattr(self, name))
            object.__setattr__(self, name, v)
            if not 0 < v < 1:
                raise DomainError(f"{name} must lie in (0, 1)")
        if not 0 <= self.burn_in < self.N:
            raise DomainError("burn-in must lie in [0, N)")

    @property
    def nbins(self) -> int:
        return self.r.denominator

    def to_json(self) -> dict:
        return {
            "samples": self.samples, "N": self.N, "schedule": list(self.schedule), "burn_in": self.burn_in,
            "r": str(self.r), "tau": str(self.tau), "eps": str(self.eps), "delta": str(self.delta),
            "seed": self.seed, "precision_bits": self.precision_bits, "stratified": self.stratified,
            "workers": self.workers,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EstimatorConfig":
        kw = dict(d)
        for k in ("r", "tau", "eps", "delta"):
            if kw.get(k) is not None:
                kw[k] = as_fraction(kw[k])
        if kw.get("schedule") is not None:
            kw["schedule"] = tuple(int(x) for x in kw["schedule"])
        return cls(**kw)


# -- fast evaluation ------------------------------------------------------------------


class DecimalMap:
    """A PLMap evaluated in decimal arithmetic at fixed precision."""

    def __init__(self, f: PLMap, precision_bits: int = DEFAULT_PRECISION_BITS):
        self.f = f
        self.bits = precision_bits
        self.ctx = Context(prec=digits_for(precision_bits))
        d = self.ctx.divide
        self.bps = [d(Decimal(int(b.numerator)), Decimal(int(b.denominator))) for b in f.breakpoints]
        self.vals = [d(Decimal(int(v.numerator)), Decimal(int(v.denominator))) for v in f.values]
        self.slopes = [d(Decimal(int(s.numerator)), Decimal(int(s.denominator))) for s in f.slopes]
        self.last = len(self.bps) - 2

    def __call__(self, x: Decimal) -> Decimal:
        i = bisect_right(self.bps, x) - 1
        if i > self.last:
            i = self.last
        elif i < 0:
            i = 0
        y = self.ctx.fma(self.slopes[i], self.ctx.subtract(x, self.bps[i]), self.vals[i])
        if y < 0:
            return Decimal(0)
        if y > 1:
            return Decimal(1)
        return y


def to_decimal(x, ctx: Context) -> Decimal:
    x = as_rational(x)
    return ctx.divide(Decimal(int(x.numerator)), Decimal(int(x.denominator)))


def as_fraction_dec(x: Decimal) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(n, d)


@dataclass
class Trajectory:
    """x_0 .. x_{k-1}; if ``start`` is set, x_n = x_{start + (n - start) % period} for n >= start."""

    xs: list
    start: int | None = None
    period: int | None = None

    def index(self, n: int) -> int:
        if self.start is None or n < len(self.xs):
            return n
        return self.start + (n - self.start) % self.period


def trajectory(fm: DecimalMap, x0, N: int, exact_bits: int | None = None) -> Trajectory:
    """Orbit of x0 with exact repeat detection.

    A rational (non-Decimal) x0 is iterated exactly while its denominator stays below
    ``exact_bits`` bits (default: twice the working precision), then in decimal.
    Exact fixed points such as 2/3 for the tent map therefore stay fixed.
    """
    xs = []
    seen: dict = {}
    x = x0
    n = 0
    if not isinstance(x0, Decimal):
        limit = exact_bits if exact_bits is not None else 2 * fm.bits
        f = fm.f
        x = as_rational(x0)
        while n < N and int(x.denominator).bit_length() <= limit:
            j = seen.get(x)
            if j is not None:
                return Trajectory(xs, j, n - j)
            seen[x] = n
            xs.append(x)
            x = f.eval(x)
            n += 1
        seen = {}
        x = to_decimal(x, fm.ctx)
    while n < N:
        j = seen.get(x)
        if j is not None:
            return Trajectory(xs, j, n - j)
        seen[x] = n
        xs.append(x)
        x = fm(x)
        n += 1
    return Trajectory(xs)


def prefix_counts(values: np.ndarray, traj: Trajectory, ns, width: int) -> np.ndarray:
    """For each n in ns, bincount of values over the first n orbit points (length ``width``)."""
    out = np.zeros((len(ns), width), dtype=np.int64)
    k = len(values)
    for row, n in enumerate(ns):
        if n <= k:
            out[row] = np.bincount(values[:n], minlength=width)
            continue
        j, L = traj.start, traj.period
        reps, rem = divmod(n - j, L)
        out[row] = (np.bincount(values[:j], minlength=width)
                    + reps * np.bincount(values[j:k], minlength=width)
                    + np.bincount(values[j:j + rem], minlength=width))
    return out


@dataclass
class OrbitStats:
    x0: Decimal
    N: int
    r: Fraction
    checkpoints: tuple
    counts: np.ndarray          # cumulative bin counts at each checkpoint
    last_visit: np.ndarray      # last index n < N with x_n in the bin, -1 if never
    transient: int | None = None
    period: int | None = None

    @property
    def nbins(self) -> int:
        return self.counts.shape[1]

    @property
    def visit_counts(self) -> np.ndarray:
        return self.counts[-1]

    def frequencies(self) -> np.ndarray:
        return self.counts / np.asarray(self.checkpoints, dtype=float)[:, None]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["bin_lo", "bin_hi", "count"])
        n = self.nbins
        for b, c in enumerate(self.visit_counts):
            if c:
                w.writerow([f"{b}/{n}", f"{b + 1}/{n}", int(c)])
        return buf.getvalue()


def bin_indices(xs: list, nbins: int) -> np.ndarray:
    nb = Decimal(nbins)
    out = np.fromiter((int(x * nb) if isinstance(x, Decimal) else int(x * nbins) for x in xs),
                      dtype=np.int64, count=len(xs))
    np.minimum(out, nbins - 1, out=out)
    return out


def orbit_stats_from(traj: Trajectory, x0: Decimal, N: int, checkpoints: tuple, r: Fraction) -> OrbitStats:
    nbins = r.denominator
    bins = bin_indices(traj.xs, nbins)
    counts = prefix_counts(bins, traj, checkpoints, nbins)
    last = np.full(nbins, -1, dtype=np.int64)
    k = len(bins)
    if traj.start is None or N <= k:
        upto = min(N, k)
        last[bins[:upto]] = np.arange(upto)
    else:
        j, L = traj.start, traj.period
        last[bins[:j]] = np.arange(j)
        # inside the periodic tail every cycle bin is revisited in the final period
        tail_pos = np.arange(j, k)
        final = N - 1 - ((N - 1 - tail_pos) % L)
        last[bins[j:k]] = np.maximum(last[bins[j:k]], final)
    return OrbitStats(x0, N, r, tuple(checkpoints), counts, last, traj.start, traj.period)


def sample_orbit(f: PLMap, x0, N: int, precision_bits: int = DEFAULT_PRECISION_BITS,
                 r: Fraction = Fraction(1, 1024), checkpoints: tuple | None = None) -> OrbitStats:
    fm = f if isinstance(f, DecimalMap) else DecimalMap(f, precision_bits)
    checkpoints = tuple(checkpoints) if checkpoints else default_schedule(N)
    traj = trajectory(fm, x0, N)
    return orbit_stats_from(traj, x0, N, checkpoints, as_fraction(r))


# -- per-orbit estimates ---------------------------------------------------------------------------


def bins_to_set(bins, nbins: int) -> CompactSet:
    return normalize([Interval(Q(int(b), nbins), Q(int(b) + 1, nbins)) for b in bins])


def omega_bins(st: OrbitStats, burn_in: int) -> np.ndarray:
    return np.nonzero(st.last_visit >= burn_in)[0]


def sigma_bins(st: OrbitStats, tau: Fraction) -> np.ndarray:
    """Bins visited with frequency >= tau in every window (N_{j-1}, N_j] of the last half of the schedule."""
    cps = np.asarray(st.checkpoints, dtype=np.int64)
    s = len(cps)
    first = max(1, s // 2) if s > 1 else 0
    keep = np.ones(st.nbins, dtype=bool)
    t = float(tau)
    for j in range(first, s):
        prev_n = cps[j - 1] if j > 0 else 0
        prev_c = st.counts[j - 1] if j > 0 else 0
        keep &= (st.counts[j] - prev_c) >= t * (cps[j] - prev_n)
    return np.nonzero(keep)[0]


def _stats_for(f: PLMap, x0, config: EstimatorConfig) -> OrbitStats:
    return sample_orbit(f, x0, config.N, config.precision_bits, config.r, config.schedule)


def omega_estimate(f: PLMap, x0, config: EstimatorConfig) -> CompactSet:
    st = _stats_for(f, x0, config)
    return bins_to_set(omega_bins(st, config.burn_in), config.nbins)


def sigma_estimate(f: PLMap, x0, config: EstimatorConfig) -> CompactSet:
    st = _stats_for(f, x0, config)
    return bins_to_set(sigma_bins(st, config.tau), config.nbins)


# -- sampling many orbits ---------------------------------------------------------------------------


def initial_point(config: EstimatorConfig, i: int, ctx: Context, domain: CompactSet | None = None) -> Decimal:
    """Deterministic i-th initial point: uniform on [0,1] (or ``domain``), stratified if configured."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, i]))
    bits = config.precision_bits
    nbytes = (bits + 7) // 8
    u = Fraction(int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bits), 2**bits)
    if config.stratified:
        u = (i % config.samples + u) / config.samples
    if domain is not None:
        # inverse CDF of the uniform law on the domain
        t = u * as_fraction(domain.measure)
        for p in domain.parts:
            d = as_fraction(p.diam)
            if t <= d:
                u = as_fraction(p.lo) + t
                break
            t -= d
        else:
            u = as_fraction(domain.hi)
    return to_decimal(u, ctx)


_worker_cache: dict = {}


def _worker_map(f: PLMap, bits: int) -> DecimalMap:
    key = (id(f), bits)
    fm = _worker_cache.get(key)
    if fm is None or fm.f is not f:
        _worker_cache.clear()
        fm = DecimalMap(f, bits)
        _worker_cache[key] = fm
    return fm


def _run_sample(args) -> OrbitStats:
    f, config, i, domain = args
    fm = _worker_map(f, config.precision_bits)
    x0 = initial_point(config, i, fm.ctx, domain)
    traj = trajectory(fm, x0, config.N)
    return orbit_stats_from(traj, x0, config.N, config.schedule, config.r)


def sample_many(f: PLMap, config: EstimatorConfig, domain: CompactSet | None = None) -> list[OrbitStats]:
    """OrbitStats for every sample index, in index order regardless of worker count."""
    jobs = [(f, config, i, domain) for i in range(config.samples)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            return list(ex.map(_run_sample, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))
    return [_run_sample(j) for j in jobs]


def milnor_from(stats: list[OrbitStats], config: EstimatorConfig) -> CompactSet:
    mask = np.zeros(config.nbins, dtype=bool)
    for st in stats:
        mask[omega_bins(st, config.burn_in)] = True
    return bins_to_set(np.nonzero(mask)[0], config.nbins)


def stat_from(stats: list[OrbitStats], config: EstimatorConfig) -> CompactSet:
    mask = np.zeros(config.nbins, dtype=bool)
    for st in stats:
        mask[sigma_bins(st, config.tau)] = True
    return bins_to_set(np.nonzero(mask)[0], config.nbins)


def essential_bin_fractions(stats: list[OrbitStats], config: EstimatorConfig) -> np.ndarray:
    """fractions[j, b]: share of samples whose frequency in bin b exceeds eps at horizon N_j."""
    cps = np.asarray(config.schedule, dtype=float)[:, None]
    e = float(config.eps)
    hits = np.zeros((len(config.schedule), config.nbins), dtype=np.int64)
    for st in stats:
        hits += (st.counts > e * cps)
    return hits / len(stats)


def phys_from(stats: list[OrbitStats], config: EstimatorConfig) -> CompactSet:
    frac = essential_bin_fractions(stats, config)
    essential = np.all(frac > float(config.delta), axis=0)
    return bins_to_set(np.nonzero(essential)[0], config.nbins)


def milnor_estimate(f: PLMap, config: EstimatorConfig) -> CompactSet:
    return milnor_from(sample_many(f, config), config)


def stat_attractor_estimate(f: PLMap, config: EstimatorConfig) -> CompactSet:
    return stat_from(sample_many(f, config), config)


def phys_attractor_estimate(f: PLMap, config: EstimatorConfig) -> CompactSet:
    return phys_from(sample_many(f, config), config)


@dataclass
class AttractorEstimates:
    milnor: CompactSet
    stat: CompactSet
    phys: CompactSet
    config: EstimatorConfig

    def chain(self) -> dict:
        """phys in stat + 2r, stat + 2r in milnor + 4r."""
        r = Q(self.config.r.numerator, self.config.r.denominator)
        from .intervals import contains

        stat2 = self.stat.inflate(2 * r) if self.stat else self.stat
        mil4 = self.milnor.inflate(4 * r) if self.milnor else self.milnor
        return {
            "phys_in_stat_2r": contains(stat2, self.phys),
            "stat_2r_in_milnor_4r": contains(mil4, stat2),
        }

    def chain_holds(self) -> bool:
        return all(self.chain().values())


def estimate_all(f: PLMap, config: EstimatorConfig) -> AttractorEstimates:
    stats = sample_many(f, config)
    return AttractorEstimates(milnor_from(stats, config), stat_from(stats, config), phys_from(stats, config), config)


# -- essential sets ---------------------------------------------------------------------------------


class OpenSetTest:
    """Membership in the interior of a CompactSet for decimal points, exact at the edges."""

    def __init__(self, U: CompactSet, ctx: Context):
        self.parts = []
        for p in U.parts:
            lo, hi = p.lo, p.hi
            with localcontext(ctx) as c:
                c.rounding = ROUND_FLOOR
                lo_f = to_decimal(lo, c)
                hi_f = to_decimal(hi, c)
                c.rounding = ROUND_CEILING
                lo_c = to_decimal(lo, c)
                hi_c = to_decimal(hi, c)
            self.parts.append((lo, hi, lo_f, lo_c, hi_f, hi_c))
        self.los = [p[2] for p in self.parts]

    def __call__(self, x) -> bool:
        if not isinstance(x, Decimal):
            return any(lo < x < hi for lo, hi, *_ in self.parts)
        i = bisect_right(self.los, x) - 1
        if i < 0:
            return False
        lo, hi, lo_f, lo_c, hi_f, hi_c = self.parts[i]
        if x >= hi_c:
            return False
        if lo_c < x < hi_f:
            return True
        q = Q(as_fraction_dec(x))
        return lo < q < hi


@dataclass
class EssentialReport:
    horizons: tuple
    fractions: list          # fraction of sampled points with frequency > eps, per horizon
    raw_counts: list         # per sample: U-visit counts at each horizon
    eps: Fraction
    delta: Fraction
    domain_measure: Fraction
    samples: int

    @property
    def essential(self) -> bool:
        return all(fr > self.delta for fr in self.fractions)

    @property
    def verdict(self) -> str:
        return "essential" if self.essential else "not essential"

    def recheck(self) -> bool:
        """Recompute the fractions from the raw counts."""
        fr = []
        for j, h in enumerate(self.horizons):
            good = sum(1 for row in self.raw_counts if Fraction(row[j], h) > self.eps)
            fr.append(self.domain_measure * Fraction(good, self.samples))
        return fr == self.fractions


def essential_test(f: PLMap, U: CompactSet, config: EstimatorConfig, horizons=None,
                   domain: CompactSet | None = None) -> EssentialReport:
    """Share of initial points whose visit frequency to int(U) exceeds eps along each horizon.

    With ``domain`` the points are drawn from it and the share is scaled by its measure,
    which estimates the measure of the good set inside the domain: a lower bound for the
    measure of the whole good set.
    """
    horizons = tuple(sorted(horizons or config.schedule))
    H = horizons[-1]
    fm = DecimalMap(f, config.precision_bits)
    inside = OpenSetTest(U, fm.ctx)
    raw = []
    for i in range(config.samples):
        x0 = initial_point(config, i, fm.ctx, domain)
        traj = trajectory(fm, x0, H)
        ind = np.fromiter((1 if inside(x) else 0 for x in traj.xs), dtype=np.int64, count=len(traj.xs))
        cnt = prefix_counts(ind, traj, horizons, 2)[:, 1]
        raw.append([int(c) for c in cnt])
    dm = as_fraction(domain.measure) if domain is not None else Fraction(1)
    fractions = []
    for j, h in enumerate(horizons):
        good = sum(1 for row in raw if Fraction(row[j], h) > config.eps)
        fractions.append(dm * Fraction(good, config.samples))
    return EssentialReport(horizons, fractions, raw, config.eps, config.delta, dm, config.samples)


# -- periodic points ---------------------------------------------------------------------------------


def per_closure_proxy(f: PLMap, maxK: int, piece_cap: int = DEFAULT_PIECE_CAP) -> CompactSet:
    pts = set()
    for K in range(1, maxK + 1):
        pts.update(fixed_points_of_power(f, K, piece_cap))
    return CompactSet.points(sorted(pts))


# -- stability probe ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    x0: Fraction
    step: int
    x_exit: Fraction | Decimal
    distance: Fraction | Decimal
    verified_by: str


def _exit_exact(f: PLMap, x0, A: CompactSet, u0, N: int) -> tuple[int, object] | None:
    x = as_rational(x0)
    for n in range(1, N + 1):
        x = f.eval(x)
        if dist_point(A, x) > u0:
            return n, x
    return None


def _exit_decimal(fm: DecimalMap, x0: Decimal, A: CompactSet, u0, N: int) -> tuple[int, Decimal] | None:
    lo_bounds = [(to_decimal(p.lo, fm.ctx), to_decimal(p.hi, fm.ctx)) for p in A.inflate(u0).parts]
    los = [b[0] for b in lo_bounds]
    x = x0
    for n in range(1, N + 1):
        x = fm(x)
        i = bisect_right(los, x) - 1
        if i < 0 or x > lo_bounds[i][1]:
            return n, x
    return None


def lyapunov_probe(f: PLMap, A: CompactSet, u0, grid: int, N: int,
                   precision_bits: int = DEFAULT_PRECISION_BITS) -> Witness | None:
    """Search grid points within u0/4 of A for an orbit leaving the u0-neighbourhood of A.

    A candidate is returned only after re-verification: exact rational iteration when the
    exit happens within ``EXACT_REVERIFY_MAX_STEPS`` steps, else an independent run at
    doubled precision that must also exit at a margin of at least 2^-(bits/2).
    """
    u0 = as_rational(u0)
    if not A:
        raise DomainError("lyapunov_probe needs a nonempty set A")
    fm = DecimalMap(f, precision_bits)
    fm2 = DecimalMap(f, 2 * precision_bits)
    near = A.inflate(u0 / 4)
    for p in near.parts:
        for k in range(grid + 1):
            x0 = p.lo + (p.hi - p.lo) * Q(k, grid)
            hit = _exit_decimal(fm, to_decimal(x0, fm.ctx), A, u0, N)
            if hit is None:
                continue
            n, _ = hit
            if n <= EXACT_REVERIFY_MAX_STEPS:
                ex = _exit_exact(f, x0, A, u0, n)
                if ex is not None:
                    return Witness(as_fraction(x0), ex[0], as_fraction(ex[1]), as_fraction(dist_point(A, ex[1])), "exact")
                continue
            hit2 = _exit_decimal(fm2, to_decimal(x0, fm2.ctx), A, u0, N)
            if hit2 is None:
                continue
            xq = Q(as_fraction_dec(hit2[1]))
            d = dist_point(A, xq)
            if d > u0 + Q(1, 2 ** (precision_bits // 2)):
                return Witness(as_fraction(x0), hit2[0], hit2[1], as_fraction(d), "doubled-precision")
    return None


def witness_is_sound(f: PLMap, A: CompactSet, u0, w: Witness, precision_bits: int = DEFAULT_PRECISION_BITS) -> bool:
    """Independent re-check of a probe witness."""
    u0 = as_rational(u0)
    if w.verified_by == "exact":
        x = f.iterate(w.x0, w.step)
        return dist_point(A, x) > u0
    fm = DecimalMap(f, 4 * precision_bits)
    x = to_decimal(w.x0, fm.ctx)
    for _ in range(w.step):
        x = fm(x)
    return dist_point(A, Q(as_fraction_dec(x))) > u0


# -- robustness ------------------------------------------------------------------------------------


@dataclass
class RobustnessRow:
    delta: Fraction
    distance: Fraction
    estimate: CompactSet
    meets_certificate: bool | None


@dataclass
class RobustnessTable:
    base: CompactSet
    rows: list
    r: Fraction
    C: Fraction = Fraction(0)

    def non_increasing(self) -> bool:
        ds = [row.distance for row in sorted(self.rows, key=lambda r: -r.delta)]
        return all(a >= b for a, b in zip(ds, ds[1:]))

    def within_bound(self) -> bool:
        return all(row.distance <= 2 * self.r + self.C * row.delta for row in self.rows)

    def all_meet(self) -> bool:
        return all(row.meets_certificate is not False for row in self.rows)


def perturb(f: PLMap, delta) -> PLMap:
    return f.add_scaled(hat_bump(), delta, clamp=True)


def robustness_experiment(f: PLMap, deltas, config: EstimatorConfig,
                          certificate: list | None = None) -> RobustnessTable:
    """d_H(milnor(f + delta*bump), milnor(f)) per delta, plus a check that each certificate
    interval still meets the perturbed estimate. C is calibrated at the largest delta."""
    base = milnor_estimate(f, config)
    rows = []
    for d in sorted((as_fraction(x) for x in deltas), reverse=True):
        fd = perturb(f, Q(d)) if d else f
        est = milnor_estimate(fd, config)
        dist = as_fraction(hausdorff(base, est)) if base and est else Fraction(1)
        meets = None
        if certificate is not None:
            meets = all(est.intersects(I) for I in certificate)
        rows.append(RobustnessRow(d, dist, est, meets))
    r = config.r
    C = Fraction(0)
    if rows and rows[0].delta > 0:
        C = max(Fraction(0), (rows[0].distance - 2 * r) / rows[0].delta)
    return RobustnessTable(base, rows, r, C)
