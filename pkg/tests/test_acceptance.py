"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import random
import time
from fractions import Fraction as Fr

import pytest

from attractorlab.errors import ResourceError
from attractorlab.intervals import CompactSet, Interval, hausdorff, normalize
from attractorlab.lab import (DecimalMap, EstimatorConfig, bins_to_set, essential_test, estimate_all,
                              initial_point, lyapunov_probe, omega_bins, robustness_experiment, sample_orbit,
                              sigma_bins, witness_is_sound)
from attractorlab.partition import Partition, check_property5, verify_properties
from attractorlab.perturbation import (construct, random_ball_member, saw_approximate, verify_fixg)
from attractorlab.plmap import PLMap, fixed_points_of_power, prime_period, sup_distance
from attractorlab.solenoid import certificate_from_construction, covering_sum, strictly_decreasing
from attractorlab.symbolic import (BlockPlan, a, all_words, b, count_occurrences, counts_upto, k, verify_E1,
                                   verify_E2, word_at, xc_array)

from .acceptance_log import record
from .conftest import FOUR_LAP, THREE_LAP
from .test_plmap import sign_scan_fixed_points
from .test_symbolic import scan_counts

R = Fr(1, 1024)
WITNESSES = []   # (f, A, u0, witness) gathered for criterion 12


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_criterion_01_partition_properties():
    def run():
        ok = all(verify_properties(Partition(m)).all() for m in range(1, 7))
        ok &= all(Partition(m).E_block(1).diam + Partition(m).H_block(1).diam == Fr(1, 2**m) for m in range(1, 7))
        ok &= check_property5(Partition(1), 4) and check_property5(Partition(2), 12)
        return ok
    ok, dt = timed(run)
    ok = ok and dt < 1
    record(1, ok, f"m=1..6 six properties exact, {dt:.2f}s")
    assert ok


def _construction_ok(C):
    p = C.params
    ok = C.passed
    ok &= sup_distance(C.f, C.tilde) <= p.alpha / 4
    ok &= sup_distance(C.tilde, C.hat) <= p.alpha / 2 + Fr(1, p.M_K)
    ok &= sup_distance(C.f, C.hat) <= p.alpha < p.gamma / 2
    for pin in C.pins:
        ok &= C.hat.iterate(pin.target, pin.p) == pin.target and prime_period(C.hat, pin.target, pin.p) == pin.p
        # source orbit of the seed map has the same prime period
        ok &= prime_period(C.f, pin.y, pin.p) == pin.p
    return ok


def test_criterion_02_construction_certificates():
    C1, t1 = timed(lambda: construct(THREE_LAP, 1, Fr(1, 8)))
    C2, t2 = timed(lambda: construct(FOUR_LAP, 2, Fr(1, 8)))
    ok = _construction_ok(C1) and _construction_ok(C2) and t1 < 60 and t2 < 60
    record(2, ok, f"K=1 m={C1.params.m_K} {len(C1.pins)} pins {t1:.1f}s; "
                  f"K=2 (4-lap seed) m={C2.params.m_K} {len(C2.pins)} pins {t2:.1f}s")
    assert ok


def test_criterion_03_fixg_ball(k1):
    def run():
        ok = True
        for seed in range(10):
            g = random_ball_member(k1.hat, k1.params.rho, seed)
            ok &= sup_distance(g, k1.hat) < k1.params.rho
            ok &= verify_fixg(g, k1.hat, k1.params, k1.partition, k1.pins, check_plain=True).passed
        return ok
    ok, dt = timed(run)
    ok = ok and dt < 60
    record(3, ok, f"10 seeded g, pinned and all {k1.partition.M} plain blocks exact, {dt:.1f}s")
    assert ok


@pytest.mark.xfail(raises=ResourceError, strict=True,
                   reason="slope-3 re-approximation of f^ within rho/2 needs far more than 10^6 pieces")
def test_criterion_04_two_level_tower(k1):
    eps = k1.params.rho / 2
    try:
        h = saw_approximate(k1.hat, eps, 2 * k1.params.K, piece_cap=10**6)
    except ResourceError as exc:
        record(4, False, f"not attainable: {exc}"[:160])
        raise
    C2 = construct(h, 2 * k1.params.K, Fr(1, 8))
    g = random_ball_member(C2.hat, C2.params.rho, 0)
    cert = certificate_from_construction(g, [(k1.partition, k1.pins), (C2.partition, C2.pins)])
    ok = cert.verified and strictly_decreasing(cert.diam_trend)
    record(4, ok, "two-level certificate")
    assert ok


def test_criterion_05_covering_sum():
    def run():
        ok = True
        for m, s in [(2, 1), (3, 1), (5, Fr(1, 10))]:
            ok &= covering_sum(Partition(m), s).exponent == m + s - 2 * s * m * (m + 1)
        ok &= covering_sum(Partition(2), 1).exact() == Fr(1, 2**9)
        for s in (1, Fr(1, 10)):
            es = [covering_sum(Partition(m), s).exponent for m in range(2, 12)]
            ok &= all(x > y for x, y in zip(es, es[1:]))
        return ok
    ok, dt = timed(run)
    ok = ok and dt < 1
    record(5, ok, f"exponents exact, decreasing in m, {dt:.3f}s")
    assert ok


def test_criterion_06_inclusion_chain(k1, g1):
    cert = certificate_from_construction(g1, [(k1.partition, k1.pins)])
    union = cert.levels[0].union
    cfg = EstimatorConfig(samples=200, N=10**5, r=R, seed=0)
    est, dt = timed(lambda: estimate_all(g1, cfg))
    d = hausdorff(est.milnor, union)
    ok = est.chain_holds() and d <= 2 * R and dt < 300
    record(6, ok, f"chain {est.chain()}, d_H(milnor, cert)={float(d / R):.3f}r, "
                  f"|phys|={len(est.phys)} parts, {dt:.1f}s")
    assert ok


def test_criterion_07_sigma_equals_omega(k1, g1):
    cfg = EstimatorConfig(samples=50, N=10**5, r=R, seed=1)
    fm = DecimalMap(g1, cfg.precision_bits)

    def run():
        worst = Fr(0)
        for i in range(50):
            x0 = initial_point(cfg, i, fm.ctx, k1.partition.E_union)
            st = sample_orbit(fm, x0, cfg.N, cfg.precision_bits, cfg.r, cfg.schedule)
            om = bins_to_set(omega_bins(st, cfg.burn_in), cfg.nbins)
            sg = bins_to_set(sigma_bins(st, cfg.tau), cfg.nbins)
            worst = max(worst, Fr(hausdorff(om, sg)) if om and sg else Fr(1))
        return worst
    worst, dt = timed(run)
    ok = worst <= 2 * R and dt < 300
    record(7, ok, f"50 points in E_m, max d_H(sigma, omega)={float(worst / R):.3f}r, {dt:.1f}s")
    assert ok


def test_criterion_08_essential_blocks(k1, g1):
    K = k1.params.K
    horizons = [4 * K * 2**j for j in range(11)]
    P = k1.partition

    def run():
        rows = []
        for pin in k1.pins:
            for i in pin.indices:
                F = CompactSet((P.F_block(i),))
                cfg = EstimatorConfig(samples=50, N=horizons[-1], r=R, eps=Fr(1, 2 * K), delta=Fr(1, 2), seed=2)
                rep = essential_test(g1, F, cfg, horizons=horizons, domain=CompactSet((P.E_block(i),)))
                lam = F.measure
                rows.append(all(fr > lam for fr in rep.fractions) and rep.recheck())
        return rows
    rows, dt = timed(run)
    ok = all(rows) and dt < 300
    record(8, ok, f"{len(rows)} pinned F-blocks essential with eps=1/(2K), delta=lambda(F), {dt:.1f}s")
    assert ok


def test_criterion_09_robustness(k1):
    cert = certificate_from_construction(k1.hat, [(k1.partition, k1.pins)])
    ivs = [I for c in cert.levels[0].cycles for I in c.intervals]
    rho = k1.params.rho
    cfg = EstimatorConfig(samples=k1.partition.M, N=20000, r=R, seed=3, stratified=True)
    tab, dt = timed(lambda: robustness_experiment(k1.hat, [rho / 2, rho / 4, rho / 8], cfg, certificate=ivs))
    ok = tab.non_increasing() and tab.within_bound() and tab.all_meet() and dt < 600
    dists = ", ".join(f"{float(r.distance / R):.2f}r" for r in tab.rows)
    record(9, ok, f"d_H = [{dists}], C={float(tab.C):.3g}, {len(ivs)} certificate intervals met, {dt:.1f}s")
    assert ok


def test_criterion_10_symbolic():
    def run():
        ok = [word_at(i) for i in range(6)] == ["0", "1", "00", "01", "10", "11"]
        ok &= [k(n) for n in range(4)] == [4, 16, 256, 65536] and a(1) == 276 and b(1) == 65812
        ok &= count_occurrences(BlockPlan("(1)"), "1", a(1)) == 0
        ok &= count_occurrences(BlockPlan("(0)"), "1", b(0)) == 15
        e1 = verify_E1(1)
        ok &= e1.a_ratio == Fr(69, 64) and e1.a_ratio <= 1 + Fr(2, 16)
        ok &= verify_E2(2) == Fr(65552, 4295033108)
        for c in ("(1)", "(0)", "01(10)"):
            plan = BlockPlan(c, n_max=4)
            for n in range(1, 5):
                for K in (1, 2, 3):
                    ok &= count_occurrences(plan, "0" * K, a(n)) >= k(2 * n) - K
                ok &= count_occurrences(plan, "1", a(n)) <= sum(k(2 * i + 1) for i in range(n))
            N = 10**6
            x = xc_array(plan, N + 4)
            for v in all_words(3):
                ok &= bool((counts_upto(plan, v, N) == scan_counts(x, v, N)).all())
        return ok
    ok, dt = timed(run)
    ok = ok and dt < 30
    record(10, ok, f"exact values, count bounds n<=4, scan oracle N<=10^6, {dt:.1f}s")
    assert ok


def _random_set(rng):
    parts = []
    for _ in range(rng.randint(1, 5)):
        x, y = sorted((Fr(rng.randint(0, 10**6), 10**6), Fr(rng.randint(0, 10**6), 10**6)))
        parts.append(Interval(x, y))
    return normalize(parts)


def _random_map(rng):
    n = rng.randint(1, 6)
    cuts = sorted({Fr(rng.randint(1, 999), 1000) for _ in range(n - 1)})
    bps = (Fr(0), *cuts, Fr(1))
    return PLMap(bps, tuple(Fr(rng.randint(0, 1000), 1000) for _ in bps))


def test_criterion_11_metric_and_algebra():
    def run():
        rng = random.Random(11)
        ok = True
        for _ in range(1000):
            A, B, C = _random_set(rng), _random_set(rng), _random_set(rng)
            dab = hausdorff(A, B)
            ok &= dab >= 0 and dab == hausdorff(B, A) and (dab == 0) == (A == B)
            ok &= hausdorff(A, C) <= dab + hausdorff(B, C)
        for _ in range(1000):
            f, K = _random_map(rng), rng.randint(1, 3)
            x = Fr(rng.randint(0, 10**6), 10**6)
            ok &= f.power(K).eval(x) == f.iterate(x, K)
        tent = PLMap.tent()
        for K in range(1, 5):
            ok &= set(fixed_points_of_power(tent, K)) == sign_scan_fixed_points(tent, K, 2**K)
        ok &= set(fixed_points_of_power(tent, 1)) == {0, Fr(2, 3)}
        ok &= set(fixed_points_of_power(tent, 2)) == {0, Fr(2, 5), Fr(2, 3), Fr(4, 5)}
        return ok
    ok, dt = timed(run)
    ok = ok and dt < 60
    record(11, ok, f"10^3 metric triples, 10^3 power probes, tent K<=4 fixed points, {dt:.1f}s")
    assert ok


def test_criterion_12_probe_soundness(k1, g1):
    tent = PLMap.tent()
    cert = certificate_from_construction(g1, [(k1.partition, k1.pins)])
    cases = [
        (tent, CompactSet.points([Fr(2, 3)]), Fr(1, 100), 20, 200),
        (tent, CompactSet.points([0]), Fr(1, 50), 20, 200),
        (THREE_LAP, CompactSet.points([Fr(1, 2)]), Fr(1, 100), 20, 200),
        (FOUR_LAP, CompactSet.points(fixed_points_of_power(FOUR_LAP, 1)), Fr(1, 200), 10, 500),
        (g1, cert.levels[0].union, Fr(1, 1000), 4, 2000),
        (g1, cert.levels[0].pinned_union, Fr(1, 1000), 4, 2000),
    ]

    def run():
        found, sound = 0, 0
        for f, A, u0, grid, N in cases:
            w = lyapunov_probe(f, A, u0, grid, N)
            if w is not None:
                found += 1
                sound += witness_is_sound(f, A, u0, w)
        return found, sound
    (found, sound), dt = timed(run)
    ok = found == sound and found > 0 and dt < 300
    record(12, ok, f"{found} witnesses, {found - sound} unsound, {dt:.1f}s")
    assert ok
