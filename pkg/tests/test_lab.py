from decimal import Decimal
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attractorlab.errors import DomainError
from attractorlab.intervals import CompactSet, Interval, contains, hausdorff
from attractorlab.lab import (DecimalMap, EstimatorConfig, bins_to_set, essential_test, estimate_all,
                              lyapunov_probe, milnor_estimate, omega_bins, omega_estimate, per_closure_proxy,
                              robustness_experiment, sample_many, sample_orbit, sigma_estimate, trajectory,
                              witness_is_sound)
from attractorlab.plmap import PLMap

TENT = PLMap.tent()
# contraction onto the fixed point 1/3
SINK = PLMap((0, 1), (Fr(1, 6), Fr(2, 3)))
SMALL = dict(samples=20, N=20000, r=Fr(1, 64))


def test_config_validation():
    with pytest.raises(DomainError):
        EstimatorConfig(r=Fr(2, 3))
    with pytest.raises(DomainError):
        EstimatorConfig(N=1000, schedule=(500, 400, 1000))
    with pytest.raises(DomainError):
        EstimatorConfig(delta=Fr(3, 2))
    cfg = EstimatorConfig(N=8000)
    assert cfg.schedule == (1000, 2000, 4000, 8000)
    assert cfg.tau == cfg.eps == Fr(1, 4096)
    assert EstimatorConfig.from_json(cfg.to_json()) == cfg


def test_orbit_stats_invariants():
    st_ = sample_orbit(TENT, Fr(1, 7), 5000, r=Fr(1, 32))
    assert int(st_.visit_counts.sum()) == 5000
    fr = st_.frequencies()
    assert (fr >= 0).all() and (fr <= 1).all()
    assert [int(row.sum()) for row in st_.counts] == list(st_.checkpoints)


def test_tent_fixed_point_stays_put():
    cfg = EstimatorConfig(N=10000)
    assert omega_estimate(TENT, Fr(2, 3), cfg) == CompactSet.of((Fr(682, 1024), Fr(683, 1024)))
    assert sigma_estimate(TENT, Fr(2, 3), cfg) == omega_estimate(TENT, Fr(2, 3), cfg)


def test_identity_mass_in_one_bin():
    st_ = sample_orbit(PLMap.identity(), Fr(3, 10), 4000, r=Fr(1, 10))
    assert int(st_.visit_counts[3]) == 4000


def test_hybrid_trajectory_detects_exact_cycle():
    fm = DecimalMap(TENT, 128)
    tr = trajectory(fm, Fr(2, 5), 1000)
    assert tr.period == 2


def test_hat_orbit_becomes_exactly_periodic(k1):
    P = k1.partition
    pin = k1.pins[0]
    x0 = P.E_block(pin.indices[0]).mid
    tr = trajectory(DecimalMap(k1.hat, 128), x0, 100)
    assert tr.period == pin.p
    # exact cross-check
    assert k1.hat.iterate(x0, 5) == pin.target


def test_typical_tent_orbit_covers_all_bins():
    cfg = EstimatorConfig(N=20000, r=Fr(1, 16), seed=4)
    A = omega_estimate(TENT, Fr(1234567, 10**7 + 19), cfg)
    assert A == CompactSet.of((0, 1))


def test_sink_estimates():
    cfg = EstimatorConfig(**SMALL)
    est = estimate_all(SINK, cfg)
    pt = CompactSet.of((Fr(21, 64), Fr(22, 64)))
    assert est.milnor == est.stat == est.phys == pt
    assert est.chain_holds()


def test_tent_milnor_is_everything():
    cfg = EstimatorConfig(samples=10, N=20000, r=Fr(1, 64))
    assert milnor_estimate(TENT, cfg) == CompactSet.of((0, 1))


def test_determinism_across_worker_counts():
    a = sample_many(TENT, EstimatorConfig(samples=6, N=4000, r=Fr(1, 64), seed=7))
    b = sample_many(TENT, EstimatorConfig(samples=6, N=4000, r=Fr(1, 64), seed=7, workers=2))
    assert all((x.counts == y.counts).all() for x, y in zip(a, b))


@settings(max_examples=15)
@given(st.integers(0, 2**32), st.integers(3, 7))
def test_dyadic_refinement_is_contained(num, e):
    x0 = Fr(num, 2**32 + 15)
    coarse = EstimatorConfig(N=4000, r=Fr(1, 2**e))
    fine = EstimatorConfig(N=4000, r=Fr(1, 2 ** (e + 1)))
    assert contains(omega_estimate(TENT, x0, coarse), omega_estimate(TENT, x0, fine))


@settings(max_examples=15)
@given(st.integers(0, 2**20))
def test_sigma_inside_omega(num):
    cfg = EstimatorConfig(N=8000, r=Fr(1, 32))
    x0 = Fr(num, 2**20 + 7)
    assert contains(omega_estimate(TENT, x0, cfg), sigma_estimate(TENT, x0, cfg))


def test_essential_sink_neighbourhood():
    cfg = EstimatorConfig(samples=20, N=2000, r=Fr(1, 64), eps=Fr(1, 2), delta=Fr(1, 2))
    rep = essential_test(SINK, CompactSet.of((Fr(1, 4), Fr(1, 2))), cfg, horizons=[500, 1000, 2000])
    assert rep.essential and rep.recheck()
    far = essential_test(SINK, CompactSet.of((Fr(3, 4), 1)), cfg, horizons=[500, 1000, 2000])
    assert not far.essential and far.verdict == "not essential"


def test_essential_treats_U_as_open():
    cfg = EstimatorConfig(samples=5, N=1000, r=Fr(1, 64), eps=Fr(1, 2), delta=Fr(1, 2))
    rep = essential_test(SINK, CompactSet.of((0, Fr(1, 3))), cfg, horizons=[1000])
    assert not rep.essential


def test_per_closure_proxy():
    assert per_closure_proxy(TENT, 2) == CompactSet.points([0, Fr(2, 5), Fr(2, 3), Fr(4, 5)])
    assert per_closure_proxy(SINK, 3) == CompactSet.points([Fr(1, 3)])


def test_per_closure_contains_pins(k1):
    P = per_closure_proxy(k1.hat, 1)
    assert all(pin.target in P for pin in k1.pins)


def test_probe_repeller_and_sink():
    A = CompactSet.points([Fr(2, 3)])
    w = lyapunov_probe(TENT, A, Fr(1, 100), 20, 200)
    assert w is not None and w.verified_by == "exact"
    assert witness_is_sound(TENT, A, Fr(1, 100), w)
    assert lyapunov_probe(SINK, CompactSet.points([Fr(1, 3)]), Fr(1, 100), 20, 200) is None


def test_robustness_on_sink():
    cfg = EstimatorConfig(samples=10, N=4000, r=Fr(1, 64))
    tab = robustness_experiment(SINK, [0, Fr(1, 1000)], cfg, certificate=[Interval(Fr(1, 3), Fr(1, 3))])
    zero = next(r for r in tab.rows if r.delta == 0)
    assert zero.distance == 0
    assert tab.non_increasing() and tab.within_bound() and tab.all_meet()


def test_sigma_equals_omega_on_constructed_g(g1, k1):
    cfg = EstimatorConfig(samples=5, N=20000, r=Fr(1, 1024), seed=1)
    fm = DecimalMap(g1, cfg.precision_bits)
    from attractorlab.lab import initial_point
    for i in range(5):
        x0 = initial_point(cfg, i, fm.ctx, k1.partition.E_union)
        assert hausdorff(omega_estimate(g1, x0, cfg), sigma_estimate(g1, x0, cfg)) <= 2 * cfg.r
