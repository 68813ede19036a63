from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from attractorlab.errors import NotInBallError, PreconditionError, ResourceError
from attractorlab.intervals import Q
from attractorlab.partition import Partition
from attractorlab.perturbation import (ParamSet, PinRecord, block_image_target, check_params, hat_certificates,
                                       nearest_center, random_ball_member, saw_approximate, select_params,
                                       validate_FK, verify_fixg)
from attractorlab.plmap import PLMap, prime_period, sup_distance


def test_tent_is_not_in_F1():
    v = validate_FK(PLMap.tent(), 1)
    assert not v
    assert any("slope" in r for r in v.reasons)


def test_three_lap_membership(three_lap):
    assert validate_FK(three_lap, 1)
    # its endpoints swap, so they are 2-periodic
    assert not validate_FK(three_lap, 2)


def test_no_three_lap_slope_three_map_in_F2(three_lap):
    # three pieces of slope >= 3 inside [0,1] force widths 1/3; the two candidates fail for K = 2
    mirror = PLMap((0, Fr(1, 3), Fr(2, 3), 1), (0, 1, 0, 1))
    assert not validate_FK(mirror, 1)
    assert not validate_FK(three_lap, 2)


def test_four_lap_in_F2(four_lap):
    assert validate_FK(four_lap, 2)


def test_select_params_rejects_non_member():
    with pytest.raises(PreconditionError):
        select_params(PLMap.tent(), 1, Fr(1, 8))


def test_k1_parameters(k1):
    p = k1.params
    assert (p.m_K, p.M_K, p.alpha, p.delta, p.theta) == (14, 16384, Fr(1, 32), Fr(1, 768), 3)
    assert all(c.holds for c in check_params(p, k1.f))
    assert ParamSet.from_json(p.to_json()) == p


def test_k1_certificates(k1):
    assert k1.passed
    names = {c.name for c in k1.certificates}
    assert "||f - f^|| <= alpha" in names
    a = k1.params.alpha
    assert sup_distance(k1.f, k1.tilde) <= a / 4
    assert sup_distance(k1.tilde, k1.hat) <= a / 2 + Fr(1, k1.partition.M)
    assert sup_distance(k1.f, k1.hat) <= a < k1.params.gamma / 2


def test_k1_pins_are_exact_fixed_points(k1):
    P = k1.partition
    assert sorted(pin.indices[0] for pin in k1.pins) == [4096, 8192, 12288]
    for pin in k1.pins:
        assert pin.p == 1
        assert k1.hat.eval(pin.target) == pin.target
        assert pin.target == P.c(pin.pinned_block)
        assert PinRecord.from_json(pin.to_json()) == pin


def test_hat_certificates_detect_corrupted_pin(k1):
    bad = [PinRecord(pin.y, 2, pin.indices, pin.pinned_block, pin.target) for pin in k1.pins]
    certs = hat_certificates(k1.f, k1.tilde, k1.hat, k1.params, k1.partition, bad)
    assert not all(c.holds for c in certs)


def test_nearest_center_ties_go_low():
    P = Partition(2)
    assert nearest_center(P, Fr(1, 4)) == 1
    assert nearest_center(P, Fr(1, 4), parity=0) == 2


@given(st.integers(0, 10**6))
def test_nearest_center_is_nearest(k):
    P = Partition(3)
    y = Fr(k, 10**6)
    i = nearest_center(P, y)
    assert all(abs(P.c(i) - y) <= abs(P.c(j) - y) for j in range(1, P.M + 1))


def test_fixg_on_ball_members(k1):
    for seed in range(3):
        g = random_ball_member(k1.hat, k1.params.rho, seed)
        assert sup_distance(g, k1.hat) < k1.params.rho
        rep = verify_fixg(g, k1.hat, k1.params, k1.partition, k1.pins)
        assert rep.passed


def test_fixg_rejects_maps_outside_ball(k1):
    with pytest.raises(NotInBallError):
        verify_fixg(k1.f, k1.hat, k1.params, k1.partition, k1.pins, check_plain=False)


def test_block_image_targets_on_hat(k1):
    P = k1.partition
    for i in (1, 2, 4096, P.M):
        img, j = block_image_target(k1.hat, P, i)
        assert j is not None and P.F_block(j).contains_interval(img)


def test_saw_approximate_small_map():
    f = PLMap((0, Fr(1, 2), 1), (Fr(1, 4), Fr(3, 4), Fr(1, 2)))
    eps = Fr(1, 10)
    h = saw_approximate(f, eps, 1)
    assert validate_FK(h, 1)
    assert sup_distance(f, h) < eps
    assert h.min_abs_slope() >= 3


def test_saw_approximate_piece_cap(k1):
    with pytest.raises(ResourceError):
        saw_approximate(k1.hat, k1.params.rho / 2, 2)


def test_prime_period_of_k2_pins(k2):
    assert k2.passed
    for pin in k2.pins:
        assert prime_period(k2.hat, pin.target, pin.p) == pin.p
    assert {pin.p for pin in k2.pins} == {1, 2}
