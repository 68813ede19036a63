from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from attractorlab.errors import DegenerateFixedSetError, MalformedInputError, PreconditionError, ResourceError
from attractorlab.intervals import Interval
from attractorlab.plmap import (PLMap, argmax_distance, fixed_points, fixed_points_of_power, grid_map, prime_period,
                                sup_distance)

from .strategies import intervals, plmaps, rationals

TENT = PLMap.tent()


def sign_scan_fixed_points(f: PLMap, K: int, grid: int) -> set:
    """Roots of f^K(x) - x by scanning a grid on which f^K is linear, using eval only."""
    xs = [Fr(j, grid) for j in range(grid + 1)]
    h = [f.iterate(x, K) - x for x in xs]
    roots = {x for x, v in zip(xs, h) if v == 0}
    for x0, x1, h0, h1 in zip(xs, xs[1:], h, h[1:]):
        if h0 * h1 < 0:
            roots.add(x0 + h0 * (x1 - x0) / (h0 - h1))
    return roots


def test_rejects_bad_breakpoints():
    with pytest.raises(MalformedInputError):
        PLMap((0, Fr(1, 2), Fr(1, 2), 1), (0, 1, 1, 0))
    with pytest.raises(MalformedInputError):
        PLMap((0, 1), (0, 2))


def test_json_parse_error_has_location():
    with pytest.raises(MalformedInputError, match="line"):
        PLMap.from_json('{"breakpoints": [0, 1],')


def test_tent_fixed_points_exact():
    assert set(fixed_points_of_power(TENT, 1)) == {0, Fr(2, 3)}
    assert set(fixed_points_of_power(TENT, 2)) == {0, Fr(2, 5), Fr(2, 3), Fr(4, 5)}


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_tent_fixed_points_match_sign_scan(K):
    assert set(fixed_points_of_power(TENT, K)) == sign_scan_fixed_points(TENT, K, 2**K)


def test_identity_piece_is_degenerate():
    with pytest.raises(DegenerateFixedSetError):
        fixed_points(PLMap.identity())


def test_prime_period():
    assert prime_period(TENT, Fr(2, 5), 2) == 2
    assert prime_period(TENT, Fr(2, 3), 4) == 1
    with pytest.raises(PreconditionError):
        prime_period(TENT, Fr(1, 3), 2)


def test_power_respects_piece_cap():
    with pytest.raises(ResourceError):
        TENT.power(12, piece_cap=100)


def test_critical_points_of_three_lap(three_lap):
    assert three_lap.critical_points() == (Fr(1, 3), Fr(2, 3))


def test_sup_distance_and_argmax():
    f = grid_map([0, Fr(1, 2), 1])
    g = grid_map([0, Fr(1, 4), 1])
    assert sup_distance(f, g) == Fr(1, 4)
    x, d = argmax_distance(f, g)
    assert (x, d) == (Fr(1, 2), Fr(1, 4))


def test_add_scaled_clamps():
    h = PLMap.constant(Fr(7, 8)).add_scaled(TENT, Fr(1, 2))
    assert h.eval(Fr(1, 2)) == 1
    assert h.eval(0) == Fr(7, 8)


@given(plmaps(), plmaps(), rationals(997))
def test_compose_agrees_with_eval(f, g, x):
    assert f.compose(g).eval(x) == f.eval(g.eval(x))


@given(plmaps(max_pieces=3), st.integers(1, 4), rationals(1009))
def test_power_agrees_with_iterate(f, K, x):
    assert f.power(K).eval(x) == f.iterate(x, K)


@given(plmaps(), intervals())
def test_image_interval_is_exact_hull(f, I):
    img = f.image_interval(I)
    pts = [I.lo, I.hi] + [b for b in f.breakpoints if I.lo <= b <= I.hi]
    vals = [f.eval(p) for p in pts]
    assert (img.lo, img.hi) == (min(vals), max(vals))


@given(plmaps(), plmaps())
def test_sup_distance_dominates_grid(f, g):
    d = sup_distance(f, g)
    assert all(abs(f.eval(Fr(j, 128)) - g.eval(Fr(j, 128))) <= d for j in range(129))
    assert d == sup_distance(g, f)


@given(plmaps())
def test_simplified_is_same_function(f):
    s = f.simplified()
    assert len(s.breakpoints) <= len(f.breakpoints)
    assert sup_distance(f, s) == 0


def test_image_interval_iter_contains_true_image():
    I = Interval(Fr(1, 10), Fr(1, 5))
    hull = TENT.image_interval_iter(I, 3)
    assert hull.contains_interval(TENT.power(3).image_interval(I))
