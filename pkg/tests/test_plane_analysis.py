import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xsplanes import plane_analysis as pa
from xsplanes.generators import PRESETS, XorShift128Plus, XsParams, XsState, xs_next
from xsplanes.xor_arith import ADMISSIBLE_SIGNS, ALL_SIGNS, SignTriple

u64 = st.integers(0, 2**64 - 1)
P1 = XsParams(23, 17, 26)


def test_residual_examples():
    for s in ALL_SIGNS:
        assert pa.plane_residual(0, 0, 0, pa.PlaneSpec(s, 23)) == 0
    plane = pa.PlaneSpec(SignTriple(-1, 1, 1), 23)
    assert pa.plane_residual(1, 0, (1 + 2**23) % 2**64, plane) == 0
    assert pa.plane_residual(1, 0, (1 + 2**23 + 2**63) % 2**64, plane) == -(2**63)


def test_eight_distinct_planes():
    planes = pa.PlaneSpec.all_for(23)
    assert len({(p.c1, p.c2) for p in planes}) == 8
    assert str(pa.PlaneSpec(SignTriple(-1, 1, 1), 23)) == "z = (1+2^23)x - y"


@given(u64, u64, st.sampled_from(ALL_SIGNS), st.integers(1, 63))
def test_round_trip_on_plane(x, y, signs, a):
    plane = pa.PlaneSpec(signs, a)
    z = (plane.c1 * x + plane.c2 * y) % 2**64
    assert pa.plane_residual(x, y, z, plane) == 0


@given(u64, u64, u64, st.sampled_from(ALL_SIGNS))
def test_residual_range_and_vector_agreement(x, y, z, signs):
    plane = pa.PlaneSpec(signs, 23)
    r = pa.plane_residual(x, y, z, plane)
    assert -(2**63) <= r < 2**63
    arr = lambda v: np.array([v], dtype=np.uint64)  # noqa: E731
    assert int(pa.plane_residuals(arr(x), arr(y), arr(z), plane)[0]) == r
    assert int(pa.abs_residuals(pa.plane_residuals(arr(x), arr(y), arr(z), plane))[0]) == abs(r)


def test_conditions_examples():
    for s in ALL_SIGNS:
        assert pa.conditions_hold(0, 0, P1, 5, s) == (True, True)
    rng = random.Random(0)
    for _ in range(200):
        s0, s1 = rng.getrandbits(64), rng.getrandbits(64)
        assert pa.conditions_hold(s0, s1, P1, 1, (-1, 1, 1)) == (True, True)


def test_conditions_depth_check():
    with pytest.raises(ValueError):
        pa.conditions_hold(1, 2, P1, 18, (-1, 1, 1))
    with pytest.raises(ValueError):
        pa.scan_concentration(P1, 0, 10, n=18)


def test_vector_conditions_match_scalar():
    rng = random.Random(8)
    s0 = [rng.getrandbits(64) for _ in range(300)]
    s1 = [rng.getrandbits(64) for _ in range(300)]
    for signs in ALL_SIGNS:
        for n in (2, 5, 17):
            a1, a2 = pa.conditions_arrays(np.array(s0, dtype=np.uint64), np.array(s1, dtype=np.uint64),
                                          P1, n, signs)
            want = [pa.conditions_hold(x, y, P1, n, signs) for x, y in zip(s0, s1)]
            assert list(zip(a1.tolist(), a2.tolist())) == want


def state_layout_probability(n, signs):
    """A1/A2 probability by enumerating the top-n words as they enter the conditions.

    S0=(s_i), S1=(s_i+1), V=(s_i L^a), W=(s_i+1 L^a), T=(s_i+2)=S1^S0^V.
    """
    p, q, r = signs
    m = 1 << n
    c = 0
    for s0, s1, v, w in product(range(m), repeat=4):
        t = s1 ^ s0 ^ v
        c += (s1 ^ s0 ^ v) == (p * s1 + q * s0 + r * v) % m and (t ^ s1 ^ w) == (p * t + q * s1 + r * w) % m
    return Fraction(c, m**4)


@pytest.mark.parametrize("signs", ADMISSIBLE_SIGNS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_predicted_probability_matches_state_enumeration(signs, n):
    assert pa.predicted_probability(n, signs) == state_layout_probability(n, signs)


def test_predicted_probability_values():
    assert pa.predicted_probability(5, (1, -1, 1)) == Fraction(625, 4096)
    assert pa.predicted_probability(5, (-1, 1, 1)) == Fraction(1, 16)
    assert pa.predicted_probability(5, (1, 1, -1)) == Fraction(1, 16)
    for s in ADMISSIBLE_SIGNS:
        assert pa.predicted_probability(1, s) == 1
    assert pa.predicted_probability(5, (1, 1, 1)) == pa.NOT_DERIVED


@pytest.mark.parametrize("preset", PRESETS)
def test_epsilon_decomposition(preset):
    p = XsParams(*preset)
    rng = random.Random(preset[1])
    seen = 0
    for _ in range(3000):
        s0, s1 = rng.getrandbits(64), rng.getrandbits(64)
        for n in (2, 5, p.m):
            eps = pa.epsilons(s0, s1, p, n)
            assert all(0 <= e <= 2 ** (64 - n) - 1 for e in eps)
            for signs in ADMISSIBLE_SIGNS:
                if pa.conditions_hold(s0, s1, p, n, signs) != (True, True):
                    continue
                st = XsState(s0, s1)
                x, st = xs_next(st, p)
                y, st = xs_next(st, p)
                z, _ = xs_next(st, p)
                res = pa.plane_residual(x, y, z, pa.PlaneSpec(signs, p.a))
                err = pa.epsilon_residual(eps, signs)
                assert (res - err) % 2**64 == 0
                assert abs(res) <= pa.residual_bound(n)
                seen += 1
    assert seen > 100


@pytest.mark.parametrize("preset", PRESETS)
def test_scan_bound_compliance(preset):
    p = XsParams(*preset)
    for n in sorted({2, 5, p.m}):
        rep = pa.scan_concentration(p, 21, 200_000, n)
        assert rep.compliant
        for row in rep.rows:
            if row.admissible and row.condition_count:
                assert row.max_abs_residual <= rep.bound


def test_scan_matches_scalar_path():
    rep = pa.scan_concentration(P1, 4, 2000, 5)
    g = XorShift128Plus(P1, 4)
    counts = {s: 0 for s in ALL_SIGNS}
    near = {s: 0 for s in ALL_SIGNS}
    for _ in range(2000):
        st = g.state
        x, y, z = (g.next_u64() for _ in range(3))
        for s in ALL_SIGNS:
            counts[s] += pa.conditions_hold(st.s0, st.s1, P1, 5, s) == (True, True)
            near[s] += abs(pa.plane_residual(x, y, z, pa.PlaneSpec(s, 23))) <= rep.bound
    for row in rep.rows:
        assert row.condition_count == counts[row.plane.signs]
        assert row.near_count == near[row.plane.signs]


def test_overlapping_windows():
    rep = pa.scan_concentration(P1, 4, 3000, 5, overlapping=True)
    g = XorShift128Plus(P1, 4)
    s = SignTriple(1, -1, 1)
    want = 0
    for _ in range(3000):
        st = g.state
        want += pa.conditions_hold(st.s0, st.s1, P1, 5, s) == (True, True)
        g.next_u64()
    assert rep.row_for(s).condition_count == want


@pytest.mark.parametrize("preset", PRESETS)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_frequencies_match_predictions(preset, n):
    p = XsParams(*preset)
    samples = 10**6
    rep = pa.scan_concentration(p, 1000 + n, samples, n)
    for row in rep.rows:
        if not row.admissible:
            continue
        prob = float(row.predicted)
        sigma = math.sqrt(prob * (1 - prob) / samples)
        assert abs(rep.frequency(row) - prob) <= 4 * sigma


def test_structural_excess_over_chance():
    n = 5
    samples = 10**6
    rep = pa.scan_concentration(P1, 9, samples, n)
    base = float(pa.chance_fraction(n))
    row = rep.row_for((1, -1, 1))
    prob = float(row.predicted)
    floor = prob + (1 - prob) * base
    sigma = math.sqrt(floor * (1 - floor) / samples)
    assert rep.near_fraction(row) >= floor - 4 * sigma


def test_prediction_omitted_when_n_exceeds_a():
    p = XsParams(21, 23, 28)
    rep = pa.scan_concentration(p, 1, 1000, 22)
    assert all(row.predicted == pa.NOT_DERIVED for row in rep.rows)
