from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from borelmod.pointclasses import (
    BorelLevel, Complement, Cylinder, DecreasingFamily, MatrixPoint, PointclassError, UPPoint,
    canonical_set, even_track, finite_intersection, finite_union, first_row_ones_cell, member_up,
    odd_track, pair, pi3_brute, pi3_member, unpair, up_battery, up_track, verdict_prefix,
)

points = st.builds(UPPoint, st.text("01", max_size=12), st.text("01", min_size=1, max_size=5))


def test_point_syntax():
    p = UPPoint.parse("0110;10")
    assert p.bits(9) == "011010101" and p.tail_start == 4 and str(p) == "0110;10"
    for bad in ["0110", "01;", "02;1"]:
        with pytest.raises(PointclassError):
            UPPoint.parse(bad)


@given(st.integers(0, 500), st.integers(0, 500))
def test_pairing_inverse(m, n):
    assert unpair(pair(m, n)) == (m, n)


def test_pairing_is_a_bijection_on_an_initial_segment():
    assert sorted(pair(m, n) for m in range(40) for n in range(40 - m)) == list(range(820))


def test_canonical_membership_examples():
    assert member_up(canonical_set("Sigma1"), "0;1")
    assert not member_up(canonical_set("Sigma1"), "000;0")
    assert member_up(canonical_set("Pi3_infemptycols"), MatrixPoint.parse("0;0"))
    assert not member_up(canonical_set("Pi2_infones"), "1;0")
    assert member_up(canonical_set("Sigma2_evzero"), "101;0")
    with pytest.raises(PointclassError):
        canonical_set("Sigma7")


def test_first_row_ones_has_no_empty_row():
    # x(m, 0) = 1 for every m: no row is empty
    assert not any(all(first_row_ones_cell(m, n) == 0 for n in range(50)) for m in range(50))
    # the all-ones point has the same Pi3 status and is what the battery uses
    assert not member_up(canonical_set("Pi3_infemptycols"), ";1")


def test_pi3_example_agrees_with_large_scan():
    p = UPPoint.parse("0;010")
    assert pi3_member(p) == pi3_brute(p, 100, 100)


def test_pi3_period_analysis_vs_scan_on_battery():
    for p in up_battery(200):
        assert pi3_member(p) == pi3_brute(p, 100, 100), str(p)


def test_closed_form_rules_match_bit_scans():
    for p in up_battery(200):
        bits = p.bits(p.tail_start + 12 * len(p.period))
        tail = bits[p.tail_start:]
        assert member_up(canonical_set("Sigma1"), p) == ("1" in bits)
        assert member_up(canonical_set("Pi2_infones"), p) == ("1" in tail)
        assert member_up(canonical_set("Sigma2_evzero"), p) == ("1" not in tail)


def test_verdict_prefix_examples():
    s1 = canonical_set("Sigma1")
    assert verdict_prefix(s1, "001") is True
    assert verdict_prefix(s1, "000") is None
    pi2 = canonical_set("Pi2_infones")
    for bits in ["", "0", "1111", "0" * 50]:
        assert verdict_prefix(pi2, bits) is None


@given(points, st.integers(0, 40))
def test_verdict_prefix_is_sound(p, n):
    bits = p.bits(n)
    for kind in ["Sigma1", "Pi2_infones", "Sigma2_evzero"]:
        c = canonical_set(kind)
        v = verdict_prefix(c, bits)
        assert v is None or v == member_up(c, p)


def test_finite_codes():
    a, b = Cylinder.of({0: 1}), Cylinder.of({2: 0})
    u, i = finite_union([a, b]), finite_intersection([a, b])
    assert member_up(u, "0;0") and not member_up(i, "0;0") and member_up(i, "100;1")
    assert verdict_prefix(i, "10") is None and verdict_prefix(i, "101") is False
    assert verdict_prefix(Complement(a), "1") is False
    assert str(u.level) == "Delta1" and str(i.level) == "Delta1"


def test_levels():
    assert str(canonical_set("Sigma1").level) == "Sigma1"
    assert str(canonical_set("Pi2_infones").level) == "Pi2"
    assert str(canonical_set("Sigma2_evzero").level) == "Sigma2"
    assert str(canonical_set("Pi3_infemptycols").level) == "Pi3"
    assert str(canonical_set("PiOmega").level) == "Piomega"
    assert BorelLevel("Pi", 2).within(BorelLevel("Sigma", 3))
    assert not BorelLevel("Pi", 2).within(BorelLevel("Sigma", 2))


@given(points, st.integers(0, 4), st.integers(0, 30))
def test_tracks_read_the_right_bits(p, k, n):
    assert up_track(p, k).bit(n) == p.bit(pair(k, n))
    assert even_track(p).bit(n) == p.bit(2 * n)
    assert odd_track(p).bit(n) == p.bit(2 * n + 1)


def test_decreasing_family_on_battery():
    fam = DecreasingFamily()
    for p in up_battery(200):
        vals = [member_up(fam.code(n), p) for n in range(1, 6)]
        assert all(not later or earlier for earlier, later in zip(vals, vals[1:])), str(p)
        if fam.member(p):
            assert all(vals)
        assert member_up(canonical_set("PiOmega"), p) == fam.member(p)
