from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from borelmod.battery import shipped_transducers
from borelmod.pointclasses import UPPoint, up_battery
from borelmod.reductions.matching import r_matching
from borelmod.reductions.monadic import pad, r_infcoinf
from borelmod.transducers import (
    NonProductiveError, broken_readahead, broken_stall, check_monotone, check_productive, compose,
    compose_all, identity, run, run_prefix, up_image,
)

points = st.builds(UPPoint, st.text("01", max_size=10), st.text("01", min_size=1, max_size=4))


def test_identity_run():
    assert run(identity(), "01;1", 4) == "0111"
    assert run(identity(), "0110", 3) == "011"
    with pytest.raises(NonProductiveError):
        run(identity(), "01", 4)


def test_pad_interleaves_zeros():
    assert run(pad(), "1;0", 8) == "10000000"
    assert run(pad(), "1;1", 6) == "101010"
    assert run_prefix(pad(), "011") == "001010"


def test_infcoinf_copies_bits():
    assert run(r_infcoinf(), "0110;10", 12) == UPPoint.parse("0110;10").bits(12)


@settings(max_examples=50)
@given(points)
def test_compose_is_associative(p):
    a = compose(compose(pad(), pad()), r_infcoinf())
    b = compose(pad(), compose(pad(), r_infcoinf()))
    c = compose_all([pad(), pad(), r_infcoinf()])
    assert run(a, p, 64) == run(b, p, 64) == run(c, p, 64)


@settings(max_examples=50)
@given(points)
def test_compose_matches_sequential_runs(p):
    mid = run(pad(), p, 200)
    assert run(compose(pad(), identity()), p, 100) == run(identity(), mid, 100)


def test_monotone_on_shipped_and_broken():
    assert check_monotone(identity(), 1000).ok
    assert check_monotone(r_matching(), 300).ok
    rep = check_monotone(broken_readahead(), 200)
    assert not rep.ok and "differ" in rep.violations[0]


def test_productive_examples():
    assert check_productive(r_matching(), "0;0", 10 ** 4).ok
    assert check_productive(r_infcoinf(), "0;0", 10 ** 3).ok
    rep = check_productive(broken_stall(), "0;0", 10)
    assert not rep.ok and "budget" in rep.violations[0]


def test_up_image_agrees_with_run():
    for t in shipped_transducers():
        if t.name == "matching":
            continue  # states are not hashable builders
        for p in up_battery(60):
            q = up_image(t, p)
            assert q.bits(300) == run(t, p, 300), (t.name, str(p))


def test_up_image_rejects_finite_output():
    with pytest.raises(NonProductiveError):
        up_image(broken_stall(), UPPoint.parse("1;0"))


def test_run_accepts_bit_function():
    rng = random.Random(1)
    bits = [rng.randint(0, 1) for _ in range(50)]
    assert run(identity(), lambda i: bits[i], 50) == "".join(map(str, bits))
