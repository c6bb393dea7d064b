import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinlab.distributions_clt import (
    SUPPORT_CAP,
    LatticeDistribution,
    builtin,
    check_moment_match,
    convolve_iid,
    expect_h,
    lemma1_compare,
    lemma1_rhs,
    moment,
    moment_identity_check,
    moments,
    point_mass,
    rademacher,
    twopoint_asym,
)
from steinlab.errors import InvalidParameter, MomentMismatch, SupportTooLarge
from steinlab.test_functions import ramp_family, smooth_probe


def brute_force(d, n):
    """Law of the normalised sum by enumerating all n-tuples."""
    law = {}
    for combo in product(range(d.size), repeat=n):
        s = sum(d.lattice_points()[i] for i in combo)
        law[s] = law.get(s, Fraction(0)) + math.prod(d.probs[i] for i in combo)
    return law


@pytest.mark.parametrize("make", [rademacher, twopoint_asym])
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_convolution_matches_enumeration(make, n):
    d = make()
    w = convolve_iid(d, n)
    law = brute_force(d, n)
    got = {pt: p for pt, p in zip(w.lattice_points(), w.probs) if p}
    assert got == law
    assert w.scale_sq == d.scale_sq / n


def test_builtins_are_standardised():
    for name in ("rademacher", "twopoint_asym"):
        d = builtin(name)
        assert d.exact
        assert moment(d, 1) == 0.0
        assert moment(d, 2) == 1.0
    with pytest.raises(InvalidParameter):
        builtin("cauchy")


def test_twopoint_atoms():
    d = twopoint_asym()
    assert list(d.values()) == pytest.approx([-math.sqrt(0.5), math.sqrt(2.0)])
    assert d.probs == (Fraction(2, 3), Fraction(1, 3))
    assert moment(d, 3) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_moment_matching_orders():
    assert check_moment_match(rademacher(), 3).fully_matched
    assert not check_moment_match(rademacher(), 4).fully_matched
    assert check_moment_match(twopoint_asym(), 2).fully_matched
    assert not check_moment_match(twopoint_asym(), 3).fully_matched
    rep = moments(rademacher(), 4)
    assert rep.raw_moments == (1.0, 0.0, 1.0, 0.0, 1.0)
    assert rep.matched == (True, True, True, False)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 32, 64, 128, 256])
def test_rademacher_fourth_moment_exact(n):
    assert moment(convolve_iid(rademacher(), n), 4) == 3 - 2 / n


@pytest.mark.parametrize("make,p", [(rademacher, 3), (twopoint_asym, 2)])
@pytest.mark.parametrize("n", [1, 2, 16, 256])
def test_moment_identity(make, p, n):
    ident = moment_identity_check(make(), p, n)
    assert ident.gap <= 1e-12


def test_moment_identity_requires_match():
    with pytest.raises(MomentMismatch):
        moment_identity_check(twopoint_asym(), 3, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(1, 40))
def test_float_and_exact_paths_agree(p_num, n):
    p = Fraction(p_num, 13)
    d = twopoint_asym(p)
    exact = convolve_iid(d, n)
    approx = convolve_iid(d.to_float(), n)
    assert not approx.exact
    assert np.allclose(exact.weights(), approx.weights(), rtol=1e-10, atol=1e-300)
    assert moment(exact, 4) == pytest.approx(moment(approx, 4), rel=1e-11)


def test_large_support_uses_float_path():
    w = convolve_iid(rademacher(), 6000)
    assert not w.exact
    assert math.fsum(w.weights()) == pytest.approx(1.0, abs=1e-14)
    assert moment(w, 4) == pytest.approx(3 - 2 / 6000, rel=1e-10)


def test_support_cap():
    with pytest.raises(SupportTooLarge):
        convolve_iid(rademacher(), SUPPORT_CAP)
    with pytest.raises(InvalidParameter):
        convolve_iid(rademacher(), 0)


def test_lattice_validation():
    with pytest.raises(InvalidParameter):
        LatticeDistribution(0, 1, (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(InvalidParameter):
        LatticeDistribution(0, -1, (Fraction(1),))
    with pytest.raises(InvalidParameter):
        LatticeDistribution(0, 1, ())
    assert point_mass().values().tolist() == [0.0]


def test_expect_h_scalar_and_vector():
    w = convolve_iid(rademacher(), 4)
    assert expect_h(w, lambda x: x * x) == pytest.approx(1.0, rel=1e-15)
    assert expect_h(w, lambda x: math.cos(x)) == pytest.approx(math.cos(0.5) ** 4, rel=1e-14)


def test_lemma1_rhs():
    # Rademacher, p = 3: E|X|^2/2! + E|X|^4/3! = 1/2 + 1/6
    assert lemma1_rhs(rademacher(), 3, 1.5) == pytest.approx(1.5 * (0.5 + 1 / 6))
    with pytest.raises(InvalidParameter):
        lemma1_rhs(rademacher(), 1, 1.0)


@pytest.mark.parametrize("n", [1, 4, 16])
def test_lemma1_compare_holds(n):
    cmp = lemma1_compare(ramp_family(2, 1.0), twopoint_asym(), 2, n, f_norm=0.3)
    assert cmp.satisfied and cmp.lhs <= cmp.bound


def test_lemma1_compare_validation():
    with pytest.raises(InvalidParameter):
        lemma1_compare(smooth_probe(3), rademacher(), 2, 4, f_norm=1.0)
    with pytest.raises(MomentMismatch):
        lemma1_compare(smooth_probe(3), twopoint_asym(), 3, 4, f_norm=1.0)


def test_fft_path_near_cap():
    n = SUPPORT_CAP - 1
    w = convolve_iid(rademacher(), n)
    assert moment(w, 4) == pytest.approx(3 - 2 / n, rel=1e-9)
    assert moment(w, 6) == pytest.approx(15 - 30 / n + 16 / n ** 2, rel=1e-8)
