"""Worked examples pinned to their expected values, one row per example."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from steinlab import experiments as ex
from steinlab.distributions_clt import (
    check_moment_match,
    convolve_iid,
    expect_h,
    lemma1_compare,
    lemma1_rhs,
    moment,
    moment_identity_check,
    point_mass,
    rademacher,
    twopoint_asym,
)
from steinlab.errors import KinkError
from steinlab.normal_kernel import (
    gaussian_moment,
    half_integer_gamma,
    mills_z,
    normal_cdf,
    normal_sf,
    phi,
    z_derivatives,
)
from steinlab.quadrature import gaussian_expectation, integrate
from steinlab.stein_solver import (
    derivative_daly,
    derivative_semigroup,
    expectation_nh,
    finite_difference,
    kernel_integral,
    sharp_constant,
    solve_f,
    solve_polynomial,
    sup_norm_estimate,
)
from steinlab.test_functions import abs_family, monomial, ramp_family, smooth_probe

SQRT_2_OVER_PI = math.sqrt(2 / math.pi)


# normal kernel

def test_phi_examples():
    assert phi(0.0) == 0.3989422804014327
    assert phi(1.0) == pytest.approx(0.24197072451914337, rel=1e-15)
    for x in (0.3, 2.0, 17.5):
        assert phi(-x) == phi(x)


def test_cdf_examples():
    assert normal_cdf(0.0) == 0.5
    # lower tail by the asymptotic Mills-ratio series at x = 10
    x = 10.0
    series = phi(x) / x * (1 - 1 / x ** 2 + 3 / x ** 4 - 15 / x ** 6 + 105 / x ** 8 - 945 / x ** 10)
    assert normal_sf(x) == pytest.approx(series, rel=1e-13)
    assert normal_sf(x) == pytest.approx(7.619853024160527e-24, rel=1e-13)
    for x in (0.5, 1.0, 3.0):
        assert normal_cdf(-x) + normal_cdf(x) == pytest.approx(1.0, abs=1e-16)


def test_mills_examples():
    assert mills_z(0.0) == pytest.approx(1.2533141373155003, rel=1e-16)
    x = -20.0
    series = -1 / x * (1 - 1 / x ** 2 + 3 / x ** 4 - 15 / x ** 6 + 105 / x ** 8 - 945 / x ** 10
                       + 10395 / x ** 12)
    assert mills_z(x) == pytest.approx(series, rel=1e-12)
    ref = float(mpmath.ncdf(1) / mpmath.npdf(1))
    assert mills_z(1.0) == pytest.approx(ref, rel=1e-14)
    assert mills_z(1.0) == pytest.approx(3.4770518, rel=1e-7)


def test_z_derivative_examples():
    z0 = math.sqrt(math.pi / 2)
    assert list(z_derivatives(0.0, 2).values) == pytest.approx([z0, 1.0, z0], rel=1e-15)
    assert z_derivatives(1.0, 1)[1] == 1 + mills_z(1.0)
    h = 1e-3
    for m in range(1, 5):
        fd = finite_difference(lambda t: z_derivatives(t, m - 1)[m - 1], 0.7, base_step=h)
        assert fd == pytest.approx(z_derivatives(0.7, 4)[m], rel=1e-6)


def test_moment_and_gamma_examples():
    assert gaussian_moment(4).raw == 3.0
    assert gaussian_moment(1).absolute == pytest.approx(0.7978845608028654, rel=1e-16)
    assert gaussian_moment(3).raw == 0.0
    assert half_integer_gamma(2) == 1.0
    assert half_integer_gamma(1) == pytest.approx(1.7724538509055159, rel=1e-16)
    assert half_integer_gamma(5) == pytest.approx(1.3293403881791372, rel=1e-16)


# quadrature

def test_quadrature_examples():
    assert integrate(lambda t: np.ones_like(t), 0.0, 1.0).value == pytest.approx(1.0, abs=1e-12)
    assert kernel_integral(1).value == pytest.approx(1.0, abs=1e-12)
    assert integrate(np.abs, -1.0, 1.0, [0.0]).value == pytest.approx(1.0, abs=1e-12)
    assert gaussian_expectation(lambda z: z * z).value == pytest.approx(1.0, abs=1e-10)
    assert gaussian_expectation(lambda z: z * np.sign(z), [0.0]).value == pytest.approx(
        0.7978845608, abs=1e-10)
    assert gaussian_expectation(lambda z: z).value == pytest.approx(0.0, abs=1e-12)


def test_sign_breakpoint_same_value():
    f = lambda t: np.sign(t) * phi(t)
    with_bp = integrate(f, -10.0, 10.0, [0.0])
    without = integrate(f, -10.0, 10.0)
    assert with_bp.value == pytest.approx(without.value, abs=1e-10)
    assert with_bp.converged and without.converged


@pytest.mark.parametrize("c", [0.3, 1.0, -2.0])
def test_declared_jump_uses_fewer_subdivisions(c):
    # An off-centre jump; a centred odd integrand cancels exactly on one panel.
    f = lambda t: np.sign(t - c) * phi(t)
    exact = normal_cdf(-10.0) - normal_cdf(c) + normal_sf(c) - normal_sf(10.0)
    with_bp = integrate(f, -10.0, 10.0, [c])
    without = integrate(f, -10.0, 10.0)
    assert with_bp.value == pytest.approx(exact, abs=1e-10)
    assert without.value == pytest.approx(exact, abs=1e-10)
    assert with_bp.subdivisions_used < without.subdivisions_used


# test functions

def test_ramp_examples():
    h = ramp_family(1, 1.0)
    assert h.deriv_eval(1, 0.5) == 0.5
    assert h.deriv_eval(1, 2.0) == 1.0
    assert h.lip_norm == 1.0
    h2 = ramp_family(2, 0.5)
    for b in (-0.5, 0.5):
        assert h2.deriv_eval(1, b, "left") == h2.deriv_eval(1, b, "right")
    a, u = 0.1, 0.6
    h3 = ramp_family(1, a)
    closed = (u / a) * (2 * normal_cdf(a / u) - 1)
    quad = gaussian_expectation(lambda z: z * h3.deriv_eval(1, u * z), [-a / u, a / u]).value
    assert h3.inner_oracle(0.0, u) == pytest.approx(closed, rel=1e-14)
    assert h3.inner_oracle(0.0, u) == pytest.approx(quad, abs=1e-9)


def test_abs_examples():
    assert abs_family(2).deriv_eval(1, -3.0) == 3.0
    for k in range(1, 17):
        h = abs_family(k)
        assert h.deriv_eval(k, 0.0, "right") - h.deriv_eval(k, 0.0, "left") == 2.0
    assert abs_family(3).inner_oracle(0.0, 0.8) == pytest.approx(0.7978845608, abs=1e-10)


def test_monomial_examples():
    h = monomial(1, 3)
    assert h.deriv_eval(3, 1.7) == 0.0 and h.lip_norm == 0.0
    assert all(monomial(0, 2).deriv_eval(1, x) == 1.0 for x in (-3.0, 0.0, 2.5))
    # 12x^2 at x = 2 is 48
    assert monomial(3, 5).deriv_eval(2, 2.0) == 48.0


def test_smooth_probe_examples():
    assert smooth_probe(1).lip_norm == 1.0
    assert smooth_probe(1)(0.4) == pytest.approx(math.sin(0.4))
    h = smooth_probe(2, omega=2.0, amplitude=3.0)
    assert h.deriv_eval(2, 0.0) == 0.0
    grid = np.linspace(-4, 4, 4001)
    assert np.max(np.abs(h.deriv_eval(2, grid))) == pytest.approx(3.0, rel=1e-5)


def test_family_fd_chain():
    for h in (ramp_family(3, 0.4), abs_family(3), smooth_probe(3, omega=1.3)):
        for j in range(1, h.k + 1):
            for x in (-1.7, -0.9, 0.55, 2.2):
                fd = finite_difference(lambda t: h.deriv_eval(j - 1, t), x)
                assert fd == pytest.approx(h.deriv_eval(j, x), abs=1e-8)


# solver

def test_nh_examples():
    assert expectation_nh(monomial(1, 2)) == pytest.approx(1.0, abs=1e-12)
    assert expectation_nh(abs_family(1)) == pytest.approx(gaussian_moment(1).absolute, rel=1e-13)
    assert expectation_nh(smooth_probe(1)) == pytest.approx(0.0, abs=1e-15)


def test_solve_f_examples():
    for x in (-2.0, 0.0, 1.5):
        assert solve_f(monomial(0, 1), x) == pytest.approx(-1.0, rel=1e-10)
    for x in (-1.0, 0.0, 2.0):
        assert solve_f(monomial(1, 2), x) == pytest.approx(-x, abs=1e-10)
    h = ramp_family(1, 1.0)
    nh = expectation_nh(h)
    assert max(abs(solve_f(h, x, nh=nh)) for x in np.linspace(-6, 6, 49)) <= 1.0


def test_solve_polynomial_examples():
    assert solve_polynomial([0, 1]) == [Fraction(-1)]
    assert solve_polynomial([0, 0, 1]) == [0, Fraction(-1)]
    assert solve_polynomial([0, 0, 0, 1]) == [Fraction(-2), 0, Fraction(-1)]


def test_semigroup_examples():
    for k in (1, 2, 3, 4):
        assert derivative_semigroup(abs_family(k), k, 0.0) == pytest.approx(-sharp_constant(k), abs=1e-12)
    assert derivative_semigroup(abs_family(1), 1, 0.0) == pytest.approx(-0.7978845608, abs=1e-10)
    h = smooth_probe(1)
    assert derivative_semigroup(h, 1, 0.3) == pytest.approx(
        finite_difference(lambda t: solve_f(h, t), 0.3), abs=1e-6)
    a = 0.5
    ref = -integrate(lambda u: (u / a) * (2 * normal_cdf(a / u) - 1), 0.0, 1.0).value
    h = ramp_family(1, a)
    oracle = derivative_semigroup(h, 1, 0.0, method="oracle")
    quad = derivative_semigroup(h, 1, 0.0, method="quadrature")
    assert oracle == pytest.approx(ref, abs=1e-12)
    assert oracle == pytest.approx(quad, abs=1e-9)


def test_daly_examples():
    for k in (1, 2, 3):
        h = abs_family(k)
        jump = derivative_daly(h, k, 0.0, "right") - derivative_daly(h, k, 0.0, "left")
        assert jump == pytest.approx(2.0, abs=1e-8)
    h = smooth_probe(1)
    x = 0.4
    fd2 = finite_difference(lambda t: solve_f(h, t), x, order=2, base_step=1e-2)
    assert derivative_daly(h, 1, x) == pytest.approx(fd2, abs=1e-5)
    h = ramp_family(1, 1.0)
    assert max(abs(derivative_daly(h, 1, x)) for x in np.linspace(-5, 5, 41)) <= 2.0


def test_finite_difference_examples():
    assert finite_difference(np.sin, 0.0) == pytest.approx(1.0, abs=1e-9)
    assert finite_difference(lambda t: t ** 3, 1.0, order=2) == pytest.approx(6.0, abs=1e-7)
    h = monomial(1, 2)
    assert finite_difference(lambda t: solve_f(h, t), 0.8) == pytest.approx(-1.0, abs=1e-7)


def test_sup_norm_examples():
    assert sup_norm_estimate(smooth_probe(1), 1, window=5.0, n_grid=101).value <= SQRT_2_OVER_PI + 1e-4
    assert sup_norm_estimate(monomial(0, 1), 0, window=3.0, n_grid=31).value == pytest.approx(1.0, rel=1e-9)
    assert sup_norm_estimate(abs_family(1), 2, window=4.0, n_grid=80).value <= 2 + 1e-4


# distributions

def test_distribution_examples():
    rad, two = rademacher(), twopoint_asym()
    assert [moment(rad, m) for m in range(1, 5)] == [0.0, 1.0, 0.0, 1.0]
    assert [moment(two, m) for m in (1, 2)] == [0.0, 1.0]
    assert moment(two, 3) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert [moment(point_mass(), m) for m in range(4)] == [1.0, 0.0, 0.0, 0.0]
    assert check_moment_match(rad, 3).fully_matched
    assert check_moment_match(rad, 4).matched[3] is False
    assert check_moment_match(two, 2).fully_matched
    assert not check_moment_match(two, 3).fully_matched


def test_convolution_examples():
    w2 = convolve_iid(rademacher(), 2)
    assert list(w2.values()) == pytest.approx([-math.sqrt(2), 0.0, math.sqrt(2)])
    assert w2.probs == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))
    w4 = convolve_iid(rademacher(), 4)
    assert w4.probs == tuple(Fraction(math.comb(4, i), 16) for i in range(5))
    assert convolve_iid(twopoint_asym(), 1) == twopoint_asym()
    assert expect_h(rademacher(), lambda x: x) == 0.0
    assert expect_h(convolve_iid(rademacher(), 8), lambda x: x ** 4) == pytest.approx(2.75, rel=1e-15)
    assert expect_h(point_mass(), lambda x: ramp_family(1, 1.0)(x)) == 0.0


def test_moment_identity_examples():
    ident = moment_identity_check(rademacher(), 3, 8)
    assert ident.lhs == 2.75 and ident.rhs == 2.75
    assert moment_identity_check(rademacher(), 3, 1).lhs == 1.0
    ident = moment_identity_check(twopoint_asym(), 2, 16)
    assert ident.rhs == pytest.approx(1 / (4 * math.sqrt(2)), rel=1e-15)
    assert ident.gap <= 1e-12


def test_lemma1_examples():
    assert lemma1_rhs(rademacher(), 3, 1.0) == pytest.approx(2 / 3, rel=1e-15)
    e1 = 2 * math.sqrt(2) / 3
    e3 = moment(twopoint_asym(), 3, absolute=True)
    assert lemma1_rhs(twopoint_asym(), 2, 1.0) == pytest.approx(e1 + e3 / 2, rel=1e-15)
    assert lemma1_rhs(twopoint_asym(), 2, 0.0) == 0.0
    assert lemma1_compare(ramp_family(2, 1.0), twopoint_asym(), 2, 16).satisfied
    h = smooth_probe(3)
    f_norm = sup_norm_estimate(h, 3).value
    scaled = []
    for n in (1, 4, 16, 64):
        cmp = lemma1_compare(h, rademacher(), 3, n, f_norm=f_norm)
        assert cmp.satisfied
        scaled.append(cmp.bound * n)
    assert max(scaled) == pytest.approx(min(scaled), rel=1e-12)


# experiments

def test_experiment_examples():
    rows = ex.cmd_constants(3).rows
    assert rows[0]["middle_constant"] == pytest.approx(0.7978845608, abs=1e-10)
    assert rows[0]["kernel_quadrature"] == pytest.approx(1.0, abs=1e-12)
    assert rows[1]["middle_constant"] == pytest.approx(0.6266570687, abs=1e-10)
    assert rows[2]["middle_constant"] == pytest.approx(0.5319230405, abs=1e-10)

    sharp = ex.cmd_sharpness(1)
    assert abs(abs(sharp.rows[-2]["value"]) - 0.79788) <= 5e-3
    assert sharp.rows[-1]["value"] == pytest.approx(-0.7978845608, abs=1e-8)
    assert ex.cmd_sharpness(4).rows[-1]["value"] == pytest.approx(-0.4699928015, abs=1e-9)

    jump = ex.cmd_jump(1)
    assert jump.rows[0]["value"] == pytest.approx(2.0, abs=1e-8)
    fd_row = next(r for r in jump.rows if r["kind"] == "fd" and r["eps"] == 1e-3)
    assert fd_row["value"] == pytest.approx(1000, rel=0.01)
    assert jump.rows[-1]["value"] == pytest.approx(-1.0, abs=0.05)


def test_experiment_moment_and_clt_rows():
    rows = ex.cmd_moments(3, "rademacher", [1, 8]).rows
    assert rows[0]["lhs"] == 1.0
    assert rows[1]["lhs"] == rows[1]["rhs"] == 2.75
    rows = ex.cmd_moments(2, "twopoint_asym", [16]).rows
    assert rows[0]["rhs"] == pytest.approx(0.1767767, abs=1e-7)
    assert ex.cmd_clt(3, "rademacher", "smooth_probe", [64]).passed
    assert ex.cmd_clt(2, "twopoint_asym", "ramp", [16]).passed


def test_experiment_bounds_and_solve():
    rows = {r["j"]: r for r in ex.cmd_bounds(1, "smooth_probe").rows}
    assert rows[1]["sup_norm"] <= 0.79788456
    rows = {r["j"]: r for r in ex.cmd_bounds(2, "ramp").rows}
    assert rows[3]["sup_norm"] <= 2
    rows = {r["j"]: r for r in ex.cmd_bounds(3, "smooth_probe").rows}
    assert rows[2]["sup_norm"] <= 1 / 3
    assert ex.cmd_solve("monomial", {"p": 1, "k": 1}, 0, [2.0], "two-sided").rows[0]["value"] == pytest.approx(-2.0)
    with pytest.raises(KinkError):
        ex.cmd_solve("abs", {"k": 1}, 1, [0.0], "two-sided")
    h = smooth_probe(1)
    val = ex.cmd_solve("smooth_probe", {"k": 1}, 1, [0.0], "two-sided").rows[0]["value"]
    assert val == pytest.approx(finite_difference(lambda t: solve_f(h, t), 0.0), abs=1e-6)
