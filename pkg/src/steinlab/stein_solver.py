"""Solution of the standard normal Stein equation ``f' - x f = h - Nh``.

Three independent routes to ``f_h`` and its derivatives:

* :func:`solve_f` integrates the solution formula directly (order 0);
* :func:`derivative_semigroup` uses the Ornstein-Uhlenbeck semigroup
  representation for orders ``1..k``;
* :func:`derivative_daly` expresses order ``k+1`` through ``Z = Phi/phi``.

:func:`solve_polynomial` is an exact rational solver for polynomial ``h``
that serves as an oracle for the numerical routes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainOverflow, InvalidParameter
from .normal_kernel import half_integer_gamma, normal_moment_exact, phi, z_derivative_arrays, z_derivatives
from .quadrature import DEFAULT_SPEC, IntegrationResult, QuadratureSpec, gaussian_expectation, integrate
from .test_functions import TestFunction

X_LIMIT = 13.0
DALY_RADIUS = 13.0


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or abs(x) > X_LIMIT:
        raise DomainOverflow(f"|x| must not exceed {X_LIMIT}, got {x}")
    return x


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def sharp_constant(k: int) -> float:
    """``Gamma((k+1)/2) / (sqrt(2) Gamma(k/2 + 1))``."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    return half_integer_gamma(k + 1) / (math.sqrt(2.0) * half_integer_gamma(k + 2))


def stein_factors(k: int) -> tuple[float, float, float]:
    """Constants bounding orders k-1, k and k+1 by ``||h^(k)||``."""
    return 1.0 / k, sharp_constant(k), 2.0


def kernel_integral_closed_form(k: int) -> float:
    return 0.5 * math.sqrt(math.pi) * half_integer_gamma(k + 1) / half_integer_gamma(k + 2)


def kernel_integral(k: int, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegrationResult:
    """``int_0^1 (1 - u^2)^((k-1)/2) du`` by adaptive quadrature."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    power = 0.5 * (k - 1)
    return integrate(lambda u: (1.0 - u * u) ** power, 0.0, 1.0, (), spec)


# ---------------------------------------------------------------------------
# order 0
# ---------------------------------------------------------------------------

def expectation_nh(h: TestFunction, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``Nh = E[h(Z)]``."""
    return gaussian_expectation(lambda z: h.deriv_eval(0, z), h.kinks, spec).value


def solve_f(h: TestFunction, x: float, spec: QuadratureSpec = DEFAULT_SPEC,
            nh: float | None = None) -> float:
    """``f_h(x)`` from the integral solution formula.

    For ``x > 0`` the equivalent right-tail form is used, which avoids the
    cancellation of the left integral against ``Nh``. The Gaussian factor is
    folded into the integrand as ``exp((x^2 - t^2)/2)`` so no large
    prefactor multiplies the quadrature error.
    """
    x = _check_x(x)
    if nh is None:
        nh = expectation_nh(h, spec)
    reach = spec.gauss_truncation_radius + abs(x)

    def integrand(t):
        return (h.deriv_eval(0, t) - nh) * np.exp(0.5 * (x - t) * (x + t))

    if x <= 0:
        res = integrate(integrand, -reach, x, h.kinks, spec)
        return res.value
    res = integrate(integrand, x, reach, h.kinks, spec)
    return -res.value


def _poly_mul_x(p: Sequence[Fraction]) -> list[Fraction]:
    return [Fraction(0)] + list(p)


def _poly_sub(p, q) -> list[Fraction]:
    n = max(len(p), len(q))
    p = list(p) + [Fraction(0)] * (n - len(p))
    q = list(q) + [Fraction(0)] * (n - len(q))
    return [a - b for a, b in zip(p, q)]


def _poly_derivative(p) -> list[Fraction]:
    return [i * c for i, c in enumerate(p)][1:] or [Fraction(0)]


def _trim(p) -> list[Fraction]:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def stein_operator(f: Sequence) -> list[Fraction]:
    """``f' - x f`` for an exact polynomial (ascending coefficients)."""
    f = [Fraction(c) for c in f]
    return _trim(_poly_sub(_poly_derivative(f), _poly_mul_x(f)))


def normal_expectation_exact(coeffs: Sequence) -> Fraction:
    return sum((Fraction(c) * normal_moment_exact(m) for m, c in enumerate(coeffs)), Fraction(0))


def solve_polynomial(coeffs: Sequence) -> list[Fraction]:
    """Exact polynomial solution of the Stein equation for polynomial ``h``.

    ``coeffs`` are ascending coefficients of ``h``. The result has degree
    ``deg h - 1``; polynomial solutions are bounded-growth, so this is the
    solution given by the integral formula.

    >>> solve_polynomial([0, 0, 0, 1])
    [Fraction(-2, 1), Fraction(0, 1), Fraction(-1, 1)]
    """
    if len(coeffs) == 0:
        raise InvalidParameter("empty coefficient list")
    c = _trim(Fraction(v) for v in coeffs)
    if len(c) - 1 > 30:
        raise InvalidParameter("degree must not exceed 30")
    d = len(c) - 1
    if d == 0:
        return [Fraction(0)]
    g = list(c)
    g[0] -= normal_expectation_exact(c)
    # coefficient of x^m in f' - x f: (m+1) b_{m+1} - b_{m-1} = g_m
    b = [Fraction(0)] * (d + 1)
    b[d - 1] = -g[d]
    for m in range(d - 1, 0, -1):
        b[m - 1] = (m + 1) * b[m + 1] - g[m]
    if b[1] != g[0]:
        raise ArithmeticError("polynomial Stein solve is inconsistent")
    return b[:d]


def poly_eval(coeffs: Sequence, x):
    out = np.zeros_like(np.asarray(x, float))
    for c in reversed(list(coeffs)):
        out = out * x + float(c)
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# orders 1..k: semigroup representation
# ---------------------------------------------------------------------------

def _inner_by_quadrature(h: TestFunction, j: int, c: float, u: float,
                         spec: QuadratureSpec) -> float:
    bps = [(t0 - c) / u for t0 in h.kinks]
    return gaussian_expectation(lambda z: z * h.deriv_eval(j, c + u * z), bps, spec).value


def derivative_semigroup(h: TestFunction, j: int, x: float,
                         spec: QuadratureSpec = DEFAULT_SPEC,
                         method: str = "auto") -> float:
    """``f_h^(j)(x)`` for ``1 <= j <= k`` via the semigroup representation.

    After ``u = sqrt(1 - e^{-2s})`` the representation reads

        f^(j)(x) = -int_0^1 (1-u^2)^((j-1)/2) E[Z h^(j)(sqrt(1-u^2) x + uZ)] du

    with a bounded integrand. ``method`` selects the inner expectation:
    ``"oracle"`` (closed form), ``"quadrature"``, or ``"auto"``.
    """
    if not 1 <= j <= h.k:
        raise InvalidParameter(f"order {j} outside 1..{h.k}")
    if method not in ("auto", "oracle", "quadrature"):
        raise InvalidParameter(f"unknown method {method!r}")
    x = _check_x(x)
    power = 0.5 * (j - 1)
    use_oracle = method == "oracle" or (method == "auto" and h.has_inner(j))

    if use_oracle:
        def integrand(u):
            s = np.sqrt(1.0 - u * u)
            return -(s ** (j - 1)) * h.inner_oracle(s * x, u, j)
    else:
        def integrand(u):
            out = np.empty_like(u)
            for i, ui in enumerate(u):
                s = math.sqrt(1.0 - ui * ui)
                out[i] = -(1.0 - ui * ui) ** power * _inner_by_quadrature(h, j, s * x, ui, spec)
            return out

    return integrate(integrand, 0.0, 1.0, (), spec).value


# ---------------------------------------------------------------------------
# order k+1: representation through Z = Phi/phi
# ---------------------------------------------------------------------------

def derivative_daly(h: TestFunction, k: int, x: float, side: str = "two-sided",
                    spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``f_h^(k+1)(x)`` from

        h^(k)(x) - Z^(k+1)(-x) A_k(x)/(k-1)! - Z^(k+1)(x) B_k(x)/(k-1)!

    where ``A_k`` and ``B_k`` integrate ``h^(k) phi Z^(k-1)`` to the left
    and (reflected) to the right of ``x``. Only the ``h^(k)(x)`` term
    depends on ``side``, so one-sided limits at a jump are available.
    """
    if not 1 <= k <= h.k:
        raise InvalidParameter(f"k must lie in 1..{h.k}")
    x = _check_x(x)
    hk = h.deriv_eval(k, x, side)
    fact = math.factorial(k - 1)
    z_plus = z_derivatives(x, k + 1)[k + 1]
    z_minus = z_derivatives(-x, k + 1)[k + 1]
    reach = DALY_RADIUS + abs(x)

    def a_integrand(t):
        return h.deriv_eval(k, t) * phi(t) * z_derivative_arrays(t, k - 1)[k - 1]

    def b_integrand(t):
        return h.deriv_eval(k, t) * phi(t) * z_derivative_arrays(-t, k - 1)[k - 1]

    a_k = integrate(a_integrand, -reach, x, h.kinks, spec.scaled(z_minus / fact)).value
    b_k = integrate(b_integrand, x, reach, h.kinks, spec.scaled(z_plus / fact)).value
    return hk - z_minus * a_k / fact - z_plus * b_k / fact


# ---------------------------------------------------------------------------
# cross-validation and sup norms
# ---------------------------------------------------------------------------

def finite_difference(f: Callable[[float], float], x: float, order: int = 1,
                      base_step: float = 1e-3) -> float:
    """Central difference of order 1 or 2 with one Richardson step."""
    if order not in (1, 2):
        raise InvalidParameter("order must be 1 or 2")

    def central(step):
        if order == 1:
            return (f(x + step) - f(x - step)) / (2.0 * step)
        return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)

    coarse = central(base_step)
    fine = central(0.5 * base_step)
    return (4.0 * fine - coarse) / 3.0


@dataclass(frozen=True)
class SupNormEstimate:
    value: float
    argmax_location: float
    grid_points: int
    refinement_levels: int
    stable: bool


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get("STEINLAB_THREADS", "1")))
    except ValueError:
        return 1


def derivative_evaluator(h: TestFunction, j: int, spec: QuadratureSpec = DEFAULT_SPEC
                         ) -> Callable[[float, str], float]:
    """Pick the representation for order ``j``: solve_f, semigroup or Daly."""
    if j == 0:
        nh = expectation_nh(h, spec)
        return lambda x, side="two-sided": solve_f(h, x, spec, nh)
    if 1 <= j <= h.k:
        return lambda x, side="two-sided": derivative_semigroup(h, j, x, spec)
    if j == h.k + 1:
        return lambda x, side="two-sided": derivative_daly(h, h.k, x, side, spec)
    raise InvalidParameter(
        f"order {j} unavailable for k={h.k}: f_h^(j) need not exist beyond k+1")


def sup_norm_estimate(h: TestFunction, j: int, window: float = 10.0,
                      spec: QuadratureSpec = DEFAULT_SPEC, *, n_grid: int = 401,
                      max_levels: int = 8, rel_change: float = 1e-6,
                      workers: int | None = None) -> SupNormEstimate:
    """Estimate ``sup |f_h^(j)|`` over ``[-window, window]``.

    A uniform grid is searched first, then the best point is refined by
    shrinking the local spacing fourfold per level until the maximum moves
    by at most ``rel_change`` (relative) or ``max_levels`` is reached. At
    jumps of ``h^(k)`` both one-sided values of order ``k+1`` are used.
    """
    evaluate = derivative_evaluator(h, j, spec)
    one_sided = j == h.k + 1
    jump_set = {float(t) for t in h.jumps} if one_sided else set()
    n_workers = _workers(workers)

    def score(x: float) -> float:
        if x in jump_set:
            return max(abs(evaluate(x, "left")), abs(evaluate(x, "right")))
        return abs(evaluate(x))

    def scan(points):
        points = sorted(set(float(p) for p in points))
        if n_workers > 1:
            with ThreadPoolExecutor(n_workers) as pool:
                vals = list(pool.map(score, points))
        else:
            vals = [score(p) for p in points]
        i = int(np.argmax(vals))
        return points[i], vals[i], len(points)

    grid = list(np.linspace(-window, window, n_grid))
    grid += [t for t in jump_set if -window <= t <= window]
    best_x, best, count = scan(grid)
    step = 2.0 * window / (n_grid - 1)
    stable = False
    levels = 0
    while levels < max_levels and not stable:
        levels += 1
        local = best_x + step * np.linspace(-1.0, 1.0, 9)
        local = local[(local >= -window) & (local <= window)]
        x_new, v_new, n = scan(local)
        count += n
        change = v_new - best
        if v_new > best:
            best_x, best = x_new, v_new
        stable = abs(change) <= rel_change * abs(best) or best == 0.0
        step /= 4.0
    return SupNormEstimate(best, best_x, count, levels, stable)
