"""Finite lattice distributions and exact i.i.d. convolution.

A :class:`LatticeDistribution` puts mass ``probs[j]`` on
``scale * (offset + j * step)`` where ``scale = sqrt(scale_sq)``. When
``offset``, ``step``, ``probs`` and ``scale_sq`` are rationals the
distribution is in exact mode: convolutions and even moments are carried
out in rational arithmetic, and odd moments pick up a single rounded
``sqrt(scale_sq)``. ``W_n = n^{-1/2} sum X_i`` keeps the integer lattice
data and divides ``scale_sq`` by ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import InvalidParameter, MomentMismatch, SupportTooLarge
from .normal_kernel import gaussian_moment
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .stein_solver import expectation_nh, sup_norm_estimate
from .test_functions import TestFunction

SUPPORT_CAP = 200_000
# Exact rational convolution is kept up to this many atoms.
EXACT_CAP = 5_000
MATCH_TOL = 1e-12


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


@dataclass(frozen=True)
class LatticeDistribution:
    offset: object
    step: object
    probs: tuple
    scale_sq: object = 1
    name: str = ""

    def __post_init__(self):
        probs = tuple(self.probs)
        if not probs:
            raise InvalidParameter("empty probability vector")
        exact = (_is_exact(self.offset) and _is_exact(self.step)
                 and _is_exact(self.scale_sq) and all(map(_is_exact, probs)))
        if exact:
            probs = tuple(Fraction(p) for p in probs)
            for attr in ("offset", "step", "scale_sq"):
                object.__setattr__(self, attr, Fraction(getattr(self, attr)))
            total_ok = sum(probs) == 1
        else:
            probs = tuple(float(p) for p in probs)
            for attr in ("offset", "step", "scale_sq"):
                object.__setattr__(self, attr, float(getattr(self, attr)))
            total_ok = abs(math.fsum(probs) - 1.0) <= 1e-12
        if self.step <= 0 or self.scale_sq <= 0:
            raise InvalidParameter("step and scale must be positive")
        if any(p < 0 for p in probs) or not any(p > 0 for p in probs):
            raise InvalidParameter("probabilities must be non-negative and not all zero")
        if not total_ok:
            raise InvalidParameter("probabilities must sum to 1")
        object.__setattr__(self, "probs", probs)

    @property
    def exact(self) -> bool:
        return isinstance(self.probs[0], Fraction)

    @property
    def scale(self) -> float:
        return math.sqrt(self.scale_sq)

    @property
    def size(self) -> int:
        return len(self.probs)

    def lattice_points(self) -> list:
        """Unscaled atoms ``offset + j * step`` (exact in exact mode)."""
        return [self.offset + j * self.step for j in range(self.size)]

    def values(self) -> np.ndarray:
        pts = np.array([float(p) for p in self.lattice_points()])
        return self.scale * pts

    def weights(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def to_float(self) -> "LatticeDistribution":
        return LatticeDistribution(float(self.offset), float(self.step),
                                   tuple(float(p) for p in self.probs), float(self.scale_sq),
                                   self.name)


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------

def rademacher() -> LatticeDistribution:
    return LatticeDistribution(-1, 2, (Fraction(1, 2), Fraction(1, 2)), 1, "rademacher")


def twopoint_asym(p: Fraction = Fraction(1, 3)) -> LatticeDistribution:
    """Mean 0, variance 1: ``sqrt(q/p)`` with probability p, ``-sqrt(p/q)`` otherwise.

    For rational ``p = a/b`` the atoms are ``(-a, b - a)`` times
    ``1/sqrt(a(b-a))``, which keeps the lattice data integral.
    """
    p = Fraction(p)
    if not 0 < p < 1:
        raise InvalidParameter("p must lie in (0, 1)")
    a, b = p.numerator, p.denominator
    return LatticeDistribution(-a, b, (1 - p, p), Fraction(1, a * (b - a)), "twopoint_asym")


def point_mass(at: Fraction = Fraction(0)) -> LatticeDistribution:
    return LatticeDistribution(Fraction(at), 1, (Fraction(1),), 1, "point_mass")


BUILTINS = {"rademacher": rademacher, "twopoint_asym": twopoint_asym}


def builtin(name: str) -> LatticeDistribution:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise InvalidParameter(f"unknown distribution {name!r}; choose from {sorted(BUILTINS)}")


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    p: int
    matched: tuple[bool, ...]  # entry m-1 refers to order m
    raw_moments: tuple[float, ...]  # entry m refers to order m, from 0
    abs_moments: tuple[float, ...]

    @property
    def fully_matched(self) -> bool:
        return all(self.matched)


def _exact_moment(d: LatticeDistribution, m: int, absolute: bool) -> float:
    pts = d.lattice_points()
    s = sum((p * (abs(x) if absolute else x) ** m for p, x in zip(d.probs, pts)), Fraction(0))
    s *= d.scale_sq ** (m // 2)
    return float(s) * d.scale if m % 2 else float(s)


def moment(d: LatticeDistribution, m: int, absolute: bool = False) -> float:
    if d.exact:
        return _exact_moment(d, m, absolute)
    v = d.values()
    v = np.abs(v) if absolute else v
    return math.fsum(d.weights() * v ** m)


def moments(d: LatticeDistribution, m_max: int) -> MomentReport:
    """Raw and absolute moments of orders ``0..m_max``; matching flags to ``m_max``."""
    if not 0 <= m_max <= 20:
        raise InvalidParameter("m_max must lie in [0, 20]")
    raw = tuple(moment(d, m) for m in range(m_max + 1))
    ab = tuple(moment(d, m, absolute=True) for m in range(m_max + 1))
    matched = tuple(abs(raw[m] - gaussian_moment(m).raw) <= MATCH_TOL for m in range(1, m_max + 1))
    return MomentReport(m_max, matched, raw, ab)


def check_moment_match(d: LatticeDistribution, p: int) -> MomentReport:
    """Whether ``E[X^m] = E[Z^m]`` for ``m = 1..p``."""
    if not 0 <= p <= 10:
        raise InvalidParameter("p must lie in [0, 10]")
    return moments(d, p)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _conv_exact(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _conv_float(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Direct convolution keeps tail masses accurate; FFT only for huge supports.
    if a.size * b.size <= 100_000_000:
        return np.convolve(a, b)
    out = fftconvolve(a, b)
    # Entries under the FFT round-off floor are noise; zero them rather than
    # clipping, which would bias far-tail moments upward.
    floor = 1e3 * np.finfo(float).eps * float(out.max())
    out[out < floor] = 0.0
    return out


def _power(base, n, mul):
    result = None
    while n:
        if n & 1:
            result = base if result is None else mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def convolve_iid(d: LatticeDistribution, n: int) -> LatticeDistribution:
    """Law of ``W_n = n^{-1/2}(X_1 + ... + X_n)`` by repeated squaring."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    size = n * (d.size - 1) + 1
    if size > SUPPORT_CAP:
        raise SupportTooLarge(f"support of {size} atoms exceeds cap {SUPPORT_CAP}")
    if n == 1:
        return d
    scale_sq = d.scale_sq / n
    if d.exact and size <= EXACT_CAP:
        denom = math.lcm(*(p.denominator for p in d.probs))
        ints = [int(p * denom) for p in d.probs]
        counts = _power(ints, n, _conv_exact)
        total = denom ** n
        probs = tuple(Fraction(c, total) for c in counts)
        return LatticeDistribution(n * d.offset, d.step, probs, scale_sq, d.name)
    w = _power(d.weights(), n, _conv_float)
    w = w / math.fsum(w)
    return LatticeDistribution(n * float(d.offset), float(d.step), tuple(w), float(scale_sq), d.name)


def expect_h(d: LatticeDistribution, g: Callable) -> float:
    """``E[g(X)]`` with compensated summation; ``g`` may be vectorized or scalar."""
    v = d.values()
    try:
        gv = np.asarray(g(v), dtype=float)
        if gv.shape != v.shape:
            raise ValueError
    except (TypeError, ValueError):
        gv = np.array([g(float(t)) for t in v])
    return math.fsum(d.weights() * gv)


# ---------------------------------------------------------------------------
# moment identity and the i.i.d. bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentIdentity:
    lhs: float
    rhs: float
    gap: float


def moment_identity_check(d: LatticeDistribution, p: int, n: int) -> MomentIdentity:
    """Compare ``E[W_n^(p+1)]`` with ``E[Z^(p+1)] + (E[X^(p+1)] - E[Z^(p+1)]) / n^((p-1)/2)``."""
    report = check_moment_match(d, p)
    if not report.fully_matched:
        raise MomentMismatch(f"moments of {d.name or 'X'} do not match N(0,1) up to order {p}")
    w = convolve_iid(d, n)
    lhs = moment(w, p + 1)
    ez = gaussian_moment(p + 1).raw
    rhs = ez + (moment(d, p + 1) - ez) / n ** ((p - 1) / 2)
    return MomentIdentity(lhs, rhs, abs(lhs - rhs))


def lemma1_rhs(d: LatticeDistribution, p: int, f_norm: float) -> float:
    """``f_norm * (E|X|^(p-1)/(p-1)! + E|X|^(p+1)/p!)``; the caller divides by ``n^((p-1)/2)``."""
    if p < 2:
        raise InvalidParameter("p must be >= 2")
    if f_norm < 0:
        raise InvalidParameter("f_norm must be non-negative")
    bracket = (moment(d, p - 1, absolute=True) / math.factorial(p - 1)
               + moment(d, p + 1, absolute=True) / math.factorial(p))
    return f_norm * bracket


@dataclass(frozen=True)
class Lemma1Comparison:
    lhs: float
    bound: float
    satisfied: bool
    f_norm: float


def lemma1_compare(h: TestFunction, d: LatticeDistribution, p: int, n: int,
                   spec: QuadratureSpec = DEFAULT_SPEC, *,
                   f_norm: Optional[float] = None, nh: Optional[float] = None,
                   tol: float = 1e-8) -> Lemma1Comparison:
    """``|E h(W_n) - Nh|`` against the moment bound built on ``||f_h^(p)||``.

    ``f_norm`` and ``nh`` may be supplied to reuse values across ``n``.
    """
    if h.k != p:
        raise InvalidParameter(f"test function must have k = p = {p}, got k = {h.k}")
    if not check_moment_match(d, p).fully_matched:
        raise MomentMismatch(f"moments of {d.name or 'X'} do not match N(0,1) up to order {p}")
    w = convolve_iid(d, n)
    if nh is None:
        nh = expectation_nh(h, spec)
    if f_norm is None:
        f_norm = sup_norm_estimate(h, p, spec=spec).value
    lhs = abs(expect_h(w, lambda x: h.deriv_eval(0, x)) - nh)
    bound = lemma1_rhs(d, p, f_norm) / n ** ((p - 1) / 2)
    return Lemma1Comparison(lhs, bound, lhs <= bound + tol, f_norm)
