"""Moment/cumulant conversion and a numerical check of the cumulant expansion.

For a symmetric random variable X and a smooth F::

    E{X F(X)} = sum_{r=0}^{q} K_{r+1} / r! * E{F^(r)(X)} + eps_q,
    |eps_q| <= C_q * sup|F^(q+1)| * E|X|^(q+2)

The constant C_q is taken to be 1, so the bound is reported rather than
enforced.  The supremum runs over the convex hull of the support of X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .ensemble import EntryDistribution

__all__ = [
    "LAWS",
    "MomentVector",
    "CumulantVector",
    "Law",
    "TestFunction",
    "ExpansionCheck",
    "cumulants_from_moments",
    "monomial",
    "sine",
    "imaginary_exponential",
    "function_library",
    "expansion_check",
    "entry_moments",
    "entry_cumulants",
]

LAWS = ("gaussian", "rademacher", "uniform")
_NODES = 80


@dataclass(frozen=True)
class MomentVector:
    mu2: float
    mu4: float
    mu6: float

    def __post_init__(self):
        if not self.mu2 > 0.0:
            raise ValueError(f"mu2 must be positive, got {self.mu2}")
        # relative slack for values computed in floating point
        slack = 1e-12
        if self.mu4 < self.mu2**2 * (1 - slack):
            raise ValueError(f"mu4={self.mu4} < mu2^2={self.mu2**2}")
        if self.mu6 < self.mu4 * self.mu2 * (1 - slack):
            raise ValueError(f"mu6={self.mu6} < mu4*mu2={self.mu4 * self.mu2}")


@dataclass(frozen=True)
class CumulantVector:
    K2: float
    K4: float
    K6: float

    def K(self, r: int) -> float:
        """r-th cumulant; odd ones vanish by symmetry."""
        if r % 2 == 1:
            return 0.0
        return {2: self.K2, 4: self.K4, 6: self.K6}[r]


def cumulants_from_moments(m: MomentVector) -> CumulantVector:
    return CumulantVector(
        m.mu2,
        m.mu4 - 3.0 * m.mu2**2,
        m.mu6 - 15.0 * m.mu4 * m.mu2 + 30.0 * m.mu2**3,
    )


# -- laws ---------------------------------------------------------------------


@dataclass(frozen=True)
class Law:
    kind: str
    v: float = 1.0

    def __post_init__(self):
        if self.kind not in LAWS:
            raise ValueError(f"unknown law {self.kind!r}; expected one of {LAWS}")
        if not self.v > 0.0:
            raise ValueError("v must be positive")

    @property
    def support_radius(self) -> float:
        if self.kind == "rademacher":
            return self.v
        if self.kind == "uniform":
            return math.sqrt(3.0) * self.v
        return math.inf

    def moments(self) -> MomentVector:
        d = EntryDistribution(self.kind, self.v)
        return MomentVector(d.v2, d.V4, d.V6)

    def cumulants(self) -> CumulantVector:
        return cumulants_from_moments(self.moments())

    def abs_moment(self, k: float) -> float:
        """E|X|^k in closed form."""
        if self.kind == "rademacher":
            return self.v**k
        if self.kind == "uniform":
            return self.support_radius**k / (k + 1.0)
        return self.v**k * 2.0 ** (k / 2.0) * special.gamma((k + 1.0) / 2.0) / math.sqrt(math.pi)

    def expect(self, f: Callable[[np.ndarray], np.ndarray]):
        """E f(X): two-point enumeration or 80-node Gauss rule."""
        if self.kind == "rademacher":
            x = np.array([-self.v, self.v])
            w = np.array([0.5, 0.5])
        elif self.kind == "uniform":
            t, w = np.polynomial.legendre.leggauss(_NODES)
            x = self.support_radius * t
            w = 0.5 * w
        else:
            t, w = np.polynomial.hermite_e.hermegauss(_NODES)
            x = self.v * t
            w = w / math.sqrt(2.0 * math.pi)
        out = np.asarray(f(x)) @ w
        return complex(out) if np.iscomplexobj(out) else float(out)


# -- test functions -----------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """F with closed-form derivatives and derivative suprema on [-R, R]."""

    name: str
    derivative: Callable[[int], Callable[[np.ndarray], np.ndarray]]
    sup_derivative: Callable[[int, float], float]
    max_order: int | None = None

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.derivative(0)(x)


def monomial(k: int) -> TestFunction:
    if not 0 <= k <= 8:
        raise ValueError("monomial degree must be in 0..8")

    def deriv(r):
        if r > k:
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        c = math.factorial(k) / math.factorial(k - r)
        return lambda x: c * np.asarray(x, dtype=float) ** (k - r)

    def sup(r, radius):
        if r > k:
            return 0.0
        c = math.factorial(k) / math.factorial(k - r)
        if r == k:
            return c
        return math.inf if math.isinf(radius) else c * radius ** (k - r)

    return TestFunction(f"x^{k}", deriv, sup)


def _sup_abs_sin(phase, lo, hi):
    """max |sin(u + phase)| for u in [lo, hi]."""
    if math.isinf(lo) or math.isinf(hi) or hi - lo >= math.pi:
        return 1.0
    # peaks of |sin| sit at u + phase = pi/2 + k pi
    k = math.ceil((lo + phase - 0.5 * math.pi) / math.pi)
    if 0.5 * math.pi + k * math.pi - phase <= hi:
        return 1.0
    return max(abs(math.sin(lo + phase)), abs(math.sin(hi + phase)))


def sine(a: float = 1.0) -> TestFunction:
    def deriv(r):
        return lambda x: a**r * np.sin(a * np.asarray(x, dtype=float) + 0.5 * r * math.pi)

    def sup(r, radius):
        span = abs(a) * radius
        phase = 0.5 * r * math.pi
        return abs(a) ** r * _sup_abs_sin(phase, -span, span)

    return TestFunction(f"sin({a:g}x)", deriv, sup)


def imaginary_exponential(a: float = 1.0) -> TestFunction:
    def deriv(r):
        return lambda x: (1j * a) ** r * np.exp(1j * a * np.asarray(x, dtype=float))

    return TestFunction(f"exp(i{a:g}x)", deriv, lambda r, radius: abs(a) ** r)


def function_library() -> list[TestFunction]:
    return [monomial(k) for k in range(9)] + [sine(1.0), sine(2.5), imaginary_exponential(1.0), imaginary_exponential(0.7)]


# -- expansion check ------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionCheck:
    law: str
    function: str
    q: int
    lhs: complex
    rhs: complex
    gap: float
    bound: float

    @property
    def within_bound(self) -> bool:
        # a zero bound (F^(q+1) == 0) still has to absorb rounding in lhs
        return self.gap <= self.bound + 1e-12 * max(1.0, abs(self.lhs))


def expansion_check(law: Law | str, F: TestFunction, q: int) -> ExpansionCheck:
    if isinstance(law, str):
        law = Law(law)
    if q not in (1, 3, 5):
        raise ValueError(f"q must be 1, 3 or 5, got {q}")
    if F.max_order is not None and F.max_order < q + 1:
        raise ValueError(f"{F.name}: derivative of order {q + 1} unavailable")
    K = law.cumulants()
    f0 = F.derivative(0)
    lhs = law.expect(lambda x: x * f0(x))
    rhs = 0.0
    for r in range(q + 1):
        k = K.K(r + 1)
        if k != 0.0:
            rhs = rhs + k / math.factorial(r) * law.expect(F.derivative(r))
    gap = abs(lhs - rhs)
    sup = F.sup_derivative(q + 1, law.support_radius)
    bound = float(sup * law.abs_moment(q + 2)) if sup > 0.0 else 0.0
    return ExpansionCheck(law.kind, F.name, q, lhs, rhs, gap, bound)


# -- ensemble entries -----------------------------------------------------------


def entry_moments(v2: float, V4: float, V6: float, psi_value: float, b: float, diagonal: bool = False) -> MomentVector:
    """Moments of H = a d / sqrt(b) with P(d = 1) = psi_value.

    Diagonal entries carry ``a`` scaled by sqrt(2).
    """
    if not 0.0 < psi_value <= 1.0:
        raise ValueError("psi_value must lie in (0, 1]")
    s = 2.0 if diagonal else 1.0
    return MomentVector(
        s * v2 * psi_value / b,
        s**2 * V4 * psi_value / b**2,
        s**3 * V6 * psi_value / b**3,
    )


def entry_cumulants(v2: float, V4: float, V6: float, psi_value: float, b: float, diagonal: bool = False) -> CumulantVector:
    return cumulants_from_moments(entry_moments(v2, V4, V6, psi_value, b, diagonal))
