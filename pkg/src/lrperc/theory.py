"""Closed-form predictions: w(z), the semicircle, Delta, Q, T, Xi and B.

Conventions
-----------
``w(z)`` is the Herglotz root of ``v^2 w^2 + z w + 1 = 0``.  The leading
covariance term is::

    T(z1, z2) = Q(z1, z2) + 2 Delta w1^3 w2^3 / ((1 - v^2 w1^2)(1 - v^2 w2^2))
    Q(z1, z2) = v^2 w1^2 w2^2 / (pi (1 - v^2 w1^2)(1 - v^2 w2^2))
                * int psi_tilde(p) / (1 - v^2 w1 w2 psi_tilde(p))^2 dp

and ``xi(l1, l2) = -1/4 sum_{d1, d2 = +-1} d1 d2 T(l1 + i d1 0, l2 + i d2 0)``,
the density-density correlation with the 1/(Nb) prefactor removed.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .ensemble import EntryDistribution
from .profiles import Profile, ProfileError, expansion_data, make_profile, profile_moments
from .quadrature import integrate, integrate_halfline

__all__ = [
    "TheoryContext",
    "BoundaryValue",
    "DeltaValues",
    "TComparison",
    "ExponentFit",
    "OutsideDomainWarning",
    "FormDiscrepancyWarning",
    "solve_w",
    "semicircle_density",
    "semicircle_cdf",
    "w_boundary",
    "compute_delta",
    "compute_Q",
    "compute_T",
    "compare_T_forms",
    "compute_xi",
    "xi_amplitude",
    "compute_B",
    "B_closed_form",
    "fit_scaling_exponent",
    "fit_power_law",
]

EPS_MIN = 1e-8
_INDICATOR_CUT = 2.0 * math.pi * 2000


class OutsideDomainWarning(UserWarning):
    """A spectral parameter lies outside |Im z| >= 2v + 1."""


class FormDiscrepancyWarning(UserWarning):
    """The rewritten form of T differs from the canonical one."""


@dataclass(frozen=True)
class TheoryContext:
    v: float = 1.0
    profile: Profile = field(default_factory=lambda: make_profile("gaussian"))
    dist: str = "gaussian"

    def __post_init__(self):
        if not self.v > 0.0:
            raise ValueError(f"v must be positive, got {self.v}")
        EntryDistribution(self.dist, self.v)  # validates the kind

    @property
    def eta(self) -> float:
        return 2.0 * self.v + 1.0

    @property
    def v2(self) -> float:
        return self.v * self.v

    @property
    def V4(self) -> float:
        return EntryDistribution(self.dist, self.v).V4

    @functools.cached_property
    def moments(self):
        return profile_moments(self.profile)

    @functools.cached_property
    def expansion(self):
        try:
            return expansion_data(self.profile)
        except ProfileError:
            return None


@dataclass(frozen=True)
class BoundaryValue:
    lam: float
    tau: float
    rho: float
    side: int

    @property
    def w(self) -> complex:
        return complex(self.tau, self.side * self.rho)


@dataclass(frozen=True)
class DeltaValues:
    delta: float
    delta_band: float


# -- w and the semicircle ---------------------------------------------------


def solve_w(ctx_or_v, z):
    """Herglotz solution of ``w = 1 / (-z - v^2 w)``; vectorized over z.

    The root pair has product ``1/v^2``; the larger root is formed without
    cancellation and the smaller one as its reciprocal partner.
    """
    v = ctx_or_v.v if isinstance(ctx_or_v, TheoryContext) else float(ctx_or_v)
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag == 0.0):
        raise ValueError("z must be non-real")
    v2 = v * v
    root = np.sqrt(z_arr * z_arr - 4.0 * v2)
    root = np.where((z_arr.conj() * root).real >= 0.0, root, -root)
    q = -0.5 * (z_arr + root)
    big = q / v2
    small = 1.0 / q
    w = np.where(big.imag * z_arr.imag > 0.0, big, small) + 0.0  # drop signed zeros
    return complex(w) if w.ndim == 0 else w


def semicircle_density(ctx_or_v, lam):
    v = ctx_or_v.v if isinstance(ctx_or_v, TheoryContext) else float(ctx_or_v)
    lam = np.asarray(lam, dtype=float)
    out = np.sqrt(np.clip(4.0 * v * v - lam * lam, 0.0, None)) / (2.0 * math.pi * v * v)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(ctx_or_v, lam):
    """Integral of the semicircle density from -2v to lambda."""
    v = ctx_or_v.v if isinstance(ctx_or_v, TheoryContext) else float(ctx_or_v)
    x = np.clip(np.asarray(lam, dtype=float) / (2.0 * v), -1.0, 1.0)
    out = 0.5 + (x * np.sqrt(1.0 - x * x) + np.arcsin(x)) / math.pi
    return float(out) if out.ndim == 0 else out


def w_boundary(ctx_or_v, lam: float, side: int = 1) -> BoundaryValue:
    """Limit of w(lambda + i side eps) as eps -> 0+, for lambda in the bulk."""
    v = ctx_or_v.v if isinstance(ctx_or_v, TheoryContext) else float(ctx_or_v)
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if not abs(lam) < 2.0 * v:
        raise ValueError(f"lambda={lam} is outside the bulk (-{2 * v}, {2 * v})")
    tau = -lam / (2.0 * v * v)
    rho = math.sqrt(4.0 * v * v - lam * lam) / (2.0 * v * v)
    return BoundaryValue(float(lam), tau, rho, side)


# -- Delta, Q, T --------------------------------------------------------------


def compute_delta(ctx: TheoryContext) -> DeltaValues:
    m = ctx.moments
    v4 = ctx.v2 * ctx.v2
    return DeltaValues(
        ctx.V4 * m.int_psi - 3.0 * v4 * m.int_psi_sq,
        (ctx.V4 - 3.0 * v4) * m.int_psi_sq,
    )


def _check_z(ctx, z, name):
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError(f"{name} must be non-real")
    if abs(z.imag) < EPS_MIN:
        raise ValueError(
            f"|Im {name}| = {abs(z.imag):.3g} < {EPS_MIN:g}; use compute_xi for boundary values"
        )
    if abs(z.imag) < ctx.eta:
        warnings.warn(
            f"{name}={z} lies outside |Im z| >= {ctx.eta:g}", OutsideDomainWarning, stacklevel=3
        )
    return z


def _breakpoints(ctx, x):
    exp = ctx.expansion
    nu, c1 = (exp.nu, exp.c1) if exp is not None else (2.0, 1.0)
    pts = [1.0, 10.0]
    if exp is not None:
        pts.append(exp.radius)
    gap = abs(1.0 - x)
    if gap < 1.0:
        pstar = (gap / (abs(x) * c1)) ** (1.0 / nu)
        pts.extend(pstar * 2.0 ** (0.5 * np.arange(-24, 25)))
    return sorted(p for p in pts if 0.0 < p < 1e3)


def _fourier_integral(ctx: TheoryContext, x: complex, rtol: float) -> complex:
    """int_R psi_tilde / (1 - x psi_tilde)^2 dp.

    The bare ``psi_tilde`` part integrates to ``2 pi psi(0)`` exactly; only
    the remainder ``x psi_tilde^2 (2 - x psi_tilde) / (1 - x psi_tilde)^2``
    is integrated numerically, over p >= 0 and doubled.
    """
    prof = ctx.profile

    def f(p):
        pt = prof.psi_tilde(p)
        denom = (1.0 - x) + x * prof.one_minus_psi_tilde(p)
        return x * pt * pt * (2.0 - x * pt) / (denom * denom)

    pts = _breakpoints(ctx, x)
    if prof.kind == "indicator":
        # psi_tilde ~ sin/p: integrate whole periods, add the psi_tilde^2 tail
        # in closed form (higher powers contribute O(L^-3))
        L = _INDICATOR_CUT
        grid = list(np.arange(2.0 * math.pi, L, 2.0 * math.pi))
        head = integrate(f, 0.0, L, points=pts + grid, rtol=rtol, atol=1e-15, max_panels=2_000_000).value
        si, _ = special.sici(L)
        tail_sq = 2.0 / L - 2.0 * math.cos(L) / L + 2.0 * (0.5 * math.pi - si)
        rest = head + 2.0 * x * tail_sq
    else:
        rest = integrate_halfline(f, 0.0, points=pts, rtol=rtol, atol=1e-15, tail_tol=1e-14).value
    return 2.0 * math.pi * prof.psi_zero + 2.0 * rest


def _q_from_w(ctx, w1, w2, rtol):
    v2 = ctx.v2
    pref = v2 * w1 * w1 * w2 * w2 / (math.pi * (1.0 - v2 * w1 * w1) * (1.0 - v2 * w2 * w2))
    return complex(pref * _fourier_integral(ctx, v2 * w1 * w2, rtol))


def _delta_term(ctx, w1, w2, delta, form):
    v2 = ctx.v2
    factor = v2 * v2 if form == "rewrite" else 1.0
    return complex(2.0 * delta * factor * w1**3 * w2**3 / ((1.0 - v2 * w1 * w1) * (1.0 - v2 * w2 * w2)))


def _delta_for(ctx, delta_form):
    d = compute_delta(ctx)
    if delta_form == "percolation":
        return d.delta
    if delta_form == "band":
        return d.delta_band
    raise ValueError(f"delta_form must be 'percolation' or 'band', got {delta_form!r}")


def compute_Q(ctx: TheoryContext, z1, z2, *, rtol: float = 1e-11) -> complex:
    z1 = _check_z(ctx, z1, "z1")
    z2 = _check_z(ctx, z2, "z2")
    return _q_from_w(ctx, solve_w(ctx, z1), solve_w(ctx, z2), rtol)


def compute_T(
    ctx: TheoryContext,
    z1,
    z2,
    *,
    form: str = "canonical",
    delta_form: str = "percolation",
    rtol: float = 1e-11,
) -> complex:
    """Leading covariance term.

    ``form="rewrite"`` uses ``2 v^2 S / ((1 - v^2 w1^2)(1 - v^2 w2^2)) + Q'``
    where Q' carries an extra v^4 in the Delta term; a
    FormDiscrepancyWarning is issued whenever that changes the value.
    """
    if form not in ("canonical", "rewrite"):
        raise ValueError(f"form must be 'canonical' or 'rewrite', got {form!r}")
    z1 = _check_z(ctx, z1, "z1")
    z2 = _check_z(ctx, z2, "z2")
    return _t_from_w(ctx, solve_w(ctx, z1), solve_w(ctx, z2), form, _delta_for(ctx, delta_form), rtol)


def _t_from_w(ctx, w1, w2, form, delta, rtol):
    q = _q_from_w(ctx, w1, w2, rtol)
    value = q + _delta_term(ctx, w1, w2, delta, form)
    if form == "rewrite":
        canonical = q + _delta_term(ctx, w1, w2, delta, "canonical")
        if value != canonical:
            warnings.warn(
                f"rewritten T differs from canonical T by {abs(value - canonical):.3e}",
                FormDiscrepancyWarning,
                stacklevel=3,
            )
    return value


@dataclass(frozen=True)
class TComparison:
    canonical: complex
    rewrite: complex

    @property
    def discrepancy(self) -> float:
        return abs(self.rewrite - self.canonical)


def compare_T_forms(ctx: TheoryContext, z1, z2, *, delta_form: str = "percolation") -> TComparison:
    z1 = _check_z(ctx, z1, "z1")
    z2 = _check_z(ctx, z2, "z2")
    w1, w2 = solve_w(ctx, z1), solve_w(ctx, z2)
    delta = _delta_for(ctx, delta_form)
    q = _q_from_w(ctx, w1, w2, 1e-11)
    return TComparison(
        q + _delta_term(ctx, w1, w2, delta, "canonical"),
        q + _delta_term(ctx, w1, w2, delta, "rewrite"),
    )


# -- boundary values and Xi -------------------------------------------------


def _xi_at(ctx, lam1, lam2, eps, delta, form, rtol):
    total = 0.0
    # conjugate pairs: T(-,-) = conj T(+,+) and T(-,+) = conj T(+,-)
    for d2 in (1, -1):
        w1 = solve_w(ctx, complex(lam1, eps))
        w2 = solve_w(ctx, complex(lam2, d2 * eps))
        total += d2 * 2.0 * _t_from_w(ctx, w1, w2, form, delta, rtol).real
    return -0.25 * total


def compute_xi(
    ctx: TheoryContext,
    lam1: float,
    lam2: float,
    *,
    method: str = "richardson",
    delta_form: str = "percolation",
    form: str = "canonical",
    rtol: float = 1e-11,
) -> float:
    """Nb * Xi(lambda1, lambda2) from boundary values of T.

    ``method="richardson"`` evaluates at imaginary offsets
    ``eps0 * (1, 1/10, 1/100)`` with ``eps0 = min(1e-3, |l1 - l2| / 10)`` and
    extrapolates to zero; ``method="boundary"`` substitutes the limits
    ``tau +- i rho`` directly, which is regular whenever l1 != l2.
    """
    v = ctx.v
    if lam1 == lam2:
        raise ValueError("lambda1 and lambda2 must differ")
    for lam in (lam1, lam2):
        if not abs(lam) < 2.0 * v:
            raise ValueError(f"lambda={lam} is outside the bulk (-{2 * v}, {2 * v})")
    delta = _delta_for(ctx, delta_form)
    if method == "boundary":
        total = 0.0
        for d2 in (1, -1):
            w1 = w_boundary(ctx, lam1, 1).w
            w2 = w_boundary(ctx, lam2, d2).w
            total += d2 * 2.0 * _t_from_w(ctx, w1, w2, form, delta, rtol).real
        return -0.25 * total
    if method != "richardson":
        raise ValueError(f"method must be 'richardson' or 'boundary', got {method!r}")
    eps0 = min(1e-3, abs(lam1 - lam2) / 10.0)
    vals = [_xi_at(ctx, lam1, lam2, eps0 * 10.0**-k, delta, form, rtol) for k in range(3)]
    # bias is analytic in eps: eliminate the linear then the quadratic term
    r1 = [(10.0 * vals[k + 1] - vals[k]) / 9.0 for k in range(2)]
    r2 = (100.0 * r1[1] - r1[0]) / 99.0
    if abs(r1[1] - r2) > 0.01 * abs(r2):
        raise ArithmeticError(
            f"Richardson extrapolation did not settle: {r1[1]!r} vs {r2!r} at eps0={eps0:g}"
        )
    return float(r2)


def xi_amplitude(ctx: TheoryContext, lam: float) -> float:
    """Predicted A in ``Nb Xi ~ A |l1 - l2|^-(2 - 1/nu)`` as l1, l2 -> lam.

    From the small-p expansion of psi_tilde, ``A = B (2 v^2 rho)^(2 - 1/nu)
    / (2 v^4 rho^2)`` with rho = Im w(lam + i0).
    """
    exp = ctx.expansion
    if exp is None:
        raise ProfileError(f"{ctx.profile.label}: no power expansion of psi_tilde")
    rho = w_boundary(ctx, lam, 1).rho
    nu = exp.nu
    v2 = ctx.v2
    return compute_B(nu, exp.c1) * (2.0 * v2 * rho) ** (2.0 - 1.0 / nu) / (2.0 * v2 * v2 * rho * rho)


# -- B ------------------------------------------------------------------------


def B_closed_form(nu: float, c1: float) -> float:
    a = 2.0 * nu
    base = (math.pi / a) / math.sin(math.pi / a)
    return (base - 2.0 * base * (1.0 - 1.0 / a)) / (2.0 * math.pi * c1 ** (1.0 / nu))


def compute_B(nu: float, c1: float) -> float:
    """B_nu(c1) by quadrature of both half-line integrals."""
    if not nu > 1.0:
        raise ValueError(f"nu must exceed 1, got {nu}")
    if not c1 > 0.0:
        raise ValueError(f"c1 must be positive, got {c1}")
    a = 2.0 * nu
    one = integrate_halfline(lambda s: 1.0 / (1.0 + s**a), points=[1.0], rtol=1e-13, tail_tol=1e-15).value
    two = integrate_halfline(lambda s: 1.0 / (1.0 + s**a) ** 2, points=[1.0], rtol=1e-13, tail_tol=1e-15).value
    return (one - 2.0 * two) / (2.0 * math.pi * c1 ** (1.0 / nu))


# -- exponent fit -------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    residual: float
    intercept: float
    separations: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    expected_slope: float | None = None
    predicted_amplitude: float | None = None

    @property
    def amplitude(self) -> float:
        """Signed prefactor A of the fitted law ``A s^slope``."""
        return float(np.sign(self.values[0]) * math.exp(self.intercept))


def fit_power_law(separations, values) -> tuple[float, float, float, float]:
    """Least-squares slope of log|y| on log s: (slope, stderr, rms residual, intercept)."""
    s = np.asarray(separations, dtype=float)
    y = np.asarray(values, dtype=float)
    if s.size < 2:
        raise ValueError("need at least two points")
    if np.any(y == 0.0) or np.any(np.sign(y) != np.sign(y[0])):
        raise ArithmeticError("values change sign across the separations; fit aborted")
    X = np.column_stack([np.log(s), np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(X, np.log(np.abs(y)), rcond=None)
    resid = np.log(np.abs(y)) - X @ coef
    dof = s.size - 2
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        stderr = math.sqrt(sigma2 * np.linalg.inv(X.T @ X)[0, 0])
    else:
        stderr = 0.0
    return float(coef[0]), stderr, float(np.sqrt(np.mean(resid**2))), float(coef[1])


def fit_scaling_exponent(
    ctx: TheoryContext,
    lambda_center: float,
    separations,
    *,
    method: str = "richardson",
) -> ExponentFit:
    """Fit |Xi(lc - s/2, lc + s/2)| ~ s^slope over the given separations."""
    s = np.sort(np.asarray(separations, dtype=float))
    if s.size < 4:
        raise ValueError("need at least 4 separations")
    if s[-1] / s[0] < 100.0 * (1 - 1e-12):
        raise ValueError("separations must span at least two decades")
    if np.any(s <= 0.0) or abs(lambda_center) + s[-1] / 2.0 >= 2.0 * ctx.v:
        raise ValueError("all points must lie strictly inside the bulk")
    xi = np.array([compute_xi(ctx, lambda_center - h / 2.0, lambda_center + h / 2.0, method=method) for h in s])
    slope, stderr, resid, intercept = fit_power_law(s, xi)
    exp = ctx.expansion
    expected = -(2.0 - 1.0 / exp.nu) if exp is not None else None
    amp = xi_amplitude(ctx, lambda_center) if exp is not None else None
    return ExponentFit(slope, stderr, resid, intercept, s, xi, expected, amp)
