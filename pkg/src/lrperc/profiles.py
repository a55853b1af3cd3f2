"""Connectivity profiles psi(t) and their Fourier transforms.

Every profile is even, takes values in [0, 1] and integrates to one.  The
Fourier convention is ``psi_tilde(p) = int psi(t) exp(i p t) dt`` so that
``psi_tilde(0) = 1``.

Kinds
-----
gaussian      exp(-pi t^2)
exponential   exp(-|t|) / 2
indicator     1 on (-1/2, 1/2)  (discontinuous; the band-matrix profile)
stable(nu)    inverse transform of exp(-|p|^nu), tabulated, 1 < nu <= 2
power_law(nu) c / (1 + |t|^(1 + nu)), nu > 1
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi

from .quadrature import QuadratureError, integrate, integrate_halfline

__all__ = [
    "KINDS",
    "ProfileError",
    "Profile",
    "ProfileMoments",
    "ExpansionData",
    "make_profile",
    "parse_profile",
    "psi_tilde",
    "profile_moments",
    "expansion_data",
]

KINDS = ("gaussian", "exponential", "indicator", "stable", "power_law")

STABLE_HALF_WIDTH = 64.0
STABLE_GRID_POINTS = 4096
_NEG_CLAMP = 1e-10
# quadrature up to _TAIL_CUT, two-term asymptotic series beyond it
_TAIL_CUT = 2.0**20
_SMALL_P = 1e-5


class ProfileError(ValueError):
    """Invalid profile parameters or a profile that fails its invariants."""


@dataclass(frozen=True)
class ProfileMoments:
    int_psi: float
    int_psi_sq: float
    int_sqrt_psi: float
    second_moment: float  # math.inf for heavy tails

    @property
    def second_moment_infinite(self) -> bool:
        return math.isinf(self.second_moment)


@dataclass(frozen=True)
class ExpansionData:
    """Small-p behaviour ``psi_tilde(p) = 1 - c1 |p|^nu + o(|p|^nu)`` for ``|p| <= radius``."""

    nu: float
    c1: float
    radius: float
    fitted: bool = False


@dataclass(frozen=True, eq=False)
class Profile:
    kind: str
    nu: float | None = None
    t_grid: np.ndarray | None = field(default=None, repr=False)
    psi_table: np.ndarray | None = field(default=None, repr=False)

    @property
    def continuous(self) -> bool:
        # the indicator is admitted for band matrices despite the jump at 1/2
        return self.kind != "indicator"

    @property
    def label(self) -> str:
        return self.kind if self.nu is None else f"{self.kind}:nu={self.nu:g}"

    @property
    def grid_step(self) -> float | None:
        if self.t_grid is None:
            return None
        return float(self.t_grid[1] - self.t_grid[0])

    # -- values -------------------------------------------------------------

    @property
    def psi_zero(self) -> float:
        """Exact psi(0), i.e. ``(1/2pi) int psi_tilde``."""
        if self.kind in ("gaussian", "indicator"):
            return 1.0
        if self.kind == "exponential":
            return 0.5
        if self.kind == "stable":
            return math.gamma(1.0 + 1.0 / self.nu) / math.pi
        return _power_law_norm(self.nu)

    def psi(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == "gaussian":
            return np.exp(-np.pi * t * t)
        if self.kind == "exponential":
            return 0.5 * np.exp(-t)
        if self.kind == "indicator":
            return np.where(t < 0.5, 1.0, 0.0)
        if self.kind == "power_law":
            return _power_law_norm(self.nu) / (1.0 + t ** (1.0 + self.nu))
        inside = t <= STABLE_HALF_WIDTH
        out = np.empty_like(t)
        out[inside] = np.interp(t[inside], self.t_grid, self.psi_table)
        out[~inside] = _stable_tail(t[~inside], self.nu)
        return out

    def psi_tilde(self, p):
        p = np.abs(np.asarray(p, dtype=float))
        if self.kind == "gaussian":
            return np.exp(-p * p / (4.0 * np.pi))
        if self.kind == "exponential":
            return 1.0 / (1.0 + p * p)
        if self.kind == "indicator":
            return np.sinc(p / (2.0 * np.pi))
        if self.kind == "stable":
            return np.exp(-(p**self.nu))
        flat = [1.0 - _power_law_deficit(float(x), self.nu) for x in p.ravel()]
        return np.array(flat, dtype=float).reshape(p.shape)

    def one_minus_psi_tilde(self, p):
        """``1 - psi_tilde(p)`` without cancellation at small p."""
        p = np.abs(np.asarray(p, dtype=float))
        if self.kind == "gaussian":
            return -np.expm1(-p * p / (4.0 * np.pi))
        if self.kind == "exponential":
            return p * p / (1.0 + p * p)
        if self.kind == "indicator":
            u = 0.5 * p
            small = u < 1e-3
            us = np.where(small, u, 1.0)
            series = us * us / 6.0 - us**4 / 120.0
            return np.where(small, series, 1.0 - np.sinc(p / (2.0 * np.pi)))
        if self.kind == "stable":
            return -np.expm1(-(p**self.nu))
        flat = [_power_law_deficit(float(x), self.nu) for x in p.ravel()]
        return np.array(flat, dtype=float).reshape(p.shape)

    def tail_terms(self) -> list[tuple[float, float]]:
        """Leading terms ``[(A, a), ...]`` of ``psi(t) ~ sum A t^-a`` as t -> inf."""
        nu = self.nu
        if self.kind == "power_law":
            c = _power_law_norm(nu)
            return [(c, 1.0 + nu), (-c, 2.0 + 2.0 * nu)]
        if self.kind == "stable" and nu < 2.0:
            return [
                (math.gamma(nu + 1.0) * math.sin(math.pi * nu / 2.0) / math.pi, nu + 1.0),
                (-math.gamma(2.0 * nu + 1.0) * math.sin(math.pi * nu) / (2.0 * math.pi), 2.0 * nu + 1.0),
            ]
        return []

    def validate(self, grid_points: int = 20001) -> None:
        """Check range, evenness and normalization; raise ProfileError on failure."""
        t = np.linspace(-4.0 * max(1.0, STABLE_HALF_WIDTH if self.kind == "stable" else 8.0), 0.0, grid_points)
        t = np.concatenate([t, -t[::-1]])
        vals = self.psi(t)
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ProfileError(f"{self.label}: psi leaves [0, 1]")
        if not np.array_equal(vals, vals[::-1]):
            raise ProfileError(f"{self.label}: psi is not even")
        total = profile_moments(self).int_psi
        if abs(total - 1.0) > 1e-9:
            raise ProfileError(f"{self.label}: int psi = {total!r}, expected 1")


def _power_law_norm(nu: float) -> float:
    a = 1.0 + nu
    # int_R dt / (1 + |t|^a) = (2 pi / a) / sin(pi / a)
    return a * math.sin(math.pi / a) / (2.0 * math.pi)


@functools.lru_cache(maxsize=65536)
def _power_law_deficit(p: float, nu: float) -> float:
    """``1 - psi_tilde(p) = 2c int_0^inf (1 - cos pt) / (1 + t^a) dt``.

    Working with ``1 - cos`` keeps full relative accuracy at small p, which
    the expansion fit depends on.
    """
    if p == 0.0:
        return 0.0
    a = 1.0 + nu
    c = _power_law_norm(nu)
    if p < _SMALL_P and abs(math.sin(0.5 * math.pi * nu)) > 1e-6:
        # c1 p^nu from the t^-a tail plus the regularized second moment
        c1 = c * math.pi / (math.gamma(1.0 + nu) * math.sin(0.5 * math.pi * nu))
        d2 = c * (math.pi / a) / math.sin(3.0 * math.pi / a)
        return c1 * p**nu + d2 * p * p

    def f(t):
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.power(t, a))

    period = 2.0 * math.pi / p
    cut = period * math.ceil(max(16.0 * period, 4.0) / period)
    pts = list(np.arange(period, cut, period)) if cut / period < 5000 else []
    head = integrate(
        lambda t: 2.0 * np.sin(0.5 * p * t) ** 2 * f(t), 0.0, cut,
        points=pts + [1.0], rtol=1e-14, atol=1e-17,
    ).value
    k = np.arange(60)
    flat_tail = float(np.sum((-1.0) ** k * cut ** (1.0 - (k + 1) * a) / ((k + 1) * a - 1.0)))
    with warnings.catch_warnings():
        # QAWF flags its own cycle extrapolation on this slowly decaying tail;
        # the tail is O(cut^-a / p) and far below the tolerance that matters
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        osc_tail, _ = _spi.quad(f, cut, np.inf, weight="cos", wvar=p, epsabs=1e-16, limlst=400)
    return 2.0 * c * (head + flat_tail - osc_tail)


def _stable_tail(t, nu):
    """Asymptotic series of the symmetric stable density, valid for large |t|."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if nu >= 2.0 or t.size == 0:
        return out
    for k in range(1, 40):
        coef = (
            (-1.0) ** (k + 1)
            * math.exp(math.lgamma(k * nu + 1.0) - math.lgamma(k + 1.0))
            * math.sin(k * math.pi * nu / 2.0)
            / math.pi
        )
        term = coef * t ** (-(k * nu + 1.0))
        out += term
        if np.all(np.abs(term) < 1e-20):
            break
    return out


def _gauss_legendre_panels(edges, order=20):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


@functools.lru_cache(maxsize=16)
def _stable_table(nu: float) -> tuple[np.ndarray, np.ndarray]:
    """psi on the symmetric grid via the cosine transform of exp(-|p|^nu)."""
    t_grid = np.linspace(-STABLE_HALF_WIDTH, STABLE_HALF_WIDTH, STABLE_GRID_POINTS)
    t_half = np.abs(t_grid[STABLE_GRID_POINTS // 2:])
    p_max = 42.0 ** (1.0 / nu)  # exp(-p_max^nu) < 1e-18
    graded = 0.125 * 2.0 ** -np.arange(40, -1, -1)
    edges = np.concatenate([[0.0], graded, np.arange(0.25, p_max + 0.125, 0.125)])
    p, w = _gauss_legendre_panels(edges)
    weights = w * np.exp(-(p**nu)) / np.pi
    half = np.empty_like(t_half)
    for start in range(0, t_half.size, 256):
        chunk = t_half[start:start + 256]
        half[start:start + 256] = np.cos(np.outer(chunk, p)) @ weights
    if np.any(half < -_NEG_CLAMP):
        raise ProfileError(f"stable:nu={nu:g}: inversion produced psi < {-_NEG_CLAMP:g}")
    half = np.maximum(half, 0.0)
    table = np.concatenate([half[::-1], half])
    table.setflags(write=False)
    t_grid.setflags(write=False)
    return t_grid, table


def make_profile(kind: str, nu: float | None = None) -> Profile:
    """Build a profile of the given kind; ``nu`` is required for stable and power_law."""
    if kind not in KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    if kind in ("stable", "power_law"):
        if nu is None:
            raise ProfileError(f"{kind} profile needs nu")
        nu = float(nu)
        if kind == "stable" and not 1.0 < nu <= 2.0:
            raise ProfileError(f"stable profile needs nu in (1, 2], got {nu}")
        if kind == "power_law" and not nu > 1.0:
            raise ProfileError(f"power_law profile needs nu > 1, got {nu}")
    elif nu is not None:
        raise ProfileError(f"{kind} profile takes no nu")
    if kind == "stable":
        t_grid, table = _stable_table(nu)
        prof = Profile(kind, nu, t_grid, table)
    else:
        prof = Profile(kind, nu)
    prof.validate()
    return prof


def parse_profile(text: str) -> Profile:
    """Parse ``<kind>[:nu=<float>]`` (an optional leading ``profile=`` is accepted)."""
    text = text.strip()
    if text.startswith("profile="):
        text = text[len("profile="):]
    kind, _, rest = text.partition(":")
    nu = None
    if rest:
        key, _, value = rest.partition("=")
        if key.strip() != "nu" or not value:
            raise ProfileError(f"malformed profile spec {text!r}")
        try:
            nu = float(value)
        except ValueError as exc:
            raise ProfileError(f"malformed nu in {text!r}") from exc
    return make_profile(kind.strip(), nu)


def psi_tilde(profile: Profile, p):
    """Fourier transform of the profile; real and even in p."""
    return profile.psi_tilde(p)


def _power_tail(terms, s, cut, weight_power=0.0):
    """int_cut^inf t^weight_power psi(t)^s dt from the two leading tail terms."""
    (a1_coef, a1), *rest = terms
    lead = s * a1 - weight_power
    if lead <= 1.0:
        return math.inf
    value = a1_coef**s * cut ** (1.0 - lead) / (lead - 1.0)
    if rest:
        a2_coef, a2 = rest[0]
        second = lead + (a2 - a1)
        value += s * a1_coef ** (s - 1.0) * a2_coef * cut ** (1.0 - second) / (second - 1.0)
    return value


@functools.lru_cache(maxsize=64)
def _moments_cached(kind, nu):
    prof = Profile(kind, nu, *(_stable_table(nu) if kind == "stable" else (None, None)))
    return _compute_moments(prof)


def _half_integral(prof: Profile, g, s: float, weight_power: float = 0.0) -> float:
    """int_0^inf t^weight_power psi(t)^s dt."""
    f = lambda t: t**weight_power * g(prof.psi(t))  # noqa: E731
    terms = prof.tail_terms()
    if prof.kind == "indicator":
        return integrate(f, 0.0, 0.5, rtol=1e-13, atol=1e-15).value
    if not terms:
        return integrate_halfline(f, 0.0, points=[1.0, 4.0], rtol=1e-13, atol=1e-15, tail_tol=1e-14).value
    if prof.kind == "stable":
        pts = list(prof.t_grid[prof.t_grid > 0.0])
    else:
        pts = [1.0]
    pts += list(STABLE_HALF_WIDTH * 2.0 ** np.arange(0, 15))
    tail = _power_tail(terms, s, _TAIL_CUT, weight_power)
    if math.isinf(tail):
        return math.inf
    head = integrate(f, 0.0, _TAIL_CUT, points=pts, rtol=1e-13, atol=1e-15, max_panels=400_000)
    return head.value + tail


def _compute_moments(prof: Profile) -> ProfileMoments:
    one = _half_integral(prof, lambda x: x, 1.0)
    sq = _half_integral(prof, lambda x: x * x, 2.0)
    root = _half_integral(prof, np.sqrt, 0.5)
    second = _half_integral(prof, lambda x: x, 1.0, weight_power=2.0)
    return ProfileMoments(2.0 * one, 2.0 * sq, 2.0 * root, 2.0 * second)


def profile_moments(profile: Profile) -> ProfileMoments:
    """int psi, int psi^2, int sqrt(psi) and int t^2 psi (inf when divergent)."""
    try:
        return _moments_cached(profile.kind, profile.nu)
    except QuadratureError as exc:  # pragma: no cover - defensive
        raise ProfileError(f"{profile.label}: moment quadrature failed: {exc}") from exc


_EXACT_EXPANSION = {
    "gaussian": (2.0, 1.0 / (4.0 * math.pi)),
    "exponential": (2.0, 1.0),
    "indicator": (2.0, 1.0 / 24.0),
}


def _expansion_radius(profile: Profile, nu: float, c1: float, rel: float = 0.1) -> float:
    p = 2.0 ** np.arange(-10.0, 4.01, 0.25)
    lead = c1 * p**nu
    dev = np.abs(profile.psi_tilde(p) - (1.0 - lead)) / lead
    ok = dev <= rel
    if not ok[0]:
        raise ProfileError(f"{profile.label}: expansion fails even at p={p[0]:g}")
    bad = np.flatnonzero(~ok)
    return float(p[bad[0] - 1] if bad.size else p[-1])


def expansion_data(profile: Profile) -> ExpansionData:
    """Exponent and coefficient of the small-p expansion of psi_tilde.

    Known analytically for every kind except power_law, whose coefficient is
    fitted by regressing ``(1 - psi_tilde(p)) / p^nu`` on ``p^kappa`` over a
    geometric grid, kappa being the order of the next correction.
    """
    if profile.kind in _EXACT_EXPANSION:
        nu, c1 = _EXACT_EXPANSION[profile.kind]
        return ExpansionData(nu, c1, _expansion_radius(profile, nu, c1))
    if profile.kind == "stable":
        return ExpansionData(profile.nu, 1.0, _expansion_radius(profile, profile.nu, 1.0))
    return _fit_power_law_expansion(profile)


def _fit_power_law_expansion(profile: Profile) -> ExpansionData:
    nu = profile.nu
    if abs(nu - 2.0) < 1e-9:
        raise ProfileError(
            "power_law:nu=2 has psi_tilde = 1 - c p^2 log(1/p) + ...; no pure power expansion"
        )
    nu_eff = min(nu, 2.0)
    # correction exponents relative to p^nu_eff: regular p^2, p^4 terms of the
    # transform and the singular |p|^nu, |p|^(2nu+1) terms of the algebraic tail
    if nu < 2.0:
        kappas = [2.0 - nu, 4.0 - nu, 1.0 + nu]
    else:
        kappas = sorted({nu - 2.0, 2.0, 2.0 * nu - 1.0})
    p = np.geomspace(1e-4, 1e-2, 16)
    ratio = profile.one_minus_psi_tilde(p) / p**nu_eff
    design = np.column_stack([np.ones_like(p)] + [p**k for k in kappas])
    coef, *_ = np.linalg.lstsq(design, ratio, rcond=None)
    c1 = float(coef[0])
    resid = ratio - design @ coef
    if c1 <= 0.0 or np.sqrt(np.mean(resid**2)) > 1e-7 * abs(c1):
        raise ProfileError(f"{profile.label}: expansion fit residual too large (c1={c1:g})")
    # below the fit range the fitted corrections stand in for the transform
    q = 2.0 ** np.arange(-80.0, np.log2(p[-1]) + 1e-9, 0.25)
    drift = np.abs(np.column_stack([q**k for k in kappas]) @ coef[1:]) / c1
    if drift[-1] <= 0.1:
        radius = _expansion_radius(profile, nu_eff, c1)
    else:
        bad = np.flatnonzero(drift > 0.1)
        if bad[0] == 0:
            raise ProfileError(f"{profile.label}: no usable expansion radius")
        radius = float(q[bad[0] - 1])
    return ExpansionData(nu_eff, c1, radius, fitted=True)
