"""Sampling the long-range percolation ensemble.

For ``|i|, |j| <= n`` and ``i <= j``::

    H(i, j) = a(i, j) * d(i, j) / sqrt(b),    P(d(i, j) = 1) = psi((i - j) / b)

mirrored to ``H(j, i)``.  Diagonal entries use the base variable scaled by
sqrt(2), which gives ``E a(i,i)^{2m} = 2^m E a^{2m}`` for every m at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .profiles import Profile, make_profile
from .rng import ENTRY_STREAM, MASK_STREAM, check_seed, row_uniforms

__all__ = [
    "DISTRIBUTIONS",
    "EntryDistribution",
    "EnsembleSpec",
    "SampledMatrix",
    "MomentRow",
    "RegimeWarning",
    "sample_matrix",
    "empirical_moment_report",
]

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform")

# E{x^4}, E{x^6} of the unit-variance base law
_STANDARD_MOMENTS = {
    "gaussian": (3.0, 15.0),
    "rademacher": (1.0, 1.0),
    "uniform": (9.0 / 5.0, 27.0 / 7.0),
}


class RegimeWarning(UserWarning):
    """b lies outside n^(1/3) <~ b <~ n."""


@dataclass(frozen=True)
class EntryDistribution:
    kind: str = "gaussian"
    v: float = 1.0

    def __post_init__(self):
        if self.kind not in DISTRIBUTIONS:
            raise ValueError(f"unknown entry distribution {self.kind!r}; expected one of {DISTRIBUTIONS}")
        if not self.v > 0.0:
            raise ValueError(f"v must be positive, got {self.v}")

    @property
    def v2(self) -> float:
        return self.v**2

    @property
    def V4(self) -> float:
        return _STANDARD_MOMENTS[self.kind][0] * self.v**4

    @property
    def V6(self) -> float:
        return _STANDARD_MOMENTS[self.kind][1] * self.v**6

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Off-diagonal draws from open uniforms (quantile transform)."""
        if self.kind == "gaussian":
            x = special.ndtri(u)
        elif self.kind == "rademacher":
            x = np.where(u < 0.5, -1.0, 1.0)
        else:
            x = math.sqrt(3.0) * (2.0 * u - 1.0)
        return self.v * x


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    b: float
    dist: EntryDistribution = field(default_factory=EntryDistribution)
    profile: Profile = field(default_factory=lambda: make_profile("gaussian"))
    alpha_check: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a non-negative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "b", float(self.b))
        if not 1.0 <= self.b <= self.N:
            raise ValueError(f"b must lie in [1, N={self.N}], got {self.b}")
        if self.alpha_check is not None:
            lo = self.n ** (1.0 / 3.0)
            if not (1.0 / 3.0 < self.alpha_check < 1.0) or not lo <= self.b <= self.n:
                warnings.warn(
                    f"b={self.b:g} with n={self.n} is outside n^(1/3) <= b <= n "
                    f"(alpha={self.alpha_check:g}); asymptotic statements may not apply",
                    RegimeWarning,
                    stacklevel=3,
                )

    @property
    def N(self) -> int:
        return 2 * self.n + 1

    def offset_probabilities(self) -> np.ndarray:
        """psi(k / b) for k = 0 .. N-1."""
        return self.profile.psi(np.arange(self.N) / self.b)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "b": self.b,
            "dist": self.dist.kind,
            "v": self.dist.v,
            "profile": self.profile.label,
        }


@dataclass(frozen=True, eq=False)
class SampledMatrix:
    matrix: np.ndarray
    seed: int
    realization_index: int


def _row_draws(spec, probs, seed, realization, row):
    count = spec.N - row
    u_mask = row_uniforms(seed, realization, row, MASK_STREAM, count)
    u_entry = row_uniforms(seed, realization, row, ENTRY_STREAM, count)
    a = spec.dist.from_uniform(u_entry)
    a[0] *= math.sqrt(2.0)
    return a, u_mask < probs[:count]


def sample_matrix(spec: EnsembleSpec, seed: int, realization_index: int) -> SampledMatrix:
    """Draw one realization; bit-identical for identical (spec, seed, index)."""
    seed = check_seed(seed)
    N = spec.N
    probs = spec.offset_probabilities()
    scale = 1.0 / math.sqrt(spec.b)
    upper = np.zeros((N, N))
    for row in range(N):
        a, d = _row_draws(spec, probs, seed, realization_index, row)
        upper[row, row:] = np.where(d, a * scale, 0.0)
    H = upper + np.triu(upper, 1).T
    return SampledMatrix(H, seed, int(realization_index))


@dataclass(frozen=True)
class MomentRow:
    name: str
    empirical: float
    target: float
    stderr: float

    @property
    def z(self) -> float:
        diff = self.empirical - self.target
        if self.stderr == 0.0:
            return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(self.target)) else math.inf
        return diff / self.stderr

    @property
    def flagged(self) -> bool:
        return abs(self.z) > 4.0


def _mean_row(name, samples, target):
    samples = np.asarray(samples)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    return MomentRow(name, float(samples.mean()), float(target), float(se))


def empirical_moment_report(spec: EnsembleSpec, seed: int, R: int) -> list[MomentRow]:
    """Pooled entry moments and mask density over R realizations vs their targets.

    Rows: off-diagonal E a^2 and E a^4, diagonal variance (target 2 v^2), and
    the off-diagonal mask density (target mean of psi over pairs, with the
    exact Poisson-binomial standard error).
    """
    if R < 100:
        raise ValueError(f"moment report needs R >= 100, got {R}")
    seed = check_seed(seed)
    probs = spec.offset_probabilities()
    off, diag, hits = [], [], 0
    for r in range(R):
        for row in range(spec.N):
            a, d = _row_draws(spec, probs, seed, r, row)
            diag.append(a[0])
            off.append(a[1:])
            hits += int(np.count_nonzero(d[1:]))
    off = np.concatenate(off)
    diag = np.asarray(diag)
    dist = spec.dist
    pair_probs = np.concatenate([probs[1:spec.N - row] for row in range(spec.N)])
    pairs = pair_probs.size * R
    density_se = math.sqrt(R * float(np.sum(pair_probs * (1.0 - pair_probs)))) / pairs
    return [
        _mean_row("E{a^2}", off**2, dist.v2),
        _mean_row("E{a^4}", off**4, dist.V4),
        _mean_row("Var{a_diag}", diag**2, 2.0 * dist.v2),
        MomentRow("mask density", hits / pairs, float(pair_probs.mean()), density_se),
    ]
