"""Monte Carlo estimation of resolvent statistics over ensemble realizations.

Every realization is a pure function of ``(spec, seed, index)``.  Workers
return per-realization results, which are reduced in index order in the
parent; with BLAS pinned to one thread this makes every number independent
of the worker count.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .ensemble import EnsembleSpec, sample_matrix
from .spectra import eigenvalues_symmetric, resolvent_traces
from .theory import TheoryContext, compute_delta, compute_T, semicircle_cdf, semicircle_density

__all__ = [
    "WORKERS_ENV",
    "Estimate",
    "McReport",
    "DensityResult",
    "ScalingRow",
    "CorrelationRecord",
    "ShiftRecord",
    "default_workers",
    "resolvent_samples",
    "covariance",
    "estimate_resolvent_stats",
    "density_experiment",
    "variance_scaling_experiment",
    "correlation_vs_theory",
    "entry_shift_experiment",
    "CSV_COLUMNS",
    "write_csv",
    "read_csv",
    "write_json",
]

WORKERS_ENV = "LRPERC_WORKERS"
CSV_COLUMNS = (
    "statistic", "z1_re", "z1_im", "z2_re", "z2_im",
    "value_re", "value_im", "stderr", "R", "N", "b", "seed",
)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        k = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from exc
    if k < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return k


# -- parallel map -------------------------------------------------------------


def _traces_task(spec, seed, z, lo, hi):
    out = np.empty((hi - lo, z.size), dtype=complex)
    with threadpool_limits(1):
        for r in range(lo, hi):
            lam = eigenvalues_symmetric(sample_matrix(spec, seed, r)).eigenvalues
            out[r - lo] = resolvent_traces(lam, z)
    return out


def _histogram_task(spec, seed, edges, wide, lo, hi):
    counts = np.zeros((hi - lo, edges.size + 1), dtype=np.int64)
    with threadpool_limits(1):
        for r in range(lo, hi):
            lam = eigenvalues_symmetric(sample_matrix(spec, seed, r)).eigenvalues
            if lam.size != spec.N:
                raise RuntimeError(f"realization {r}: {lam.size} eigenvalues, expected {spec.N}")
            hist, _ = np.histogram(lam, bins=edges)
            counts[r - lo, :-2] = hist
            counts[r - lo, -2] = lam.size - hist.sum()
            counts[r - lo, -1] = int(np.count_nonzero(np.abs(lam) > wide))
    return counts


def _chunks(lo, hi, workers):
    size = max(1, math.ceil((hi - lo) / (4 * workers)))
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def _run(task, args, lo, hi, workers):
    """Concatenate ``task(*args, a, b)`` over index chunks, in index order."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    chunks = _chunks(lo, hi, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [task(*args, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(task, *args, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


def resolvent_samples(spec: EnsembleSpec, z, R: int, seed: int, *, start: int = 0, workers: int | None = None) -> np.ndarray:
    """Array of shape (R, len(z)) of g(z) for realizations start .. start+R-1."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag == 0.0):
        raise ValueError("z must be non-real")
    return _run(_traces_task, (spec, seed, z), start, start + R, workers)


# -- estimators ---------------------------------------------------------------


def _symmetric_product(x, y):
    # complex multiply spelled out so that x*y and y*x agree bit for bit;
    # the vectorized complex kernel may fuse operations asymmetrically
    if not (np.iscomplexobj(x) or np.iscomplexobj(y)):
        return x * y
    xr, xi = np.real(x), np.imag(x)
    yr, yi = np.real(y), np.imag(y)
    return (xr * yr - xi * yi) + 1j * (xr * yi + xi * yr)


def covariance(a: np.ndarray, b: np.ndarray) -> tuple[complex, float, np.ndarray | None]:
    """Unconjugated sample covariance with its jackknife standard error.

    Returns ``(C, stderr, leave_one_out)``; for R = 2 the jackknife is
    undefined and a normal-theory error is used instead (no pseudo-values).
    """
    R = a.size
    if R < 2:
        raise ValueError("covariance needs at least two realizations")
    ac = a - a.mean()
    bc = b - b.mean()
    prod = _symmetric_product(ac, bc)
    total = prod.sum()
    C = total / (R - 1)
    if R == 2:
        va = float(np.sum(np.abs(ac) ** 2))
        vb = float(np.sum(np.abs(bc) ** 2))
        return complex(C), math.sqrt(va * vb + abs(C) ** 2), None
    n = R - 1
    loo = (total - prod * (R / n)) / (n - 1)
    se = math.sqrt(n / R * float(np.sum(np.abs(loo - loo.mean()) ** 2)))
    return complex(C), se, loo


def _mean_with_se(a):
    R = a.size
    se = math.sqrt(float(np.sum(np.abs(a - a.mean()) ** 2)) / (R - 1) / R)
    return complex(a.mean()), se


@dataclass(frozen=True)
class Estimate:
    statistic: str
    value: complex
    stderr: float
    z1: complex
    z2: complex | None = None


@dataclass
class McReport:
    estimates: list[Estimate]
    R: int
    spec: dict
    seed: int
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def get(self, statistic: str, z1, z2=None) -> Estimate:
        for e in self.estimates:
            if e.statistic == statistic and e.z1 == complex(z1) and (
                (z2 is None and e.z2 is None) or (z2 is not None and e.z2 == complex(z2))
            ):
                return e
        raise KeyError((statistic, z1, z2))

    def rows(self) -> list[dict]:
        out = []
        for e in self.estimates:
            z2 = e.z2 if e.z2 is not None else complex("nan+nanj")
            out.append({
                "statistic": e.statistic,
                "z1_re": e.z1.real, "z1_im": e.z1.imag,
                "z2_re": z2.real, "z2_im": z2.imag,
                "value_re": e.value.real, "value_im": e.value.imag,
                "stderr": e.stderr,
                "R": self.R, "N": self.spec["N"], "b": self.spec["b"], "seed": self.seed,
            })
        return out

    def summary(self) -> dict:
        return {
            "version": __version__,
            "spec": self.spec,
            "seed": self.seed,
            "R": self.R,
            "wall_time": self.wall_time,
            "estimates": self.rows(),
            **self.extra,
        }


def _stats_from_samples(g, z):
    est = []
    for k, zk in enumerate(z):
        mean, se = _mean_with_se(g[:, k])
        est.append(Estimate("mean_g", mean, se, complex(zk)))
        var, vse, _ = covariance(g[:, k], g[:, k])
        est.append(Estimate("var_g", var, vse, complex(zk)))
        avar, ase, _ = covariance(g[:, k], np.conj(g[:, k]))
        est.append(Estimate("abs_var_g", complex(avar.real, 0.0), ase, complex(zk)))
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            c, cse, _ = covariance(g[:, i], g[:, j])
            est.append(Estimate("cov", c, cse, complex(z[i]), complex(z[j])))
    return est


def estimate_resolvent_stats(
    spec: EnsembleSpec, z_list, R: int, seed: int, *, workers: int | None = None
) -> McReport:
    """Mean, variance and pairwise covariance of g over R realizations.

    ``var_g`` is the unconjugated ``C(z, z)``; ``abs_var_g`` is
    ``E|g - Eg|^2 = C(z, conj z)``; ``cov`` is ``C(z_i, z_j)`` for i < j.
    """
    if R < 2:
        raise ValueError(f"R must be at least 2, got {R}")
    z = [complex(x) for x in z_list]
    if not z:
        raise ValueError("z_list is empty")
    if any(x.imag == 0.0 for x in z):
        raise ValueError("z must be non-real")
    t0 = time.perf_counter()
    g = resolvent_samples(spec, z, R, seed, workers=workers)
    return McReport(_stats_from_samples(g, z), R, spec.describe(), seed, time.perf_counter() - t0)


# -- density ------------------------------------------------------------------


@dataclass
class DensityResult:
    edges: np.ndarray
    density: np.ndarray
    l1: float
    outside_fraction: float
    tail_fraction: float
    R: int
    spec: dict
    seed: int
    wall_time: float = 0.0

    @property
    def mass(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))

    def rows(self) -> list[dict]:
        return [
            {"bin_lo": lo, "bin_hi": hi, "density": d, "semicircle": s}
            for lo, hi, d, s in zip(
                self.edges[:-1], self.edges[1:], self.density,
                _bin_average_semicircle(self.spec["v"], self.edges),
            )
        ]


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _bin_average_semicircle(v, edges):
    lo, hi = edges[:-1], edges[1:]
    x = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * _GL_X[None, :]
    return semicircle_density(v, x) @ _GL_W * 0.5


def _l1_to_semicircle(v, edges, density):
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = 0.5 * (lo + hi)[:, None] + half[:, None] * _GL_X[None, :]
    gap = np.abs(density[:, None] - semicircle_density(v, x))
    inside = float(np.sum(half * (gap @ _GL_W)))
    # semicircle mass the bins do not cover
    covered = float(semicircle_cdf(v, hi[-1]) - semicircle_cdf(v, lo[0]))
    return inside + (1.0 - covered)


def density_experiment(
    spec: EnsembleSpec,
    R: int,
    bins=60,
    seed: int = 0,
    *,
    workers: int | None = None,
    tail_margin: float = 0.5,
) -> DensityResult:
    """Pooled eigenvalue histogram and its L1 distance to the semicircle.

    ``bins`` is a count over [-2v-1, 2v+1] or an explicit edge array
    covering that range.  The density is normalized over eigenvalues that
    fall inside the bins; the fraction outside is reported separately, as is
    the fraction with |lambda| > 2v + tail_margin.
    """
    if R < 1:
        raise ValueError(f"R must be positive, got {R}")
    v = spec.dist.v
    lo, hi = -2.0 * v - 1.0, 2.0 * v + 1.0
    if np.ndim(bins) == 0:
        if int(bins) < 1:
            raise ValueError("bins must be positive")
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if edges[0] > lo or edges[-1] < hi:
            raise ValueError(f"bins must cover [{lo:g}, {hi:g}]")
    t0 = time.perf_counter()
    counts = _run(_histogram_task, (spec, seed, edges, 2.0 * v + tail_margin), 0, R, workers)
    total = counts.sum(axis=0)
    hist = total[:-2]
    inside = int(hist.sum())
    all_count = R * spec.N
    density = hist / (inside * np.diff(edges))
    l1 = _l1_to_semicircle(v, edges, density)
    return DensityResult(
        edges, density, l1,
        float(total[-2]) / all_count, float(total[-1]) / all_count,
        R, spec.describe(), seed, time.perf_counter() - t0,
    )


# -- scaling ladder -----------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    N: int
    b: float
    nb_var: float
    stderr: float
    R: int


def _check_domain(z, v, name="z"):
    if abs(complex(z).imag) < 2.0 * v + 1.0:
        raise ValueError(f"{name}={z} must satisfy |Im z| >= 2v+1 = {2 * v + 1:g}")


def ladder_alpha(ladder) -> float:
    """Common exponent alpha of b ~ N^alpha along the ladder; raises if rungs disagree."""
    logs = np.array([[math.log(s.N), math.log(s.b)] for s in ladder])
    slopes = np.diff(logs[:, 1]) / np.diff(logs[:, 0])
    if np.any(np.diff(logs[:, 0]) <= 0):
        raise ValueError("ladder N must increase")
    if slopes.max() - slopes.min() > 0.05:
        raise ValueError(f"rungs do not share one b ~ N^alpha relation (alphas {np.round(slopes, 3)})")
    return float(slopes.mean())


def variance_scaling_experiment(
    ladder, z, R: int, seed: int, *, workers: int | None = None
) -> list[ScalingRow]:
    """N b Var{g(z)} on each rung, Var meaning E|g - Eg|^2."""
    ladder = list(ladder)
    if len(ladder) < 3:
        raise ValueError("ladder needs at least 3 rungs")
    ladder_alpha(ladder)
    for s in ladder:
        _check_domain(z, s.dist.v)
    rows = []
    for s in ladder:
        g = resolvent_samples(s, [z], R, seed, workers=workers)[:, 0]
        var, se, _ = covariance(g, np.conj(g))
        scale = s.N * s.b
        rows.append(ScalingRow(s.N, s.b, scale * var.real, scale * se, R))
    return rows


# -- correlation vs theory ----------------------------------------------------


@dataclass(frozen=True)
class CorrelationRecord:
    nb_cov: complex
    stderr: float
    T: complex
    R: int
    target_met: bool
    N: int
    b: float

    @property
    def difference(self) -> complex:
        return self.nb_cov - self.T

    @property
    def z_score(self) -> float:
        return abs(self.difference) / self.stderr if self.stderr > 0 else math.inf

    @property
    def envelope(self) -> float:
        return max(3.0 * self.stderr, 0.15 * abs(self.T))

    @property
    def within_envelope(self) -> bool:
        return abs(self.difference) <= self.envelope


def _theory_ctx(spec):
    return TheoryContext(spec.dist.v, spec.profile, spec.dist.kind)


def correlation_vs_theory(
    spec: EnsembleSpec,
    z1,
    z2,
    R: int,
    seed: int,
    *,
    R_max: int | None = None,
    target: float = 0.2,
    workers: int | None = None,
) -> CorrelationRecord:
    """Compare N b C(z1, z2) with T(z1, z2).

    Starts with R realizations and doubles (reusing those already drawn)
    while the standard error of N b C exceeds ``target * |T|`` and the
    budget ``R_max`` (default R) allows; ``target_met`` records the outcome.
    """
    v = spec.dist.v
    _check_domain(z1, v, "z1")
    _check_domain(z2, v, "z2")
    if R < 3:
        raise ValueError(f"R must be at least 3, got {R}")
    R_max = R if R_max is None else max(R_max, R)
    T = compute_T(_theory_ctx(spec), z1, z2)
    scale = spec.N * spec.b
    g = resolvent_samples(spec, [z1, z2], R, seed, workers=workers)
    while True:
        c, se, _ = covariance(g[:, 0], g[:, 1])
        met = scale * se < target * abs(T)
        if met or g.shape[0] >= R_max:
            break
        extra = min(g.shape[0], R_max - g.shape[0])
        g = np.concatenate([g, resolvent_samples(spec, [z1, z2], extra, seed, start=g.shape[0], workers=workers)])
    return CorrelationRecord(scale * c, scale * se, T, g.shape[0], bool(met), spec.N, spec.b)


@dataclass(frozen=True)
class ShiftRecord:
    empirical: complex
    stderr: float
    predicted: complex
    delta_change: float

    @property
    def predicted_sign_from_delta(self) -> int:
        return int(np.sign(self.delta_change))

    @property
    def theory_sign_agrees(self) -> bool:
        return int(np.sign(self.predicted.real)) == self.predicted_sign_from_delta

    @property
    def empirical_sign_agrees(self) -> bool:
        return int(np.sign(self.empirical.real)) == int(np.sign(self.predicted.real))


def entry_shift_experiment(
    spec_a: EnsembleSpec, spec_b: EnsembleSpec, z1, z2, R: int, seed: int, *, workers: int | None = None
) -> tuple[ShiftRecord, CorrelationRecord, CorrelationRecord]:
    """Change of N b C(z1, z2) when only the entry law changes (a -> b).

    Both ensembles are driven by the same uniforms, so the paired jackknife
    error of the difference is much smaller than either error alone.
    """
    if (spec_a.n, spec_a.b) != (spec_b.n, spec_b.b):
        raise ValueError("specs must share n and b")
    if R < 3:
        raise ValueError(f"R must be at least 3, got {R}")
    _check_domain(z1, spec_a.dist.v, "z1")
    _check_domain(z2, spec_a.dist.v, "z2")
    scale = spec_a.N * spec_a.b
    recs, loos = [], []
    for spec in (spec_a, spec_b):
        g = resolvent_samples(spec, [z1, z2], R, seed, workers=workers)
        c, se, loo = covariance(g[:, 0], g[:, 1])
        T = compute_T(_theory_ctx(spec), z1, z2)
        recs.append(CorrelationRecord(scale * c, scale * se, T, R, True, spec.N, spec.b))
        loos.append(loo)
    diff_loo = scale * (loos[1] - loos[0])
    se = math.sqrt((R - 1) / R * float(np.sum(np.abs(diff_loo - diff_loo.mean()) ** 2)))
    d_a = compute_delta(_theory_ctx(spec_a)).delta
    d_b = compute_delta(_theory_ctx(spec_b)).delta
    shift = ShiftRecord(recs[1].nb_cov - recs[0].nb_cov, se, recs[1].T - recs[0].T, d_b - d_a)
    return shift, recs[0], recs[1]


# -- I/O ----------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (np.floating,)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_csv(path, rows, columns=None) -> None:
    """RFC-4180 CSV with a header row; floats written with round-trip precision.

    ``path`` may also be an open text stream.
    """
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else list(CSV_COLUMNS)
    if hasattr(path, "write"):
        _write_rows(path, rows, columns)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, rows, columns)


def _write_rows(fh, rows, columns):
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])


def _parse_cell(text):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=json_default, allow_nan=True)
        fh.write("\n")
