"""Eigenvalues, counting function, resolvent traces and resolvent validators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ensemble import SampledMatrix

__all__ = [
    "ConvergenceError",
    "SpectralSample",
    "ResolventTrace",
    "eigenvalues_symmetric",
    "householder_tridiagonal",
    "tridiagonal_ql_eigenvalues",
    "sturm_count",
    "bisection_eigenvalues",
    "sturm_oracle_eigenvalues",
    "trace_identity_errors",
    "counting_function",
    "resolvent_trace",
    "resolvent_traces",
    "check_resolvent_identity",
    "check_resolvent_expansion",
    "check_resolvent_derivative",
]

_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    def __init__(self, index: int, sweeps: int):
        super().__init__(f"implicit QL did not converge for eigenvalue {index} after {sweeps} sweeps")
        self.index = index


@dataclass(frozen=True, eq=False)
class SpectralSample:
    eigenvalues: np.ndarray
    n: int
    seed: int | None = None
    realization_index: int | None = None

    @property
    def N(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class ResolventTrace:
    z: complex
    g: complex

    def in_lambda_eta(self, v: float) -> bool:
        """Whether |Im z| >= 2v + 1."""
        return abs(self.z.imag) >= 2.0 * v + 1.0


# -- eigensolvers -----------------------------------------------------------


def householder_tridiagonal(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal similarity reduction to tridiagonal form; returns (diag, offdiag)."""
    A = np.array(matrix, dtype=float, copy=True)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        q = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, q) + np.outer(q, v))
        A[k + 1, k] = A[k, k + 1] = alpha
        A[k + 2:, k] = 0.0
        A[k, k + 2:] = 0.0
    return np.diag(A).copy(), np.diag(A, 1).copy()


def tridiagonal_ql_eigenvalues(diag, offdiag, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    Wilkinson-type shift from the leading 2x2 block, plane rotations chased
    from the bottom of the unreduced block upward.  ``max_sweeps`` defaults
    to 30 * n over the whole matrix.
    """
    d = np.array(diag, dtype=float, copy=True)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiag
    cap = 30 * n if max_sweeps is None else max_sweeps
    sweeps = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= _EPS * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > cap:
                raise ConvergenceError(l, sweeps - 1)
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d)


def sturm_count(diag, offdiag, x) -> np.ndarray:
    """Number of eigenvalues strictly below each x (LDL^T inertia)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = np.asarray(offdiag, dtype=float) ** 2
    scale = max(np.max(np.abs(diag)), np.sqrt(np.max(e2)) if e2.size else 0.0, 1e-300)
    tiny = _EPS * scale
    q = diag[0] - x
    count = (q < 0).astype(np.int64)
    for i in range(1, len(diag)):
        q = np.where(q == 0.0, -tiny, q)
        q = diag[i] - x - e2[i - 1] / q
        count += q < 0
    return count


def bisection_eigenvalues(diag, offdiag) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix by Sturm bisection."""
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    n = diag.size
    radius = np.zeros(n)
    radius[:-1] += np.abs(offdiag)
    radius[1:] += np.abs(offdiag)
    lo_bound = float(np.min(diag - radius))
    hi_bound = float(np.max(diag + radius))
    pad = 2.0 * _EPS * max(abs(lo_bound), abs(hi_bound), 1e-300)
    lo = np.full(n, lo_bound - pad)
    hi = np.full(n, hi_bound + pad)
    k = np.arange(n)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, offdiag, mid) <= k
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 2.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300):
            break
    return 0.5 * (lo + hi)


def sturm_oracle_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Independent eigenvalue oracle: LAPACK Hessenberg reduction + Sturm bisection."""
    T = scipy.linalg.hessenberg(np.asarray(matrix, dtype=float))
    diag = np.diag(T).copy()
    offdiag = 0.5 * (np.diag(T, 1) + np.diag(T, -1))
    return bisection_eigenvalues(diag, offdiag)


def eigenvalues_symmetric(matrix, method: str = "lapack") -> SpectralSample:
    """Sorted eigenvalues of a real symmetric matrix.

    ``method="lapack"`` uses ``numpy.linalg.eigvalsh`` (tridiagonal reduction
    followed by root-free implicit QL/QR); ``method="householder"`` runs this
    module's own Householder reduction and implicit QL.
    """
    seed = index = None
    if isinstance(matrix, SampledMatrix):
        seed, index = matrix.seed, matrix.realization_index
        matrix = matrix.matrix
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not symmetric")
    if method == "lapack":
        lam = np.linalg.eigvalsh(A)
    elif method == "householder":
        lam = tridiagonal_ql_eigenvalues(*householder_tridiagonal(A))
    else:
        raise ValueError(f"unknown method {method!r}")
    lam = np.sort(lam)
    return SpectralSample(lam, (A.shape[0] - 1) // 2, seed, index)


def trace_identity_errors(sample: SpectralSample, matrix) -> tuple[float, float]:
    """Scaled errors of sum(lambda) = tr H and sum(lambda^2) = ||H||_F^2.

    The first is ``|sum - tr| / (N * max|lambda|)``, the second relative to
    the Frobenius norm squared.
    """
    if isinstance(matrix, SampledMatrix):
        matrix = matrix.matrix
    lam = sample.eigenvalues
    scale = max(float(np.max(np.abs(lam))), 1e-300)
    first = abs(lam.sum() - np.trace(matrix)) / (lam.size * scale)
    frob = float(np.sum(matrix * matrix))
    second = abs(float(np.sum(lam * lam)) - frob) / max(frob, 1e-300)
    return first, second


# -- spectral functionals ---------------------------------------------------


def counting_function(sample: SpectralSample, lam) -> float | np.ndarray:
    """Fraction of eigenvalues <= lambda (right-continuous)."""
    ev = sample.eigenvalues
    out = np.searchsorted(ev, lam, side="right") / ev.size
    return float(out) if np.ndim(out) == 0 else out


def resolvent_traces(eigenvalues: np.ndarray, z) -> np.ndarray:
    """N^{-1} sum_k 1/(lambda_k - z) for each z in an array."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag == 0.0):
        raise ValueError("z must be non-real")
    return np.mean(1.0 / (eigenvalues[:, None] - z[None, :]), axis=0)


def resolvent_trace(sample: SpectralSample, z: complex) -> ResolventTrace:
    z = complex(z)
    return ResolventTrace(z, complex(resolvent_traces(sample.eigenvalues, z)[0]))


# -- resolvent identities ---------------------------------------------------


def _resolvent(h, z):
    h = np.asarray(h, dtype=float)
    if complex(z).imag == 0.0:
        raise ValueError("z must be non-real")
    eye = np.eye(h.shape[0])
    try:
        return np.linalg.solve(h - z * eye, eye.astype(complex))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - impossible for Im z != 0
        raise np.linalg.LinAlgError(f"singular resolvent solve at z={z}") from exc


def check_resolvent_identity(h, h_tilde, z) -> float:
    """max |G - (G~ - G (h - h~) G~)| with G = (h - z)^-1, G~ = (h~ - z)^-1."""
    G = _resolvent(h, z)
    Gt = _resolvent(h_tilde, z)
    rhs = Gt - G @ (np.asarray(h) - np.asarray(h_tilde)) @ Gt
    return float(np.max(np.abs(G - rhs)))


def check_resolvent_expansion(h, z) -> float:
    """Residual of G(i,j) = zeta delta_ij - zeta sum_s G(i,s) h(s,j), zeta = -1/z."""
    G = _resolvent(h, z)
    zeta = -1.0 / complex(z)
    rhs = zeta * np.eye(G.shape[0]) - zeta * (G @ np.asarray(h))
    return float(np.max(np.abs(G - rhs)))


def check_resolvent_derivative(h, z, jk: tuple[int, int]) -> float:
    """Max deviation between dG/dh(j,k) by formula and by central differences.

    The symmetric perturbation moves h(j,k) and h(k,j) together, which is
    what the 1/(1 + delta_jk) factor in the formula accounts for.
    """
    h = np.asarray(h, dtype=float)
    j, k = jk
    G = _resolvent(h, z)
    formula = -(np.outer(G[:, j], G[k, :]) + np.outer(G[:, k], G[j, :])) / (1.0 + (j == k))
    step = 1e-6 * max(1.0, abs(h[j, k]))
    bump = np.zeros_like(h)
    bump[j, k] = bump[k, j] = step
    fd = (_resolvent(h + bump, z) - _resolvent(h - bump, z)) / (2.0 * step)
    return float(np.max(np.abs(formula - fd)))
