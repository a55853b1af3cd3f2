"""Command-line front end.

Usage::

    python -m lrperc <subcommand> [--config FILE] [--key value ...]
                     [--out PREFIX] [--format csv|json|both] [--plot] [--workers K]

A config file holds ``key = value`` lines (``#`` starts a comment); flags
override file values.  Complex values are written ``re,im``; a value that
starts with a minus sign needs the ``--key=value`` form.  Lists (``z``,
``separations``, ``q``, ``ladder``) are separated by ``;``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cumulant import LAWS, Law, expansion_check, function_library
from .ensemble import DISTRIBUTIONS, EnsembleSpec, EntryDistribution
from .montecarlo import (
    WORKERS_ENV,
    correlation_vs_theory,
    default_workers,
    json_default,
    density_experiment,
    estimate_resolvent_stats,
    variance_scaling_experiment,
    write_csv,
    write_json,
)
from .profiles import KINDS, ProfileError, make_profile, parse_profile
from .theory import (
    TheoryContext,
    compare_T_forms,
    compute_B,
    compute_delta,
    compute_Q,
    compute_xi,
    fit_scaling_exponent,
    semicircle_density,
    solve_w,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main"]


class ConfigError(ValueError):
    pass


# -- value parsers --------------------------------------------------------------


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError("expected an integer")
    return int(value)


def _pos_int(text):
    value = _int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _seed(text):
    value = int(text, 0) if isinstance(text, str) else int(text)
    if not 0 <= value < 2**64:
        raise ValueError("must fit in 64 unsigned bits")
    return value


def _pos_float(text):
    value = float(text)
    if not value > 0.0 or not math.isfinite(value):
        raise ValueError("must be a positive finite number")
    return value


def _complex(text):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ValueError("expected 're,im'")
    return complex(float(parts[0]), float(parts[1]))


def _nonreal(text):
    z = _complex(text)
    if z.imag == 0.0:
        raise ValueError("must be non-real")
    return z


def _list(item):
    def parse(text):
        items = [s.strip() for s in str(text).split(";") if s.strip()]
        if not items:
            raise ValueError("empty list")
        return [item(s) for s in items]

    return parse


def _rung(text):
    N, sep, b = text.partition(":")
    if not sep:
        raise ValueError("rungs are written N:b")
    N = _pos_int(N)
    if N % 2 == 0:
        raise ValueError(f"N={N} must be odd")
    return (N, float(b))


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


KEYS = {
    "n": (_int, "half-size; N = 2n + 1"),
    "b": (_pos_float, "bandwidth parameter, 1 <= b <= N"),
    "v": (_pos_float, "entry scale"),
    "dist": (_choice(DISTRIBUTIONS), "entry distribution"),
    "profile": (str, "profile kind, optionally kind:nu=<float>"),
    "nu": (float, "profile exponent for stable / power_law"),
    "seed": (_seed, "64-bit master seed"),
    "reps": (_pos_int, "number of realizations R"),
    "reps_max": (_pos_int, "replication budget for adaptive R"),
    "bins": (_pos_int, "histogram bins over [-2v-1, 2v+1]"),
    "z": (_list(_nonreal), "spectral parameters re,im separated by ';'"),
    "z1": (_nonreal, "first spectral parameter re,im"),
    "z2": (_nonreal, "second spectral parameter re,im"),
    "ladder": (_list(_rung), "rungs N:b separated by ';'"),
    "lambda": (float, "centre of the separation sweep"),
    "lambda1": (float, "first spectral point for xi"),
    "lambda2": (float, "second spectral point for xi"),
    "separations": (_list(_pos_float), "separations separated by ';'"),
    "method": (_choice(("richardson", "boundary")), "boundary-value method for xi"),
    "form": (_choice(("canonical", "rewrite")), "form of T"),
    "delta_form": (_choice(("percolation", "band")), "which Delta enters T"),
    "law": (_choice(LAWS + ("all",)), "law for cumulant-check"),
    "q": (_list(_int), "expansion orders separated by ';'"),
}

_ENSEMBLE = ("n", "b", "v", "dist", "profile", "nu", "seed", "reps")
SUBCOMMANDS = {
    "density": (_ENSEMBLE + ("bins",), ("n", "b")),
    "stats": (_ENSEMBLE + ("z",), ("n", "b", "z")),
    "scaling": (("ladder", "z1", "v", "dist", "profile", "nu", "seed", "reps"), ("ladder", "z1")),
    "correlation": (_ENSEMBLE + ("z1", "z2", "reps_max"), ("n", "b", "z1", "z2")),
    "theory": (("v", "dist", "profile", "nu", "z1", "z2", "lambda1", "lambda2", "form", "delta_form"), ("z1", "z2")),
    "exponent": (("v", "dist", "profile", "nu", "lambda", "separations", "method"), ()),
    "cumulant-check": (("law", "q", "v"), ()),
    "selftest": ((), ()),
}
DEFAULTS = {
    "v": 1.0,
    "dist": "gaussian",
    "profile": "gaussian",
    "seed": 0,
    "reps": 100,
    "bins": 60,
    "lambda": 0.0,
    "separations": [1e-2 * 10.0 ** (-k / 2.0) for k in range(7)],
    "method": "richardson",
    "form": "canonical",
    "delta_form": "percolation",
    "law": "all",
    "q": [1, 3, 5],
}
PLOTTABLE = ("density", "scaling", "correlation", "exponent")


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    out: str | None = None
    format: str = "both"
    plot: bool = False
    workers: int | None = None
    sources: dict = field(default_factory=dict)

    def effective(self) -> dict:
        """Plain-JSON view of every parameter in force."""
        out = {}
        for k, v in self.params.items():
            if isinstance(v, complex):
                out[k] = [v.real, v.imag]
            elif isinstance(v, list):
                out[k] = [[x.real, x.imag] if isinstance(x, complex) else list(x) if isinstance(x, tuple) else x for x in v]
            else:
                out[k] = v
        return out


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        values[key] = value.strip()
    return values


def _build_parser():
    parser = argparse.ArgumentParser(prog="lrperc", description="Long-range percolation ensemble: simulation and theory.")
    parser.add_argument("--version", action="version", version=f"lrperc {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, (keys, _) in SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="file of 'key = value' lines")
        p.add_argument("--out", help="output path prefix (PREFIX.csv, PREFIX.json)")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
        p.add_argument("--plot", action="store_true", help="also write PREFIX_plot.py")
        p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
        for key in keys:
            p.add_argument(f"--{key}", dest=f"key_{key}", metavar="VALUE", help=KEYS[key][1])
    return parser


def parse_config(argv, config_path: str | None = None) -> RunConfig:
    """Parse flags (and an optional config file) into a validated RunConfig."""
    ns = _build_parser().parse_args(list(argv))
    name = ns.subcommand
    allowed, required = SUBCOMMANDS[name]
    raw, sources = {}, {}
    path = ns.config or config_path
    if path:
        for key, value in read_config_file(path).items():
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} for {name} in {path}")
            raw[key] = value
            sources[key] = "file"
    for key in allowed:
        value = getattr(ns, f"key_{key}")
        if value is not None:
            raw[key] = value
            sources[key] = "flag"
    params = {}
    for key, text in raw.items():
        parser = KEYS[key][0]
        try:
            params[key] = parser(text)
        except (ValueError, TypeError) as exc:
            if key in ("z", "z1", "z2") and "non-real" in str(exc):
                raise ConfigError(f"{key} must be non-real (got {text!r})") from exc
            raise ConfigError(f"malformed value for {key!r}: {text!r} ({exc})") from exc
    for key in required:
        if key not in params:
            raise ConfigError(f"missing required key {key!r} for {name}")
    for key in allowed:
        if key not in params and key in DEFAULTS:
            params[key] = DEFAULTS[key]
            sources[key] = "default"
    if ns.workers is not None and ns.workers < 1:
        raise ConfigError("workers must be a positive integer")
    cfg = RunConfig(name, params, ns.out, ns.format, ns.plot, ns.workers, sources)
    _validate(cfg)
    return cfg


def _profile(params):
    text = params.get("profile", "gaussian")
    nu = params.get("nu")
    try:
        if ":" in text:
            if nu is not None:
                raise ConfigError("nu given both in 'profile' and as 'nu'")
            return parse_profile(text)
        if text not in KINDS:
            raise ConfigError(f"unknown profile kind {text!r} for 'profile'")
        return make_profile(text, nu)
    except ProfileError as exc:
        raise ConfigError(f"invalid 'profile': {exc}") from exc


def _validate(cfg: RunConfig) -> None:
    p = cfg.params
    name = cfg.subcommand
    if "profile" in p:
        cfg.params["_profile"] = _profile(p)
    if "n" in p:
        if p["n"] < 0:
            raise ConfigError("'n' must be non-negative")
        N = 2 * p["n"] + 1
        if not 1.0 <= p["b"] <= N:
            raise ConfigError(f"'b' must lie in [1, N={N}], got {p['b']}")
    eta = 2.0 * p.get("v", 1.0) + 1.0
    if name in ("scaling", "correlation"):
        for key in ("z1", "z2"):
            if key in p and abs(p[key].imag) < eta:
                raise ConfigError(f"'{key}' must satisfy |Im z| >= 2v+1 = {eta:g}")
    if name == "scaling":
        for N, b in p["ladder"]:
            if not 1.0 <= b <= N:
                raise ConfigError(f"'ladder' rung {N}:{b} has b outside [1, N]")
        if len(p["ladder"]) < 3:
            raise ConfigError("'ladder' needs at least 3 rungs")
    if name == "theory" and ("lambda1" in p) != ("lambda2" in p):
        raise ConfigError("'lambda1' and 'lambda2' must be given together")
    if name == "exponent" and len(p["separations"]) < 4:
        raise ConfigError("'separations' needs at least 4 values")
    if "q" in p:
        bad = [q for q in p["q"] if q not in (1, 3, 5)]
        if bad:
            raise ConfigError(f"'q' values must be 1, 3 or 5, got {bad}")
    if cfg.plot and name not in PLOTTABLE:
        raise ConfigError(f"--plot is available for {', '.join(PLOTTABLE)}, not {name}")
    if cfg.plot and cfg.out is None:
        raise ConfigError("--plot needs --out")


# -- subcommands ------------------------------------------------------------------


def _spec(p, n=None, b=None):
    dist = EntryDistribution(p["dist"], p["v"])
    return EnsembleSpec(p["n"] if n is None else n, p["b"] if b is None else b, dist, p["_profile"])


def _ctx(p):
    return TheoryContext(p["v"], p["_profile"], p["dist"])


def _cz(z):
    return {"re": z.real, "im": z.imag}


def _cmd_density(cfg):
    p = cfg.params
    spec = _spec(p)
    res = density_experiment(spec, p["reps"], p["bins"], p["seed"], workers=cfg.workers)
    summary = {"l1": res.l1, "mass": res.mass, "outside_fraction": res.outside_fraction,
               "tail_fraction": res.tail_fraction, "N": spec.N, "b": spec.b}
    text = f"L1 distance to semicircle: {res.l1:.5f}  (N={spec.N}, b={spec.b:g}, R={res.R})"
    return res.rows(), summary, text


def _cmd_stats(cfg):
    p = cfg.params
    rep = estimate_resolvent_stats(_spec(p), p["z"], p["reps"], p["seed"], workers=cfg.workers)
    lines = [f"{e.statistic:10s} z1={e.z1} value={e.value:.6g} stderr={e.stderr:.2g}" for e in rep.estimates]
    return rep.rows(), {"N": rep.spec["N"], "b": rep.spec["b"]}, "\n".join(lines)


def _cmd_scaling(cfg):
    p = cfg.params
    ladder = [_spec(p, n=(N - 1) // 2, b=b) for N, b in p["ladder"]]
    rows = variance_scaling_experiment(ladder, p["z1"], p["reps"], p["seed"], workers=cfg.workers)
    vals = [r.nb_var for r in rows]
    spread = max(vals) / min(vals) - 1.0
    out = [{"N": r.N, "b": r.b, "nb_var": r.nb_var, "stderr": r.stderr, "R": r.R, "seed": p["seed"],
            "z_re": p["z1"].real, "z_im": p["z1"].imag} for r in rows]
    text = "\n".join(f"N={r.N:5d} b={r.b:7g}  Nb Var = {r.nb_var:.5g} +- {r.stderr:.2g}" for r in rows)
    return out, {"relative_spread": spread}, text + f"\nmax/min - 1 = {spread:.3f}"


def _cmd_correlation(cfg):
    p = cfg.params
    spec = _spec(p)
    rec = correlation_vs_theory(spec, p["z1"], p["z2"], p["reps"], p["seed"],
                                R_max=p.get("reps_max"), workers=cfg.workers)
    base = {"z1_re": p["z1"].real, "z1_im": p["z1"].imag, "z2_re": p["z2"].real, "z2_im": p["z2"].imag,
            "R": rec.R, "N": spec.N, "b": spec.b, "seed": p["seed"]}
    rows = [
        {"statistic": "nb_cov", "value_re": rec.nb_cov.real, "value_im": rec.nb_cov.imag, "stderr": rec.stderr, **base},
        {"statistic": "T", "value_re": rec.T.real, "value_im": rec.T.imag, "stderr": 0.0, **base},
        {"statistic": "difference", "value_re": rec.difference.real, "value_im": rec.difference.imag, "stderr": rec.stderr, **base},
    ]
    summary = {"z_score": rec.z_score, "envelope": rec.envelope, "within_envelope": rec.within_envelope,
               "target_met": rec.target_met}
    text = (f"Nb*C = {rec.nb_cov:.6g} +- {rec.stderr:.2g}   T = {rec.T:.6g}   "
            f"|diff| = {abs(rec.difference):.3g} ({rec.z_score:.2f} stderr)")
    return rows, summary, text


def _cmd_theory(cfg):
    p = cfg.params
    ctx = _ctx(p)
    z1, z2 = p["z1"], p["z2"]
    w1, w2 = solve_w(ctx, z1), solve_w(ctx, z2)
    delta = compute_delta(ctx)
    Q = compute_Q(ctx, z1, z2)
    forms = compare_T_forms(ctx, z1, z2, delta_form=p["delta_form"])
    T = forms.canonical if p["form"] == "canonical" else forms.rewrite
    exp = ctx.expansion
    B = compute_B(exp.nu, exp.c1) if exp is not None else math.nan
    values = [("w1", z1, None, w1), ("w2", z2, None, w2), ("Q", z1, z2, Q), ("T", z1, z2, T),
              ("T_canonical", z1, z2, forms.canonical), ("T_rewrite", z1, z2, forms.rewrite)]
    scalars = {"rho_sc_0": semicircle_density(ctx, 0.0), "delta": delta.delta, "delta_band": delta.delta_band,
               "B": B, "form_discrepancy": forms.discrepancy}
    if "lambda1" in p:
        scalars["nb_xi"] = compute_xi(ctx, p["lambda1"], p["lambda2"], delta_form=p["delta_form"], form=p["form"])
    nan = complex(math.nan, math.nan)
    rows = []
    for name, a, b, val in values:
        b = nan if b is None else b
        rows.append({"statistic": name, "z1_re": a.real, "z1_im": a.imag, "z2_re": b.real, "z2_im": b.imag,
                     "value_re": complex(val).real, "value_im": complex(val).imag})
    for name, val in scalars.items():
        rows.append({"statistic": name, "z1_re": nan.real, "z1_im": nan.imag, "z2_re": nan.real, "z2_im": nan.imag,
                     "value_re": float(val), "value_im": 0.0})
    summary = {"w1": _cz(w1), "w2": _cz(w2), "Q": _cz(Q), "T": _cz(T), **scalars}
    text = "\n".join(f"{r['statistic']:12s} {r['value_re']:.10g} {r['value_im']:+.10g}i" for r in rows)
    return rows, summary, text


def _cmd_exponent(cfg):
    p = cfg.params
    ctx = _ctx(p)
    fit = fit_scaling_exponent(ctx, p["lambda"], p["separations"], method=p["method"])
    rows = [{"separation": float(s), "nb_xi": float(x)} for s, x in zip(fit.separations, fit.values)]
    summary = {"slope": fit.slope, "stderr": fit.stderr, "residual": fit.residual,
               "expected_slope": fit.expected_slope, "amplitude": fit.amplitude,
               "predicted_amplitude": fit.predicted_amplitude}
    text = f"slope = {fit.slope:.5f} +- {fit.stderr:.1g}   (expected {fit.expected_slope})"
    return rows, summary, text


def _cmd_cumulant(cfg):
    p = cfg.params
    laws = LAWS if p["law"] == "all" else (p["law"],)
    rows = []
    for law in laws:
        for F in function_library():
            for q in p["q"]:
                c = expansion_check(Law(law, p["v"]), F, q)
                lhs, rhs = complex(c.lhs), complex(c.rhs)
                rows.append({"law": law, "function": c.function, "q": q, "lhs_re": lhs.real, "lhs_im": lhs.imag,
                             "rhs_re": rhs.real, "rhs_im": rhs.imag, "gap": c.gap, "bound": c.bound,
                             "within_bound": int(c.within_bound)})
    exceeded = sum(1 - r["within_bound"] for r in rows)
    lines = [f"{r['law']:10s} {r['function']:10s} q={r['q']}  gap={r['gap']:.3e}  bound={r['bound']:.3e}"
             for r in rows]
    return rows, {"checks": len(rows), "bound_exceeded": exceeded}, "\n".join(lines)


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Fast invariant checks; each entry is (name, passed, detail)."""
    from .spectra import (
        check_resolvent_derivative,
        check_resolvent_identity,
        eigenvalues_symmetric,
        sturm_oracle_eigenvalues,
        trace_identity_errors,
    )
    from .ensemble import sample_matrix
    from .theory import B_closed_form

    rng = np.random.default_rng(20240601)
    out = []
    z = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    worst, branch = 0.0, True
    for v in (0.5, 1.0, 2.0):
        w = solve_w(v, z)
        worst = max(worst, float(np.max(np.abs(v * v * w * w + z * w + 1))))
        branch &= bool(np.all(w.imag * z.imag > 0))
    out.append(("fixed point", worst < 1e-12 and branch, f"max residual {worst:.1e}"))
    out.append(("semicircle at 0", abs(semicircle_density(1.0, 0.0) - 1 / math.pi) < 1e-12, ""))
    errs = [abs(compute_B(nu, 1.0) / B_closed_form(nu, 1.0) - 1) for nu in (1.1, 1.5, 2.0, 3.0)]
    out.append(("B quadrature", max(errs) < 1e-8, f"max rel err {max(errs):.1e}"))
    a = rng.normal(size=(50, 50))
    a = a + a.T
    a2 = rng.normal(size=(50, 50))
    a2 = a2 + a2.T
    res = max(check_resolvent_identity(a, a2, zz) for zz in (3j, 1 + 2j))
    der = max(check_resolvent_derivative(a, zz, (3, 7)) for zz in (3j, 1 + 2j))
    out.append(("resolvent identity", res < 1e-10, f"{res:.1e}"))
    out.append(("resolvent derivative", der < 1e-6, f"{der:.1e}"))
    ref = sturm_oracle_eigenvalues(a)
    rel = 0.0
    for method in ("lapack", "householder"):
        lam = eigenvalues_symmetric(a, method).eigenvalues
        rel = max(rel, float(np.max(np.abs(lam - ref) / np.maximum(np.abs(ref), 1e-6 * np.abs(ref).max()))))
    out.append(("eigensolver vs bisection", rel <= 1e-8, f"{rel:.1e}"))
    m = sample_matrix(EnsembleSpec(30, 6.0), 1, 0)
    t1, t2 = trace_identity_errors(eigenvalues_symmetric(m), m)
    out.append(("sample symmetry and traces", bool(np.array_equal(m.matrix, m.matrix.T)) and t1 < 1e-9 and t2 < 1e-8, ""))
    fails = [c for c in (expansion_check("gaussian", F, 1) for F in function_library()) if c.gap >= 1e-9]
    out.append(("gaussian Stein identity", not fails, ""))
    return out


def _cmd_selftest(cfg):
    checks = selftest_checks()
    rows = [{"check": name, "passed": int(ok), "detail": detail} for name, ok, detail in checks]
    text = "\n".join(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}" for name, ok, detail in checks)
    return rows, {"passed": all(ok for _, ok, _ in checks)}, text


COMMANDS = {
    "density": _cmd_density,
    "stats": _cmd_stats,
    "scaling": _cmd_scaling,
    "correlation": _cmd_correlation,
    "theory": _cmd_theory,
    "exponent": _cmd_exponent,
    "cumulant-check": _cmd_cumulant,
    "selftest": _cmd_selftest,
}


# -- plot scripts -----------------------------------------------------------------

_PLOT_HEAD = '''"""Plot {name} results from {csv}; run with python."""
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

with open({csv!r}, newline="") as fh:
    rows = list(csv.DictReader(fh))
col = lambda key: [float(r[key]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
'''

_PLOT_BODY = {
    "density": '''centres = [(a + b) / 2 for a, b in zip(col("bin_lo"), col("bin_hi"))]
widths = [b - a for a, b in zip(col("bin_lo"), col("bin_hi"))]
ax.bar(centres, col("density"), width=widths, alpha=0.5, label="eigenvalues")
ax.plot(centres, col("semicircle"), "k-", label="semicircle")
ax.set_xlabel("lambda")
ax.set_ylabel("density")
''',
    "scaling": '''ax.errorbar(col("N"), col("nb_var"), yerr=col("stderr"), fmt="o-")
ax.set_xscale("log")
ax.set_xlabel("N")
ax.set_ylabel("N b Var g(z)")
''',
    "correlation": '''names = [r["statistic"] for r in rows]
ax.bar(names, col("value_re"), yerr=col("stderr"))
ax.set_ylabel("real part")
''',
    "exponent": '''ax.loglog(col("separation"), [abs(x) for x in col("nb_xi")], "o-")
ax.set_xlabel("|lambda1 - lambda2|")
ax.set_ylabel("|N b Xi|")
''',
}

_PLOT_TAIL = '''ax.legend() if ax.get_legend_handles_labels()[0] else None
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
'''


def plot_script(name: str, csv_path: str, png_path: str) -> str:
    return _PLOT_HEAD.format(name=name, csv=csv_path) + _PLOT_BODY[name] + _PLOT_TAIL.format(png=png_path)


# -- run / main -------------------------------------------------------------------


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit code."""
    if cfg.workers is None:
        cfg.workers = default_workers()
    t0 = time.perf_counter()
    rows, summary, text = COMMANDS[cfg.subcommand](cfg)
    payload = {
        "version": __version__,
        "subcommand": cfg.subcommand,
        "config": {k: v for k, v in cfg.effective().items() if not k.startswith("_")},
        "seed": cfg.params.get("seed"),
        "workers": cfg.workers,
        "wall_time": time.perf_counter() - t0,
        "results": summary,
    }
    if cfg.out is None:
        if cfg.format == "csv":
            write_csv(sys.stdout, rows)
        elif cfg.format == "json":
            print(json.dumps(payload, indent=2, default=json_default))
        else:
            print(text)
    else:
        csv_path, json_path = cfg.out + ".csv", cfg.out + ".json"
        # the plot script reads the CSV, so --plot always writes it
        if cfg.format in ("csv", "both") or cfg.plot:
            write_csv(csv_path, rows)
        if cfg.format in ("json", "both"):
            payload["csv"] = csv_path if cfg.format == "both" or cfg.plot else None
            write_json(json_path, payload)
        if cfg.plot:
            with open(cfg.out + "_plot.py", "w", encoding="utf-8") as fh:
                fh.write(plot_script(cfg.subcommand, csv_path, cfg.out + ".png"))
        print(text)
    if cfg.subcommand == "selftest" and not summary["passed"]:
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"lrperc: error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"lrperc: {cfg.subcommand} failed: {exc}", file=sys.stderr)
        return 1
