"""Simulation and theory for the long-range percolation random matrix ensemble."""

__version__ = "0.1.0"

from .ensemble import EnsembleSpec, EntryDistribution, sample_matrix  # noqa: E402
from .profiles import expansion_data, make_profile, parse_profile, profile_moments  # noqa: E402
from .spectra import eigenvalues_symmetric, resolvent_trace  # noqa: E402
from .theory import (  # noqa: E402
    TheoryContext,
    compute_B,
    compute_delta,
    compute_Q,
    compute_T,
    compute_xi,
    fit_scaling_exponent,
    semicircle_density,
    solve_w,
)

__all__ = [
    "EnsembleSpec",
    "EntryDistribution",
    "TheoryContext",
    "compute_B",
    "compute_delta",
    "compute_Q",
    "compute_T",
    "compute_xi",
    "eigenvalues_symmetric",
    "expansion_data",
    "fit_scaling_exponent",
    "make_profile",
    "parse_profile",
    "profile_moments",
    "resolvent_trace",
    "sample_matrix",
    "semicircle_density",
    "solve_w",
]
