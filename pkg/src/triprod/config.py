"""Global numeric tolerances.

Every pass/fail threshold in the package reads from the single
``TOLERANCES`` record below, so a verification run is reproducible and a
user who needs looser or tighter gates edits exactly one object.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Tolerances:
    # Group-element invariants
    metric: float = 1e-12        # |g^T J g - J| max entry
    det: float = 1e-10           # |det g - 1|
    iwasawa_roundtrip: float = 1e-10
    orthogonality: float = 1e-12  # |k^T k - I| max entry
    entry_formula: float = 1e-10  # agreement of e^t with the last-column formula

    # Orbit analysis
    rank_svd: float = 1e-9       # singular-value cutoff on unit base points

    # Special functions
    log_gamma_rel: float = 1e-12
    gamma_symmetry: float = 1e-12

    # Quadrature
    default_quad_tol: float = 1e-6
    tail_fraction: float = 0.1   # tail_bound target as a fraction of tol

    # Identity suites
    recursion_residual: float = 1e-4
    ratio_spread: float = 1e-3


TOLERANCES = Tolerances()
