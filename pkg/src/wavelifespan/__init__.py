"""Solver and lifespan laboratory for the 1D semilinear wave equation of
derivative type with characteristic weights."""

from .core import (
    CharField,
    Cause,
    Family,
    GridSpec,
    InitialData,
    LifespanEstimate,
    ModelParams,
    Regime,
    RegimeKind,
    Status,
    load_config,
    load_config_file,
    validate,
)
from .solver import march, picard_iterate, pde_residual, reconstruct_u, weighted_sup_norm
from .oracle import compare_fields, leapfrog_solve
from .theory import classify_regime, lifespan_bound, phase_diagram
from .harness import fit_exponent, make_epsilon_ladder, run_cli, sweep, verify_apriori

__all__ = [
    "CharField",
    "Cause",
    "Family",
    "GridSpec",
    "InitialData",
    "LifespanEstimate",
    "ModelParams",
    "Regime",
    "RegimeKind",
    "Status",
    "classify_regime",
    "compare_fields",
    "fit_exponent",
    "leapfrog_solve",
    "lifespan_bound",
    "load_config",
    "load_config_file",
    "make_epsilon_ladder",
    "march",
    "pde_residual",
    "phase_diagram",
    "picard_iterate",
    "reconstruct_u",
    "run_cli",
    "sweep",
    "validate",
    "verify_apriori",
    "weighted_sup_norm",
]

__version__ = "0.1.0"
