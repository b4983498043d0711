"""Desk-scale numerical laboratory for Muskat/Hele-Shaw interface dynamics.

Everything is organized around the Dirichlet-Neumann operator of the fluid
columns: the interface moves by d(eta)/dt = -(1/mu-) G-(eta) f- (one phase:
f- = kappa eta), with the elliptic solves done in straightened coordinates,
a discrete paradifferential toolbox for structure diagnostics, and a CLI
harness for reproducible experiments.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .spectral import (
    SpectralFunction,
    TorusGrid,
    apply_multiplier,
    dealias,
    derivative,
    l2_inner,
    l2_norm,
    lp_project,
    multiply,
    sobolev_norm,
)
from .geometry import (
    DomainGeometry,
    Empty,
    FlatDepth,
    Sampled,
    StraightenedMap,
    build_paper_map,
    build_sigma_map,
    coefficients_from_map,
)
from .dn import (
    DNOperator,
    DNOutput,
    dn_apply,
    evaluate_dn,
    compute_b_v,
    flat_dn_multiplier,
    solve_elliptic,
)
from .paradiff import (
    CutoffPair,
    SymbolField,
    apply_paradiff,
    bony_remainder,
    parabolic_step,
    paralinearize_dn,
    symbol_lambda,
    symbols_a_a_upper,
)
from .twophase import (
    TwoPhaseConfig,
    TwoPhaseSolution,
    rayleigh_taylor,
    reduced_coefficients,
    solve_interface_potentials,
)
from .evolution import (
    EvolutionConfig,
    MonitorRecord,
    run_simulation,
    step_one_phase,
    step_two_phase,
)

__all__ = [
    "BACKEND",
    "__version__",
    "SpectralFunction",
    "TorusGrid",
    "apply_multiplier",
    "dealias",
    "derivative",
    "l2_inner",
    "l2_norm",
    "lp_project",
    "multiply",
    "sobolev_norm",
    "DomainGeometry",
    "Empty",
    "FlatDepth",
    "Sampled",
    "StraightenedMap",
    "build_paper_map",
    "build_sigma_map",
    "coefficients_from_map",
    "DNOperator",
    "DNOutput",
    "dn_apply",
    "evaluate_dn",
    "compute_b_v",
    "flat_dn_multiplier",
    "solve_elliptic",
    "CutoffPair",
    "SymbolField",
    "apply_paradiff",
    "bony_remainder",
    "parabolic_step",
    "paralinearize_dn",
    "symbol_lambda",
    "symbols_a_a_upper",
    "TwoPhaseConfig",
    "TwoPhaseSolution",
    "rayleigh_taylor",
    "reduced_coefficients",
    "solve_interface_potentials",
    "EvolutionConfig",
    "MonitorRecord",
    "run_simulation",
    "step_one_phase",
    "step_two_phase",
]
