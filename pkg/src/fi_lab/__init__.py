"""Log-Sobolev constants, curvature and inequality checks for finite reversible chains."""

from .chain import ChainSpec, Observable, graph_distance, load_chain, save_chain, sparsity_d, validate_chain
from .constants import SolveReport, SolverOptions, solve_tls, solve_tmls
from .curvature import CurvatureReport, bakry_emery_kappa, curvature, kantorovich_dual, ollivier_kappa, wasserstein1
from .functionals import dirichlet, entropy, gamma, gamma2, generator_apply, lipschitz, phi_cost
from .generators import FamilyParams, battery, make_chain
from .semigroup import heat, relaxation_time
from .verify import CheckRecord, VerificationReport, check_lemmas, check_theorems, conjecture_probe, verify

__all__ = [
    "ChainSpec", "Observable", "graph_distance", "load_chain", "save_chain", "sparsity_d", "validate_chain",
    "SolveReport", "SolverOptions", "solve_tls", "solve_tmls",
    "CurvatureReport", "bakry_emery_kappa", "curvature", "kantorovich_dual", "ollivier_kappa", "wasserstein1",
    "dirichlet", "entropy", "gamma", "gamma2", "generator_apply", "lipschitz", "phi_cost",
    "FamilyParams", "battery", "make_chain",
    "heat", "relaxation_time",
    "CheckRecord", "VerificationReport", "check_lemmas", "check_theorems", "conjecture_probe", "verify",
]
