"""Certified subharmonic analysis of a periodically forced predator-prey map."""

from .interval import PrecisionInterval, PrecisionPolicy, PrecisionExhausted
from .polychain import ChainContext, IntPolynomial, build_chain_recurrence, check_structure
from .roots import CertifiedRoot, RootTable, isolate_positive_roots, check_interlacing
from .poincare import eval_E, eval_phi, fixed_points, orbit, poincare_map
from .twoperiodic import pitchfork_data, solve_2T, trace_2T_curve
from .continuation import build_atlas, local_expansion, min_order, trace_branch

__version__ = "0.1.0"

__all__ = [
    "PrecisionInterval", "PrecisionPolicy", "PrecisionExhausted",
    "ChainContext", "IntPolynomial", "build_chain_recurrence", "check_structure",
    "CertifiedRoot", "RootTable", "isolate_positive_roots", "check_interlacing",
    "eval_E", "eval_phi", "fixed_points", "orbit", "poincare_map",
    "pitchfork_data", "solve_2T", "trace_2T_curve",
    "build_atlas", "local_expansion", "min_order", "trace_branch",
]
