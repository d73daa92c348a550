"""Local hidden-variable models of Bell tests and entanglement swapping.

Directions are (theta_deg, phi_deg) pairs.
"""

from ._lhvswap import (
    ConfigError,
    angle_sweep,
    fidelity_curve,
    oracle_bell_result_prob,
    oracle_complete_swap_correlation,
    oracle_fidelity_curve,
    oracle_limit_for_result_prob,
    partial_swap_correlation,
    partial_swap_full_coincidence_prob,
    partial_swap_singlet_prob,
    partial_swap_visibility,
    quantum_outcome_correlation,
    run,
    singlet_correlation,
    sweep_limit,
    verify,
)

__all__ = [
    "ConfigError",
    "angle_sweep",
    "fidelity_curve",
    "oracle_bell_result_prob",
    "oracle_complete_swap_correlation",
    "oracle_fidelity_curve",
    "oracle_limit_for_result_prob",
    "partial_swap_correlation",
    "partial_swap_full_coincidence_prob",
    "partial_swap_singlet_prob",
    "partial_swap_visibility",
    "quantum_outcome_correlation",
    "run",
    "singlet_correlation",
    "sweep_limit",
    "verify",
]
