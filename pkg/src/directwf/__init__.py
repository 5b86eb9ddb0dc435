"""Direct wavefunction tomography with a qubit pointer.

Simulates weak-, strong- and arbitrary-strength coupling experiments on pure
and mixed states, reconstructs states from pointer statistics and evaluates
closed-form accuracy and precision predictions.
"""
from ._version import __version__
from .analysis import (
    AccuracyReport,
    PrecisionReport,
    accuracy_D,
    delta_psi_S,
    delta_psi_S_upper_bound,
    delta_psi_W,
    delta_psi_W_lower_bound,
    delta_psi_arbitrary,
    dwt_closed_form,
    dwt_error_bound,
    mixed_accuracy_D,
    mixed_rho_W_closed_form,
    precision_report,
    ratio_bound,
)
from .coupling import CouplingAngle, epsilon_theta
from .errors import ConfigError, DegenerateInputError, InvalidArgumentError
from .measurement import (
    PointerDensity,
    PointerProbabilities,
    SamplingScheme,
    ShotCounts,
    coupling_unitary,
    exact_pointer_probabilities,
    momentum_state,
    pointer_density_mixed,
    povm_elements,
    sample_counts,
)
from .reconstruction import (
    Method,
    ReconstructionResult,
    arbitrary_theta_estimate,
    dst_estimate,
    dwt_estimate,
    mixed_dst_estimate,
    mixed_dwt_estimate,
    pointer_tomography,
)
from .states import (
    DensityMatrix,
    StateVector,
    WavefunctionStats,
    haar_random_state,
    normalize_and_fix_phase,
    random_density_matrix,
    trace_distance_mixed,
    trace_distance_pure,
    wavefunction_stats,
)

__all__ = [
    "CouplingAngle", "epsilon_theta", "ConfigError", "DegenerateInputError", "InvalidArgumentError",
    "__version__", "AccuracyReport", "PrecisionReport", "accuracy_D", "delta_psi_S",
    "delta_psi_S_upper_bound", "delta_psi_W", "delta_psi_W_lower_bound", "delta_psi_arbitrary",
    "dwt_closed_form", "dwt_error_bound", "mixed_accuracy_D", "mixed_rho_W_closed_form",
    "precision_report", "ratio_bound", "PointerDensity", "PointerProbabilities", "SamplingScheme",
    "ShotCounts", "coupling_unitary", "exact_pointer_probabilities", "momentum_state",
    "pointer_density_mixed", "povm_elements", "sample_counts", "Method", "ReconstructionResult",
    "arbitrary_theta_estimate", "dst_estimate", "dwt_estimate", "mixed_dst_estimate",
    "mixed_dwt_estimate", "pointer_tomography", "DensityMatrix", "StateVector", "WavefunctionStats",
    "haar_random_state", "normalize_and_fix_phase", "random_density_matrix", "trace_distance_mixed",
    "trace_distance_pure", "wavefunction_stats",
]
