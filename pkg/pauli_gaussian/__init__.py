"""
Pauli Gaussian

Explicit Pfaffian amplitudes of fermionic Gaussian pure states in arbitrary
local Pauli bases, with formation probabilities, post-measurement
entanglement scans and a dense reference for small systems.
"""

__version__ = "1.0.0"

from .amplitude import AmplitudeRequest, amplitude, batch_amplitudes, evaluate
from .basis import PauliBasisSpec, SpinConfiguration, parse_basis, parse_configuration
from .config import EngineConfig, RunConfig, get_config
from .errors import (
    ContractViolation,
    NumericGuardError,
    ParseError,
    PauliGaussianError,
    UsageError,
)
from .models import TfimSpec, load_r_matrix, tfim_r_matrix
from .postmeasure import (
    MeasurementGeometry,
    PostMeasurementState,
    ReducedDensityMatrix,
    condition_on_outcome,
    decay_scan,
    fit_decay_exponent,
    reduced_density_matrix,
    renyi_entropy,
)
from .probentropy import (
    ProbabilityTable,
    SubregionOutcome,
    marginal_probability,
    max_probability_search,
    probability,
    shannon_renyi_entropy,
)
from .recursion import recursive_amplitude, recursive_amplitude_alt
from .skewlin import pfaffian
from .state import FermionConfiguration, GaussianPureState, make_state, random_state

__all__ = [
    "EngineConfig",
    "RunConfig",
    "get_config",
    "PauliGaussianError",
    "ContractViolation",
    "ParseError",
    "UsageError",
    "NumericGuardError",
    "pfaffian",
    "FermionConfiguration",
    "GaussianPureState",
    "make_state",
    "random_state",
    "PauliBasisSpec",
    "SpinConfiguration",
    "parse_basis",
    "parse_configuration",
    "AmplitudeRequest",
    "amplitude",
    "evaluate",
    "batch_amplitudes",
    "recursive_amplitude",
    "recursive_amplitude_alt",
    "ProbabilityTable",
    "SubregionOutcome",
    "probability",
    "marginal_probability",
    "shannon_renyi_entropy",
    "max_probability_search",
    "MeasurementGeometry",
    "PostMeasurementState",
    "ReducedDensityMatrix",
    "condition_on_outcome",
    "reduced_density_matrix",
    "renyi_entropy",
    "decay_scan",
    "fit_decay_exponent",
    "TfimSpec",
    "tfim_r_matrix",
    "load_r_matrix",
]
