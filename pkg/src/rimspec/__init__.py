"""rimspec: qubit noise spectroscopy by sequential Ramsey measurements.

Simulates a qubit dephasing under classical stochastic noise, samples
sequential Ramsey interferometry outcomes, and reconstructs n-point noise
correlation functions, cumulants and polyspectra from the records, with
exact oracles for validation.  Units are MHz and µs throughout.
"""

from .engine import ExperimentConfig, RunReport, oracle_query, plan, reproduce, run_experiment
from .errors import (
    ConfigError,
    EstimationError,
    GridError,
    ParameterError,
    RepairError,
)
from .estimation import (
    CorrelationTensor,
    MomentAccumulator,
    SamplePlan,
    cumulants_to_moments,
    estimate_correlation,
    hoeffding_sample_size,
    moments_to_cumulants,
    repair_repeated_indices,
)
from .noise import (
    NoiseTrajectory,
    OuParams,
    TlfEnsembleParams,
    TlfParams,
    make_log_uniform_rates,
    sample_ensemble_trajectory,
    sample_ou_trajectory,
    sample_rtn_trajectory,
    substream,
)
from .protocol import (
    MeasurementModel,
    OutcomeRecord,
    RimConfig,
    conditional_expectation,
    outcome_probability,
    run_trajectory,
)
from .spectra import FrequencyGrid, Polyspectrum, frequency_grid, polyspectrum

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CorrelationTensor",
    "EstimationError",
    "ExperimentConfig",
    "FrequencyGrid",
    "GridError",
    "MeasurementModel",
    "MomentAccumulator",
    "NoiseTrajectory",
    "OuParams",
    "OutcomeRecord",
    "ParameterError",
    "Polyspectrum",
    "RepairError",
    "RimConfig",
    "RunReport",
    "SamplePlan",
    "TlfEnsembleParams",
    "TlfParams",
    "conditional_expectation",
    "cumulants_to_moments",
    "estimate_correlation",
    "frequency_grid",
    "hoeffding_sample_size",
    "make_log_uniform_rates",
    "moments_to_cumulants",
    "oracle_query",
    "outcome_probability",
    "plan",
    "polyspectrum",
    "repair_repeated_indices",
    "reproduce",
    "run_experiment",
    "run_trajectory",
    "sample_ensemble_trajectory",
    "sample_ou_trajectory",
    "sample_rtn_trajectory",
    "substream",
]
