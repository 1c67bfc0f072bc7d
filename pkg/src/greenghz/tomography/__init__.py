from .calibration import CalibrationResult, calibrate_phase, cross_probabilities, default_grid
from .design import MeasurementData, TomographyDesign, design, measurement_data
from .reconstruct import (
    ReconstructionResult,
    bootstrap_fidelities,
    bootstrap_sigma,
    linear_inversion,
    mle_reconstruct,
    reconstruct,
)

__all__ = [
    "CalibrationResult",
    "MeasurementData",
    "ReconstructionResult",
    "TomographyDesign",
    "bootstrap_fidelities",
    "bootstrap_sigma",
    "calibrate_phase",
    "cross_probabilities",
    "default_grid",
    "design",
    "linear_inversion",
    "measurement_data",
    "mle_reconstruct",
    "reconstruct",
]
