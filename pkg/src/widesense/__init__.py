"""Blind wideband spectrum sensing for cognitive radio.

Marchenko-Pastur random-matrix utilities, GLRT-style noise-variance
estimation over subbands, eigenvalue detection statistics for cooperative
receiver arrays, Monte Carlo threshold calibration, and a reproducible
experiment harness.
"""

__version__ = "0.1.0"

from .calibration import (
    CalibrationConfig,
    CalibrationCurve,
    load_curve,
    pfa_at,
    save_curve,
    simulate_h0,
    threshold_for,
)
from .detectors import (
    DetectorStatistic,
    EigenSpectrum,
    SampleCovariance,
    agm_statistic,
    decide,
    energy_statistic,
    hermitian_eigenvalues,
    mp_edge_statistic,
    sample_covariance,
)
from .errors import (
    ConfigError,
    DegenerateCalibrationWarning,
    DegeneratePartitionError,
    DomainError,
    NumericalError,
)
from .noise import (
    NoiseEstimate,
    SubbandEnergies,
    SubbandPartition,
    UsagePrior,
    detect_boundaries,
    estimate_m,
    estimate_m_uniform,
    estimate_noise_scenario3,
    infer_subband_count,
    min_energy_noise,
    noise_variance,
    subband_energies,
)
from .rmt import (
    EmpiricalSpectralDistribution,
    MarchenkoPasturLaw,
    build_esd,
    ks_distance,
    mp_atom_mass,
    mp_cdf,
    mp_density,
    mp_support,
)
from .simulate import (
    PsdEstimate,
    ReceiverArray,
    SampleMatrix,
    SpectrumScene,
    Subband,
    estimate_psd,
    generate_narrowband_frame,
    generate_wideband_signal,
)

__all__ = [
    "__version__",
    "CalibrationConfig",
    "CalibrationCurve",
    "ConfigError",
    "DegenerateCalibrationWarning",
    "DegeneratePartitionError",
    "DetectorStatistic",
    "DomainError",
    "EigenSpectrum",
    "EmpiricalSpectralDistribution",
    "MarchenkoPasturLaw",
    "NoiseEstimate",
    "NumericalError",
    "PsdEstimate",
    "ReceiverArray",
    "SampleCovariance",
    "SampleMatrix",
    "SpectrumScene",
    "Subband",
    "SubbandEnergies",
    "SubbandPartition",
    "UsagePrior",
    "agm_statistic",
    "build_esd",
    "decide",
    "detect_boundaries",
    "energy_statistic",
    "estimate_m",
    "estimate_m_uniform",
    "estimate_noise_scenario3",
    "estimate_psd",
    "generate_narrowband_frame",
    "generate_wideband_signal",
    "hermitian_eigenvalues",
    "infer_subband_count",
    "ks_distance",
    "load_curve",
    "min_energy_noise",
    "mp_atom_mass",
    "mp_cdf",
    "mp_density",
    "mp_edge_statistic",
    "mp_support",
    "noise_variance",
    "pfa_at",
    "sample_covariance",
    "save_curve",
    "simulate_h0",
    "subband_energies",
    "threshold_for",
]
