"""Local dimension spectra of Bernoulli measures on Bedford-McMullen carpets."""
from bmcarpet.carpet import (
    AttractorProfile,
    BernoulliWeights,
    CarpetSpec,
    DomainError,
    FullSpectrumReport,
    TwoRowMeasure,
    ValidationError,
    alpha_range,
    attractor_profile,
    full_spectrum_conditions,
    validate_carpet,
)
from bmcarpet.kernels import BACKEND
from bmcarpet.spectra import (
    SpectrumPoint,
    alpha_of_beta,
    dim_of_beta,
    exceptional_q0,
    fixed_point_P,
    hausdorff_spectrum,
    packing_spectrum,
    ratio_A,
    single_level_bound,
    spectrum_curve,
    y_tilde,
)

__version__ = "0.1.0"

__all__ = [
    "AttractorProfile",
    "BACKEND",
    "BernoulliWeights",
    "CarpetSpec",
    "DomainError",
    "SpectrumPoint",
    "FullSpectrumReport",
    "TwoRowMeasure",
    "ValidationError",
    "alpha_of_beta",
    "alpha_range",
    "attractor_profile",
    "dim_of_beta",
    "exceptional_q0",
    "fixed_point_P",
    "hausdorff_spectrum",
    "packing_spectrum",
    "ratio_A",
    "single_level_bound",
    "spectrum_curve",
    "full_spectrum_conditions",
    "validate_carpet",
    "y_tilde",
]
