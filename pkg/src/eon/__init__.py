"""Energy-preserving Oren-Nayar BRDFs (QON, FON, EON) with analytic albedos,
clipped-LTC importance sampling and numerical validation tools."""

from .brdf import (
    DomainError,
    FonCoeffs,
    FonRoughness,
    Model,
    QonCoeffs,
    QonRoughness,
    eon_average_albedo,
    eon_directional_albedo,
    eval_eon,
    eval_fon,
    eval_lambert,
    eval_qon,
    fon_albedo_approx,
    fon_albedo_exact,
    fon_average_albedo,
    fon_coeffs,
    make_model,
    qon_average_albedo,
    qon_coeffs,
    qon_directional_albedo,
)
from .sampling import (
    DirectionalSample,
    LtcCoeffs,
    cltc_pdf,
    cltc_sample,
    ltc_coeffs,
    pdf_eon,
    sample_eon,
)

__version__ = "0.1.0"

__all__ = [
    "DirectionalSample", "DomainError", "FonCoeffs", "FonRoughness", "LtcCoeffs", "Model",
    "QonCoeffs", "QonRoughness", "cltc_pdf", "cltc_sample", "eon_average_albedo",
    "eon_directional_albedo", "eval_eon", "eval_fon", "eval_lambert", "eval_qon",
    "fon_albedo_approx", "fon_albedo_exact", "fon_average_albedo", "fon_coeffs", "ltc_coeffs",
    "make_model", "pdf_eon", "qon_average_albedo", "qon_coeffs", "qon_directional_albedo",
    "sample_eon",
]
