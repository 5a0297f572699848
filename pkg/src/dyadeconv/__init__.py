"""Constructive deconvolution of two-way dyadic error components.

Identifies the distributions of the row effect, column effect, and
idiosyncratic error in y_ij = c + alpha_i + eta_j + eps_ij from linked
triples, via characteristic-function ratio curves integrated across
isolated zeros, and recovers densities by regularized Fourier inversion.
"""

from .analytic import (
    PhiYSlices,
    analytic_cf,
    analytic_cf_deriv,
    analytic_density,
    compose_phi_Y_slices,
)
from .cf import PsiCurve, center, ecf, ecf_pair, ecf_partial_first, psi_from_curves
from .deconvolve import (
    DensityErrorReport,
    DensityEstimate,
    density_error_report,
    invert_cf,
)
from .identify import (
    DeltaSchedule,
    GridTooCoarseError,
    IdentificationError,
    PipelineResult,
    SingularSet,
    ZeroIsolationError,
    ZeroSet,
    classify_singular,
    delta_trace,
    detect_zeros,
    extend_by_continuity,
    identify_alpha,
    identify_alpha_oracle,
    identify_epsilon,
    identify_eta,
    identify_eta_oracle,
    identify_from_curves,
    integrate_psi_segment,
    reconstruct_cf,
    reconstruction_report,
    run_oracle_pipeline,
    run_pipeline,
)
from .model import (
    CFValidationReport,
    ComplexCurve,
    ComponentDist,
    FreqGrid,
    ModelConfig,
    SampleSet,
    TripleSample,
    hermitian_symmetrize,
    read_curve_csv,
    validate_cf_curve,
    write_curve_csv,
)
from .simulate import (
    component_generators,
    draw,
    read_samples,
    sample_components,
    write_samples,
)

__version__ = "0.1.0"

__all__ = [
    "CFValidationReport",
    "ComplexCurve",
    "ComponentDist",
    "DeltaSchedule",
    "DensityErrorReport",
    "DensityEstimate",
    "FreqGrid",
    "GridTooCoarseError",
    "IdentificationError",
    "ModelConfig",
    "PhiYSlices",
    "PipelineResult",
    "PsiCurve",
    "SampleSet",
    "SingularSet",
    "TripleSample",
    "ZeroIsolationError",
    "ZeroSet",
    "analytic_cf",
    "analytic_cf_deriv",
    "analytic_density",
    "center",
    "classify_singular",
    "compose_phi_Y_slices",
    "component_generators",
    "delta_trace",
    "density_error_report",
    "detect_zeros",
    "draw",
    "ecf",
    "ecf_pair",
    "ecf_partial_first",
    "extend_by_continuity",
    "hermitian_symmetrize",
    "identify_alpha",
    "identify_alpha_oracle",
    "identify_epsilon",
    "identify_eta",
    "identify_eta_oracle",
    "identify_from_curves",
    "integrate_psi_segment",
    "invert_cf",
    "psi_from_curves",
    "read_curve_csv",
    "read_samples",
    "reconstruct_cf",
    "reconstruction_report",
    "run_oracle_pipeline",
    "run_pipeline",
    "sample_components",
    "validate_cf_curve",
    "write_curve_csv",
    "write_samples",
]
