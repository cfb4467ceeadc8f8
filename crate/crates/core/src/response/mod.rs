//! Radial response: the frequency map and `ω*`, essential bands, the trace
//! bound on the number of gap eigenvalues, the Galerkin Birman–Schwinger
//! matrix `B(λ)` and the modes where its eigenvalues cross 1.

pub mod basis;
pub mod dense;
pub mod frequency;
pub mod kernel;
pub mod spectrum;
pub mod trace;

pub use basis::{build_basis, BasisFamily, PotentialDensityBasis};
pub use dense::{dense_reference, dense_top_eigenvalues};
pub use frequency::{
    build_frequency_map, build_frequency_map_on, essential_bands, fit_corner_expansion, phase_nodes, radial_frequency,
    Band, CornerExpansion, EssentialSpectrum, FrequencyMap, FrequencyModel, MapDomain, MapNode, OrbitalFrequency,
    PhaseNode,
};
pub use kernel::{assemble_response, prepare_response, ResponseKernel, DEFAULT_K_MAX, DEFAULT_MARGIN};
pub use spectrum::{
    eigencurves, lambda_grid, locate_modes, spectral_analysis, EigenCurves, Mode, SpectralConfig, SpectralDiagnostics,
    SpectralReport,
};
pub use trace::{
    divergence_diagnostic, kphi_trace_check, predicted_max_modes, rho_star, rho_star_order, trace_bound,
    trace_bound_radial, trace_on_grid, DivergenceReport, KphiTraces, RhoStar, TraceBound, Verdict,
};
