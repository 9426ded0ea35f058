//! Bath correlation objects: PSD sampling, jump correlator, filter and the
//! characteristic bath scales.

mod correlator;
mod filter;
mod grid;
mod psd;
mod scales;

pub use correlator::{bath_correlation, jump_correlator, Correlator, CorrelatorKind, KernelEvaluator};
pub use filter::{filter_kernel, filtered_jump_correlator, phi_tilde, pipeline_cutoff};
pub use grid::FrequencyGrid;
pub use psd::{build_psd, format_psd_table, parse_psd_table, PsdModel, SampledPsd};
pub use scales::{
    bath_scales, bath_scales_with, discretization_epsilon, norm21_moments, uv_cutoff, uv_cutoff_with,
    BathScales, DiscretizationError, ScalesOptions,
};
