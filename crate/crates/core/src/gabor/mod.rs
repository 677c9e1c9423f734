//! Time-frequency analysis on the cyclic grid `Z_n` and Gabor selection.

mod pipeline;
mod system;
mod tf;

pub use pipeline::{
    gabor_rit_pipeline, gabor_rit_pipeline_union, half_lattice_reference, half_lattice_step, parseval_window, GaborAddendum, GaborConfig,
    GaborResult,
};
pub use system::{gabor_system, gabor_system_union, molecule_check, nearest_lattice_map, MoleculeReport, MoleculeSystem, TFSet, MOLECULE_TOL};
pub use tf::{
    modulation_norm, s0_diagnostic, stft, tf_shift, ModulationExponent, S0Report, Signal, TFPoint, S0_SUPPORTED_SLOPE, S0_UNSUPPORTED_SLOPE,
};
