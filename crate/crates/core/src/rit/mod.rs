//! Restricted-invertibility selection.
//!
//! [`finite_rit_select`] picks a well-conditioned subfamily of a finite family;
//! the blockwise selectors tile a windowed infinite system, select inside each
//! tile on truncated vectors and certify the union.

mod blockwise;
mod curve;
mod finite;
mod params;
mod verify;

pub use blockwise::{
    blockwise_select_case_a, blockwise_select_case_b, cross_term_bound, BlockwiseConfig, BlockwiseProblem, BlockwiseSummary,
    CrossTerm, CrossTermInputs, CrossTermReport,
};
pub use curve::{smooth_c_curve, CCurve};
pub use finite::{
    finite_rit_select, normalize_columns, pareto_frontier, BlockRecord, SelectionResult, SelectorConfig, Strategy, EXHAUSTIVE_MAX,
};
pub use params::{derive_parameters, BorderPolicy, DerivedParameters, Inequality, ParamInputs, ReferenceCase, Thresholds, PARAM_GRID};
pub use verify::{verify_conclusions, ClauseCheck, VerificationReport, VerifyContext, VERIFY_TOL};
