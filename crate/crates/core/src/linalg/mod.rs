//! Finite-dimensional frame and Riesz machinery.
//!
//! Riesz bounds are read off the Gram matrix; frame and Bessel bounds come from
//! the singular values of the synthesis matrix. Both routes see the same
//! nonzero spectrum, which the tests cross-check.

pub mod dense;
mod family;
mod frames;

pub use family::{cross_coefficients, Label, VectorFamily};
pub use frames::{
    analysis, bessel_bound, dual_family, dual_family_in_span, frame_bounds, frame_operator, gram,
    partition_inequality_check, reconstruct, riesz_bounds, synthesis, BoundKind, BoundsReport,
    Certificate, GramMatrix, PartitionCheck,
};
