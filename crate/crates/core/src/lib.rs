//! Frame theory toolkit for localized vector systems.
//!
//! The crate covers five areas:
//!
//! * [`linalg`]: Gram matrices, frame/Bessel/Riesz bounds, canonical duals and
//!   the partition inequality for Riesz sequences.
//! * [`group`]: finitely generated Abelian groups, box enumeration, periodic
//!   pattern sets and the indexed, Beurling, index-free and relative densities.
//! * [`localization`]: envelopes of cross-coefficients, tail operator norms and
//!   analysis-operator truncation gaps.
//! * [`rit`]: restricted-invertibility selection, both the finite selector and
//!   the blockwise construction for windowed infinite systems.
//! * [`gabor`]: time-frequency analysis on cyclic grids and the Gabor selection
//!   pipeline.
//!
//! Every selection result carries certificates that are recomputed from
//! scratch by [`rit::verify_conclusions`].

pub mod error;
pub mod fixtures;
pub mod gabor;
pub mod group;
pub mod io;
pub mod linalg;
pub mod localization;
pub mod rit;

pub use error::{Error, Result};
pub use linalg::{BoundKind, BoundsReport, GramMatrix, Label, VectorFamily};

pub use num_complex::Complex64;

/// Complex dense matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Complex dense column vector.
pub type CVector = nalgebra::DVector<Complex64>;
