//! Finitely generated Abelian groups and densities of index maps and families.

mod beurling;
mod density;
mod fga;
mod flatten;
mod index_free;
mod pattern;

pub use beurling::{beurling_density, PointSet};
pub use density::{
    density_indexed, fiber_bound, map_equivalence, DensityComparison, DensityEstimate, DensityMode, ExactSpec,
    MapEquivalenceReport, SweepPoint, SweepSpec,
};
#[allow(unused_imports)]
pub(crate) use density::{extended, ratio_to_f64};
pub(crate) use fga::cartesian;
pub use fga::{FgaGroup, GroupBox, GroupPoint, DEFAULT_ENUMERATION_CAP};
pub use flatten::{flatten_group, Flattening};
pub use index_free::{admission_sweep, density_index_free, relative_density, IndexFreeConfig, ReferenceSystem, RelativeDensity};
pub use pattern::{IndexedFamilyMap, PatternSet};
