//! Builders for the worked examples and synthetic systems used by the tests,
//! the command line driver and the benches.
//!
//! Integer-indexed Hilbert spaces are rendered on a finite set of indices; the
//! ambient row of `e_m` is the position of `m` in that sorted set.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{half_lattice_step, Signal, TFSet};
use crate::group::{FgaGroup, GroupBox, GroupPoint, IndexedFamilyMap, ReferenceSystem};
use crate::linalg::{Label, VectorFamily};
use crate::{CMatrix, Complex64};

/// Finite set of integer indices `m` carrying the basis vectors `e_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ambient {
    indices: Vec<i64>,
}

impl Ambient {
    pub fn new(indices: impl IntoIterator<Item = i64>) -> Self {
        let mut indices: Vec<i64> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        Self::new(lo..=hi)
    }

    pub fn dimension(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn row(&self, m: i64) -> Option<usize> {
        self.indices.binary_search(&m).ok()
    }

    pub fn contains(&self, m: i64) -> bool {
        self.row(m).is_some()
    }

    /// Sparse combinations `sum c_m e_m`, one column per entry of `terms`.
    pub fn combinations(&self, terms: &[Vec<(i64, Complex64)>], labels: Vec<Label>) -> Result<VectorFamily> {
        let mut m = CMatrix::zeros(self.dimension(), terms.len());
        for (j, col) in terms.iter().enumerate() {
            for &(idx, c) in col {
                let r = self
                    .row(idx)
                    .ok_or_else(|| Error::InvalidParameter(format!("e_{idx} is outside the ambient window")))?;
                m[(r, j)] += c;
            }
        }
        VectorFamily::from_columns(m, labels)
    }

    /// `{e_m}` for the listed indices, labelled by `m`.
    pub fn basis(&self, idx: &[i64]) -> Result<VectorFamily> {
        let terms: Vec<_> = idx.iter().map(|&m| vec![(m, Complex64::from(1.0))]).collect();
        self.combinations(&terms, idx.iter().map(|&m| Label::from(m)).collect())
    }

    pub fn full_basis(&self) -> VectorFamily {
        self.basis(&self.indices).expect("indices lie in the ambient")
    }
}

/// A named map with subset `J` and the periods of `a(I)` and `a(J)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMapFixture {
    pub name: String,
    pub map: IndexedFamilyMap,
    pub subset: Vec<Label>,
    pub period: i64,
    pub expected_ratio: Ratio<i64>,
}

/// Bijection sending evens onto `Z \ 4Z` and odds onto `4Z`, both order preserving.
pub fn interleaving_bijection(i: i64) -> i64 {
    if i.rem_euclid(2) == 0 {
        let m = i / 2;
        let (q, j) = (m.div_euclid(3), m.rem_euclid(3));
        4 * q + j + 1
    } else {
        4 * ((i - 1) / 2)
    }
}

/// `I = Z`, `J = 2Z` under `id`, `2 id` and the interleaving bijection.
pub fn density_maps(half_width: i64) -> Vec<DensityMapFixture> {
    let idx = -half_width..=half_width;
    let evens: Vec<Label> = idx.clone().filter(|i| i % 2 == 0).map(Label::from).collect();
    let make = |name: &str, f: fn(i64) -> i64, period, expected| DensityMapFixture {
        name: name.into(),
        map: IndexedFamilyMap::on_integers(idx.clone(), f),
        subset: evens.clone(),
        period,
        expected_ratio: expected,
    };
    vec![
        make("identity", |i| i, 2, Ratio::new(1, 2)),
        make("double", |i| 2 * i, 4, Ratio::new(1, 2)),
        make("interleaving", interleaving_bijection, 4, Ratio::new(3, 4)),
    ]
}

/// `Te_{2i} = Te_{2i+1} = e_i` for `i < n`: `2n` columns, `n` distinct.
pub fn duplicated_basis(n: usize) -> VectorFamily {
    let m = CMatrix::from_fn(n, 2 * n, |r, c| Complex64::from(if c / 2 == r { 1.0 } else { 0.0 }));
    VectorFamily::from_matrix(m).expect("valid family")
}

/// `e_m` placed at `m` on `Z`.
pub fn natural_reference(ambient: &Ambient) -> ReferenceSystem {
    let pts = ambient.indices().iter().map(|&m| GroupPoint::new(vec![m])).collect();
    ReferenceSystem::new(FgaGroup::lattice(1), ambient.full_basis(), pts).expect("distinct points")
}

/// `g'_{2n} = g'_{2n+1} = e_n`, labelled and placed by position.
pub fn doubled_reference(ambient: &Ambient) -> ReferenceSystem {
    let mut terms = Vec::new();
    let mut labels = Vec::new();
    let mut pts = Vec::new();
    for &n in ambient.indices() {
        for p in [2 * n, 2 * n + 1] {
            terms.push(vec![(n, Complex64::from(1.0))]);
            labels.push(Label::from(p));
            pts.push(GroupPoint::new(vec![p]));
        }
    }
    let fam = ambient.combinations(&terms, labels).expect("indices lie in the ambient");
    ReferenceSystem::new(FgaGroup::lattice(1), fam, pts).expect("distinct points")
}

/// Index `m` of the basis vector at position `p` of the interleaved ordering
/// `..., e_-1, e_0, e_1, e_3, e_5, e_2, e_7, e_9, e_11, e_4, ...`.
pub fn interleaved_index(p: i64) -> i64 {
    if p == 0 {
        return 0;
    }
    let s = p.signum();
    let a = p.abs();
    let (m, j) = ((a - 1) / 4, (a - 1) % 4 + 1);
    let v = if j == 4 { 2 * (m + 1) } else { 6 * m + 2 * j - 1 };
    s * v
}

/// Positions `-half_width..=half_width` of the interleaved ordering.
pub fn interleaved_reference(half_width: i64) -> (Ambient, ReferenceSystem) {
    let positions: Vec<i64> = (-half_width..=half_width).collect();
    let ambient = Ambient::new(positions.iter().map(|&p| interleaved_index(p)));
    let idx: Vec<i64> = positions.iter().map(|&p| interleaved_index(p)).collect();
    let terms: Vec<_> = idx.iter().map(|&m| vec![(m, Complex64::from(1.0))]).collect();
    let fam = ambient
        .combinations(&terms, positions.iter().map(|&p| Label::from(p)).collect())
        .expect("indices lie in the ambient");
    let pts = positions.iter().map(|&p| GroupPoint::new(vec![p])).collect();
    let r = ReferenceSystem::new(FgaGroup::lattice(1), fam, pts).expect("distinct points");
    (ambient, r)
}

/// Position of `e_m` in the two-dimensional arrangement: odd part `2t+1` picks the
/// row, the power of two the column, the sign the side.
pub fn z2_position(m: i64) -> GroupPoint {
    if m == 0 {
        return GroupPoint::new(vec![0, 0]);
    }
    let a = m.abs();
    let v = a.trailing_zeros() as i64;
    let t = (a >> v) / 2;
    let row = if t % 2 == 0 { t / 2 } else { -(t + 1) / 2 };
    GroupPoint::new(vec![row, m.signum() * (v + 1)])
}

/// Inverse of [`z2_position`] where defined.
pub fn z2_index(p: &GroupPoint) -> Option<i64> {
    let (row, col) = (p.coords[0], p.coords[1]);
    if col == 0 {
        return (row == 0).then_some(0);
    }
    let t = if row >= 0 { 2 * row } else { -2 * row - 1 };
    let v = col.abs() - 1;
    if v >= 62 {
        return None;
    }
    (2 * t + 1).checked_mul(1 << v).map(|a| col.signum() * a)
}

/// `e_m`, `|m| <= half_width`, arranged on `Z^2`.
pub fn z2_reference(half_width: i64) -> (Ambient, ReferenceSystem) {
    let ambient = Ambient::range(-half_width, half_width);
    let pts = ambient.indices().iter().map(|&m| z2_position(m)).collect();
    let r = ReferenceSystem::new(FgaGroup::lattice(2), ambient.full_basis(), pts).expect("distinct points");
    (ambient, r)
}

/// Row of the arrangement through `e_0`, columns `-5..=5`.
pub fn z2_middle_row() -> Vec<i64> {
    (-5..=5)
        .map(|c| z2_index(&GroupPoint::new(vec![0, c])).expect("defined"))
        .collect()
}

/// `T4 e_n = e_n + e_{2n}` for the listed `n`, labelled by `n`.
pub fn t4_family(ambient: &Ambient, ns: &[i64]) -> Result<VectorFamily> {
    let terms: Vec<_> = ns
        .iter()
        .map(|&n| vec![(n, Complex64::from(1.0)), (2 * n, Complex64::from(1.0))])
        .collect();
    ambient.combinations(&terms, ns.iter().map(|&n| Label::from(n)).collect())
}

/// `a(n) = pos(e_{2n})` for `n > 0`, `pos(e_n)` otherwise.
pub fn t4_map(ns: &[i64]) -> IndexedFamilyMap {
    let pts = ns
        .iter()
        .map(|&n| if n > 0 { z2_position(2 * n) } else { z2_position(n) })
        .collect();
    IndexedFamilyMap::new(FgaGroup::lattice(2), ns.iter().map(|&n| Label::from(n)).collect(), pts).expect("distinct labels")
}

/// `copies` identical vectors `sum_{|m| <= half_width} 2^{-|m|} e_m`.
pub fn geometric_copies(copies: usize, half_width: i64) -> (Ambient, VectorFamily) {
    let ambient = Ambient::range(-half_width, half_width);
    let col: Vec<(i64, Complex64)> = ambient
        .indices()
        .iter()
        .map(|&m| (m, Complex64::from(0.5f64.powi(m.abs() as i32))))
        .collect();
    let terms = vec![col; copies];
    let fam = ambient
        .combinations(&terms, (0..copies).map(Label::from).collect())
        .expect("indices lie in the ambient");
    (ambient, fam)
}

/// Windowed localized system with an orthonormal reference.
#[derive(Debug, Clone)]
pub struct LocalizedSystem {
    pub family: VectorFamily,
    pub map: IndexedFamilyMap,
    pub reference: ReferenceSystem,
    pub window: GroupBox,
}

/// `f_i = e_i + sum_{0 < |k| <= band} c_ik e_{i+k}`, `|c_ik| <= decay^{|k|}` with random
/// modulus and phase, for `|i| <= half_width`; `a = id`.
pub fn localized_system(seed: u64, half_width: i64, band: i64, decay: f64) -> LocalizedSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ambient = Ambient::range(-half_width - band, half_width + band);
    let idx: Vec<i64> = (-half_width..=half_width).collect();
    let terms: Vec<Vec<(i64, Complex64)>> = idx
        .iter()
        .map(|&i| {
            (-band..=band)
                .map(|k| {
                    let c = if k == 0 {
                        Complex64::from(1.0)
                    } else {
                        let r = decay.powi(k.abs() as i32) * rng.random::<f64>();
                        Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
                    };
                    (i + k, c)
                })
                .collect()
        })
        .collect();
    let family = ambient
        .combinations(&terms, idx.iter().map(|&i| Label::from(i)).collect())
        .expect("indices lie in the ambient");
    LocalizedSystem {
        family,
        map: IndexedFamilyMap::on_integers(idx.iter().copied(), |i| i),
        reference: natural_reference(&ambient),
        window: GroupBox::new(GroupPoint::new(vec![0]), half_width as u64),
    }
}

/// Unit-norm Gaussian and the half lattice of the grid `Z_n`.
pub fn gaussian_half_lattice(n: usize) -> Result<(Signal, TFSet)> {
    let phi = Signal::gaussian(n).normalized()?;
    let (_, s) = half_lattice_step(n)?;
    Ok((phi, TFSet::lattice(n, s, s)?))
}

/// Serializable snapshot of every worked example.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureCatalog {
    pub density_maps: Vec<DensityMapFixture>,
    /// Basis indices of the interleaved ordering at positions `-8..=8`.
    pub interleaved_ordering: BTreeMap<i64, i64>,
    pub z2_middle_row: Vec<i64>,
    /// Columns of the duplicated basis as the index of their nonzero entry.
    pub duplicated_basis: Vec<usize>,
    pub geometric_copy: Vec<f64>,
    pub t4_support: Vec<(i64, Vec<i64>)>,
}

pub fn catalog() -> FixtureCatalog {
    let dup = duplicated_basis(4);
    let (ambient, copies) = geometric_copies(1, 6);
    let _ = ambient;
    FixtureCatalog {
        density_maps: density_maps(32),
        interleaved_ordering: (-8..=8).map(|p| (p, interleaved_index(p))).collect(),
        z2_middle_row: z2_middle_row(),
        duplicated_basis: (0..dup.len())
            .map(|c| dup.matrix().column(c).iter().position(|z| z.re != 0.0).expect("nonzero column"))
            .collect(),
        geometric_copy: copies.matrix().column(0).iter().map(|z| z.re).collect(),
        t4_support: (-4..=4).map(|n| (n, if n == 0 { vec![0] } else { vec![n, 2 * n] })).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_ordering_prefix() {
        let seq: Vec<i64> = (0..12).map(interleaved_index).collect();
        assert_eq!(seq, vec![0, 1, 3, 5, 2, 7, 9, 11, 4, 13, 15, 17]);
        let neg: Vec<i64> = (1..=5).map(|p| interleaved_index(-p)).collect();
        assert_eq!(neg, vec![-1, -3, -5, -2, -7]);
    }

    #[test]
    fn z2_arrangement_rows() {
        assert_eq!(z2_middle_row(), vec![-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16]);
        let above: Vec<i64> = (1..=6).map(|c| z2_index(&GroupPoint::new(vec![1, c])).unwrap()).collect();
        assert_eq!(above, vec![5, 10, 20, 40, 80, 160]);
        let below: Vec<i64> = (-5..=-1).map(|c| z2_index(&GroupPoint::new(vec![-1, c])).unwrap()).collect();
        assert_eq!(below, vec![-48, -24, -12, -6, -3]);
        for m in -600..=600 {
            assert_eq!(z2_index(&z2_position(m)), Some(m));
        }
    }

    #[test]
    fn bijection_is_onto_a_window() {
        let mut img: Vec<i64> = (-300..=300).map(interleaving_bijection).collect();
        img.sort_unstable();
        img.dedup();
        assert_eq!(img.len(), 601);
        for y in -100..=100 {
            assert!(img.binary_search(&y).is_ok(), "{y} missing");
        }
    }

    #[test]
    fn density_maps_give_exact_ratios() {
        use crate::group::{density_indexed, DensityMode, ExactSpec};
        for fx in density_maps(32) {
            let mode = DensityMode::ExactPattern(ExactSpec { period: vec![fx.period], check_cells: 2 });
            let all = density_indexed(&fx.map, &fx.map.labels, &mode).unwrap();
            let sub = density_indexed(&fx.map, &fx.subset, &mode).unwrap();
            let ratio = sub.exact_lower.unwrap() / all.exact_lower.unwrap();
            assert_eq!(ratio, fx.expected_ratio, "{}", fx.name);
        }
    }
}
