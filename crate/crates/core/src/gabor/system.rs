use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tf::{stft, tf_shift, Signal, TFPoint};
use crate::error::{Error, Result};
use crate::group::{FgaGroup, GroupPoint, IndexedFamilyMap};
use crate::linalg::{Label, VectorFamily};
use crate::CMatrix;

/// Finite set of time-frequency points on `Z_n x Z_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFSet {
    pub n: usize,
    pub points: Vec<TFPoint>,
    /// `(a, b)` when the set is the lattice `a Z_n x b Z_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<(usize, usize)>,
}

impl TFSet {
    pub fn new(n: usize, points: Vec<TFPoint>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.x >= n || p.omega >= n {
                return Err(Error::InvalidParameter(format!("point {p} is not reduced mod {n}")));
            }
            if !seen.insert(*p) {
                return Err(Error::DuplicateTfPoint { x: p.x, omega: p.omega });
            }
        }
        Ok(Self { n, points, lattice: None })
    }

    /// `a Z_n x b Z_n`, time-major.
    pub fn lattice(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || !n.is_multiple_of(a) || !n.is_multiple_of(b) {
            return Err(Error::InvalidParameter(format!("steps ({a},{b}) must divide {n}")));
        }
        let points = (0..n / a)
            .flat_map(|i| (0..n / b).map(move |j| TFPoint { x: i * a, omega: j * b }))
            .collect();
        Ok(Self {
            n,
            points,
            lattice: Some((a, b)),
        })
    }

    pub fn full_grid(n: usize) -> Self {
        Self::lattice(n, 1, 1).expect("unit steps divide n")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_set(phi: &Signal, lambda: &TFSet) -> Result<()> {
    if lambda.n != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            found: lambda.n,
        });
    }
    if lambda.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut seen = HashSet::with_capacity(lambda.len());
    for p in &lambda.points {
        if !seen.insert(*p) {
            return Err(Error::DuplicateTfPoint { x: p.x, omega: p.omega });
        }
    }
    Ok(())
}

/// `{pi(lambda) phi}`, labelled by `lambda`.
pub fn gabor_system(phi: &Signal, lambda: &TFSet) -> Result<VectorFamily> {
    check_set(phi, lambda)?;
    let cols: Vec<Signal> = lambda.points.par_iter().map(|&p| tf_shift(phi, p)).collect();
    let n = phi.len();
    let m = CMatrix::from_fn(n, cols.len(), |r, c| cols[c].samples[r]);
    let labels = lambda.points.iter().map(|p| Label(p.to_string())).collect();
    VectorFamily::from_columns(m, labels)
}

/// Labelled union of several Gabor systems; member `j` of system `s` is `s:(x,omega)`.
pub fn gabor_system_union(systems: &[(Signal, TFSet)]) -> Result<VectorFamily> {
    let (first, rest) = systems.split_first().ok_or(Error::EmptyFamily)?;
    let tag = |s: usize, f: VectorFamily| -> Result<VectorFamily> {
        let labels = f.labels().iter().map(|l| Label(format!("{s}:{l}"))).collect();
        VectorFamily::from_columns(f.into_matrix(), labels)
    };
    let mut out = tag(0, gabor_system(&first.0, &first.1)?)?;
    for (s, (phi, lambda)) in rest.iter().enumerate() {
        out = out.union(&tag(s + 1, gabor_system(phi, lambda)?)?)?;
    }
    Ok(out)
}

/// Molecules with their time-frequency centres and a claimed common envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSystem {
    pub elements: VectorFamily,
    pub tf_centers: Vec<TFPoint>,
    /// `Gamma(y, xi)` on the full grid, rows indexed by `y`.
    pub envelope_gamma: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeReport {
    /// `max (|V_{g0} phi_i(y + x_i, xi + omega_i)| - Gamma(y, xi))`, floored at 0.
    pub max_violation: f64,
    pub violations: usize,
    /// Label and grid offset of the largest violation.
    pub worst: Option<(Label, TFPoint)>,
    /// Pointwise supremum of the recentred moduli.
    pub minimal_envelope: DMatrix<f64>,
}

/// Absolute slack below which a violation is ignored.
pub const MOLECULE_TOL: f64 = 1e-12;

pub fn molecule_check(ms: &MoleculeSystem, g0: &Signal) -> Result<MoleculeReport> {
    let n = g0.len();
    if ms.elements.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ms.elements.dimension(),
        });
    }
    if ms.tf_centers.len() != ms.elements.len() {
        return Err(Error::DimensionMismatch {
            expected: ms.elements.len(),
            found: ms.tf_centers.len(),
        });
    }
    if ms.envelope_gamma.nrows() != n || ms.envelope_gamma.ncols() != n {
        return Err(Error::InvalidParameter(format!("envelope must be {n} x {n}")));
    }
    let recentred: Vec<DMatrix<f64>> = (0..ms.elements.len())
        .into_par_iter()
        .map(|i| -> Result<DMatrix<f64>> {
            let sig = Signal::from_vector(&ms.elements.vector(i), g0.grid_spacing)?;
            let v = stft(&sig, g0)?;
            let c = ms.tf_centers[i];
            Ok(DMatrix::from_fn(n, n, |y, xi| v[((y + c.x) % n, (xi + c.omega) % n)].norm()))
        })
        .collect::<Result<_>>()?;
    let mut minimal = DMatrix::zeros(n, n);
    let mut max_violation = 0.0;
    let mut violations = 0;
    let mut worst = None;
    for (i, r) in recentred.iter().enumerate() {
        for y in 0..n {
            for xi in 0..n {
                let v = r[(y, xi)];
                if v > minimal[(y, xi)] {
                    minimal[(y, xi)] = v;
                }
                let excess = v - ms.envelope_gamma[(y, xi)];
                if excess > MOLECULE_TOL {
                    violations += 1;
                    if excess > max_violation {
                        max_violation = excess;
                        worst = Some((ms.elements.label(i).clone(), TFPoint { x: y, omega: xi }));
                    }
                }
            }
        }
    }
    Ok(MoleculeReport {
        max_violation,
        violations,
        worst,
        minimal_envelope: minimal,
    })
}

/// `argmin_m ||lambda - s m||_inf` on `Z_M x Z_M`, `M = n / s`, ties to the smaller residue.
pub fn nearest_lattice_map(lambda: &TFSet, step: usize) -> Result<IndexedFamilyMap> {
    let labels = lambda.points.iter().map(|p| Label(p.to_string())).collect();
    lattice_map_for(&lambda.points, labels, lambda.n, step)
}

pub(crate) fn lattice_map_for(
    points: &[TFPoint],
    labels: Vec<Label>,
    n: usize,
    step: usize,
) -> Result<IndexedFamilyMap> {
    if step == 0 || !n.is_multiple_of(step) {
        return Err(Error::InvalidParameter(format!("base step {step} must divide {n}")));
    }
    let m = (n / step) as i64;
    let group = FgaGroup::cyclic(vec![m, m])?;
    let nearest = |c: usize| -> i64 {
        let lo = (c / step) as i64;
        let rem = c % step;
        let hi = (lo + 1).rem_euclid(m);
        match (2 * rem).cmp(&step) {
            std::cmp::Ordering::Less => lo,
            std::cmp::Ordering::Greater => hi,
            std::cmp::Ordering::Equal => lo.min(hi),
        }
    };
    let pts = points
        .iter()
        .map(|p| GroupPoint::new(vec![nearest(p.x), nearest(p.omega)]))
        .collect();
    IndexedFamilyMap::new(group, labels, pts)
}
