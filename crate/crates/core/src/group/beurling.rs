use nalgebra::DMatrix;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{DensityEstimate, SweepPoint};
use super::fga::cartesian;
use crate::error::{Error, Result};

/// Point set in `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PointSet {
    Finite { points: Vec<Vec<f64>> },
    /// `A Z^m` with the columns of `A` given as `basis`.
    Lattice { basis: Vec<Vec<f64>> },
}

/// Candidate centres per radius step.
const CENTRE_DIVISIONS: f64 = 8.0;

/// Beurling densities by cube counting; lattices are evaluated in closed form.
pub fn beurling_density(set: &PointSet, r_max: u64) -> Result<DensityEstimate> {
    match set {
        PointSet::Lattice { basis } => {
            let m = basis.len();
            if m == 0 || basis.iter().any(|c| c.len() != m) {
                return Err(Error::InvalidParameter("lattice basis must be square".into()));
            }
            let a = DMatrix::from_fn(m, m, |r, c| basis[c][r]);
            let det = a.determinant().abs();
            if det == 0.0 {
                return Err(Error::InvalidParameter("degenerate lattice basis".into()));
            }
            let mut est = DensityEstimate::exact(Ratio::from_integer(0));
            est.exact_lower = None;
            est.exact_upper = None;
            est.lower = 1.0 / det;
            est.upper = 1.0 / det;
            Ok(est)
        }
        PointSet::Finite { points } => finite_density(points, r_max),
    }
}

fn finite_density(points: &[Vec<f64>], r_max: u64) -> Result<DensityEstimate> {
    if points.is_empty() {
        return Ok(DensityEstimate::exact(Ratio::from_integer(0)));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidParameter("points must share a positive dimension".into()));
    }
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let lo: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();

    let mut radii = Vec::new();
    let mut r = 1;
    while r < r_max {
        radii.push(r);
        r *= 2;
    }
    radii.push(r_max.max(1));
    radii.dedup();

    let sweep: Vec<SweepPoint> = radii
        .par_iter()
        .filter_map(|&r| {
            let rf = r as f64;
            let spacing = rf / CENTRE_DIVISIONS;
            let ranges: Option<Vec<Vec<i64>>> = (0..dim)
                .map(|j| {
                    let (a, b) = (lo[j] + rf, hi[j] - rf);
                    if a > b {
                        return None;
                    }
                    let first = (a / spacing).ceil() as i64;
                    let last = (b / spacing).floor() as i64;
                    (first <= last).then(|| (first..=last).collect())
                })
                .collect();
            let ranges = ranges?;
            let volume = (2.0 * rf).powi(dim as i32);
            let (mut lo_v, mut hi_v) = (f64::INFINITY, 0.0f64);
            for c in cartesian(&ranges) {
                let centre: Vec<f64> = c.iter().map(|&i| i as f64 * spacing).collect();
                let start = sorted.partition_point(|p| p[0] < centre[0] - rf);
                let count = sorted[start..]
                    .iter()
                    .take_while(|p| p[0] < centre[0] + rf)
                    .filter(|p| (1..dim).all(|j| p[j] >= centre[j] - rf && p[j] < centre[j] + rf))
                    .count();
                let v = count as f64 / volume;
                lo_v = lo_v.min(v);
                hi_v = hi_v.max(v);
            }
            Some(SweepPoint {
                r,
                inf_value: lo_v,
                sup_value: hi_v,
            })
        })
        .collect();
    if sweep.is_empty() {
        return Err(Error::DomainTooSmall("point set too small for any cube of radius 1".into()));
    }
    Ok(DensityEstimate::from_sweep(sweep))
}
