use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fga::{cartesian, FgaGroup, GroupBox, GroupPoint};
use super::pattern::{box_cells, IndexedFamilyMap};
use crate::error::{Error, Result};
use crate::linalg::Label;

/// One row of a finite-radius sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: u64,
    #[serde(with = "extended")]
    pub inf_value: f64,
    #[serde(with = "extended")]
    pub sup_value: f64,
}

/// Lower/upper density with either an exact value or a sweep behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    #[serde(with = "extended")]
    pub lower: f64,
    #[serde(with = "extended")]
    pub upper: f64,
    pub exact: bool,
    pub exact_lower: Option<Ratio<i64>>,
    pub exact_upper: Option<Ratio<i64>>,
    pub sweep: Vec<SweepPoint>,
    pub diverging: bool,
    /// Spread of the sweep over its upper half of radii.
    pub convergence_spread: f64,
    pub converged: bool,
    /// `2 v(R) - v(R/2)`, assuming an `O(1/R)` boundary error.
    pub extrapolated_lower: Option<f64>,
    pub extrapolated_upper: Option<f64>,
}

impl DensityEstimate {
    pub fn exact(value: Ratio<i64>) -> Self {
        let v = ratio_to_f64(value);
        Self {
            lower: v,
            upper: v,
            exact: true,
            exact_lower: Some(value),
            exact_upper: Some(value),
            sweep: Vec::new(),
            diverging: false,
            convergence_spread: 0.0,
            converged: true,
            extrapolated_lower: None,
            extrapolated_upper: None,
        }
    }

    /// Summarises a sweep; the reported bounds are the values at the largest radius.
    pub fn from_sweep(sweep: Vec<SweepPoint>) -> Self {
        let Some(last) = sweep.last().copied() else {
            return Self::exact(Ratio::from_integer(0));
        };
        let half_r = last.r / 2;
        let tail: Vec<&SweepPoint> = sweep.iter().filter(|s| s.r >= half_r).collect();
        let spread = |f: fn(&SweepPoint) -> f64| {
            let (lo, hi) = tail
                .iter()
                .map(|s| f(s))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            hi - lo
        };
        let spread = spread(|s| s.inf_value).max(spread(|s| s.sup_value));
        let scale = last.sup_value.abs().max(1e-12);
        let mid = sweep
            .iter().rfind(|s| s.r <= half_r.max(1))
            .filter(|s| s.r < last.r)
            .copied();
        Self {
            lower: last.inf_value,
            upper: last.sup_value,
            exact: false,
            exact_lower: None,
            exact_upper: None,
            converged: spread <= 0.05 * scale,
            convergence_spread: spread,
            extrapolated_lower: mid.map(|m| richardson(m.r, m.inf_value, last.r, last.inf_value)),
            extrapolated_upper: mid.map(|m| richardson(m.r, m.sup_value, last.r, last.sup_value)),
            sweep,
            diverging: false,
        }
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        match (self.exact_lower, self.exact_upper) {
            (Some(a), Some(b)) => a == b,
            _ => (self.upper - self.lower).abs() <= tol,
        }
    }
}

/// Extrapolates `v(R) = v + c/R` through two radii.
fn richardson(r1: u64, v1: f64, r2: u64, v2: f64) -> f64 {
    let (r1, r2) = (r1 as f64, r2 as f64);
    (r2 * v2 - r1 * v1) / (r2 - r1)
}

pub(crate) fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact evaluation: multiplicities repeat with `period` on the checked cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSpec {
    pub period: Vec<i64>,
    /// Cells `s` with `|s_j| <= check_cells` are compared with the base cell.
    pub check_cells: i64,
}

/// Finite-radius sweep restricted to boxes inside `domain`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub r_max: u64,
    pub domain: GroupBox,
    #[serde(default = "one")]
    pub r_step: u64,
    #[serde(default = "one")]
    pub center_stride: u64,
}

fn one() -> u64 {
    1
}

impl SweepSpec {
    pub fn new(r_max: u64, domain: GroupBox) -> Self {
        Self {
            r_max,
            domain,
            r_step: 1,
            center_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DensityMode {
    ExactPattern(ExactSpec),
    Sweep(SweepSpec),
}

fn multiplicities(map: &IndexedFamilyMap, j: &[Label]) -> Result<HashMap<GroupPoint, u64>> {
    let mut out = HashMap::new();
    for i in map.positions_of(j)? {
        *out.entry(map.points[i].clone()).or_insert(0) += 1;
    }
    Ok(out)
}

/// `D^-(a; J)` and `D^+(a; J)`.
pub fn density_indexed(map: &IndexedFamilyMap, j: &[Label], mode: &DensityMode) -> Result<DensityEstimate> {
    let unique: HashSet<&Label> = j.iter().collect();
    if unique.len() != j.len() {
        return Err(Error::InvalidParameter("subset J repeats a label".into()));
    }
    let mult = multiplicities(map, j)?;
    match mode {
        DensityMode::ExactPattern(spec) => exact_density(&map.group, &mult, spec),
        DensityMode::Sweep(spec) => sweep_density(&map.group, &mult, spec),
    }
}

fn exact_density(group: &FgaGroup, mult: &HashMap<GroupPoint, u64>, spec: &ExactSpec) -> Result<DensityEstimate> {
    if spec.period.len() != group.free_rank {
        return Err(Error::CoordinateCount {
            expected: group.free_rank,
            found: spec.period.len(),
        });
    }
    if spec.period.iter().any(|&p| p < 1) {
        return Err(Error::InvalidParameter("periods must be positive".into()));
    }
    let zeros = vec![0; group.free_rank];
    let cell = box_cells(group, &zeros, &spec.period);
    let count = |p: &GroupPoint| mult.get(p).copied().unwrap_or(0);
    let c = spec.check_cells.max(0);
    let shifts = cartesian(&vec![(-c..=c).collect::<Vec<i64>>(); group.free_rank]);
    for s in &shifts {
        for x in &cell {
            let mut y = x.coords.clone();
            for ((yj, sj), pj) in y.iter_mut().zip(s).zip(&spec.period) {
                *yj += sj * pj;
            }
            let y = GroupPoint::new(y);
            if count(&y) != count(x) {
                return Err(Error::NotPeriodic(format!(
                    "multiplicity {} at {y} differs from {} at {x}",
                    count(&y),
                    count(x)
                )));
            }
        }
    }
    let total: u64 = cell.iter().map(count).sum();
    Ok(DensityEstimate::exact(Ratio::new(total as i64, cell.len() as i64)))
}

/// Dense multiplicity grid over a sweep domain with inclusive prefix sums.
struct PrefixGrid {
    lens: Vec<usize>,
    strides: Vec<usize>,
    sums: Vec<u64>,
}

impl PrefixGrid {
    fn new(lens: Vec<usize>, cells: &[(Vec<usize>, u64)]) -> Self {
        let ext: Vec<usize> = lens.iter().map(|l| l + 1).collect();
        let mut strides = vec![1; ext.len()];
        for j in (0..ext.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * ext[j + 1];
        }
        let total: usize = ext.iter().product();
        let mut sums = vec![0u64; total];
        for (idx, m) in cells {
            let flat: usize = idx.iter().zip(&strides).map(|(i, s)| (i + 1) * s).sum();
            sums[flat] += m;
        }
        for j in 0..ext.len() {
            for flat in 0..total {
                let coord = (flat / strides[j]) % ext[j];
                if coord > 0 {
                    sums[flat] += sums[flat - strides[j]];
                }
            }
        }
        Self { lens, strides, sums }
    }

    /// Sum over the product of half-open intervals `[lo_j, hi_j)`.
    fn rect(&self, lo: &[usize], hi: &[usize]) -> u64 {
        let d = self.lens.len();
        let mut acc: i128 = 0;
        for mask in 0..(1usize << d) {
            let mut flat = 0;
            let mut sign = 1i128;
            for j in 0..d {
                if mask >> j & 1 == 1 {
                    flat += lo[j] * self.strides[j];
                    sign = -sign;
                } else {
                    flat += hi[j] * self.strides[j];
                }
            }
            acc += sign * self.sums[flat] as i128;
        }
        acc as u64
    }
}

fn sweep_density(group: &FgaGroup, mult: &HashMap<GroupPoint, u64>, spec: &SweepSpec) -> Result<DensityEstimate> {
    group.check(&spec.domain.center)?;
    let dom_r = spec.domain.radius as i64;
    if spec.r_max > spec.domain.radius && group.free_rank > 0 {
        return Err(Error::DomainTooSmall(format!(
            "sweep radius {} exceeds domain radius {}",
            spec.r_max, spec.domain.radius
        )));
    }
    let c = &spec.domain.center.coords;
    let d = group.rank();
    let lens: Vec<usize> = (0..d)
        .map(|j| match group.modulus(j) {
            None => (2 * dom_r + 1) as usize,
            Some(n) => n as usize,
        })
        .collect();
    let cells: Vec<(Vec<usize>, u64)> = mult
        .iter()
        .filter_map(|(p, &m)| {
            let idx: Option<Vec<usize>> = (0..d)
                .map(|j| match group.modulus(j) {
                    None => {
                        let off = p.coords[j] - c[j] + dom_r;
                        (0..lens[j] as i64).contains(&off).then_some(off as usize)
                    }
                    Some(_) => Some(p.coords[j] as usize),
                })
                .collect();
            idx.map(|i| (i, m))
        })
        .collect();
    let grid = PrefixGrid::new(lens.clone(), &cells);
    let step = spec.r_step.max(1);
    let stride = spec.center_stride.max(1) as i64;
    let radii: Vec<u64> = (1..=spec.r_max).filter(|r| (r - 1) % step == 0 || *r == spec.r_max).collect();

    let sweep: Vec<SweepPoint> = radii
        .par_iter()
        .map(|&r| {
            let ri = r as i64;
            let centre_ranges: Vec<Vec<i64>> = (0..d)
                .map(|j| match group.modulus(j) {
                    None => (-(dom_r - ri)..=(dom_r - ri)).step_by(stride as usize).collect(),
                    Some(n) => (0..n).step_by(stride as usize).collect(),
                })
                .collect();
            // per coordinate: list of half-open index intervals covered by the box
            let intervals = |j: usize, k: i64| -> Vec<(usize, usize)> {
                match group.modulus(j) {
                    None => {
                        let mid = k + dom_r;
                        vec![((mid - ri) as usize, (mid + ri + 1) as usize)]
                    }
                    Some(n) if 2 * ri + 1 >= n => vec![(0, n as usize)],
                    Some(n) => {
                        let lo = k - ri;
                        let hi = k + ri + 1;
                        if lo < 0 {
                            vec![(0, hi as usize), ((lo + n) as usize, n as usize)]
                        } else if hi > n {
                            vec![(lo as usize, n as usize), (0, (hi - n) as usize)]
                        } else {
                            vec![(lo as usize, hi as usize)]
                        }
                    }
                }
            };
            let size = group.box_size(r) as f64;
            let (mut lo_v, mut hi_v) = (u64::MAX, 0u64);
            for centre in cartesian(&centre_ranges) {
                let per: Vec<Vec<(usize, usize)>> = (0..d).map(|j| intervals(j, centre[j])).collect();
                let mut count = 0;
                let mut choice = vec![0usize; d];
                loop {
                    let lo: Vec<usize> = (0..d).map(|j| per[j][choice[j]].0).collect();
                    let hi: Vec<usize> = (0..d).map(|j| per[j][choice[j]].1).collect();
                    count += grid.rect(&lo, &hi);
                    let mut j = 0;
                    while j < d {
                        choice[j] += 1;
                        if choice[j] < per[j].len() {
                            break;
                        }
                        choice[j] = 0;
                        j += 1;
                    }
                    if j == d {
                        break;
                    }
                }
                lo_v = lo_v.min(count);
                hi_v = hi_v.max(count);
            }
            SweepPoint {
                r,
                inf_value: lo_v as f64 / size,
                sup_value: hi_v as f64 / size,
            }
        })
        .collect();
    Ok(DensityEstimate::from_sweep(sweep))
}

/// `K = max_k |a^{-1}(k)|` over the window.
pub fn fiber_bound(map: &IndexedFamilyMap) -> u64 {
    let mut counts: HashMap<&GroupPoint, u64> = HashMap::new();
    for p in &map.points {
        *counts.entry(p).or_insert(0) += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    pub a: DensityEstimate,
    pub b: DensityEstimate,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEquivalenceReport {
    pub bounded_difference: bool,
    pub sup_distance: u64,
    /// Sup over indices whose `a(i)` lies in the inner half of the occupied range.
    pub inner_sup_distance: u64,
    pub growth_detected: bool,
    pub density: Option<DensityComparison>,
}

/// Compares two maps on a common index set.
pub fn map_equivalence(
    a: &IndexedFamilyMap,
    b: &IndexedFamilyMap,
    j: &[Label],
    mode: Option<&DensityMode>,
) -> Result<MapEquivalenceReport> {
    if a.group != b.group {
        return Err(Error::InvalidGroup("maps target different groups".into()));
    }
    let g = &a.group;
    let mut dists = Vec::with_capacity(a.len());
    for (i, l) in a.labels.iter().enumerate() {
        let q = b
            .point(l)
            .ok_or_else(|| Error::InvalidParameter(format!("label {l} missing from second map")))?;
        dists.push((g.norm(&a.points[i]), g.distance(&a.points[i], q)));
    }
    if b.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let reach = dists.iter().map(|d| d.0).max().unwrap_or(0);
    let sup = dists.iter().map(|d| d.1).max().unwrap_or(0);
    let inner = dists.iter().filter(|d| d.0 <= reach / 2).map(|d| d.1).max().unwrap_or(0);
    let growth = sup > inner;
    let density = match mode {
        Some(mode) => {
            let da = density_indexed(a, j, mode)?;
            let db = density_indexed(b, j, mode)?;
            let equal = match (da.exact_lower, db.exact_lower) {
                (Some(x), Some(y)) => x == y && da.exact_upper == db.exact_upper,
                _ => (da.lower - db.lower).abs() <= 1e-9 && (da.upper - db.upper).abs() <= 1e-9,
            };
            Some(DensityComparison { a: da, b: db, equal })
        }
        None => None,
    };
    Ok(MapEquivalenceReport {
        bounded_difference: !growth,
        sup_distance: sup,
        inner_sup_distance: inner,
        growth_detected: growth,
        density,
    })
}

/// Serialises non-finite reals as the strings `"inf"`, `"-inf"` and `"nan"`.
pub(crate) mod extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
