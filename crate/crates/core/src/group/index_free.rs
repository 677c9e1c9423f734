use serde::{Deserialize, Serialize};

use super::density::{DensityEstimate, SweepPoint};
use super::fga::{FgaGroup, GroupPoint};
use crate::error::{Error, Result};
use crate::linalg::{cross_coefficients, VectorFamily};
use crate::CMatrix;

/// Reference system `{g_n}` with every element placed at a group point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSystem {
    pub group: FgaGroup,
    pub family: VectorFamily,
    pub points: Vec<GroupPoint>,
}

impl ReferenceSystem {
    pub fn new(group: FgaGroup, family: VectorFamily, points: Vec<GroupPoint>) -> Result<Self> {
        if family.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                found: points.len(),
            });
        }
        let mut sorted: Vec<&GroupPoint> = points.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLabel(format!("reference point {}", w[0])));
        }
        for p in &points {
            group.check(p)?;
        }
        Ok(Self { group, family, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.family.dimension()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFreeConfig {
    pub r_max: u64,
    /// Window values above this, still growing with admitted members, count as divergent.
    pub divergence_ceiling: f64,
}

impl IndexFreeConfig {
    pub fn new(r_max: u64) -> Self {
        Self {
            r_max,
            divergence_ceiling: 16.0,
        }
    }
}

/// Per-reference weights `w_n = sum_f a_f |<f, g_n>|^2` and the argmax centre of each `f`.
struct Weights {
    coeffs: CMatrix,
    inv_energy: Vec<f64>,
}

fn weights(f: &VectorFamily, reference: &ReferenceSystem) -> Result<Weights> {
    let coeffs = cross_coefficients(f, &reference.family)?;
    let mut inv_energy = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let e: f64 = coeffs.row(i).iter().map(|c| c.norm_sqr()).sum();
        if e <= 0.0 {
            return Err(Error::ZeroEnergy(f.label(i).to_string()));
        }
        inv_energy.push(1.0 / e);
    }
    Ok(Weights { coeffs, inv_energy })
}

/// Window value at radius `r` using only the members in `members`.
fn window_value(w: &Weights, reference: &ReferenceSystem, members: &[usize], r: u64) -> f64 {
    let g = &reference.group;
    let mut acc = 0.0;
    for (n, p) in reference.points.iter().enumerate() {
        if g.norm(p) <= r {
            acc += members
                .iter()
                .map(|&i| w.inv_energy[i] * w.coeffs[(i, n)].norm_sqr())
                .sum::<f64>();
        }
    }
    acc / g.box_size(r) as f64
}

fn radius_sweep(w: &Weights, reference: &ReferenceSystem, r_max: u64) -> Vec<SweepPoint> {
    let g = &reference.group;
    let nf = w.inv_energy.len();
    let mut by_norm = vec![0.0; r_max as usize + 1];
    for (n, p) in reference.points.iter().enumerate() {
        let nu = g.norm(p);
        if nu <= r_max {
            by_norm[nu as usize] += (0..nf).map(|i| w.inv_energy[i] * w.coeffs[(i, n)].norm_sqr()).sum::<f64>();
        }
    }
    let mut acc = by_norm[0];
    (1..=r_max)
        .map(|r| {
            acc += by_norm[r as usize];
            let v = acc / g.box_size(r) as f64;
            SweepPoint {
                r,
                inf_value: v,
                sup_value: v,
            }
        })
        .collect()
}

/// Members ordered by distance of their strongest reference coefficient to the origin.
fn admission_order(w: &Weights, reference: &ReferenceSystem) -> Vec<usize> {
    let g = &reference.group;
    let mut keyed: Vec<(u64, usize)> = (0..w.inv_energy.len())
        .map(|i| {
            let row = w.coeffs.row(i);
            let best = (0..reference.len())
                .max_by(|&a, &b| {
                    row[a]
                        .norm_sqr()
                        .total_cmp(&row[b].norm_sqr())
                        .then_with(|| reference.points[b].cmp(&reference.points[a]))
                })
                .expect("nonempty reference");
            (g.norm(&reference.points[best]), i)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Window values at radius `r` for nested prefixes of sizes `1, 2, 4, ..., |F|`.
pub fn admission_sweep(f: &VectorFamily, reference: &ReferenceSystem, r: u64) -> Result<Vec<(usize, f64)>> {
    let w = weights(f, reference)?;
    Ok(admission_from(&w, reference, r))
}

fn admission_from(w: &Weights, reference: &ReferenceSystem, r: u64) -> Vec<(usize, f64)> {
    let order = admission_order(w, reference);
    let mut sizes = Vec::new();
    let mut c = 1;
    while c < order.len() {
        sizes.push(c);
        c *= 2;
    }
    sizes.push(order.len());
    sizes.into_iter().map(|c| (c, window_value(w, reference, &order[..c], r))).collect()
}

/// Index-free lower and upper density of `f` with respect to `reference`.
///
/// The centre `k` cancels from the defining quotient, so the infimum and the
/// supremum over centres coincide at every radius.
pub fn density_index_free(f: &VectorFamily, reference: &ReferenceSystem, cfg: &IndexFreeConfig) -> Result<DensityEstimate> {
    if f.is_empty() {
        return Ok(DensityEstimate::from_sweep(Vec::new()));
    }
    if cfg.r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be positive".into()));
    }
    let w = weights(f, reference)?;
    let mut est = DensityEstimate::from_sweep(radius_sweep(&w, reference, cfg.r_max));
    let adm = admission_from(&w, reference, cfg.r_max);
    if diverges(&adm, cfg.divergence_ceiling) {
        est.diverging = true;
        est.lower = f64::INFINITY;
        est.upper = f64::INFINITY;
        est.converged = false;
    }
    Ok(est)
}

fn diverges(adm: &[(usize, f64)], ceiling: f64) -> bool {
    if adm.len() < 3 {
        return false;
    }
    let increasing = adm.windows(2).all(|p| p[1].1 > p[0].1);
    let (c0, v0) = adm[adm.len() - 2];
    let (c1, v1) = adm[adm.len() - 1];
    let growth = v1 / v0 >= 0.75 * (c1 as f64 / c0 as f64);
    increasing && growth && v1 > ceiling
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeDensity {
    pub r_minus: f64,
    pub r_plus: f64,
    pub uniform: bool,
    pub sub: DensityEstimate,
    pub full: DensityEstimate,
}

/// `R^- = D^-(F') / D^+(F)` and `R^+ = D^+(F') / D^-(F)`.
pub fn relative_density(
    sub: &VectorFamily,
    full: &VectorFamily,
    reference: &ReferenceSystem,
    cfg: &IndexFreeConfig,
) -> Result<RelativeDensity> {
    let d_full = density_index_free(full, reference, cfg)?;
    if d_full.diverging || !d_full.upper.is_finite() {
        return Err(Error::DegenerateDensity("parent family density diverges".into()));
    }
    if d_full.lower <= 0.0 {
        return Err(Error::DegenerateDensity("parent family has zero lower density".into()));
    }
    let d_sub = density_index_free(sub, reference, cfg)?;
    let r_minus = d_sub.lower / d_full.upper;
    let r_plus = d_sub.upper / d_full.lower;
    Ok(RelativeDensity {
        r_minus,
        r_plus,
        uniform: (r_plus - r_minus).abs() <= 1e-9 * r_plus.abs().max(1.0),
        sub: d_sub,
        full: d_full,
    })
}
