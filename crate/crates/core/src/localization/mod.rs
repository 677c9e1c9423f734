//! Envelopes of cross-coefficients and the operator norms built from them.

mod envelope;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use envelope::Envelope;

use crate::error::{Error, Result};
use crate::group::{fiber_bound, FgaGroup, GroupPoint, IndexedFamilyMap, ReferenceSystem};
use crate::linalg::{cross_coefficients, dense, Label, VectorFamily};
use crate::{CMatrix, CVector, Complex64};

/// Growth ratio above which a finite window is read as non-summable.
pub const GROWTH_UNSUPPORTED: f64 = 1.25;
/// Growth ratio at or below which the envelope is read as saturated.
pub const GROWTH_SUPPORTED: f64 = 1.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supported,
    Unsupported,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `q` in `s(rho) ~ C q^rho`, fitted on the positive shell maxima.
    pub geometric_rate: Option<f64>,
    /// `t` in `s(rho) ~ C (1 + rho)^{-t}`.
    pub polynomial_exponent: Option<f64>,
    pub shell_maxima: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub envelope: Envelope,
    pub minimal: bool,
    pub decay: DecayFit,
    pub p_summable_verdict: Verdict,
    /// Largest ratio `||r||_p(W) / ||r||_p(W/2)` over the windows `W = reach, reach/2`.
    pub growth_ratio: Option<f64>,
    pub diagnostics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterAssignment {
    pub centers: Vec<(Label, GroupPoint)>,
}

fn fit_decay(env: &Envelope) -> DecayFit {
    let shells = env.shell_maxima();
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(s, v)| (s as f64, v.ln()))
        .collect();
    let slope = |xs: &[(f64, f64)]| -> Option<f64> {
        if xs.len() < 2 {
            return None;
        }
        let n = xs.len() as f64;
        let mx = xs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = xs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    };
    let geometric_rate = slope(&pts).map(f64::exp);
    let logs: Vec<(f64, f64)> = pts.iter().map(|(s, l)| ((1.0 + s).ln(), *l)).collect();
    let polynomial_exponent = slope(&logs).map(|s| -s);
    DecayFit {
        geometric_rate,
        polynomial_exponent,
        partial_sums: env.partial_sums(),
        shell_maxima: shells,
    }
}

/// Nested-window test: compares the envelope of all members with the one of inner members.
fn growth_verdict(full: &Envelope, inner: &Envelope) -> (Verdict, f64, String) {
    let (a, b) = (full.norm_p(), inner.norm_p());
    if a == 0.0 {
        return (Verdict::Supported, 1.0, "zero envelope".into());
    }
    if b == 0.0 {
        return (Verdict::Inconclusive, f64::INFINITY, "inner window carries no coefficients".into());
    }
    let rho = a / b;
    let verdict = if rho > GROWTH_UNSUPPORTED {
        Verdict::Unsupported
    } else if rho <= GROWTH_SUPPORTED {
        Verdict::Supported
    } else {
        Verdict::Inconclusive
    };
    (verdict, rho, format!("l{} norm grows by {rho:.4} from the inner half window to the full window", full.p))
}

/// Shell test used on finite groups where windows cannot grow.
fn shell_verdict(fit: &DecayFit) -> (Verdict, String) {
    let s = &fit.shell_maxima;
    if s.is_empty() || s[0] == 0.0 && s.iter().all(|v| *v == 0.0) {
        return (Verdict::Supported, "zero envelope".into());
    }
    if s.len() < 4 {
        return (Verdict::Inconclusive, "too few shells to judge decay".into());
    }
    let q = s.len() / 4;
    let head = s[..q.max(1)].iter().copied().fold(0.0, f64::max);
    let tail = s[s.len() - q.max(1)..].iter().copied().fold(0.0, f64::max);
    let peak = s.iter().copied().fold(0.0, f64::max);
    let diag = format!("shell maxima head {head:.3e}, tail {tail:.3e}, peak {peak:.3e}");
    if tail >= 0.5 * head {
        (Verdict::Unsupported, format!("flat envelope: {diag}"))
    } else if tail <= 1e-3 * peak && fit.geometric_rate.is_some_and(|q| q < 1.0) {
        (Verdict::Supported, format!("geometric decay: {diag}"))
    } else {
        (Verdict::Inconclusive, diag)
    }
}

/// Envelope of `rows`, a list of `(member position, offsets with moduli)`.
fn envelope_of<'a>(group: &FgaGroup, rows: impl Iterator<Item = &'a Vec<(GroupPoint, f64)>>, p: u8) -> Envelope {
    let mut values: HashMap<&GroupPoint, f64> = HashMap::new();
    for row in rows {
        for (k, v) in row {
            let e = values.entry(k).or_insert(0.0);
            *e = e.max(*v);
        }
    }
    let values: BTreeMap<GroupPoint, f64> = values.into_iter().map(|(k, v)| (k.clone(), v)).collect();
    Envelope::new(group.clone(), values, p)
}

fn report(group: &FgaGroup, rows: &[Vec<(GroupPoint, f64)>], anchors: &[GroupPoint], p: u8) -> LocalizationReport {
    let full = envelope_of(group, rows.iter(), p);
    let decay = fit_decay(&full);
    let (verdict, growth_ratio, diagnostics) = if group.free_rank > 0 {
        let reach = anchors.iter().map(|a| group.norm(a)).max().unwrap_or(0);
        let within = |w: u64| {
            envelope_of(
                group,
                rows.iter().zip(anchors).filter(|(_, a)| group.norm(a) <= w).map(|(r, _)| r),
                p,
            )
        };
        let half = within(reach / 2);
        let quarter = within(reach / 4);
        let (mut v, mut rho, mut d) = growth_verdict(&full, &half);
        let (v2, rho2, d2) = growth_verdict(&half, &quarter);
        if reach >= 8 && rho2.is_finite() && rho2 > rho {
            (v, rho, d) = (v2, rho2, format!("{d2} (half window)"));
        }
        (v, Some(rho), d)
    } else {
        let (v, d) = shell_verdict(&decay);
        (v, None, d)
    };
    LocalizationReport {
        envelope: full,
        minimal: true,
        decay,
        p_summable_verdict: verdict,
        growth_ratio,
        diagnostics,
    }
}

fn map_points_for(f: &VectorFamily, a: &IndexedFamilyMap) -> Result<Vec<GroupPoint>> {
    f.labels()
        .iter()
        .map(|l| {
            a.point(l)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("label {l} has no localization point")))
        })
        .collect()
}

fn check_groups(a: &FgaGroup, reference: &ReferenceSystem) -> Result<()> {
    if *a != reference.group {
        return Err(Error::InvalidGroup("map and reference use different groups".into()));
    }
    Ok(())
}

/// Minimal envelope `r(k) = max { |<f_i, g_k'>| : a(i) - k' = k }`.
pub fn envelope_from_map(
    f: &VectorFamily,
    a: &IndexedFamilyMap,
    reference: &ReferenceSystem,
    p: u8,
) -> Result<LocalizationReport> {
    check_groups(&a.group, reference)?;
    let anchors = map_points_for(f, a)?;
    let coeffs = cross_coefficients(f, &reference.family)?;
    let g = &reference.group;
    let rows: Vec<Vec<(GroupPoint, f64)>> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            (0..reference.len())
                .filter_map(|n| {
                    let v = coeffs[(i, n)].norm();
                    (v > 0.0).then(|| (g.sub(&anchors[i], &reference.points[n]), v))
                })
                .collect()
        })
        .collect();
    Ok(report(g, &rows, &anchors, p))
}

/// Centres at the strongest coefficient (ties to the smallest point); `r(n - k)` recentred.
pub fn envelope_index_free(
    f: &VectorFamily,
    reference: &ReferenceSystem,
    p: u8,
) -> Result<(CenterAssignment, LocalizationReport)> {
    let coeffs = cross_coefficients(f, &reference.family)?;
    let g = &reference.group;
    let mut centres = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let mut best: Option<(f64, &GroupPoint)> = None;
        for n in 0..reference.len() {
            let v = coeffs[(i, n)].norm();
            let pt = &reference.points[n];
            best = match best {
                Some((bv, bp)) if bv > v || (bv == v && bp <= pt) => Some((bv, bp)),
                _ => Some((v, pt)),
            };
        }
        match best {
            Some((v, pt)) if v > 0.0 => centres.push(pt.clone()),
            _ => return Err(Error::ZeroVector(f.label(i).to_string())),
        }
    }
    let rows: Vec<Vec<(GroupPoint, f64)>> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            (0..reference.len())
                .filter_map(|n| {
                    let v = coeffs[(i, n)].norm();
                    (v > 0.0).then(|| (g.sub(&reference.points[n], &centres[i]), v))
                })
                .collect()
        })
        .collect();
    let rep = report(g, &rows, &centres, p);
    let assignment = CenterAssignment {
        centers: f.labels().iter().cloned().zip(centres).collect(),
    };
    Ok((assignment, rep))
}

/// `(G, id, G)`.
pub fn self_localization_check(reference: &ReferenceSystem, p: u8) -> Result<LocalizationReport> {
    let id = IndexedFamilyMap::new(
        reference.group.clone(),
        reference.family.labels().to_vec(),
        reference.points.clone(),
    )?;
    envelope_from_map(&reference.family, &id, reference, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailNorm {
    pub radius: u64,
    pub norm: f64,
    /// `Delta_r(R) sqrt(K)` for the minimal envelope of the map.
    pub schur_bound: f64,
    pub fiber_bound: u64,
}

/// Cross-coefficients masked to `||a(i) - k|| > radius`.
fn masked(coeffs: &CMatrix, anchors: &[GroupPoint], reference: &ReferenceSystem, radius: u64, keep_far: bool) -> CMatrix {
    let g = &reference.group;
    CMatrix::from_fn(coeffs.nrows(), coeffs.ncols(), |i, n| {
        let far = g.distance(&anchors[i], &reference.points[n]) > radius;
        if far == keep_far {
            coeffs[(i, n)]
        } else {
            Default::default()
        }
    })
}

/// `||M^R||` for every requested radius together with the Schur bound.
pub fn tail_operator_norms(
    f: &VectorFamily,
    a: &IndexedFamilyMap,
    reference: &ReferenceSystem,
    radii: &[u64],
) -> Result<Vec<TailNorm>> {
    check_groups(&a.group, reference)?;
    let anchors = map_points_for(f, a)?;
    let coeffs = cross_coefficients(f, &reference.family)?;
    let env = envelope_from_map(f, a, reference, 1)?.envelope;
    let k = fiber_bound(a);
    Ok(radii
        .par_iter()
        .map(|&r| {
            let m = masked(&coeffs, &anchors, reference, r, true);
            TailNorm {
                radius: r,
                norm: dense::spectral_norm(&m),
                schur_bound: env.tail(r) * (k as f64).sqrt(),
                fiber_bound: k,
            }
        })
        .collect())
}

pub fn tail_operator_norm(f: &VectorFamily, a: &IndexedFamilyMap, reference: &ReferenceSystem, r: u64) -> Result<TailNorm> {
    Ok(tail_operator_norms(f, a, reference, &[r])?.remove(0))
}

/// Largest entry of `G~ G^H - I`.
pub fn dual_residual(reference: &VectorFamily, dual: &VectorFamily) -> Result<f64> {
    if reference.len() != dual.len() || reference.dimension() != dual.dimension() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: dual.len(),
        });
    }
    let recon = dense::cmul(dual.matrix(), &reference.matrix().adjoint());
    let id = CMatrix::identity(recon.nrows(), recon.ncols());
    Ok((recon - id).iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// `f_iR = sum_{||a(i) - n|| <= R} <f_i, g_n> g~_n`.
pub fn truncate_family(
    f: &VectorFamily,
    a: &IndexedFamilyMap,
    reference: &ReferenceSystem,
    dual: &VectorFamily,
    r: u64,
) -> Result<VectorFamily> {
    Truncator::new(f, a, reference, dual)?.truncate(r)
}

/// Cross-coefficients of `F` against a reference, kept for repeated truncation.
pub struct Truncator<'a> {
    f: &'a VectorFamily,
    reference: &'a ReferenceSystem,
    dual: &'a VectorFamily,
    anchors: Vec<GroupPoint>,
    coeffs: CMatrix,
}

impl<'a> Truncator<'a> {
    /// Fails with [`Error::InvalidDual`] unless `dual` reconstructs the reference window.
    pub fn new(f: &'a VectorFamily, a: &IndexedFamilyMap, reference: &'a ReferenceSystem, dual: &'a VectorFamily) -> Result<Self> {
        check_groups(&a.group, reference)?;
        let residual = dual_residual(&reference.family, dual)?;
        if residual >= 1e-9 {
            return Err(Error::InvalidDual { residual });
        }
        Ok(Self {
            anchors: map_points_for(f, a)?,
            coeffs: cross_coefficients(f, &reference.family)?,
            f,
            reference,
            dual,
        })
    }

    pub fn truncate(&self, r: u64) -> Result<VectorFamily> {
        let g = &self.reference.group;
        let m = self.dual.dimension();
        let cols: Vec<CVector> = (0..self.f.len())
            .into_par_iter()
            .map(|i| {
                let mut col = CVector::zeros(m);
                for (n, pt) in self.reference.points.iter().enumerate() {
                    if g.distance(&self.anchors[i], pt) <= r {
                        col.axpy(self.coeffs[(i, n)], &self.dual.matrix().column(n), Complex64::from(1.0));
                    }
                }
                col
            })
            .collect();
        self.f.with_matrix(CMatrix::from_columns(&cols))
    }

    /// `||L_I - L_IR||`.
    pub fn gap(&self, r: u64) -> Result<f64> {
        analysis_gap_norm(self.f, &self.truncate(r)?)
    }
}

/// `||L_I - L_IR||`, the largest singular value of the difference synthesis matrix.
pub fn analysis_gap_norm(f: &VectorFamily, f_r: &VectorFamily) -> Result<f64> {
    if f.len() != f_r.len() || f.dimension() != f_r.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: f_r.len(),
        });
    }
    Ok(dense::spectral_norm(&(f.matrix() - f_r.matrix())))
}
