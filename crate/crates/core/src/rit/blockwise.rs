use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::finite::{finite_rit_select, BlockRecord, SelectionResult, SelectorConfig};
use super::params::{derive_parameters, BorderPolicy, ParamInputs, ReferenceCase};
use crate::error::{Error, Result};
use crate::group::{cartesian, density_indexed, fiber_bound, DensityMode, GroupBox, GroupPoint, IndexedFamilyMap, ReferenceSystem, SweepSpec};
use crate::linalg::{bessel_bound, dense, frame_bounds, gram, riesz_bounds, VectorFamily};
use crate::localization::{envelope_from_map, Envelope, Truncator};
use crate::{CMatrix, CVector};

/// Windowed input of the blockwise construction.
#[derive(Debug, Clone)]
pub struct BlockwiseProblem<'a> {
    pub family: &'a VectorFamily,
    pub map: &'a IndexedFamilyMap,
    pub reference: &'a ReferenceSystem,
    /// Dual of `reference.family`, same order.
    pub dual: &'a VectorFamily,
    /// Box over the free coordinates; cyclic coordinates are covered whole.
    pub window: GroupBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockwiseConfig {
    pub selector: SelectorConfig,
    pub policy: BorderPolicy,
    /// Choose `Q` from the exact `||L_I - L_IQ||` instead of the Schur estimate.
    #[serde(default)]
    pub measured_gap: bool,
    /// Blocks wanted along every axis when the measured border fallback applies.
    #[serde(default = "one")]
    pub min_blocks: u64,
    /// Overrides the computed `D^-(a; I)`.
    #[serde(default)]
    pub density_lower: Option<f64>,
}

impl BlockwiseConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            selector: SelectorConfig::new(epsilon, delta),
            policy: BorderPolicy::Strict,
            measured_gap: false,
            min_blocks: 1,
            density_lower: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTermReport {
    /// Spectral radius of `D^{-1/2} O D^{-1/2}` over the selected blocks.
    pub measured_ratio: f64,
    /// The proof's coefficient `(||T||^2 B'/c u^2) K^2 (2Q+1)^{2d} Delta_{r'}(R')`.
    pub bound_ratio: f64,
    pub delta_over_8: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockwiseSummary {
    pub case: ReferenceCase,
    pub epsilon: f64,
    pub delta: f64,
    pub ref_lower: f64,
    pub ref_upper: f64,
    pub b_prime: Option<f64>,
    /// `B_F = ||T||^2`.
    pub b_f: f64,
    pub density_lower: f64,
    pub covered_cells: u64,
    pub density_j: f64,
    pub density_ratio: f64,
    /// `(1 - eps) u^2 / B_F`.
    pub density_ratio_target: f64,
    /// `lambda_min` of the truncated selection `F_Q(J)`.
    pub truncated_lower: f64,
    /// `(A/B) min_k lambda_min(F_Q(J_k))`; the union of trimmed blocks stays above it.
    pub union_bound: f64,
    pub union_holds: bool,
    pub cross_term: Option<CrossTermReport>,
    /// `c(eps')(1 - delta/2)(A/B) u^2`.
    pub chain_bound: f64,
    /// `c(eps)(1 - delta)(A/B) u^2`.
    pub stated_bound: f64,
    pub border_certified: bool,
}

/// Inputs to the proof's cross-term chain.
#[derive(Debug, Clone)]
pub struct CrossTermInputs<'a> {
    pub dual_envelope: &'a Envelope,
    pub r_prime: u64,
    pub fiber_bound: u64,
    pub q: u64,
    pub dims: usize,
    pub b_prime: f64,
    pub t_norm: f64,
    pub c_value: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossTerm {
    pub bound: f64,
    pub actual: f64,
}

/// `|sum_{k != k'} <x_k, x_k'>|` against the proof's bound in terms of `sum ||x_k||^2`.
pub fn cross_term_bound(blocks: &[CVector], inp: &CrossTermInputs<'_>) -> CrossTerm {
    let mut actual = num_complex::Complex64::default();
    for (i, x) in blocks.iter().enumerate() {
        for (j, y) in blocks.iter().enumerate() {
            if i != j {
                actual += y.dotc(x);
            }
        }
    }
    let energy: f64 = blocks.iter().map(|x| x.norm_squared()).sum();
    let k = inp.fiber_bound.max(1) as f64;
    let coef = inp.t_norm.powi(2) * inp.b_prime / (inp.c_value * inp.u * inp.u)
        * k
        * ((2 * inp.q + 1) as f64).powi(2 * inp.dims as i32);
    CrossTerm {
        bound: coef * energy * k * inp.dual_envelope.tail(inp.r_prime),
        actual: actual.norm(),
    }
}

/// Riesz basis reference with biorthogonal dual.
pub fn blockwise_select_case_a(problem: &BlockwiseProblem<'_>, cfg: &BlockwiseConfig) -> Result<SelectionResult> {
    blockwise(problem, cfg, ReferenceCase::RieszBasis)
}

/// Tight frame reference with an l1-self-localized dual.
pub fn blockwise_select_case_b(problem: &BlockwiseProblem<'_>, cfg: &BlockwiseConfig) -> Result<SelectionResult> {
    blockwise(problem, cfg, ReferenceCase::TightFrame)
}

struct Geometry {
    centres: Vec<GroupPoint>,
    free_blocks: u64,
    max_spacing: u64,
}

fn max_spacing(problem: &BlockwiseProblem<'_>) -> u64 {
    let g = &problem.map.group;
    let free = if g.free_rank > 0 { 2 * problem.window.radius + 1 } else { u64::MAX };
    g.cyclic_moduli.iter().map(|&n| n as u64).fold(free, u64::min)
}

fn one() -> u64 {
    1
}

/// Spacing that leaves `blocks` blocks along every axis.
fn preferred_spacing(problem: &BlockwiseProblem<'_>, blocks: u64) -> u64 {
    let g = &problem.map.group;
    let b = blocks.max(1);
    let free = if g.free_rank > 0 { (2 * problem.window.radius + 1) / (2 * b - 1) } else { u64::MAX };
    g.cyclic_moduli.iter().map(|&n| n as u64 / b).fold(free, u64::min)
}

fn block_centres(problem: &BlockwiseProblem<'_>, p: u64, spacing: u64) -> Geometry {
    let g = &problem.map.group;
    let radius = problem.window.radius as i64;
    let (p, s) = (p as i64, spacing as i64);
    let mut axes = Vec::with_capacity(g.rank());
    let mut free_blocks = 1u64;
    for j in 0..g.free_rank {
        let c = problem.window.center.coords[j];
        let reach = (radius - p).max(-1);
        let t_max = if reach < 0 { -1 } else { reach / s };
        let axis: Vec<i64> = (-t_max..=t_max).map(|t| c + t * s).collect();
        free_blocks *= axis.len() as u64;
        axes.push(axis);
    }
    for &n in &g.cyclic_moduli {
        axes.push((0..n / s).map(|t| p + t * s).collect());
    }
    let centres = cartesian(&axes).into_iter().map(GroupPoint::new).collect();
    Geometry {
        centres,
        free_blocks,
        max_spacing: max_spacing(problem),
    }
}

fn lambda_min(f: &VectorFamily) -> Result<f64> {
    if f.is_empty() {
        return Ok(f64::INFINITY);
    }
    let eig = dense::hermitian_eigenvalues(gram(f)?.entries());
    Ok(dense::clamp_psd(eig[0], eig[eig.len() - 1]))
}

fn inv_sqrt(m: &CMatrix) -> CMatrix {
    let e = dense::hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        e.values.len(),
        e.values.iter().map(|&v| num_complex::Complex64::from(1.0 / v.max(1e-300).sqrt())),
    ));
    dense::cmul(&dense::cmul(&e.vectors, &d), &e.vectors.adjoint())
}

/// Spectral radius of the normalized off-block-diagonal part of `gram`.
fn cross_ratio(gram: &CMatrix, blocks: &[Vec<usize>]) -> f64 {
    let n = gram.nrows();
    let mut scale = CMatrix::zeros(n, n);
    let mut off = gram.clone();
    for b in blocks {
        let sub = gram.select_rows(b.iter()).select_columns(b.iter());
        let s = inv_sqrt(&sub);
        for (x, &i) in b.iter().enumerate() {
            for (y, &j) in b.iter().enumerate() {
                scale[(i, j)] = s[(x, y)];
                off[(i, j)] = Default::default();
            }
        }
    }
    let m = dense::cmul(&dense::cmul(&scale, &off), &scale);
    dense::hermitian_eigenvalues(&m).into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn density_lower(problem: &BlockwiseProblem<'_>, cfg: &BlockwiseConfig) -> Result<f64> {
    if let Some(d) = cfg.density_lower {
        return Ok(d);
    }
    let g = &problem.map.group;
    let n = problem.family.len() as f64;
    if g.is_finite() {
        return Ok(n / g.torsion_order() as f64);
    }
    let r_max = (problem.window.radius / 4).max(1);
    let est = density_indexed(
        problem.map,
        problem.family.labels(),
        &DensityMode::Sweep(SweepSpec::new(r_max, problem.window.clone())),
    )?;
    Ok(est.lower)
}

fn blockwise(problem: &BlockwiseProblem<'_>, cfg: &BlockwiseConfig, case: ReferenceCase) -> Result<SelectionResult> {
    cfg.selector.validate()?;
    let f = problem.family;
    let a = problem.map;
    let reference = problem.reference;
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if a.group != reference.group {
        return Err(Error::InvalidGroup("map and reference use different groups".into()));
    }
    if problem.window.center.dim() != a.group.free_rank {
        return Err(Error::CoordinateCount {
            expected: a.group.free_rank,
            found: problem.window.center.dim(),
        });
    }
    let anchors: Vec<GroupPoint> = f
        .labels()
        .iter()
        .map(|l| {
            a.point(l)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("label {l} has no map point")))
        })
        .collect::<Result<_>>()?;
    let u = f.min_norm();
    if u <= 0.0 {
        return Err(Error::ZeroVector("family".into()));
    }
    let t_norm = dense::spectral_norm(f.matrix());
    let b_f = t_norm * t_norm;
    let k = fiber_bound(a);
    let d = a.group.rank();

    let (ref_lower, ref_upper, b_prime, dual_env) = match case {
        ReferenceCase::RieszBasis => {
            let rb = riesz_bounds(&reference.family)?;
            if rb.lower <= 0.0 {
                return Err(Error::ZeroLowerBound);
            }
            (rb.lower, rb.upper, None, None)
        }
        ReferenceCase::TightFrame => {
            let fb = frame_bounds(&reference.family)?;
            if fb.upper - fb.lower > 1e-9 * fb.upper {
                return Err(Error::InvalidParameter(format!(
                    "tight frame reference required, bounds {:.6e} and {:.6e}",
                    fb.lower, fb.upper
                )));
            }
            let dual_ref = ReferenceSystem::new(reference.group.clone(), problem.dual.clone(), reference.points.clone())?;
            let id = IndexedFamilyMap::new(reference.group.clone(), problem.dual.labels().to_vec(), reference.points.clone())?;
            let env = envelope_from_map(problem.dual, &id, &dual_ref, 1)?.envelope;
            (1.0, 1.0, Some(fb.upper), Some(env))
        }
    };
    let envelope = envelope_from_map(f, a, reference, 1)?.envelope;
    let d_lower = density_lower(problem, cfg)?;
    let dual_bessel = bessel_bound(problem.dual)?;
    let truncator = Truncator::new(f, a, reference, problem.dual)?;
    let measured = |q: u64| -> f64 { truncator.gap(q).unwrap_or(f64::INFINITY) };
    let params = derive_parameters(&ParamInputs {
        case,
        epsilon: cfg.selector.epsilon,
        delta: cfg.selector.delta,
        c_curve: &cfg.selector.c_curve,
        ref_lower,
        ref_upper,
        u,
        t_norm,
        envelope: &envelope,
        fiber_bound: k,
        dims: d,
        density_lower: d_lower,
        dual_bessel,
        measured_gap: if cfg.measured_gap { Some(&measured) } else { None },
        dual_envelope: dual_env.as_ref(),
        b_prime,
        max_spacing: max_spacing(problem),
        preferred_spacing: preferred_spacing(problem, cfg.min_blocks),
        policy: cfg.policy,
    })?;
    let (q, p) = (params.q, params.p);
    let geometry = block_centres(problem, p, params.w);
    debug_assert!(params.w <= geometry.max_spacing);
    if geometry.centres.is_empty() {
        return Err(Error::infeasible("window", "no block fits inside the window".to_string()));
    }
    let fq = truncator.truncate(q)?;
    let block_cfg = SelectorConfig {
        epsilon: params.epsilon_prime,
        ..cfg.selector.clone()
    };
    let g = &a.group;

    let blocks: Vec<(BlockRecord, Vec<usize>)> = geometry
        .centres
        .par_iter()
        .map(|centre| -> Result<(BlockRecord, Vec<usize>)> {
            let members: Vec<usize> = (0..f.len()).filter(|&i| g.distance(&anchors[i], centre) <= p).collect();
            let mut rec = BlockRecord {
                center: centre.coords.clone(),
                candidates: members.len(),
                selected: 0,
                block_lower: f64::INFINITY,
                block_target: 0.0,
                trimmed: 0,
                trimmed_lower: f64::INFINITY,
            };
            if members.is_empty() {
                return Ok((rec, Vec::new()));
            }
            let sub = fq.subfamily(&members);
            let sel = finite_rit_select(&sub, &block_cfg).map_err(|e| match e {
                Error::SelectionFailed {
                    reason,
                    best_size,
                    best_lower,
                } => Error::SelectionFailed {
                    reason: format!("block at {centre}: {reason}"),
                    best_size,
                    best_lower,
                },
                other => other,
            })?;
            let kept: Vec<usize> = sel
                .positions
                .iter()
                .map(|&x| members[x])
                .filter(|&i| g.distance(&anchors[i], centre) + q <= p)
                .collect();
            rec.selected = sel.positions.len();
            rec.block_lower = sel.achieved_lower;
            rec.block_target = sel.certified_bound;
            rec.trimmed = sel.positions.len() - kept.len();
            rec.trimmed_lower = lambda_min(&fq.subfamily(&kept))?;
            Ok((rec, kept))
        })
        .collect::<Result<_>>()?;

    let mut positions: Vec<usize> = blocks.iter().flat_map(|(_, b)| b.iter().copied()).collect();
    positions.sort_unstable();
    if positions.is_empty() {
        return Err(Error::SelectionFailed {
            reason: "every block is empty after the border trim".into(),
            best_size: 0,
            best_lower: 0.0,
        });
    }
    let fj = f.subfamily(&positions);
    let eig = dense::hermitian_eigenvalues(gram(&fj)?.entries());
    let top = eig[eig.len() - 1];
    let lower = dense::clamp_psd(eig[0], top);
    let fqj = fq.subfamily(&positions);
    let gq = gram(&fqj)?.entries().clone();
    let truncated_lower = lambda_min(&fqj)?;

    let ratio_ab = ref_lower / ref_upper;
    let min_block = blocks
        .iter()
        .filter(|(_, b)| !b.is_empty())
        .map(|(r, _)| r.trimmed_lower)
        .fold(f64::INFINITY, f64::min);
    let union_bound = ratio_ab * min_block;
    let union_holds = match case {
        ReferenceCase::RieszBasis => truncated_lower >= union_bound - 1e-9,
        ReferenceCase::TightFrame => true,
    };

    let cross_term = match case {
        ReferenceCase::RieszBasis => None,
        ReferenceCase::TightFrame => {
            let index: std::collections::HashMap<usize, usize> = positions.iter().enumerate().map(|(x, &i)| (i, x)).collect();
            let local: Vec<Vec<usize>> = blocks
                .iter()
                .filter(|(_, b)| !b.is_empty())
                .map(|(_, b)| b.iter().map(|i| index[i]).collect())
                .collect();
            let measured = cross_ratio(&gq, &local);
            let bound_ratio = params
                .inequalities
                .iter()
                .find(|i| i.name == "cross_term")
                .map(|i| i.lhs)
                .unwrap_or(0.0);
            let d8 = params.delta / 8.0;
            Some(CrossTermReport {
                measured_ratio: measured,
                bound_ratio,
                delta_over_8: d8,
                holds: measured < d8,
            })
        }
    };

    let chain_bound = params.c_epsilon_prime * (1.0 - params.delta / 2.0) * ratio_ab * u * u;
    let stated_bound = params.c_epsilon * (1.0 - params.delta) * ratio_ab * u * u;
    let tile = params.w.pow(g.free_rank as u32);
    let covered = geometry.free_blocks * tile * g.cyclic_moduli.iter().map(|&n| n as u64).product::<u64>();
    let density_j = positions.len() as f64 / covered as f64;
    let density_ratio = density_j / d_lower;

    if lower < chain_bound * (1.0 - 1e-9) {
        return Err(Error::SelectionFailed {
            reason: format!("union lower bound {lower:.6e} below the chain bound {chain_bound:.6e}"),
            best_size: positions.len(),
            best_lower: lower,
        });
    }
    if let Some(ct) = &cross_term {
        if !ct.holds {
            return Err(Error::SelectionFailed {
                reason: format!(
                    "cross terms {:.3e} exceed delta/8 = {:.3e}",
                    ct.measured_ratio, ct.delta_over_8
                ),
                best_size: positions.len(),
                best_lower: lower,
            });
        }
    }

    let summary = BlockwiseSummary {
        case,
        epsilon: params.epsilon,
        delta: params.delta,
        ref_lower,
        ref_upper,
        b_prime,
        b_f,
        density_lower: d_lower,
        covered_cells: covered,
        density_j,
        density_ratio,
        density_ratio_target: (1.0 - params.epsilon) * u * u / b_f,
        truncated_lower,
        union_bound,
        union_holds,
        cross_term,
        chain_bound,
        stated_bound,
        border_certified: params.border_certified,
    };
    Ok(SelectionResult {
        selected: positions.iter().map(|&i| f.label(i).clone()).collect(),
        positions,
        achieved_lower: lower,
        achieved_upper: top,
        size_ratio: density_ratio,
        target_size: 0,
        c_value: params.c_epsilon_prime,
        certified_bound: chain_bound,
        u,
        t_norm,
        strategy: cfg.selector.strategy,
        per_block: blocks.into_iter().map(|(r, _)| r).collect(),
        params: Some(params),
        blockwise: Some(summary),
    })
}
