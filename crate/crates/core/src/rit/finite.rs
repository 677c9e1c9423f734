use serde::{Deserialize, Serialize};

use super::curve::CCurve;
use super::params::DerivedParameters;
use crate::error::{Error, Result};
use crate::linalg::{dense, gram, Label, VectorFamily};
use crate::CMatrix;

/// Largest family the exhaustive oracle will enumerate.
pub const EXHAUSTIVE_MAX: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Barrier,
    Greedy,
    ExhaustiveOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub c_curve: CCurve,
    pub strategy: Strategy,
    /// Families above this size are rejected by the exhaustive oracle.
    pub exhaustive_cap: usize,
    /// Keep adding vectors past the target size while the certificate survives.
    #[serde(default = "yes")]
    pub extend: bool,
}

fn yes() -> bool {
    true
}

impl SelectorConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            c_curve: CCurve::Barrier,
            strategy: Strategy::Barrier,
            exhaustive_cap: 12,
            extend: true,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0,1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub center: Vec<i64>,
    pub candidates: usize,
    pub selected: usize,
    /// `lambda_min` of the block selection on the truncated vectors.
    pub block_lower: f64,
    pub block_target: f64,
    pub trimmed: usize,
    /// `lambda_min` after the border trim, still on truncated vectors.
    pub trimmed_lower: f64,
}

/// Chosen subset with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<Label>,
    pub positions: Vec<usize>,
    pub achieved_lower: f64,
    pub achieved_upper: f64,
    pub size_ratio: f64,
    pub target_size: usize,
    /// `c_impl(eps)`.
    pub c_value: f64,
    /// Threshold certified by construction and rechecked against `achieved_lower`.
    pub certified_bound: f64,
    pub u: f64,
    pub t_norm: f64,
    pub strategy: Strategy,
    pub params: Option<DerivedParameters>,
    pub per_block: Vec<BlockRecord>,
    pub blockwise: Option<super::blockwise::BlockwiseSummary>,
}

/// Unit-norm columns and the original norms.
pub fn normalize_columns(f: &VectorFamily) -> Result<(VectorFamily, Vec<f64>)> {
    let scales = f.norms();
    if let Some(i) = scales.iter().position(|s| *s == 0.0) {
        return Err(Error::ZeroVector(f.label(i).to_string()));
    }
    let mut m = f.matrix().clone();
    for (j, s) in scales.iter().enumerate() {
        m.column_mut(j).unscale_mut(*s);
    }
    Ok((f.with_matrix(m)?, scales))
}

fn sub_gram(g: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| g[(idx[a], idx[b])])
}

fn lambda_min(g: &CMatrix, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return f64::INFINITY;
    }
    dense::hermitian_eigenvalues(&sub_gram(g, idx))[0]
}

/// `max lambda_min(Gram(F_J))` over `|J| = s`, for every `s` (entry 0 is `+inf`).
pub fn pareto_frontier(f: &VectorFamily) -> Result<Vec<f64>> {
    Ok(exhaustive_table(f)?.into_iter().map(|(v, _)| v).collect())
}

fn exhaustive_table(f: &VectorFamily) -> Result<Vec<(f64, u32)>> {
    let n = f.len();
    if n > EXHAUSTIVE_MAX {
        return Err(Error::InvalidParameter(format!("exhaustive enumeration over {n} > {EXHAUSTIVE_MAX} vectors")));
    }
    let g = gram(f)?.entries().clone();
    let mut best = vec![(f64::NEG_INFINITY, 0u32); n + 1];
    best[0] = (f64::INFINITY, 0);
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let v = dense::clamp_psd(lambda_min(&g, &idx), 1.0);
        let s = idx.len();
        // Masks with the same popcount arrive in increasing order, so `>` keeps the
        // lexicographically smallest index set among ties.
        if v > best[s].0 || (v == best[s].0 && lex_less(mask, best[s].1)) {
            best[s] = (v, mask);
        }
    }
    Ok(best)
}

fn lex_less(a: u32, b: u32) -> bool {
    if b == 0 {
        return true;
    }
    let lowest_diff = (a ^ b).trailing_zeros();
    a >> lowest_diff & 1 == 1
}

/// `(I - G_S / b)^{-1}` for the current selection.
fn barrier_kernel(gs: &CMatrix, sel: &[usize], b: f64) -> Option<CMatrix> {
    let t = sel.len();
    let m = CMatrix::identity(t, t) - sub_gram(gs, sel).unscale(b);
    m.try_inverse()
}

/// `-v^* (A - bI)^{-1} v - 1` with `A = sum_{j in S} s_j s_j^*`, evaluated in Gram space.
fn crossing_margin(gs: &CMatrix, sel: &[usize], kernel: &Option<CMatrix>, cand: usize, b: f64) -> f64 {
    let vv = gs[(cand, cand)].re;
    let quad = match kernel {
        Some(k) if !sel.is_empty() => {
            let w = nalgebra::DVector::from_fn(sel.len(), |a, _| gs[(sel[a], cand)]);
            (w.adjoint() * k * &w)[(0, 0)].re
        }
        _ => 0.0,
    };
    // v^*(A - bI)^{-1} v = -|v|^2/b - w^*(I - G/b)^{-1} w / b^2
    vv / b + quad / (b * b) - 1.0
}

fn barrier_select(gs: &CMatrix, k: usize, c: f64) -> Option<Vec<usize>> {
    let n = gs.nrows();
    let top = c.sqrt();
    let mut sel: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for step in 1..=k {
        let scheduled = top - step as f64 * (top - c) / k as f64;
        let mut chosen = None;
        for b in [scheduled, c] {
            let kernel = barrier_kernel(gs, &sel, b);
            if kernel.is_none() && !sel.is_empty() {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for j in (0..n).filter(|&j| !used[j]) {
                let m = crossing_margin(gs, &sel, &kernel, j, b);
                if m > 0.0 && best.is_none_or(|(bm, _)| m > bm) {
                    best = Some((m, j));
                }
            }
            if let Some((_, j)) = best {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen?;
        used[j] = true;
        sel.push(j);
    }
    sel.sort_unstable();
    Some(sel)
}

fn greedy_select(g: &CMatrix, k: usize, floor: f64) -> Option<Vec<usize>> {
    let n = g.nrows();
    let mut sel: Vec<usize> = Vec::with_capacity(k);
    let mut alive: Vec<bool> = vec![true; n];
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if !alive[j] {
                continue;
            }
            let mut trial = sel.clone();
            trial.push(j);
            let v = lambda_min(g, &trial);
            if v < floor {
                // adding j can only hurt more later (interlacing), drop it for good
                alive[j] = false;
                continue;
            }
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, j));
            }
        }
        let (_, j) = best?;
        alive[j] = false;
        sel.push(j);
    }
    sel.sort_unstable();
    Some(sel)
}

/// Adds vectors one at a time while `lambda_min` stays above `floor`.
///
/// Requires the current selection to sit strictly above `floor`; a positive
/// crossing margin then forces the new eigenvalue above `floor` as well.
fn extend_selection(g: &CMatrix, mut sel: Vec<usize>, floor: f64) -> Vec<usize> {
    let n = g.nrows();
    if floor <= 0.0 || lambda_min(g, &sel) <= floor {
        return sel;
    }
    let mut used = vec![false; n];
    for &j in &sel {
        used[j] = true;
    }
    loop {
        let kernel = barrier_kernel(g, &sel, floor);
        if kernel.is_none() {
            break;
        }
        let best = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (crossing_margin(g, &sel, &kernel, j, floor), j))
            .filter(|(m, _)| *m > 1e-9)
            .fold(None, |acc: Option<(f64, usize)>, (m, j)| match acc {
                Some((bm, _)) if bm >= m => acc,
                _ => Some((m, j)),
            });
        let Some((_, j)) = best else { break };
        used[j] = true;
        sel.push(j);
    }
    sel.sort_unstable();
    sel
}

/// Finite restricted-invertibility selection with a certified lower Riesz bound.
pub fn finite_rit_select(f: &VectorFamily, cfg: &SelectorConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let (s, scales) = normalize_columns(f)?;
    let u = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let t_norm = dense::spectral_norm(f.matrix());
    let s_norm = dense::spectral_norm(s.matrix());
    let n = f.len();
    let target = ((1.0 - cfg.epsilon) * n as f64 / (s_norm * s_norm) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let c = cfg.c_curve.eval(cfg.epsilon);
    let bound = c * u * u;
    let g = gram(f)?.entries().clone();

    let chosen = match cfg.strategy {
        Strategy::Barrier => {
            let gs = gram(&s)?.entries().clone();
            barrier_select(&gs, target, c)
        }
        Strategy::Greedy => greedy_select(&g, target, bound),
        Strategy::ExhaustiveOracle => {
            if n > cfg.exhaustive_cap {
                return Err(Error::InvalidParameter(format!(
                    "exhaustive oracle capped at {} vectors, got {n}",
                    cfg.exhaustive_cap
                )));
            }
            let table = exhaustive_table(f)?;
            (target..=n)
                .rev()
                .find(|&sz| table[sz].0 >= bound)
                .map(|sz| (0..n).filter(|i| table[sz].1 >> i & 1 == 1).collect())
        }
    };
    let chosen = match (chosen, cfg.extend, cfg.strategy) {
        (Some(sel), true, Strategy::Barrier | Strategy::Greedy) => Some(extend_selection(&g, sel, bound)),
        (other, _, _) => other,
    };
    let Some(positions) = chosen else {
        return Err(Error::SelectionFailed {
            reason: format!("{:?} strategy found no subset of size {target} above {bound:.3e}", cfg.strategy),
            best_size: 0,
            best_lower: 0.0,
        });
    };
    let sub = f.subfamily(&positions);
    let eig = dense::hermitian_eigenvalues(gram(&sub)?.entries());
    let top = eig[eig.len() - 1];
    let lower = dense::clamp_psd(eig[0], top);
    if lower < bound * (1.0 - 1e-9) || positions.len() < target {
        return Err(Error::SelectionFailed {
            reason: format!("certificate {bound:.6e} not met"),
            best_size: positions.len(),
            best_lower: lower,
        });
    }
    Ok(SelectionResult {
        selected: positions.iter().map(|&i| f.label(i).clone()).collect(),
        size_ratio: positions.len() as f64 / n as f64,
        positions,
        achieved_lower: lower,
        achieved_upper: top,
        target_size: target,
        c_value: c,
        certified_bound: bound,
        u,
        t_norm,
        strategy: cfg.strategy,
        params: None,
        per_block: Vec::new(),
        blockwise: None,
    })
}
