use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::curve::CCurve;
use super::finite::SelectionResult;
use crate::error::Result;
use crate::linalg::{dense, gram, VectorFamily};

/// Relative slack allowed when comparing recomputed eigenvalues.
pub const VERIFY_TOL: f64 = 1e-9;

/// Constants the conclusions are stated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyContext {
    pub u: f64,
    /// `B_F`, the Bessel bound of the family.
    pub b_f: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Riesz bounds of the reference; `A = B` for a tight frame reference.
    pub a_ref: f64,
    pub b_ref: f64,
    pub c_curve: CCurve,
}

impl VerifyContext {
    /// Constants read off a blockwise result.
    pub fn from_result(result: &SelectionResult, c_curve: CCurve) -> Option<Self> {
        let s = result.blockwise.as_ref()?;
        Some(Self {
            u: result.u,
            b_f: s.b_f,
            epsilon: s.epsilon,
            delta: s.delta,
            a_ref: s.ref_lower,
            b_ref: s.ref_upper,
            c_curve,
        })
    }

    /// Constants of a finite selection: `B_F = ||T||^2` and a trivial reference.
    pub fn finite(result: &SelectionResult, epsilon: f64, c_curve: CCurve) -> Self {
        Self {
            u: result.u,
            b_f: result.t_norm * result.t_norm,
            epsilon,
            delta: 0.0,
            a_ref: 1.0,
            b_ref: 1.0,
            c_curve,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Reported but not part of the overall verdict.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub clauses: Vec<ClauseCheck>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn clause(&self, name: &str) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

fn at_least(name: &str, value: f64, threshold: f64, informational: bool) -> ClauseCheck {
    ClauseCheck {
        name: name.into(),
        value,
        threshold,
        pass: value >= threshold - VERIFY_TOL * threshold.abs().max(1.0),
        informational,
    }
}

/// Rechecks the density and Riesz conclusions from the family and the selected labels.
pub fn verify_conclusions(result: &SelectionResult, family: &VectorFamily, ctx: &VerifyContext) -> Result<VerificationReport> {
    let known: HashSet<_> = family.labels().iter().collect();
    let mut seen = HashSet::new();
    let mut positions = Vec::with_capacity(result.selected.len());
    let mut well_formed = true;
    for l in &result.selected {
        match family.position(l) {
            Some(i) if known.contains(l) && seen.insert(l) => positions.push(i),
            _ => well_formed = false,
        }
    }
    let lambda = if positions.is_empty() {
        0.0
    } else {
        let eig = dense::hermitian_eigenvalues(gram(&family.subfamily(&positions))?.entries());
        dense::clamp_psd(eig[0], eig[eig.len() - 1])
    };
    let ratio_ab = ctx.a_ref / ctx.b_ref;
    let size_target = (1.0 - ctx.epsilon) * ctx.u * ctx.u / ctx.b_f;
    let c = ctx.c_curve.eval(ctx.epsilon);

    let mut clauses = vec![ClauseCheck {
        name: "subset".into(),
        value: positions.len() as f64,
        threshold: result.selected.len() as f64,
        pass: well_formed,
        informational: false,
    }];
    match &result.blockwise {
        Some(s) => {
            let density_j = positions.len() as f64 / s.covered_cells as f64;
            clauses.push(at_least("density_ratio", density_j / s.density_lower, size_target, false));
            clauses.push(at_least("riesz_lower", lambda, c * (1.0 - ctx.delta) * ratio_ab * ctx.u * ctx.u, false));
            if let Some(p) = &result.params {
                let chain = p.c_epsilon_prime * (1.0 - p.delta / 2.0) * ratio_ab * ctx.u * ctx.u;
                clauses.push(at_least("riesz_lower_chain", lambda, chain, true));
            }
        }
        None => {
            let n = family.len() as f64;
            clauses.push(at_least("size_ratio", positions.len() as f64 / n, size_target, false));
            clauses.push(at_least("riesz_lower", lambda, c * ctx.u * ctx.u, false));
        }
    }
    let drift = (result.achieved_lower - lambda).abs();
    clauses.push(ClauseCheck {
        name: "self_certification".into(),
        value: drift,
        threshold: VERIFY_TOL * lambda.abs().max(1.0),
        pass: drift <= VERIFY_TOL * lambda.abs().max(1.0),
        informational: false,
    });
    let pass = clauses.iter().filter(|c| !c.informational).all(|c| c.pass);
    Ok(VerificationReport { clauses, pass })
}
