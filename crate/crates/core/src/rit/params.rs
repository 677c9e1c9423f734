use serde::{Deserialize, Serialize};

use super::curve::CCurve;
use crate::error::{Error, Result};
use crate::localization::Envelope;

/// Grid step for `eps'` and `alpha`.
pub const PARAM_GRID: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceCase {
    /// Riesz basis reference with biorthogonal dual.
    RieszBasis,
    /// Tight frame reference with an l1-self-localized dual.
    TightFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderPolicy {
    /// Every inequality must hold inside the window.
    Strict,
    /// If the border inequality needs a larger window, use the largest block that
    /// fits and flag the border as uncertified; the density clause is then only
    /// checked empirically.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, nonnegative when the inequality holds.
    pub slack: f64,
    pub holds: bool,
}

impl Inequality {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs,
        }
    }

    fn lt(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            holds: lhs < rhs,
            ..Self::le(name, lhs, rhs)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha_u: f64,
    pub alpha_t: f64,
    pub riesz_term: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParameters {
    pub case: ReferenceCase,
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon_prime: f64,
    pub alpha: f64,
    pub c_epsilon: f64,
    pub c_epsilon_prime: f64,
    pub q: u64,
    pub p: u64,
    pub r_prime: Option<u64>,
    /// Block spacing: `2P + 1` for a Riesz basis reference, `2P + R'` otherwise.
    pub w: u64,
    pub thresholds: Thresholds,
    pub gap_at_q: f64,
    pub gap_measured: bool,
    pub fiber_bound: u64,
    pub density_lower: f64,
    pub border_certified: bool,
    pub inequalities: Vec<Inequality>,
}

impl DerivedParameters {
    /// Every recorded inequality except a flagged border one.
    pub fn all_certified(&self) -> bool {
        self.inequalities
            .iter()
            .all(|i| i.holds || (i.name == "border" && !self.border_certified))
    }
}

/// Everything the parameter derivation reads.
#[derive(Clone)]
pub struct ParamInputs<'a> {
    pub case: ReferenceCase,
    pub epsilon: f64,
    pub delta: f64,
    pub c_curve: &'a CCurve,
    /// Riesz bounds `A <= B` of the reference.
    pub ref_lower: f64,
    pub ref_upper: f64,
    pub u: f64,
    pub t_norm: f64,
    pub envelope: &'a Envelope,
    pub fiber_bound: u64,
    /// Number of group coordinates `d`.
    pub dims: usize,
    pub density_lower: f64,
    /// Bessel bound of the dual reference.
    pub dual_bessel: f64,
    /// Optional measured `||L_I - L_IQ||` as a function of `Q`.
    pub measured_gap: Option<&'a dyn Fn(u64) -> f64>,
    pub dual_envelope: Option<&'a Envelope>,
    /// Bessel bound `B'` of the reference frame.
    pub b_prime: Option<f64>,
    /// Largest block spacing the window accommodates.
    pub max_spacing: u64,
    /// Largest spacing that still leaves two blocks per axis; the measured
    /// fallback stays within it when it can.
    pub preferred_spacing: u64,
    pub policy: BorderPolicy,
}

/// Smallest `eps'`, largest `alpha`, then `Q`, `R'`, `P` in that order.
pub fn derive_parameters(inp: &ParamInputs<'_>) -> Result<DerivedParameters> {
    let (eps, delta) = (inp.epsilon, inp.delta);
    for (name, v) in [("epsilon", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0,1)")));
        }
    }
    for (name, v) in [("A", inp.ref_lower), ("B", inp.ref_upper), ("u", inp.u), ("||T||", inp.t_norm)] {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
        }
    }
    if inp.density_lower <= 0.0 {
        return Err(Error::DegenerateDensity("D^-(a;I) must be positive".into()));
    }
    let c = |e: f64| inp.c_curve.eval(e);
    let c_eps = c(eps);
    let lhs_eps = c_eps * (1.0 - delta);
    let steps = (eps / PARAM_GRID).ceil() as usize;
    let eps_p = (1..steps)
        .map(|j| j as f64 * PARAM_GRID)
        .find(|&e| lhs_eps <= c(e) * (1.0 - delta / 2.0))
        .ok_or_else(|| Error::infeasible("epsilon_prime", format!("no eps' < {eps} with c(eps)(1-delta) <= c(eps')(1-delta/2)")))?;
    let c_p = c(eps_p);

    let alpha_ok = |a: f64| (1.0 - eps_p) * (1.0 - a).powi(2) / (1.0 + a).powi(2) >= 1.0 - eps;
    let alpha_max = (delta / 8.0 / PARAM_GRID + 1e-9).floor() as usize;
    let alpha = (1..=alpha_max)
        .rev()
        .map(|j| j as f64 * PARAM_GRID)
        .find(|&a| alpha_ok(a))
        .ok_or_else(|| Error::infeasible("alpha", format!("no alpha <= {} on the grid satisfies the size inequality", delta / 8.0)))?;

    let riesz_ratio = match inp.case {
        ReferenceCase::RieszBasis => inp.ref_lower / inp.ref_upper,
        ReferenceCase::TightFrame => 1.0,
    };
    let thresholds = {
        let alpha_u = alpha * inp.u;
        let alpha_t = alpha * inp.t_norm;
        let riesz_term = (riesz_ratio * delta * c_p * inp.u * inp.u / 8.0).sqrt();
        Thresholds {
            alpha_u,
            alpha_t,
            riesz_term,
            tau: alpha_u.min(alpha_t).min(riesz_term),
        }
    };
    let k = inp.fiber_bound.max(1) as f64;
    let gap = |q: u64| -> f64 {
        match inp.measured_gap {
            Some(g) => g(q),
            None => inp.envelope.tail(q) * k.sqrt() * inp.dual_bessel.sqrt(),
        }
    };
    let q_cap = (inp.envelope.reach() + 1).max(1);
    let q = (1..=q_cap)
        .find(|&q| gap(q) <= thresholds.tau)
        .ok_or_else(|| Error::infeasible("truncation", format!("gap never drops below tau = {:.3e}", thresholds.tau)))?;
    let gap_q = gap(q);

    let d = inp.dims as i32;
    let b_f = inp.t_norm * inp.t_norm;
    let qf = (2 * q + 1) as f64;
    let (r_prime, cross) = match inp.case {
        ReferenceCase::RieszBasis => (None, None),
        ReferenceCase::TightFrame => {
            let env = inp
                .dual_envelope
                .ok_or_else(|| Error::InvalidParameter("tight frame reference needs a dual envelope".into()))?;
            let bp = inp
                .b_prime
                .ok_or_else(|| Error::InvalidParameter("tight frame reference needs B'".into()))?;
            let coef = b_f * bp / (c_p * inp.u * inp.u) * k * k * qf.powi(2 * d);
            let r = (1..=env.reach() + 1)
                .find(|&r| env.tail(r) * coef < delta / 8.0)
                .expect("tail vanishes past the reach");
            (Some(r), Some(Inequality::lt("cross_term", env.tail(r) * coef, delta / 8.0)))
        }
    };

    let kappa = (1.0 - eps_p) * (1.0 - alpha) / (1.0 + alpha).powi(2);
    let spacing = |p: u64| match r_prime {
        None => 2 * p + 1,
        Some(r) => 2 * p + r,
    };
    let border = |p: u64| {
        let lhs = k * ((spacing(p) as f64).powi(d) - ((2 * (p - q) + 1) as f64).powi(d));
        let rhs = alpha * inp.u * inp.u * kappa * inp.density_lower * ((2 * p + 1) as f64).powi(d) / b_f;
        Inequality::le("border", lhs, rhs)
    };
    let fits = |p: u64| spacing(p) <= inp.max_spacing;
    let mut p = q + 1;
    let mut certified = false;
    while fits(p) {
        if border(p).holds {
            certified = true;
            break;
        }
        p += 1;
    }
    if !certified {
        match inp.policy {
            BorderPolicy::Strict => {
                return Err(Error::infeasible(
                    "border",
                    format!(
                        "no P with spacing <= {} satisfies the border inequality (Q = {q})",
                        inp.max_spacing
                    ),
                ))
            }
            BorderPolicy::Measured => {
                if !fits(q + 1) {
                    return Err(Error::infeasible("border", format!("window admits no block with P > Q = {q}")));
                }
                p -= 1;
                if spacing(q + 1) <= inp.preferred_spacing {
                    while spacing(p) > inp.preferred_spacing {
                        p -= 1;
                    }
                }
            }
        }
    }

    let mut inequalities = vec![
        Inequality::le("epsilon_prime", lhs_eps, c_p * (1.0 - delta / 2.0)),
        Inequality::le("alpha_delta", alpha, delta / 8.0),
        Inequality::le("alpha_size", 1.0 - eps, (1.0 - eps_p) * (1.0 - alpha).powi(2) / (1.0 + alpha).powi(2)),
        Inequality::le("truncation", gap_q, thresholds.tau),
        Inequality::lt("p_exceeds_q", q as f64, p as f64),
        border(p),
    ];
    inequalities.extend(cross);
    Ok(DerivedParameters {
        case: inp.case,
        epsilon: eps,
        delta,
        epsilon_prime: eps_p,
        alpha,
        c_epsilon: c_eps,
        c_epsilon_prime: c_p,
        q,
        p,
        r_prime,
        w: spacing(p),
        thresholds,
        gap_at_q: gap_q,
        gap_measured: inp.measured_gap.is_some(),
        fiber_bound: inp.fiber_bound,
        density_lower: inp.density_lower,
        border_certified: certified,
        inequalities,
    })
}
