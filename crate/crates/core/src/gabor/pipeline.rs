use serde::{Deserialize, Serialize};

use super::system::{gabor_system, gabor_system_union, lattice_map_for, TFSet};
use super::tf::{s0_diagnostic, Signal, TFPoint};
use crate::error::{Error, Result};
use crate::group::{GroupBox, GroupPoint, ReferenceSystem};
use crate::linalg::{bessel_bound, dense, frame_bounds, frame_operator, VectorFamily};
use crate::localization::{self_localization_check, Verdict};
use crate::rit::{blockwise_select_case_b, verify_conclusions, BlockwiseConfig, BorderPolicy, SelectionResult, VerificationReport, VerifyContext};
use crate::{CMatrix, CVector, Complex64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborConfig {
    pub blockwise: BlockwiseConfig,
    /// Overrides the half-lattice step.
    #[serde(default)]
    pub base_step: Option<usize>,
    /// Reject windows whose `S0` diagnostic reads unsupported.
    #[serde(default = "yes")]
    pub require_s0: bool,
}

fn yes() -> bool {
    true
}

impl GaborConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        let mut blockwise = BlockwiseConfig::new(epsilon, delta);
        blockwise.policy = BorderPolicy::Measured;
        blockwise.measured_gap = true;
        Self {
            blockwise,
            base_step: None,
            require_s0: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborAddendum {
    pub phi_norm: f64,
    pub bessel_b: f64,
    /// Even divisor of `n` nearest `sqrt(n)`.
    pub critical_step: usize,
    /// Half of `critical_step`; the reference lattice is `step Z_n x step Z_n`.
    pub step: usize,
    pub lattice_size: usize,
    pub reference_lower: f64,
    pub reference_upper: f64,
    pub reference_verdict: Verdict,
    pub s0_verdict: Verdict,
    /// `|Lambda| / n`, points per unit time-frequency area.
    pub density_lambda: f64,
    /// `|J| / n` over the covered blocks, rescaled to the full plane.
    pub density_selected: f64,
    /// `c(eps)(1 - delta) ||phi||`, the first-power variant of the lower bound.
    pub first_power_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborResult {
    pub selection: SelectionResult,
    pub addendum: GaborAddendum,
    pub verification: VerificationReport,
}

/// `(s0, s0/2)` with `s0` the even divisor of `n` nearest `sqrt(n)`, ties to the smaller.
pub fn half_lattice_step(n: usize) -> Result<(usize, usize)> {
    let root = (n as f64).sqrt();
    let s0 = (2..=n)
        .step_by(2)
        .filter(|d| n.is_multiple_of(*d))
        .min_by(|a, b| {
            let da = (*a as f64 - root).abs();
            let db = (*b as f64 - root).abs();
            da.partial_cmp(&db).expect("finite").then(a.cmp(b))
        })
        .ok_or_else(|| Error::InvalidParameter(format!("n = {n} has no even divisor")))?;
    Ok((s0, s0 / 2))
}

/// `S^{-1/2} g` for the frame operator `S` of `(g, step Z_n x step Z_n)`.
pub fn parseval_window(g: &Signal, step: usize) -> Result<Signal> {
    let lattice = TFSet::lattice(g.len(), step, step)?;
    let s = frame_operator(&gabor_system(g, &lattice)?);
    let e = dense::hermitian_eigen(&s);
    if e.values[0] <= 1e-12 * e.values[e.values.len() - 1] {
        return Err(Error::NotBessel(format!("lattice step {step} does not give a frame")));
    }
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        e.values.len(),
        e.values.iter().map(|v| Complex64::from(1.0 / v.sqrt())),
    ));
    let root = dense::cmul(&dense::cmul(&e.vectors, &d), &e.vectors.adjoint());
    Signal::from_vector(&(root * g.to_vector()), g.grid_spacing)
}

/// Tight reference system on the half lattice and its group embedding.
pub fn half_lattice_reference(n: usize, step: usize) -> Result<ReferenceSystem> {
    let gamma = parseval_window(&Signal::gaussian(n), step)?;
    let lattice = TFSet::lattice(n, step, step)?;
    let family = gabor_system(&gamma, &lattice)?;
    let m = (n / step) as i64;
    let group = crate::group::FgaGroup::cyclic(vec![m, m])?;
    let points = lattice
        .points
        .iter()
        .map(|p| GroupPoint::new(vec![(p.x / step) as i64, (p.omega / step) as i64]))
        .collect();
    ReferenceSystem::new(group, family, points)
}

/// Selection on `(phi, Lambda)` through the tight half-lattice reference.
pub fn gabor_rit_pipeline(phi: &Signal, lambda: &TFSet, cfg: &GaborConfig) -> Result<GaborResult> {
    let family = gabor_system(phi, lambda)?;
    run(&family, &[(phi.clone(), lambda.clone())], cfg)
}

/// As [`gabor_rit_pipeline`] on a labelled union of Gabor systems.
pub fn gabor_rit_pipeline_union(systems: &[(Signal, TFSet)], cfg: &GaborConfig) -> Result<GaborResult> {
    run(&gabor_system_union(systems)?, systems, cfg)
}

fn run(
    family: &VectorFamily,
    systems: &[(Signal, TFSet)],
    cfg: &GaborConfig,
) -> Result<GaborResult> {
    let phi = &systems.first().ok_or(Error::EmptyFamily)?.0;
    let n = phi.len();
    if systems.iter().any(|(p, l)| p.len() != n || l.n != n) {
        return Err(Error::InvalidParameter("all systems must share the grid".into()));
    }
    let s0 = s0_diagnostic(phi)?;
    if cfg.require_s0 && s0.verdict == Verdict::Unsupported {
        return Err(Error::InvalidParameter("window fails the S0 diagnostic".into()));
    }
    let b = bessel_bound(family)?;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::NotBessel(format!("Bessel bound {b}")));
    }
    let (critical, half) = half_lattice_step(n)?;
    let step = cfg.base_step.unwrap_or(half);
    let reference = half_lattice_reference(n, step)?;
    let rb = frame_bounds(&reference.family)?;
    let verdict = self_localization_check(&reference, 1)?.p_summable_verdict;
    let points: Vec<TFPoint> = systems.iter().flat_map(|(_, l)| l.points.iter().copied()).collect();
    let map = lattice_map_for(&points, family.labels().to_vec(), n, step)?;
    let problem = crate::rit::BlockwiseProblem {
        family,
        map: &map,
        reference: &reference,
        dual: &reference.family,
        window: GroupBox::new(GroupPoint::new(Vec::new()), 0),
    };
    let selection = blockwise_select_case_b(&problem, &cfg.blockwise)?;
    let summary = selection.blockwise.as_ref().expect("blockwise result");
    let ctx = VerifyContext::from_result(&selection, cfg.blockwise.selector.c_curve.clone()).expect("blockwise result");
    let verification = verify_conclusions(&selection, family, &ctx)?;
    let phi_norm = family.min_norm();
    let m2 = (n / step).pow(2) as f64;
    let c = cfg.blockwise.selector.c_curve.eval(cfg.blockwise.selector.epsilon);
    let addendum = GaborAddendum {
        phi_norm,
        bessel_b: b,
        critical_step: critical,
        step,
        lattice_size: n / step,
        reference_lower: rb.lower,
        reference_upper: rb.upper,
        reference_verdict: verdict,
        s0_verdict: s0.verdict,
        density_lambda: points.len() as f64 / n as f64,
        density_selected: summary.density_j * m2 / n as f64,
        first_power_bound: c * (1.0 - cfg.blockwise.selector.delta) * phi_norm,
    };
    Ok(GaborResult {
        selection,
        addendum,
        verification,
    })
}
