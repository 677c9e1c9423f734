use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature nodes for the smoothing average.
const SMOOTHING_NODES: usize = 256;

/// Reference function `c: (0,1) -> (0,1)`, continuous and nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CCurve {
    /// `(1 - sqrt(1 - eps))^2`, the level a barrier selection certifies at
    /// size fraction `1 - eps` of the stable rank.
    Barrier,
    Constant { value: f64 },
    /// Piecewise linear through `(eps, value)` knots, held constant outside.
    Table { eps: Vec<f64>, values: Vec<f64> },
    /// `zeta^{-1} int_{max(0, eps - zeta)}^{eps} c(t) dt`, normalised by the interval length.
    Smoothed { base: Box<CCurve>, zeta: f64 },
}

impl CCurve {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            CCurve::Barrier => {
                let e = eps.clamp(0.0, 1.0);
                (1.0 - (1.0 - e).sqrt()).powi(2)
            }
            CCurve::Constant { value } => *value,
            CCurve::Table { eps: xs, values } => {
                if xs.is_empty() {
                    return 0.0;
                }
                let i = xs.partition_point(|x| *x <= eps);
                if i == 0 {
                    values[0]
                } else if i == xs.len() {
                    values[xs.len() - 1]
                } else {
                    let t = (eps - xs[i - 1]) / (xs[i] - xs[i - 1]);
                    values[i - 1] + t * (values[i] - values[i - 1])
                }
            }
            CCurve::Smoothed { base, zeta } => {
                let lo = (eps - zeta).max(0.0);
                let h = (eps - lo) / SMOOTHING_NODES as f64;
                if h <= 0.0 {
                    return base.eval(eps);
                }
                (0..SMOOTHING_NODES)
                    .map(|j| base.eval(lo + (j as f64 + 0.5) * h))
                    .sum::<f64>()
                    / SMOOTHING_NODES as f64
            }
        }
    }

    /// Checks range and monotonicity on a uniform grid of `(0,1)`.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for j in 1..grid {
            let e = j as f64 / grid as f64;
            let v = self.eval(e);
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("c({e}) = {v} outside (0,1)")));
            }
            if v < prev - 1e-12 {
                return Err(Error::InvalidParameter(format!("c decreases at eps = {e}")));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Continuous version of a monotone curve by a trailing moving average of width `zeta`.
pub fn smooth_c_curve(c_raw: &CCurve, zeta: f64) -> Result<CCurve> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing width {zeta} must be positive")));
    }
    Ok(CCurve::Smoothed {
        base: Box::new(c_raw.clone()),
        zeta,
    })
}
