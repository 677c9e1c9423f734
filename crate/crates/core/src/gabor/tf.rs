use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::Verdict;
use crate::{CMatrix, CVector};

/// Samples on the cyclic grid `Z_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub samples: Vec<Complex64>,
    /// Time step `h`; frequencies are spaced `1/(n h)`.
    pub grid_spacing: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, grid_spacing: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("signals need at least two samples".into()));
        }
        if !(grid_spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing {grid_spacing} must be positive")));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("signal samples must be finite".into()));
        }
        Ok(Self { samples, grid_spacing })
    }

    /// Time of sample `k`, centred so that index 0 sits at `t = 0`.
    pub fn time(n: usize, h: f64, k: usize) -> f64 {
        let n = n as i64;
        let c = (k as i64 + n / 2).rem_euclid(n) - n / 2;
        c as f64 * h
    }

    /// `sqrt(h) 2^{1/4} e^{-pi t^2}` with `h = 1/sqrt(n)`, unit norm up to sampling error.
    pub fn gaussian(n: usize) -> Self {
        let h = 1.0 / (n as f64).sqrt();
        let samples = (0..n)
            .map(|k| {
                let t = Self::time(n, h, k);
                Complex64::from(h.sqrt() * 2f64.powf(0.25) * (-PI * t * t).exp())
            })
            .collect();
        Self { samples, grid_spacing: h }
    }

    /// `+-1` on `|t| <= width/2`, zero elsewhere, with a sign change at `t = 0`.
    pub fn sign_flip(n: usize, width: f64) -> Self {
        let h = 1.0 / (n as f64).sqrt();
        let samples = (0..n)
            .map(|k| {
                let t = Self::time(n, h, k);
                let v = if t.abs() > width / 2.0 {
                    0.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    1.0
                };
                Complex64::from(v)
            })
            .collect();
        Self { samples, grid_spacing: h }
    }

    pub fn zeros(n: usize) -> Self {
        let h = 1.0 / (n as f64).sqrt();
        Self {
            samples: vec![Complex64::default(); n],
            grid_spacing: h,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroWindow);
        }
        Ok(Self {
            samples: self.samples.iter().map(|z| z / nrm).collect(),
            grid_spacing: self.grid_spacing,
        })
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.samples)
    }

    pub fn from_vector(v: &CVector, grid_spacing: f64) -> Result<Self> {
        Self::new(v.iter().copied().collect(), grid_spacing)
    }
}

/// `lambda = (x, omega)` on `Z_n x Z_n`, both reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TFPoint {
    pub x: usize,
    pub omega: usize,
}

impl TFPoint {
    pub fn new(x: i64, omega: i64, n: usize) -> Self {
        let n = n as i64;
        Self {
            x: x.rem_euclid(n) as usize,
            omega: omega.rem_euclid(n) as usize,
        }
    }
}

impl std::fmt::Display for TFPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.omega)
    }
}

/// `M_omega T_x phi`.
pub fn tf_shift(phi: &Signal, lam: TFPoint) -> Signal {
    let n = phi.len();
    let samples = (0..n)
        .map(|t| {
            let phase = 2.0 * PI * ((lam.omega * t) % n) as f64 / n as f64;
            phi.samples[(t + n - lam.x % n) % n] * Complex64::from_polar(1.0, phase)
        })
        .collect();
    Signal {
        samples,
        grid_spacing: phi.grid_spacing,
    }
}

/// `V_g f(x, omega) = <f, M_omega T_x g>`, rows indexed by `x`.
pub fn stft(f: &Signal, g: &Signal) -> Result<CMatrix> {
    let n = f.len();
    if g.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.len() });
    }
    if g.norm() == 0.0 {
        return Err(Error::ZeroWindow);
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = CMatrix::zeros(n, n);
    let mut buf = vec![Complex64::default(); n];
    for x in 0..n {
        for (t, b) in buf.iter_mut().enumerate() {
            *b = f.samples[t] * g.samples[(t + n - x) % n].conj();
        }
        fft.process(&mut buf);
        for (w, v) in buf.iter().enumerate() {
            out[(x, w)] = *v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulationExponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Infinity,
}

/// Grid `l^p` norm of `V_{g0} f` with cell area `1/n`.
pub fn modulation_norm(f: &Signal, g0: &Signal, p: ModulationExponent) -> Result<f64> {
    let v = stft(f, g0)?;
    let cell = 1.0 / f.len() as f64;
    Ok(match p {
        ModulationExponent::One => v.iter().map(|z| z.norm()).sum::<f64>() * cell,
        ModulationExponent::Two => (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt(),
        ModulationExponent::Infinity => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S0Report {
    pub m1_estimate: f64,
    /// Largest `|V_{g0} f|` on each cyclic sup-norm shell around the peak.
    pub shell_maxima: Vec<f64>,
    /// Log-log slope of the shell maxima over the outer half of the radii.
    pub tail_exponent: Option<f64>,
    pub verdict: Verdict,
}

/// Tail exponent at or below which the STFT is read as rapidly decaying.
pub const S0_SUPPORTED_SLOPE: f64 = -3.0;
/// Tail exponent above which decay is read as too slow for `S0`.
pub const S0_UNSUPPORTED_SLOPE: f64 = -1.5;

/// `M^1` estimate and STFT tail decay against a Gaussian window.
pub fn s0_diagnostic(f: &Signal) -> Result<S0Report> {
    let n = f.len();
    let g0 = Signal::gaussian(n);
    let v = stft(f, &g0)?;
    let m1 = v.iter().map(|z| z.norm()).sum::<f64>() / n as f64;
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(S0Report {
            m1_estimate: 0.0,
            shell_maxima: Vec::new(),
            tail_exponent: None,
            verdict: Verdict::Supported,
        });
    }
    let (mut px, mut pw) = (0, 0);
    for x in 0..n {
        for w in 0..n {
            if v[(x, w)].norm() > v[(px, pw)].norm() {
                (px, pw) = (x, w);
            }
        }
    }
    let cyc = |a: usize, b: usize| {
        let d = (a + n - b) % n;
        d.min(n - d)
    };
    let mut shells = vec![0.0f64; n / 2 + 1];
    for x in 0..n {
        for w in 0..n {
            let r = cyc(x, px).max(cyc(w, pw));
            shells[r] = shells[r].max(v[(x, w)].norm());
        }
    }
    let floor = 1e-13 * peak;
    let lo = (n / 8).max(2);
    let pts: Vec<(f64, f64)> = (lo..=n / 2)
        .filter(|&r| shells[r] > floor)
        .map(|r| ((r as f64).ln(), shells[r].ln()))
        .collect();
    let decayed = (lo..=n / 2).any(|r| shells[r] <= floor);
    let slope = slope(&pts);
    let verdict = match slope {
        _ if decayed => Verdict::Supported,
        Some(s) if s <= S0_SUPPORTED_SLOPE => Verdict::Supported,
        Some(s) if s > S0_UNSUPPORTED_SLOPE => Verdict::Unsupported,
        _ => Verdict::Inconclusive,
    };
    Ok(S0Report {
        m1_estimate: m1,
        shell_maxima: shells,
        tail_exponent: slope,
        verdict,
    })
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
