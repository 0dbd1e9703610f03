//! Sample-side estimators: type-8 quantiles, the sample MAD, the three
//! relative-dispersion point estimates and kernel estimation of the quantile
//! density.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, IQR_SCALE, MAD_SCALE};
use crate::error::{RcvError, Result};
use crate::intervals::{asd_hat_cv, asd_hat_rcv_m, asd_hat_rcv_q};
use crate::special::{normal_pdf, normal_quantile_unchecked};

/// A validated i.i.d. sample with a cached sorted copy.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Sample> {
        if values.len() < 2 {
            return Err(RcvError::SampleSize {
                min: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(RcvError::InvalidSample(format!(
                "observation {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Sample { values, sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Standard deviation with the n − 1 divisor.
    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|x| (x - m) * (x - m)).sum();
        (ss / (self.len() - 1) as f64).sqrt()
    }

    pub fn median(&self) -> f64 {
        hf8_sorted(&self.sorted, 0.5)
    }

    /// Empirical cdf, #{x_i <= x} / n.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Multiplies every observation by `k`.
    pub fn scaled(&self, k: f64) -> Result<Sample> {
        Sample::new(self.values.iter().map(|x| x * k).collect())
    }
}

/// Which relative-dispersion measure is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Cv,
    RcvQ,
    RcvM,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Cv => "cv",
            Measure::RcvQ => "rcvq",
            Measure::RcvM => "rcvm",
        })
    }
}

impl FromStr for Measure {
    type Err = RcvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "cv" => Ok(Measure::Cv),
            "rcvq" => Ok(Measure::RcvQ),
            "rcvm" => Ok(Measure::RcvM),
            other => Err(RcvError::Parameter(format!(
                "unknown measure '{other}' (expected cv, rcvq or rcvm)"
            ))),
        }
    }
}

/// A point estimate with its plug-in asymptotic standard deviation
/// (the √n-scaled quantity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionEstimate {
    pub measure: Measure,
    pub value: f64,
    pub asd_hat: f64,
    pub n: usize,
}

impl DispersionEstimate {
    /// Standard error of the log estimate, ASD / (estimate · √n).
    pub fn log_se(&self) -> f64 {
        self.asd_hat / (self.value * (self.n as f64).sqrt())
    }
}

/// Hyndman–Fan type-8 quantile of an already sorted slice; `p` is assumed
/// to lie in (0, 1).
pub fn hf8_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let h = ((nf + 1.0 / 3.0) * p + 1.0 / 3.0).clamp(1.0, nf);
    let lo = h.floor();
    let i = lo as usize;
    if i >= n {
        return sorted[n - 1];
    }
    let frac = h - lo;
    let a = sorted[i - 1];
    if frac == 0.0 {
        a
    } else {
        a + frac * (sorted[i] - a)
    }
}

pub fn hf8_quantile(s: &Sample, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RcvError::Domain(format!("probability {p} not in (0, 1)")));
    }
    Ok(hf8_sorted(s.sorted(), p))
}

fn mad_sorted(sorted: &[f64], scratch: &mut Vec<f64>) -> f64 {
    let m = hf8_sorted(sorted, 0.5);
    scratch.clear();
    scratch.extend(sorted.iter().map(|x| (x - m).abs()));
    scratch.sort_by(f64::total_cmp);
    hf8_sorted(scratch, 0.5)
}

/// Median absolute deviation from the median, both medians type 8.
pub fn sample_mad(s: &Sample) -> f64 {
    mad_sorted(s.sorted(), &mut Vec::with_capacity(s.len()))
}

/// RCV_M of a sorted slice, or `None` when the median is zero.
pub fn rcv_m_sorted(sorted: &[f64], scratch: &mut Vec<f64>) -> Option<f64> {
    let m = hf8_sorted(sorted, 0.5);
    if m == 0.0 {
        return None;
    }
    Some(MAD_SCALE * mad_sorted(sorted, scratch) / m)
}

fn nonzero(value: f64, what: &str) -> Result<f64> {
    if value == 0.0 {
        Err(RcvError::Degenerate(format!("{what} is zero")))
    } else {
        Ok(value)
    }
}

pub fn cv_value(s: &Sample) -> Result<f64> {
    let mean = nonzero(s.mean(), "sample mean")?;
    Ok(s.sd() / mean)
}

pub fn rcv_q_value(s: &Sample) -> Result<f64> {
    let m = nonzero(s.median(), "sample median")?;
    let iqr = hf8_sorted(s.sorted(), 0.75) - hf8_sorted(s.sorted(), 0.25);
    Ok(IQR_SCALE * iqr / m)
}

pub fn rcv_m_value(s: &Sample) -> Result<f64> {
    let m = nonzero(s.median(), "sample median")?;
    Ok(MAD_SCALE * sample_mad(s) / m)
}

pub fn point_value(s: &Sample, measure: Measure) -> Result<f64> {
    match measure {
        Measure::Cv => cv_value(s),
        Measure::RcvQ => rcv_q_value(s),
        Measure::RcvM => rcv_m_value(s),
    }
}

/// Sample CV (n − 1 divisor) with the moment plug-in ASD.
pub fn estimate_cv(s: &Sample) -> Result<DispersionEstimate> {
    let value = cv_value(s)?;
    Ok(DispersionEstimate {
        measure: Measure::Cv,
        value,
        asd_hat: asd_hat_cv(s)?,
        n: s.len(),
    })
}

/// Sample RCV_Q with the kernel plug-in ASD.
pub fn estimate_rcv_q(s: &Sample) -> Result<DispersionEstimate> {
    let value = rcv_q_value(s)?;
    Ok(DispersionEstimate {
        measure: Measure::RcvQ,
        value,
        asd_hat: asd_hat_rcv_q(s)?.asd,
        n: s.len(),
    })
}

/// Sample RCV_M with the GLD-based plug-in ASD (kernel fallback when the
/// GLD fit fails).
pub fn estimate_rcv_m(s: &Sample) -> Result<DispersionEstimate> {
    let value = rcv_m_value(s)?;
    Ok(DispersionEstimate {
        measure: Measure::RcvM,
        value,
        asd_hat: asd_hat_rcv_m(s)?.asd,
        n: s.len(),
    })
}

pub fn estimate(s: &Sample, measure: Measure) -> Result<DispersionEstimate> {
    match measure {
        Measure::Cv => estimate_cv(s),
        Measure::RcvQ => estimate_rcv_q(s),
        Measure::RcvM => estimate_rcv_m(s),
    }
}

/// Epanechnikov kernel integrated from −1 to `t`.
fn epanechnikov_cdf(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        0.5 + 0.75 * (t - t * t * t / 3.0)
    }
}

/// Kernel estimate of the quantile density g(p) = Q′(p):
/// `∫ K_h(u − p) dQ̂(u)` with Q̂ the piecewise-linear type-8 quantile
/// function and K the Epanechnikov kernel. Between the knots
/// `p_i = (i − 1/3)/(n + 1/3)` Q̂ has slope `(n + 1/3)(x_(i+1) − x_(i))`, so
/// the integral is an exact finite sum over order-statistic gaps.
pub fn quantile_density_estimate(s: &Sample, p: f64, h: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RcvError::Domain(format!("probability {p} not in (0, 1)")));
    }
    if !(h > 0.0 && h < p.min(1.0 - p) + 1e-12) {
        return Err(RcvError::Parameter(format!(
            "bandwidth {h} must lie in (0, min(p, 1 - p)) at p = {p}"
        )));
    }
    let x = s.sorted();
    let n = x.len();
    let scale = n as f64 + 1.0 / 3.0;
    let knot = |i: usize| (i as f64 - 1.0 / 3.0) / scale;
    // Only gaps whose knot interval meets [p - h, p + h] contribute.
    let first = (((p - h) * scale + 1.0 / 3.0).floor() as usize).clamp(1, n - 1);
    let last = (((p + h) * scale + 1.0 / 3.0).ceil() as usize).clamp(1, n - 1);
    let mut g = 0.0;
    for i in first..=last {
        let gap = x[i] - x[i - 1];
        if gap == 0.0 {
            continue;
        }
        let w = epanechnikov_cdf((knot(i + 1) - p) / h) - epanechnikov_cdf((knot(i) - p) / h);
        g += gap * scale * w;
    }
    if g > 0.0 {
        Ok(g)
    } else {
        Err(RcvError::Degenerate(format!(
            "quantile density estimate at p = {p} is zero (sample constant near that quantile)"
        )))
    }
}

/// Reference model for the quantile optimality ratio g/g″.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BandwidthReference {
    #[default]
    Normal,
    Distribution(DistributionSpec),
}

/// Quantile optimality ratio g(p)/g″(p) under the reference model.
pub fn qor(p: f64, reference: &BandwidthReference) -> Result<f64> {
    match reference {
        BandwidthReference::Normal => {
            // g = 1/φ(z), g″ = (1 + 2z²)/φ(z)³.
            let z = normal_quantile_unchecked(p);
            let phi = normal_pdf(z);
            Ok(phi * phi / (1.0 + 2.0 * z * z))
        }
        BandwidthReference::Distribution(spec) => {
            let d = 1e-4 * p.min(1.0 - p);
            let g0 = spec.quantile_density(p)?;
            let gm = spec.quantile_density(p - d)?;
            let gp = spec.quantile_density(p + d)?;
            let g2 = (gp - 2.0 * g0 + gm) / (d * d);
            if g2 == 0.0 {
                return Err(RcvError::Numerical(format!("g'' vanishes at p = {p}")));
            }
            Ok(g0 / g2)
        }
    }
}

/// Bandwidth `min{(15/n)^(1/5) |QOR(p)|^(2/5), 0.9 min(p, 1 − p)}`.
pub fn bandwidth_qor(p: f64, n: usize, reference: &BandwidthReference) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RcvError::Domain(format!("probability {p} not in (0, 1)")));
    }
    if n < 2 {
        return Err(RcvError::SampleSize { min: 2, got: n });
    }
    let raw = (15.0 / n as f64).powf(0.2) * qor(p, reference)?.abs().powf(0.4);
    Ok(raw.min(0.9 * p.min(1.0 - p)))
}

/// Kernel quantile density with the normal-reference QOR bandwidth.
pub fn quantile_density_default(s: &Sample, p: f64) -> Result<f64> {
    let h = bandwidth_qor(p, s.len(), &BandwidthReference::Normal)?;
    quantile_density_estimate(s, p, h)
}
