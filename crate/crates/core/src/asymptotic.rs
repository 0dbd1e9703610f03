//! Population asymptotic variances of the three estimators, the joint
//! median/MAD constants, rASD and a quadrature oracle `E[IF²]`.

use serde::{Deserialize, Serialize};

use crate::distributions::{true_mad, true_measures, DistributionSpec, IQR_SCALE, MAD_SCALE};
use crate::error::{RcvError, Result};
use crate::influence::{FunctionalKind, InfluenceModel};
use crate::numeric::{integrate_with_breaks, QuadConfig};
use crate::robust::Measure;

/// ASV of the CV from the mean and central moments 2–4.
pub fn asv_cv_formula(mean: f64, variance: f64, mu3: f64, mu4: f64) -> f64 {
    let cv2 = variance / (mean * mean);
    let s4 = variance * variance;
    cv2 * ((mu4 - s4) / (4.0 * s4) + variance / (mean * mean) - mu3 / (variance * mean))
}

/// ASV of RCV_Q from the quartiles `[x_.25, x_.5, x_.75]` and the quantile
/// density at the same probabilities.
pub fn asv_rcv_q_formula(quartiles: [f64; 3], g: [f64; 3]) -> f64 {
    let [q1, m, q3] = quartiles;
    let [g1, g2, g3] = g;
    let iqr = q3 - q1;
    let rcv = IQR_SCALE * iqr / m;
    rcv * rcv / 4.0
        * ((3.0 * (g3 * g3 + g1 * g1) - 2.0 * g3 * g1) / (4.0 * iqr * iqr) + g2 * g2 / (m * m)
            - g2 * (g3 - g1) / (m * iqr))
}

/// Constants of the joint asymptotic normal law of (median, MAD).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MadTheory {
    pub median: f64,
    pub mad: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Asymptotic variance of the median.
    pub rho1: f64,
    /// Asymptotic variance of the MAD.
    pub rho2: f64,
    /// Asymptotic covariance of median and MAD.
    pub rho12: f64,
}

/// Density and cdf values needed by [`MadTheory::from_parts`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadInputs {
    pub median: f64,
    pub mad: f64,
    /// f(m)
    pub f_median: f64,
    /// f(m − MAD)
    pub f_lower: f64,
    /// f(m + MAD)
    pub f_upper: f64,
    /// F(m − MAD)
    pub cdf_lower: f64,
    /// F(m + MAD)
    pub cdf_upper: f64,
}

impl MadTheory {
    pub fn from_parts(p: MadInputs) -> Result<MadTheory> {
        let c1 = p.f_lower + p.f_upper;
        if !(c1 > 0.0) || !c1.is_finite() {
            return Err(RcvError::Numerical(format!(
                "f(m - MAD) + f(m + MAD) = {c1}; MAD asymptotics need it positive"
            )));
        }
        let fm = p.f_median;
        if !(fm > 0.0) || !fm.is_finite() {
            return Err(RcvError::Numerical(format!("density at the median is {fm}")));
        }
        let c3 = p.f_lower - p.f_upper;
        let c2 = c3 * c3 + 4.0 * c3 * fm * (1.0 - p.cdf_upper - p.cdf_lower);
        Ok(MadTheory {
            median: p.median,
            mad: p.mad,
            c1,
            c2,
            c3,
            rho1: 1.0 / (4.0 * fm * fm),
            rho2: (1.0 + c2 / (fm * fm)) / (4.0 * c1 * c1),
            rho12: (1.0 - 4.0 * p.cdf_lower + c3 / fm) / (4.0 * c1 * fm),
        })
    }

    /// ASV of `1.4826 · MAD / m` given (possibly different) centre and MAD
    /// values for the ratio itself.
    pub fn asv_rcv_m_at(&self, median: f64, mad: f64) -> f64 {
        let rcv = MAD_SCALE * mad / median;
        rcv * rcv
            * (self.rho1 / (median * median) + self.rho2 / (mad * mad) - 2.0 * self.rho12 / (median * mad))
    }
}

fn positive_density(spec: &DistributionSpec, x: f64) -> Result<f64> {
    let f = spec.pdf(x)?;
    if f > 0.0 && f.is_finite() {
        Ok(f)
    } else {
        Err(RcvError::Numerical(format!("density of {spec} at {x} is {f}")))
    }
}

/// Median/MAD constants of a distribution, using the population MAD.
pub fn mad_theory(spec: &DistributionSpec) -> Result<MadTheory> {
    let m = spec.median()?;
    let mad = true_mad(spec)?;
    MadTheory::from_parts(MadInputs {
        median: m,
        mad,
        f_median: positive_density(spec, m)?,
        f_lower: spec.pdf(m - mad)?,
        f_upper: spec.pdf(m + mad)?,
        cdf_lower: spec.cdf(m - mad)?,
        cdf_upper: spec.cdf(m + mad)?,
    })
}

/// ASV of the sample CV; `None` when the fourth moment does not exist.
pub fn asv_cv(spec: &DistributionSpec) -> Result<Option<f64>> {
    let mo = spec.central_moments()?;
    let (Some(mean), Some(var), Some(mu3), Some(mu4)) = (mo.mean, mo.variance, mo.mu3, mo.mu4) else {
        return Ok(None);
    };
    if mean == 0.0 {
        return Err(RcvError::DegenerateMeasure(format!("mean of {spec} is zero")));
    }
    Ok(Some(asv_cv_formula(mean, var, mu3, mu4)))
}

pub fn asv_rcv_q(spec: &DistributionSpec) -> Result<f64> {
    let ps = [0.25, 0.5, 0.75];
    let mut quartiles = [0.0; 3];
    let mut g = [0.0; 3];
    for (i, &p) in ps.iter().enumerate() {
        quartiles[i] = spec.quantile(p)?;
        g[i] = spec.quantile_density(p)?;
    }
    if quartiles[1] == 0.0 {
        return Err(RcvError::DegenerateMeasure(format!("median of {spec} is zero")));
    }
    Ok(asv_rcv_q_formula(quartiles, g))
}

pub fn asv_rcv_m(spec: &DistributionSpec) -> Result<f64> {
    let t = mad_theory(spec)?;
    if t.median == 0.0 {
        return Err(RcvError::DegenerateMeasure(format!("median of {spec} is zero")));
    }
    Ok(t.asv_rcv_m_at(t.median, t.mad))
}

/// Population ASV of the estimator of `measure`; `None` when undefined.
pub fn asv(measure: Measure, spec: &DistributionSpec) -> Result<Option<f64>> {
    match measure {
        Measure::Cv => asv_cv(spec),
        Measure::RcvQ => asv_rcv_q(spec).map(Some),
        Measure::RcvM => asv_rcv_m(spec).map(Some),
    }
}

/// Relative asymptotic standard deviation √ASV / measure; `None` when the
/// measure or its ASV is undefined.
pub fn rasd(measure: Measure, spec: &DistributionSpec) -> Result<Option<f64>> {
    let Some(v) = asv(measure, spec)? else {
        return Ok(None);
    };
    let t = true_measures(spec)?;
    let value = match measure {
        Measure::Cv => match t.cv {
            Some(cv) => cv,
            None => return Ok(None),
        },
        Measure::RcvQ => t.rcv_q,
        Measure::RcvM => t.rcv_m,
    };
    Ok(Some(v.sqrt() / value.abs()))
}

/// `∫ IF(x)^k f(x) dx` over the support, split at the IF's jump points.
pub(crate) fn if_moment(model: &InfluenceModel, kind: FunctionalKind, power: i32, cfg: QuadConfig) -> Result<f64> {
    let spec = model.spec();
    let (lo, hi) = spec.support();
    let breaks = model.breakpoints(kind);
    // Splitting at the median as well keeps each piece unimodal-ish.
    let mut all = breaks;
    all.push(model.median());
    let integrand = |x: f64| {
        let f = spec.pdf_unchecked(x);
        if f == 0.0 {
            0.0
        } else {
            model.eval(kind, x).powi(power) * f
        }
    };
    integrate_with_breaks(integrand, lo, hi, &all, cfg)
        .map(|r| r.value)
        .map_err(|e| RcvError::Numerical(format!("E[IF^{power}] quadrature for {kind:?} on {spec}: {e}")))
}

/// Oracle for the ASV: `E_F[IF²]` by adaptive quadrature.
pub fn asv_quadrature_oracle(kind: FunctionalKind, spec: &DistributionSpec) -> Result<f64> {
    let model = InfluenceModel::new(spec)?;
    if_moment(&model, kind, 2, QuadConfig { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 20_000 })
}

/// `E_F[IF]` by adaptive quadrature; zero for every well-formed influence
/// function.
pub fn if_expectation(kind: FunctionalKind, spec: &DistributionSpec) -> Result<f64> {
    let model = InfluenceModel::new(spec)?;
    if_moment(&model, kind, 1, QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 20_000 })
}
