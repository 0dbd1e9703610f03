//! Confidence intervals for the CV, RCV_Q and RCV_M, and for the ratio of
//! a measure between two independent samples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotic::{asv_cv_formula, asv_rcv_q_formula, MadInputs, MadTheory};
use crate::distributions::{MomentSet, MAD_SCALE};
use crate::error::{RcvError, Result};
use crate::gld::{fit_sample, GldFkml};
use crate::robust::{
    bandwidth_qor, cv_value, estimate, hf8_sorted, point_value, quantile_density_estimate, rcv_m_sorted,
    rcv_m_value, sample_mad, BandwidthReference, Measure, Sample,
};
use crate::seeding::rng_for;
use crate::special::{chisq_quantile, normal_quantile};

pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_BOOT_B: usize = 2000;
/// Largest share of degenerate bootstrap replicates tolerated.
const MAX_DEGENERATE_SHARE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Inverse,
    MedMill,
    MedMmck,
    Panich,
    Gulhar,
    DeltaCv,
    RcvQ,
    RcvMAsymptotic,
    RcvMBootNp,
    RcvMBootParam,
    RatioTwoSample,
}

impl Method {
    pub const ONE_SAMPLE: [Method; 10] = [
        Method::Inverse,
        Method::MedMill,
        Method::MedMmck,
        Method::Panich,
        Method::Gulhar,
        Method::DeltaCv,
        Method::RcvQ,
        Method::RcvMAsymptotic,
        Method::RcvMBootNp,
        Method::RcvMBootParam,
    ];

    /// The measure whose population value the interval targets.
    pub fn measure(&self) -> Option<Measure> {
        match self {
            Method::Inverse | Method::MedMill | Method::MedMmck | Method::Panich | Method::Gulhar | Method::DeltaCv => {
                Some(Measure::Cv)
            }
            Method::RcvQ => Some(Measure::RcvQ),
            Method::RcvMAsymptotic | Method::RcvMBootNp | Method::RcvMBootParam => Some(Measure::RcvM),
            Method::RatioTwoSample => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Inverse => "inverse",
            Method::MedMill => "med-mill",
            Method::MedMmck => "med-mmck",
            Method::Panich => "panich",
            Method::Gulhar => "gulhar",
            Method::DeltaCv => "delta-cv",
            Method::RcvQ => "rcv-q",
            Method::RcvMAsymptotic => "rcv-m-asymptotic",
            Method::RcvMBootNp => "rcv-m-boot-np",
            Method::RcvMBootParam => "rcv-m-boot-param",
            Method::RatioTwoSample => "ratio-two-sample",
        }
    }

    /// Resolves a short method name within a measure, as used on the
    /// command line (`--measure rcvm --method asymptotic`).
    pub fn resolve(measure: Measure, name: &str) -> Result<Method> {
        let key = name.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        let method = match (measure, key.as_str()) {
            (Measure::Cv, "inverse") => Method::Inverse,
            (Measure::Cv, "med-mill" | "medmill") => Method::MedMill,
            (Measure::Cv, "med-mmck" | "medmmck") => Method::MedMmck,
            (Measure::Cv, "panich") => Method::Panich,
            (Measure::Cv, "gulhar") => Method::Gulhar,
            (Measure::Cv, "delta" | "delta-cv" | "asymptotic") => Method::DeltaCv,
            (Measure::RcvQ, "asymptotic" | "rcv-q" | "rcvq") => Method::RcvQ,
            (Measure::RcvM, "asymptotic") => Method::RcvMAsymptotic,
            (Measure::RcvM, "boot-np" | "bootstrap" | "nonparametric" | "non-parametric") => Method::RcvMBootNp,
            (Measure::RcvM, "boot-param" | "parametric" | "gld") => Method::RcvMBootParam,
            _ => match key.parse::<Method>() {
                Ok(m) if m.measure() == Some(measure) => m,
                _ => {
                    return Err(RcvError::Parameter(format!(
                        "method '{name}' is not available for measure {measure}"
                    )))
                }
            },
        };
        Ok(method)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = RcvError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ONE_SAMPLE
            .iter()
            .chain([Method::RatioTwoSample].iter())
            .copied()
            .find(|m| m.name() == key)
            .ok_or_else(|| RcvError::Parameter(format!("unknown interval method '{s}'")))
    }
}

/// How the two log-scale standard errors of a ratio interval combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    /// `se₁ + se₂`.
    #[default]
    LinearSum,
    /// `√(se₁² + se₂²)`.
    Quadrature,
}

impl FromStr for Combine {
    type Err = RcvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "linear-sum" | "sum" => Ok(Combine::LinearSum),
            "quadrature" => Ok(Combine::Quadrature),
            other => Err(RcvError::Parameter(format!("unknown combine rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub method: Method,
    pub level: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub diagnostics: BTreeMap<String, Value>,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Settings shared by all interval procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalOptions {
    pub level: f64,
    pub boot_b: usize,
    pub seed: u64,
}

impl Default for IntervalOptions {
    fn default() -> Self {
        IntervalOptions {
            level: DEFAULT_LEVEL,
            boot_b: DEFAULT_BOOT_B,
            seed: 0,
        }
    }
}

fn z_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(RcvError::Parameter(format!("confidence level {level} not in (0, 1)")));
    }
    normal_quantile(0.5 + 0.5 * level)
}

fn finish(
    method: Method,
    level: f64,
    estimate: f64,
    a: f64,
    b: f64,
    diagnostics: BTreeMap<String, Value>,
) -> Result<ConfidenceInterval> {
    if !a.is_finite() || !b.is_finite() {
        return Err(RcvError::MethodFailure(format!("{method} produced non-finite bounds ({a}, {b})")));
    }
    Ok(ConfidenceInterval {
        method,
        level,
        estimate,
        lower: a.min(b),
        upper: a.max(b),
        diagnostics,
    })
}

fn log_wald(
    method: Method,
    level: f64,
    estimate: f64,
    log_se: f64,
    diagnostics: BTreeMap<String, Value>,
) -> Result<ConfidenceInterval> {
    if !(estimate > 0.0) {
        return Err(RcvError::MethodFailure(format!(
            "{method} needs a positive estimate for the log scale, got {estimate}"
        )));
    }
    if !(log_se >= 0.0) || !log_se.is_finite() {
        return Err(RcvError::MethodFailure(format!("{method}: invalid standard error {log_se}")));
    }
    let z = z_value(level)?;
    let centre = estimate.ln();
    finish(
        method,
        level,
        estimate,
        (centre - z * log_se).exp(),
        (centre + z * log_se).exp(),
        diagnostics,
    )
}

/// `√(Σ(x − c)² / divisor)`.
fn root_mean_square_about(s: &Sample, centre: f64, divisor: f64) -> f64 {
    (s.values().iter().map(|x| (x - centre) * (x - centre)).sum::<f64>() / divisor).sqrt()
}

fn nonzero_mean(s: &Sample) -> Result<f64> {
    let m = s.mean();
    if m == 0.0 {
        Err(RcvError::Degenerate("sample mean is zero".into()))
    } else {
        Ok(m)
    }
}

/// Sample CV with the moment plug-in ASD.
pub fn asd_hat_cv(s: &Sample) -> Result<f64> {
    let mean = nonzero_mean(s)?;
    let mo = MomentSet::from_sample(s.values());
    let var = s.sd().powi(2);
    if var == 0.0 {
        return Err(RcvError::Degenerate("sample variance is zero".into()));
    }
    let asv = asv_cv_formula(mean, var, mo.mu3.unwrap_or(0.0), mo.mu4.unwrap_or(0.0));
    if asv < 0.0 || !asv.is_finite() {
        return Err(RcvError::MethodFailure(format!("plug-in CV variance is {asv}")));
    }
    Ok(asv.sqrt())
}

/// Ingredients of the RCV_Q plug-in ASD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcvQPlugin {
    pub asd: f64,
    pub quartiles: [f64; 3],
    pub g: [f64; 3],
    pub bandwidths: [f64; 3],
}

pub fn asd_hat_rcv_q(s: &Sample) -> Result<RcvQPlugin> {
    let ps = [0.25, 0.5, 0.75];
    let mut quartiles = [0.0; 3];
    let mut g = [0.0; 3];
    let mut bandwidths = [0.0; 3];
    for (i, &p) in ps.iter().enumerate() {
        quartiles[i] = hf8_sorted(s.sorted(), p);
        bandwidths[i] = bandwidth_qor(p, s.len(), &BandwidthReference::Normal)?;
        g[i] = quantile_density_estimate(s, p, bandwidths[i])?;
    }
    if quartiles[1] == 0.0 {
        return Err(RcvError::Degenerate("sample median is zero".into()));
    }
    let asv = asv_rcv_q_formula(quartiles, g);
    if asv < 0.0 || !asv.is_finite() {
        return Err(RcvError::MethodFailure(format!("plug-in RCV_Q variance is {asv}")));
    }
    Ok(RcvQPlugin {
        asd: asv.sqrt(),
        quartiles,
        g,
        bandwidths,
    })
}

/// Where the density/cdf values of the RCV_M plug-in came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PluginSource {
    Gld(GldFkml),
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcvMPlugin {
    pub asd: f64,
    pub theory: MadTheory,
    pub source: PluginSource,
    /// Why the GLD route was abandoned, when the kernel fallback was used.
    pub fallback_reason: Option<String>,
}

fn gld_mad_inputs(gld: &GldFkml, mad: f64) -> Result<MadInputs> {
    let m = gld.quantile(0.5)?;
    let (lo, hi) = gld.support();
    let density = |x: f64| -> Result<f64> {
        if x < lo || x > hi {
            Ok(0.0)
        } else {
            gld.density_at(x)
        }
    };
    Ok(MadInputs {
        median: m,
        mad,
        f_median: density(m)?,
        f_lower: density(m - mad)?,
        f_upper: density(m + mad)?,
        cdf_lower: gld.cdf(m - mad),
        cdf_upper: gld.cdf(m + mad),
    })
}

fn kernel_mad_inputs(s: &Sample, median: f64, mad: f64) -> Result<MadInputs> {
    let n = s.len() as f64;
    let clamp = |p: f64| p.clamp(1.0 / (n + 1.0), n / (n + 1.0));
    let density_at_p = |p: f64| -> Result<f64> {
        let h = bandwidth_qor(p, s.len(), &BandwidthReference::Normal)?;
        Ok(1.0 / quantile_density_estimate(s, p, h)?)
    };
    let cdf_lower = s.ecdf(median - mad);
    let cdf_upper = s.ecdf(median + mad);
    Ok(MadInputs {
        median,
        mad,
        f_median: density_at_p(0.5)?,
        f_lower: density_at_p(clamp(cdf_lower))?,
        f_upper: density_at_p(clamp(cdf_upper))?,
        cdf_lower,
        cdf_upper,
    })
}

/// RCV_M plug-in ASD. The joint (median, MAD) constants come from a
/// method-of-moments GLD fit evaluated at the sample MAD; if the fit or
/// the resulting constants fail, kernel quantile-density estimates and the
/// empirical cdf are used instead.
pub fn asd_hat_rcv_m(s: &Sample) -> Result<RcvMPlugin> {
    let median = s.median();
    if median == 0.0 {
        return Err(RcvError::Degenerate("sample median is zero".into()));
    }
    let mad = sample_mad(s);
    if mad == 0.0 {
        return Err(RcvError::Degenerate("sample MAD is zero".into()));
    }
    let gld_route = fit_sample(s.values()).and_then(|gld| {
        let theory = MadTheory::from_parts(gld_mad_inputs(&gld, mad)?)?;
        Ok((gld, theory))
    });
    let (theory, source, fallback_reason) = match gld_route {
        Ok((gld, theory)) => (theory, PluginSource::Gld(gld), None),
        Err(e) => (
            MadTheory::from_parts(kernel_mad_inputs(s, median, mad)?)?,
            PluginSource::Kernel,
            Some(e.to_string()),
        ),
    };
    let asv = theory.asv_rcv_m_at(median, mad);
    if asv < 0.0 || !asv.is_finite() {
        return Err(RcvError::MethodFailure(format!("plug-in RCV_M variance is {asv}")));
    }
    Ok(RcvMPlugin {
        asd: asv.sqrt(),
        theory,
        source,
        fallback_reason,
    })
}

fn diag() -> BTreeMap<String, Value> {
    BTreeMap::new()
}

pub fn ci_inverse(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let cv = cv_value(s)?;
    if cv == 0.0 {
        return Err(RcvError::Degenerate("sample CV is zero".into()));
    }
    let z = z_value(level)?;
    let shift = z / (s.len() as f64).sqrt();
    let (a, b) = (1.0 / cv + shift, 1.0 / cv - shift);
    if a * b <= 0.0 {
        return Err(RcvError::UnboundedInterval(format!(
            "interval for 1/CV, ({b}, {a}), contains zero, so its inverse is unbounded"
        )));
    }
    let mut d = diag();
    d.insert("inverse_cv".into(), json!(1.0 / cv));
    finish(Method::Inverse, level, cv, 1.0 / a, 1.0 / b, d)
}

/// `s̃ / x̄` with `s̃` centred at the sample median.
fn cv_tilde(s: &Sample) -> Result<f64> {
    let mean = nonzero_mean(s)?;
    Ok(root_mean_square_about(s, s.median(), (s.len() - 1) as f64) / mean)
}

pub fn ci_med_mill(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let k = cv_tilde(s)?;
    let z = z_value(level)?;
    let half = z * (k * k * (0.5 + k * k) / (s.len() - 1) as f64).sqrt();
    let mut d = diag();
    d.insert("cv_tilde".into(), json!(k));
    finish(Method::MedMill, level, cv_value(s)?, k - half, k + half, d)
}

/// The modified-McKay bounds `k·√(((u + 2)/n − 1)k² + u/(n − 1))` at the two
/// chi-square percentiles.
fn mckay_bounds(method: Method, k: f64, n: usize, level: f64) -> Result<(f64, f64, f64, f64)> {
    let alpha = 1.0 - level;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RcvError::Parameter(format!("confidence level {level} not in (0, 1)")));
    }
    let df = (n - 1) as f64;
    let u_hi = chisq_quantile(df, 1.0 - alpha / 2.0)?;
    let u_lo = chisq_quantile(df, alpha / 2.0)?;
    let nf = n as f64;
    let bound = |u: f64| -> Result<f64> {
        let radicand = ((u + 2.0) / nf - 1.0) * k * k + u / df;
        if radicand < 0.0 {
            Err(RcvError::MethodFailure(format!(
                "{method}: negative radicand {radicand:.6} at chi-square percentile {u:.4} (estimate {k:.4})"
            )))
        } else {
            Ok(k * radicand.sqrt())
        }
    };
    Ok((bound(u_hi)?, bound(u_lo)?, u_lo, u_hi))
}

pub fn ci_med_mmck(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let k = cv_tilde(s)?;
    let (a, b, u_lo, u_hi) = mckay_bounds(Method::MedMmck, k, s.len(), level)?;
    let mut d = diag();
    d.insert("cv_tilde".into(), json!(k));
    d.insert("chisq_lower".into(), json!(u_lo));
    d.insert("chisq_upper".into(), json!(u_hi));
    finish(Method::MedMmck, level, cv_value(s)?, a, b, d)
}

pub fn ci_panich(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let mean = nonzero_mean(s)?;
    let k = root_mean_square_about(s, mean, s.len() as f64) / mean;
    let (a, b, u_lo, u_hi) = mckay_bounds(Method::Panich, k, s.len(), level)?;
    let mut d = diag();
    d.insert("k_tilde".into(), json!(k));
    d.insert("chisq_lower".into(), json!(u_lo));
    d.insert("chisq_upper".into(), json!(u_hi));
    finish(Method::Panich, level, cv_value(s)?, a, b, d)
}

pub fn ci_gulhar(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let cv = cv_value(s)?;
    let alpha = 1.0 - level;
    z_value(level)?;
    let df = (s.len() - 1) as f64;
    let u_hi = chisq_quantile(df, 1.0 - alpha / 2.0)?;
    let u_lo = chisq_quantile(df, alpha / 2.0)?;
    let scaled = df.sqrt() * cv;
    let mut d = diag();
    d.insert("chisq_lower".into(), json!(u_lo));
    d.insert("chisq_upper".into(), json!(u_hi));
    finish(Method::Gulhar, level, cv, scaled / u_hi.sqrt(), scaled / u_lo.sqrt(), d)
}

pub fn ci_delta_cv(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let cv = cv_value(s)?;
    let asd = asd_hat_cv(s)?;
    let mut d = diag();
    d.insert("asd_hat".into(), json!(asd));
    log_wald(Method::DeltaCv, level, cv, asd / (cv * (s.len() as f64).sqrt()), d)
}

pub fn ci_rcv_q(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let plug = asd_hat_rcv_q(s)?;
    let [q1, m, q3] = plug.quartiles;
    let est = 0.75 * (q3 - q1) / m;
    let mut d = diag();
    d.insert("asd_hat".into(), json!(plug.asd));
    d.insert("g_hat".into(), json!(plug.g));
    d.insert("bandwidths".into(), json!(plug.bandwidths));
    log_wald(Method::RcvQ, level, est, plug.asd / (est * (s.len() as f64).sqrt()), d)
}

pub fn ci_rcv_m_asymptotic(s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let est = rcv_m_value(s)?;
    let plug = asd_hat_rcv_m(s)?;
    let mut d = diag();
    d.insert("asd_hat".into(), json!(plug.asd));
    d.insert("rho1".into(), json!(plug.theory.rho1));
    d.insert("rho2".into(), json!(plug.theory.rho2));
    d.insert("rho12".into(), json!(plug.theory.rho12));
    match plug.source {
        PluginSource::Gld(g) => {
            d.insert("plugin".into(), json!("gld"));
            d.insert("gld".into(), json!([g.lambda1, g.lambda2, g.lambda3, g.lambda4]));
        }
        PluginSource::Kernel => {
            d.insert("plugin".into(), json!("kernel-fallback"));
            d.insert("fallback_reason".into(), json!(plug.fallback_reason));
        }
    }
    log_wald(Method::RcvMAsymptotic, level, est, plug.asd / (est * (s.len() as f64).sqrt()), d)
}

fn percentile_interval(
    method: Method,
    level: f64,
    estimate: f64,
    stats: Vec<Option<f64>>,
    mut d: BTreeMap<String, Value>,
) -> Result<ConfidenceInterval> {
    let b = stats.len();
    let mut kept: Vec<f64> = stats.into_iter().flatten().collect();
    let skipped = b - kept.len();
    if skipped as f64 > MAX_DEGENERATE_SHARE * b as f64 || kept.len() < 2 {
        return Err(RcvError::Degenerate(format!(
            "{skipped} of {b} bootstrap replicates had a zero median"
        )));
    }
    kept.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    z_value(level)?;
    d.insert("boot_b".into(), json!(b));
    d.insert("skipped".into(), json!(skipped));
    finish(
        method,
        level,
        estimate,
        hf8_sorted(&kept, alpha / 2.0),
        hf8_sorted(&kept, 1.0 - alpha / 2.0),
        d,
    )
}

fn check_boot(b: usize) -> Result<()> {
    if b < 100 {
        Err(RcvError::Parameter(format!("bootstrap needs at least 100 replicates, got {b}")))
    } else {
        Ok(())
    }
}

/// Percentile interval from resampling the data with replacement.
pub fn ci_rcv_m_boot_np(s: &Sample, level: f64, b: usize, seed: u64) -> Result<ConfidenceInterval> {
    check_boot(b)?;
    let est = rcv_m_value(s)?;
    let x = s.sorted();
    if x[0] == x[x.len() - 1] {
        return Err(RcvError::Degenerate("sample is constant".into()));
    }
    let n = x.len();
    let index = Uniform::new(0, n).map_err(|e| RcvError::Parameter(e.to_string()))?;
    let stats: Vec<Option<f64>> = (0..b as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n), Vec::with_capacity(n)),
            |(draw, scratch), rep| {
                let mut rng = rng_for(seed, &[rep]);
                draw.clear();
                draw.extend((0..n).map(|_| x[index.sample(&mut rng)]));
                draw.sort_by(f64::total_cmp);
                rcv_m_sorted(draw, scratch)
            },
        )
        .collect();
    percentile_interval(Method::RcvMBootNp, level, est, stats, diag())
}

/// Percentile interval from resampling a method-of-moments GLD fit.
pub fn ci_rcv_m_boot_param(s: &Sample, level: f64, b: usize, seed: u64) -> Result<ConfidenceInterval> {
    check_boot(b)?;
    let est = rcv_m_value(s)?;
    let gld = fit_sample(s.values())?;
    let n = s.len();
    let stats: Vec<Option<f64>> = (0..b as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n), Vec::with_capacity(n)),
            |(draw, scratch), rep| {
                let mut rng = rng_for(seed, &[rep]);
                draw.clear();
                draw.extend((0..n).map(|_| {
                    let u: f64 = Open01.sample(&mut rng);
                    gld.quantile_unchecked(u)
                }));
                draw.sort_by(f64::total_cmp);
                rcv_m_sorted(draw, scratch)
            },
        )
        .collect();
    let mut d = diag();
    d.insert("gld".into(), json!([gld.lambda1, gld.lambda2, gld.lambda3, gld.lambda4]));
    percentile_interval(Method::RcvMBootParam, level, est, stats, d)
}

/// Runs one single-sample method.
pub fn compute_interval(s: &Sample, method: Method, opts: &IntervalOptions) -> Result<ConfidenceInterval> {
    let level = opts.level;
    match method {
        Method::Inverse => ci_inverse(s, level),
        Method::MedMill => ci_med_mill(s, level),
        Method::MedMmck => ci_med_mmck(s, level),
        Method::Panich => ci_panich(s, level),
        Method::Gulhar => ci_gulhar(s, level),
        Method::DeltaCv => ci_delta_cv(s, level),
        Method::RcvQ => ci_rcv_q(s, level),
        Method::RcvMAsymptotic => ci_rcv_m_asymptotic(s, level),
        Method::RcvMBootNp => ci_rcv_m_boot_np(s, level, opts.boot_b, opts.seed),
        Method::RcvMBootParam => ci_rcv_m_boot_param(s, level, opts.boot_b, opts.seed),
        Method::RatioTwoSample => Err(RcvError::Parameter(
            "the ratio interval needs two samples; use ci_ratio_two_sample".into(),
        )),
    }
}

/// Interval for `measure(sample 1) / measure(sample 2)` on the log scale.
pub fn ci_ratio_two_sample(
    s1: &Sample,
    s2: &Sample,
    measure: Measure,
    level: f64,
    combine: Combine,
) -> Result<ConfidenceInterval> {
    let e1 = estimate(s1, measure)?;
    let e2 = estimate(s2, measure)?;
    if !(e1.value > 0.0 && e2.value > 0.0) {
        return Err(RcvError::MethodFailure(format!(
            "ratio interval needs positive estimates, got {} and {}",
            e1.value, e2.value
        )));
    }
    let (se1, se2) = (e1.log_se(), e2.log_se());
    let se = match combine {
        Combine::LinearSum => se1 + se2,
        Combine::Quadrature => se1.hypot(se2),
    };
    let mut d = diag();
    d.insert("measure".into(), json!(measure.to_string()));
    d.insert("estimate_1".into(), json!(e1.value));
    d.insert("estimate_2".into(), json!(e2.value));
    d.insert("se_log_1".into(), json!(se1));
    d.insert("se_log_2".into(), json!(se2));
    d.insert("combine".into(), json!(combine));
    log_wald(Method::RatioTwoSample, level, e1.value / e2.value, se, d)
}

/// Point estimate of the method's target measure (used in reports).
pub fn target_estimate(s: &Sample, method: Method) -> Result<f64> {
    point_value(s, method.measure().unwrap_or(Measure::Cv))
}

/// Standardized MAD of a sample, `1.4826 · MAD`.
pub fn standardized_mad(s: &Sample) -> f64 {
    MAD_SCALE * sample_mad(s)
}
