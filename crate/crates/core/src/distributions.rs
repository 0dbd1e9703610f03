//! Continuous distribution families with densities, quantiles, moments,
//! seeded inverse-transform sampling and the population values of CV,
//! RCV_Q and RCV_M.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{RcvError, Result};
use crate::gld::GldFkml;
use crate::numeric::find_root;
use crate::robust::Sample;
use crate::special::{
    chisq_cdf, chisq_pdf, chisq_quantile, gamma_fn, normal_cdf, normal_pdf, normal_quantile_unchecked,
};

/// 1 / Φ⁻¹(3/4), the factor that makes the MAD estimate σ at the normal.
pub const MAD_SCALE: f64 = 1.4826;
/// Factor that makes 0.75·IQR/median comparable to the CV at the normal.
pub const IQR_SCALE: f64 = 0.75;

/// A continuous distribution family with its parameters in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    LogNormal { meanlog: f64, sdlog: f64 },
    Exponential { rate: f64 },
    Uniform { lower: f64, upper: f64 },
    Weibull { scale: f64, shape: f64 },
    ChiSquare { df: f64 },
    /// Lomax form: survival function `(1 + x/scale)^(-shape)` on `x >= 0`.
    ParetoII { scale: f64, shape: f64 },
    Gld(GldFkml),
}

/// Mean and central moments of orders 2–4; `None` where the moment does
/// not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub mu3: Option<f64>,
    pub mu4: Option<f64>,
}

impl MomentSet {
    /// Sample mean and n-divisor central moments.
    pub fn from_sample(values: &[f64]) -> MomentSet {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
        for &x in values {
            let d = x - mean;
            let d2 = d * d;
            c2 += d2;
            c3 += d2 * d;
            c4 += d2 * d2;
        }
        MomentSet {
            mean: Some(mean),
            variance: Some(c2 / n),
            mu3: Some(c3 / n),
            mu4: Some(c4 / n),
        }
    }

    fn from_raw(raw: [Option<f64>; 4]) -> MomentSet {
        let [r1, r2, r3, r4] = raw;
        let mean = r1;
        let variance = match (r1, r2) {
            (Some(m), Some(r2)) => Some(r2 - m * m),
            _ => None,
        };
        let mu3 = match (r1, r2, r3) {
            (Some(m), Some(r2), Some(r3)) => Some(r3 - 3.0 * m * r2 + 2.0 * m.powi(3)),
            _ => None,
        };
        let mu4 = match (r1, r2, r3, r4) {
            (Some(m), Some(r2), Some(r3), Some(r4)) => {
                Some(r4 - 4.0 * m * r3 + 6.0 * m * m * r2 - 3.0 * m.powi(4))
            }
            _ => None,
        };
        MomentSet {
            mean,
            variance,
            mu3,
            mu4,
        }
    }

    pub fn sd(&self) -> Option<f64> {
        self.variance.map(f64::sqrt)
    }

    pub fn skewness(&self) -> Option<f64> {
        Some(self.mu3? / self.variance?.powf(1.5))
    }

    pub fn kurtosis(&self) -> Option<f64> {
        let v = self.variance?;
        Some(self.mu4? / (v * v))
    }

    pub fn cv(&self) -> Option<f64> {
        let m = self.mean?;
        if m == 0.0 {
            return None;
        }
        Some(self.sd()? / m)
    }
}

/// Population values of the three relative-dispersion measures together
/// with the ingredients of the robust ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueMeasures {
    pub cv: Option<f64>,
    pub rcv_q: f64,
    pub rcv_m: f64,
    pub median: f64,
    pub iqr: f64,
    pub mad: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RcvError::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(RcvError::Parameter(format!("{name} must be finite, got {v}")))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RcvError::Domain(format!("probability {p} not in (0, 1)")))
    }
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => {
                finite("mean", mean)?;
                positive("sd", sd)
            }
            LogNormal { meanlog, sdlog } => {
                finite("meanlog", meanlog)?;
                positive("sdlog", sdlog)
            }
            Exponential { rate } => positive("rate", rate),
            Uniform { lower, upper } => {
                finite("lower", lower)?;
                finite("upper", upper)?;
                if lower < upper {
                    Ok(())
                } else {
                    Err(RcvError::Parameter(format!(
                        "uniform requires lower < upper, got ({lower}, {upper})"
                    )))
                }
            }
            Weibull { scale, shape } => {
                positive("scale", scale)?;
                positive("shape", shape)
            }
            ChiSquare { df } => positive("df", df),
            ParetoII { scale, shape } => {
                positive("scale", scale)?;
                positive("shape", shape)
            }
            Gld(g) => g.validate(),
        }
    }

    /// Closed support `(lower, upper)`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        use DistributionSpec::*;
        match *self {
            Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Uniform { lower, upper } => (lower, upper),
            Gld(g) => g.support(),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.pdf_unchecked(x))
    }

    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => normal_pdf((x - mean) / sd) / sd,
            LogNormal { meanlog, sdlog } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_pdf((x.ln() - meanlog) / sdlog) / (x * sdlog)
                }
            }
            Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Uniform { lower, upper } => {
                if x < lower || x > upper {
                    0.0
                } else {
                    1.0 / (upper - lower)
                }
            }
            Weibull { scale, shape } => {
                if x < 0.0 {
                    0.0
                } else {
                    let z = x / scale;
                    shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
                }
            }
            ChiSquare { df } => chisq_pdf(df, x),
            ParetoII { scale, shape } => {
                if x < 0.0 {
                    0.0
                } else {
                    shape / scale * (1.0 + x / scale).powf(-(shape + 1.0))
                }
            }
            Gld(g) => {
                let (lo, hi) = g.support();
                if x < lo || x > hi {
                    0.0
                } else {
                    g.density_at(x).unwrap_or(0.0)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => normal_cdf((x - mean) / sd),
            LogNormal { meanlog, sdlog } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - meanlog) / sdlog)
                }
            }
            Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Weibull { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            ChiSquare { df } => chisq_cdf(df, x),
            ParetoII { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-shape * (x / scale).ln_1p()).exp_m1()
                }
            }
            Gld(g) => g.cdf(x),
        }
    }

    /// Quantile function `Q(p) = inf{x : F(x) >= p}` for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        check_p(p)?;
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => mean + sd * normal_quantile_unchecked(p),
            LogNormal { meanlog, sdlog } => (meanlog + sdlog * normal_quantile_unchecked(p)).exp(),
            Exponential { rate } => -(-p).ln_1p() / rate,
            Uniform { lower, upper } => lower + p * (upper - lower),
            Weibull { scale, shape } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            ChiSquare { df } => chisq_quantile(df, p).unwrap_or(f64::NAN),
            ParetoII { scale, shape } => scale * (-(-p).ln_1p() / shape).exp_m1(),
            Gld(g) => g.quantile_unchecked(p),
        }
    }

    pub fn median(&self) -> Result<f64> {
        self.quantile(0.5)
    }

    /// Quantile density g(p) = 1 / f(Q(p)).
    pub fn quantile_density(&self, p: f64) -> Result<f64> {
        self.validate()?;
        check_p(p)?;
        if let DistributionSpec::Gld(g) = self {
            return Ok(g.quantile_density_unchecked(p));
        }
        let f = self.pdf_unchecked(self.quantile_unchecked(p));
        if f > 0.0 && f.is_finite() {
            Ok(1.0 / f)
        } else {
            Err(RcvError::Numerical(format!(
                "density at the {p} quantile is {f}; quantile density undefined"
            )))
        }
    }

    /// Mean and central moments 2–4, with `None` for moments that do not
    /// exist.
    pub fn central_moments(&self) -> Result<MomentSet> {
        use DistributionSpec::*;
        self.validate()?;
        Ok(match *self {
            Normal { mean, sd } => MomentSet {
                mean: Some(mean),
                variance: Some(sd * sd),
                mu3: Some(0.0),
                mu4: Some(3.0 * sd.powi(4)),
            },
            LogNormal { meanlog, sdlog } => {
                // With Y = X / E[X], E[Y^k] = w^(k(k-1)/2), w = exp(sdlog^2).
                let w = (sdlog * sdlog).exp();
                let m = (meanlog + 0.5 * sdlog * sdlog).exp();
                MomentSet {
                    mean: Some(m),
                    variance: Some((w - 1.0) * m * m),
                    mu3: Some((w.powi(3) - 3.0 * w + 2.0) * m.powi(3)),
                    mu4: Some((w.powi(6) - 4.0 * w.powi(3) + 6.0 * w - 3.0) * m.powi(4)),
                }
            }
            Exponential { rate } => MomentSet {
                mean: Some(1.0 / rate),
                variance: Some(1.0 / (rate * rate)),
                mu3: Some(2.0 / rate.powi(3)),
                mu4: Some(9.0 / rate.powi(4)),
            },
            Uniform { lower, upper } => {
                let w = upper - lower;
                MomentSet {
                    mean: Some(0.5 * (lower + upper)),
                    variance: Some(w * w / 12.0),
                    mu3: Some(0.0),
                    mu4: Some(w.powi(4) / 80.0),
                }
            }
            Weibull { scale, shape } => {
                let raw = |k: f64| Some(scale.powf(k) * gamma_fn(1.0 + k / shape));
                MomentSet::from_raw([raw(1.0), raw(2.0), raw(3.0), raw(4.0)])
            }
            ChiSquare { df } => MomentSet {
                mean: Some(df),
                variance: Some(2.0 * df),
                mu3: Some(8.0 * df),
                mu4: Some(12.0 * df * (df + 4.0)),
            },
            ParetoII { scale, shape } => {
                // E[X^k] = scale^k k! / prod_{i=1..k} (shape - i), for shape > k.
                let raw = |k: i32| {
                    if shape > k as f64 {
                        let mut v = 1.0;
                        for i in 1..=k {
                            v *= scale * i as f64 / (shape - i as f64);
                        }
                        Some(v)
                    } else {
                        None
                    }
                };
                MomentSet::from_raw([raw(1), raw(2), raw(3), raw(4)])
            }
            Gld(g) => g.moments(),
        })
    }

    /// Draws `n` observations by inverse transform from a ChaCha generator
    /// seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n < 2 {
            return Err(RcvError::SampleSize { min: 2, got: n });
        }
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Sample::new(self.draw(&mut rng, n))
    }

    /// Inverse-transform draws from an arbitrary generator.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(rng);
                self.quantile_unchecked(u)
            })
            .collect()
    }

    /// Scales the family by `k > 0` (X ↦ kX), where the family is closed
    /// under scaling.
    pub fn scaled(&self, k: f64) -> Option<DistributionSpec> {
        use DistributionSpec::*;
        if !(k > 0.0) {
            return None;
        }
        Some(match *self {
            Normal { mean, sd } => Normal {
                mean: mean * k,
                sd: sd * k,
            },
            LogNormal { meanlog, sdlog } => LogNormal {
                meanlog: meanlog + k.ln(),
                sdlog,
            },
            Exponential { rate } => Exponential { rate: rate / k },
            Uniform { lower, upper } => Uniform {
                lower: lower * k,
                upper: upper * k,
            },
            Weibull { scale, shape } => Weibull { scale: scale * k, shape },
            ParetoII { scale, shape } => ParetoII { scale: scale * k, shape },
            Gld(g) => Gld(GldFkml {
                lambda1: g.lambda1 * k,
                lambda2: g.lambda2 / k,
                ..g
            }),
            ChiSquare { .. } => return None,
        })
    }
}

/// Population MAD: the `M` solving
/// `∫₀^M [f(m + x) + f(m − x)] dx = 1/2` with `m` the median.
///
/// The integral is evaluated by adaptive quadrature (split where the
/// integrand leaves the support) inside a Brent root search on
/// `[0, |Q(0.75) + m|]`. When that bracket does not enclose the root, as
/// happens for heavy right tails, it is doubled up to 60 times.
pub fn true_mad(spec: &DistributionSpec) -> Result<f64> {
    spec.validate()?;
    let m = spec.quantile_unchecked(0.5);
    // Central mass F(m + M) - F(m - M) - 1/2, increasing in M.
    let mass = |big_m: f64| -> f64 { spec.cdf_unchecked(m + big_m) - spec.cdf_unchecked(m - big_m) - 0.5 };
    let mut upper = (spec.quantile_unchecked(0.75) + m).abs();
    if !(upper > 0.0) {
        upper = (spec.quantile_unchecked(0.75) - m).abs().max(f64::MIN_POSITIVE);
    }
    let mut doublings = 0;
    loop {
        let v = mass(upper);
        if v.is_nan() {
            return Err(RcvError::Numerical(format!(
                "MAD mass undefined at bracket end {upper} for {spec}"
            )));
        }
        if v >= 0.0 {
            break;
        }
        doublings += 1;
        if doublings > 60 {
            return Err(RcvError::Numerical(format!(
                "MAD root not bracketed for {spec}: mass deficit {v:e} at {upper}"
            )));
        }
        upper *= 2.0;
    }
    find_root(mass, 0.0, upper, 1e-12 * upper.max(1e-300)).map_err(|e| {
        RcvError::Numerical(format!("MAD root search failed for {spec}: {e}"))
    })
}

/// CV (when the variance exists), RCV_Q and RCV_M of the population.
pub fn true_measures(spec: &DistributionSpec) -> Result<TrueMeasures> {
    spec.validate()?;
    let median = spec.quantile_unchecked(0.5);
    if median == 0.0 || !median.is_finite() {
        return Err(RcvError::DegenerateMeasure(format!(
            "median of {spec} is {median}; relative measures are undefined"
        )));
    }
    let iqr = spec.quantile_unchecked(0.75) - spec.quantile_unchecked(0.25);
    let mad = true_mad(spec)?;
    let cv = spec.central_moments()?.cv();
    Ok(TrueMeasures {
        cv,
        rcv_q: IQR_SCALE * iqr / median,
        rcv_m: MAD_SCALE * mad / median,
        median,
        iqr,
        mad,
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => write!(f, "normal({},{})", fmt_num(mean), fmt_num(sd)),
            LogNormal { meanlog, sdlog } => write!(f, "lnorm({},{})", fmt_num(meanlog), fmt_num(sdlog)),
            Exponential { rate } => write!(f, "exp({})", fmt_num(rate)),
            Uniform { lower, upper } => write!(f, "unif({},{})", fmt_num(lower), fmt_num(upper)),
            Weibull { scale, shape } => write!(f, "weibull({},{})", fmt_num(scale), fmt_num(shape)),
            ChiSquare { df } => write!(f, "chisq({})", fmt_num(df)),
            ParetoII { scale, shape } => write!(f, "pareto2({},{})", fmt_num(scale), fmt_num(shape)),
            Gld(g) => write!(
                f,
                "gld({},{},{},{})",
                fmt_num(g.lambda1),
                fmt_num(g.lambda2),
                fmt_num(g.lambda3),
                fmt_num(g.lambda4)
            ),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = RcvError;

    /// Parses the compact grammar `name(p1,p2,...)`, e.g. `normal(5,1)`,
    /// `lnorm(0,1)`, `exp(1)`, `chisq(5)`, `pareto2(1,4)`, `weibull(1,2)`,
    /// `unif(0,1)` or `gld(l1,l2,l3,l4)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| RcvError::Parameter(format!("cannot parse distribution '{s}': {msg}"));
        let t = s.trim();
        let open = t.find('(').ok_or_else(|| bad("expected name(params)"))?;
        if !t.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let name = t[..open].trim().to_ascii_lowercase();
        let inner = &t[open + 1..t.len() - 1];
        let params: Vec<f64> = inner
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("expected {k} parameter(s), got {}", params.len())))
            }
        };
        let spec = match name.as_str() {
            "normal" | "norm" => {
                want(2)?;
                DistributionSpec::Normal {
                    mean: params[0],
                    sd: params[1],
                }
            }
            "lnorm" | "lognormal" => {
                want(2)?;
                DistributionSpec::LogNormal {
                    meanlog: params[0],
                    sdlog: params[1],
                }
            }
            "exp" => {
                want(1)?;
                DistributionSpec::Exponential { rate: params[0] }
            }
            "unif" | "uniform" => {
                want(2)?;
                DistributionSpec::Uniform {
                    lower: params[0],
                    upper: params[1],
                }
            }
            "weibull" => {
                want(2)?;
                DistributionSpec::Weibull {
                    scale: params[0],
                    shape: params[1],
                }
            }
            "chisq" | "chi" => {
                want(1)?;
                DistributionSpec::ChiSquare { df: params[0] }
            }
            "pareto2" | "par" => {
                want(2)?;
                DistributionSpec::ParetoII {
                    scale: params[0],
                    shape: params[1],
                }
            }
            "gld" => {
                want(4)?;
                DistributionSpec::Gld(GldFkml {
                    lambda1: params[0],
                    lambda2: params[1],
                    lambda3: params[2],
                    lambda4: params[3],
                })
            }
            other => return Err(bad(&format!("unknown family '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate, QuadConfig};
    use std::f64::consts::LN_2;

    fn families() -> Vec<DistributionSpec> {
        [
            "normal(5,1)",
            "lnorm(0,1)",
            "exp(1)",
            "unif(0,1)",
            "weibull(1,2)",
            "weibull(2,0.7)",
            "chisq(5)",
            "chisq(1)",
            "pareto2(1,4)",
            "pareto2(2,0.5)",
            "gld(0,1,0.2,0.1)",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
    }

    #[test]
    fn pdf_examples() {
        let n: DistributionSpec = "normal(0,1)".parse().unwrap();
        assert!((n.pdf(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let e: DistributionSpec = "exp(1)".parse().unwrap();
        assert!((e.pdf(LN_2).unwrap() - 0.5).abs() < 1e-15);
        let p: DistributionSpec = "pareto2(1,4)".parse().unwrap();
        assert!((p.pdf(0.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let e: DistributionSpec = "exp(1)".parse().unwrap();
        assert!((e.quantile(0.5).unwrap() - LN_2).abs() < 1e-15);
        let n: DistributionSpec = "normal(5,1)".parse().unwrap();
        assert!((n.quantile(0.75).unwrap() - 5.674_489_750_196_082).abs() < 1e-12);
        let ln: DistributionSpec = "lnorm(0,1)".parse().unwrap();
        assert!((ln.quantile(0.75).unwrap() - 0.674_489_750_196_081_7f64.exp()).abs() < 1e-12);
        assert!((ln.quantile(0.75).unwrap() - 1.9631).abs() < 1e-4);
        assert!(matches!(e.quantile(0.0), Err(RcvError::Domain(_))));
        assert!(matches!(e.quantile(1.0), Err(RcvError::Domain(_))));
    }

    #[test]
    fn cdf_inverts_quantile_everywhere() {
        for spec in families() {
            for i in 1..=99 {
                let p = i as f64 / 100.0;
                let x = spec.quantile(p).unwrap();
                let back = spec.cdf(x).unwrap();
                assert!((back - p).abs() < 1e-8, "{spec} p={p} back={back}");
            }
        }
    }

    #[test]
    fn quantile_monotone() {
        for spec in families() {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let x = spec.quantile(i as f64 / 200.0).unwrap();
                assert!(x >= prev, "{spec}");
                prev = x;
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for spec in families() {
            let (lo, hi) = spec.support();
            let m = spec.quantile(0.5).unwrap();
            let cfg = QuadConfig::with_abs_tol(1e-9);
            let left = integrate(|x| spec.pdf(x).unwrap(), lo, m, cfg).unwrap().value;
            let right = integrate(|x| spec.pdf(x).unwrap(), m, hi, cfg).unwrap().value;
            assert!((left + right - 1.0).abs() < 1e-6, "{spec}: {}", left + right);
        }
    }

    #[test]
    fn moment_examples() {
        let e: DistributionSpec = "exp(1)".parse().unwrap();
        let m = e.central_moments().unwrap();
        assert_eq!((m.mean, m.variance, m.mu3, m.mu4), (Some(1.0), Some(1.0), Some(2.0), Some(9.0)));
        let n: DistributionSpec = "normal(3,2)".parse().unwrap();
        let m = n.central_moments().unwrap();
        assert_eq!(m.mu3, Some(0.0));
        assert_eq!(m.mu4, Some(48.0));
        let p: DistributionSpec = "pareto2(1,4)".parse().unwrap();
        let m = p.central_moments().unwrap();
        assert!(m.mu3.is_some());
        assert!(m.mu4.is_none());
        let p: DistributionSpec = "pareto2(1,0.5)".parse().unwrap();
        assert!(p.central_moments().unwrap().mean.is_none());
    }

    #[test]
    fn moments_match_quadrature() {
        for spec in families() {
            let m = spec.central_moments().unwrap();
            let (lo, hi) = spec.support();
            let cfg = QuadConfig::with_abs_tol(1e-10);
            let med = spec.quantile(0.5).unwrap();
            let moment = |k: i32, c: f64| {
                integrate(|x| (x - c).powi(k) * spec.pdf(x).unwrap(), lo, med, cfg).unwrap().value
                    + integrate(|x| (x - c).powi(k) * spec.pdf(x).unwrap(), med, hi, cfg).unwrap().value
            };
            let Some(mean) = m.mean else { continue };
            assert!((moment(1, 0.0) - mean).abs() < 1e-6 * mean.abs().max(1.0), "{spec}");
            if let Some(v) = m.variance {
                assert!((moment(2, mean) - v).abs() < 1e-6 * v, "{spec}");
            }
            if let Some(c3) = m.mu3 {
                if m.mu4.is_some() {
                    assert!((moment(3, mean) - c3).abs() < 1e-5 * m.variance.unwrap().powf(1.5), "{spec}");
                }
            }
        }
    }

    #[test]
    fn true_mad_examples() {
        let n: DistributionSpec = "normal(0,1)".parse().unwrap();
        assert!((true_mad(&n).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-9);
        let shifted: DistributionSpec = "normal(-40,3)".parse().unwrap();
        assert!((true_mad(&shifted).unwrap() - 3.0 * 0.674_489_750_196_081_7).abs() < 1e-8);
        // Exponential(1): sinh(M) = 1/2, so M = asinh(1/2) = ln golden ratio.
        let e: DistributionSpec = "exp(1)".parse().unwrap();
        assert!((true_mad(&e).unwrap() - 0.5f64.asinh()).abs() < 1e-9);
        // Uniform(a, b): MAD is a quarter of the range.
        let u: DistributionSpec = "unif(2,10)".parse().unwrap();
        assert!((true_mad(&u).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn true_mad_solves_cdf_equation() {
        for spec in families() {
            let mad = true_mad(&spec).unwrap();
            let m = spec.quantile(0.5).unwrap();
            let mass = spec.cdf(m + mad).unwrap() - spec.cdf(m - mad).unwrap();
            assert!((mass - 0.5).abs() < 1e-8, "{spec}: {mass}");
        }
    }

    #[test]
    fn true_mad_location_invariant_for_gld() {
        let a: DistributionSpec = "gld(0,1,3,0.01)".parse().unwrap();
        let b: DistributionSpec = "gld(7.5,1,3,0.01)".parse().unwrap();
        assert!((true_mad(&a).unwrap() - true_mad(&b).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn true_measures_zero_median_is_error() {
        let n: DistributionSpec = "normal(0,1)".parse().unwrap();
        assert!(matches!(true_measures(&n), Err(RcvError::DegenerateMeasure(_))));
    }

    #[test]
    fn true_measures_scale_invariant() {
        for spec in families() {
            let Some(scaled) = spec.scaled(3.7) else { continue };
            let a = true_measures(&spec).unwrap();
            let b = true_measures(&scaled).unwrap();
            assert!((a.rcv_q - b.rcv_q).abs() < 1e-9 * a.rcv_q.abs(), "{spec}");
            assert!((a.rcv_m - b.rcv_m).abs() < 1e-8 * a.rcv_m.abs(), "{spec}");
            match (a.cv, b.cv) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9 * x.abs(), "{spec}"),
                (None, None) => {}
                _ => panic!("cv existence changed under scaling for {spec}"),
            }
        }
    }

    #[test]
    fn uniform_measures_closed_form() {
        let (a, b) = (1.0, 5.0);
        let u = DistributionSpec::Uniform { lower: a, upper: b };
        let t = true_measures(&u).unwrap();
        let r = (b - a) / (b + a);
        assert!((t.cv.unwrap() - r / 3f64.sqrt()).abs() < 1e-12);
        assert!((t.rcv_q - 0.75 * r).abs() < 1e-12);
        // MAD = (b - a)/4 and m = (a + b)/2, so RCV_M = 1.4826 r / 2.
        assert!((t.rcv_m - MAD_SCALE * r / 2.0).abs() < 1e-9);
    }

    #[test]
    fn sample_is_deterministic() {
        let e: DistributionSpec = "exp(1)".parse().unwrap();
        let a = e.sample(1000, 7).unwrap();
        let b = e.sample(1000, 7).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(e.sample(1, 7).is_err());
    }

    #[test]
    fn sample_mean_clt_bound() {
        let n: DistributionSpec = "normal(5,1)".parse().unwrap();
        let s = n.sample(100_000, 1).unwrap();
        let mean = s.values().iter().sum::<f64>() / 1e5;
        assert!((mean - 5.0).abs() < 0.02);
    }

    #[test]
    fn sample_uniform_dkw_bound() {
        let u: DistributionSpec = "unif(0,1)".parse().unwrap();
        let s = u.sample(100_000, 2).unwrap();
        let sorted = s.sorted();
        let n = sorted.len() as f64;
        let d = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(d < 0.01, "sup distance {d}");
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["normal(5,1)", "lnorm(0,1)", "exp(1)", "chisq(5)", "pareto2(1,4)", "weibull(1,2)", "unif(0,1)"] {
            let spec: DistributionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("normal(5)".parse::<DistributionSpec>().is_err());
        assert!("normal(5,-1)".parse::<DistributionSpec>().is_err());
        assert!("unif(1,0)".parse::<DistributionSpec>().is_err());
        assert!("cauchy(0,1)".parse::<DistributionSpec>().is_err());
        assert!("exp 1".parse::<DistributionSpec>().is_err());
    }
}
