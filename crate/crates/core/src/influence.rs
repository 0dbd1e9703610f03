//! Influence functions of the mean, variance, CV, quantiles, quantile
//! ratios, RCV_Q, the standardized MAD and RCV_M, together with a
//! contamination-based finite-difference checker.

use serde::{Deserialize, Serialize};

use crate::asymptotic::{mad_theory, MadTheory};
use crate::distributions::{DistributionSpec, IQR_SCALE, MAD_SCALE};
use crate::error::{RcvError, Result};
use crate::numeric::bisect_monotone;

/// Functionals with an implemented influence function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FunctionalKind {
    Mean,
    Variance,
    Cv,
    Quantile(f64),
    /// Ratio `x_p / x_q`.
    QuantileRatio(f64, f64),
    RcvQ,
    /// The standardized MAD, `1.4826 · MAD`.
    Mad,
    RcvM,
}

impl FunctionalKind {
    fn validate(&self) -> Result<()> {
        let ok = |p: f64| p > 0.0 && p < 1.0;
        match *self {
            FunctionalKind::Quantile(p) if !ok(p) => Err(RcvError::Domain(format!("probability {p} not in (0, 1)"))),
            FunctionalKind::QuantileRatio(p, q) if !ok(p) || !ok(q) => {
                Err(RcvError::Domain(format!("probabilities ({p}, {q}) not in (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// Population quantities shared by the influence functions of one
/// distribution, computed once.
#[derive(Debug, Clone)]
pub struct InfluenceModel {
    spec: DistributionSpec,
    mean: Option<f64>,
    variance: Option<f64>,
    quartiles: [f64; 3],
    g: [f64; 3],
    mad: MadTheory,
}

/// Right-continuous step `p − 1{x < x_p}`.
fn quantile_step(x: f64, xp: f64, p: f64) -> f64 {
    if x < xp {
        p - 1.0
    } else {
        p
    }
}

impl InfluenceModel {
    pub fn new(spec: &DistributionSpec) -> Result<InfluenceModel> {
        let mo = spec.central_moments()?;
        let mut quartiles = [0.0; 3];
        let mut g = [0.0; 3];
        for (i, p) in [0.25, 0.5, 0.75].into_iter().enumerate() {
            quartiles[i] = spec.quantile(p)?;
            g[i] = spec.quantile_density(p)?;
        }
        Ok(InfluenceModel {
            spec: *spec,
            mean: mo.mean,
            variance: mo.variance,
            quartiles,
            g,
            mad: mad_theory(spec)?,
        })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn median(&self) -> f64 {
        self.quartiles[1]
    }

    /// Points where the influence function of `kind` jumps.
    pub fn breakpoints(&self, kind: FunctionalKind) -> Vec<f64> {
        let m = self.median();
        let mad = self.mad.mad;
        match kind {
            FunctionalKind::Quantile(p) => vec![self.spec.quantile_unchecked(p)],
            FunctionalKind::QuantileRatio(p, q) => {
                vec![self.spec.quantile_unchecked(p), self.spec.quantile_unchecked(q)]
            }
            FunctionalKind::RcvQ => self.quartiles.to_vec(),
            FunctionalKind::Mad | FunctionalKind::RcvM => vec![m - mad, m, m + mad],
            _ => Vec::new(),
        }
    }

    fn moments(&self) -> Result<(f64, f64)> {
        match (self.mean, self.variance) {
            (Some(m), Some(v)) => Ok((m, v)),
            _ => Err(RcvError::UndefinedMoment(format!(
                "{} lacks a finite mean and variance",
                self.spec
            ))),
        }
    }

    fn if_quantile_at(&self, x: f64, p: f64) -> Result<f64> {
        let xp = self.spec.quantile(p)?;
        let g = self.spec.quantile_density(p)?;
        Ok(quantile_step(x, xp, p) * g)
    }

    fn if_median(&self, x: f64) -> f64 {
        quantile_step(x, self.quartiles[1], 0.5) * self.g[1]
    }

    fn if_quartile(&self, i: usize, x: f64) -> f64 {
        let p = [0.25, 0.5, 0.75][i];
        quantile_step(x, self.quartiles[i], p) * self.g[i]
    }

    /// Influence function of the (unstandardized) MAD, from implicit
    /// differentiation of `F(m + M) − F(m − M) = 1/2`.
    fn if_raw_mad(&self, x: f64) -> f64 {
        let t = &self.mad;
        let inside = x >= t.median - t.mad && x < t.median + t.mad;
        let ind = if inside { 1.0 } else { 0.0 };
        (0.5 - ind + t.c3 * self.if_median(x)) / t.c1
    }

    /// Evaluates the influence function of `kind` at `x`.
    pub fn try_eval(&self, kind: FunctionalKind, x: f64) -> Result<f64> {
        kind.validate()?;
        match kind {
            FunctionalKind::Mean => Ok(x - self.moments()?.0),
            FunctionalKind::Variance => {
                let (mu, var) = self.moments()?;
                Ok((x - mu) * (x - mu) - var)
            }
            FunctionalKind::Cv => {
                let (mu, var) = self.moments()?;
                if mu == 0.0 {
                    return Err(RcvError::DegenerateMeasure("mean is zero".into()));
                }
                let cv = var.sqrt() / mu;
                let if_v = (x - mu) * (x - mu) - var;
                Ok(cv * (if_v / (2.0 * var) - (x - mu) / mu))
            }
            FunctionalKind::Quantile(p) => self.if_quantile_at(x, p),
            FunctionalKind::QuantileRatio(p, q) => {
                let xp = self.spec.quantile(p)?;
                let xq = self.spec.quantile(q)?;
                if xp == 0.0 || xq == 0.0 {
                    return Err(RcvError::DegenerateMeasure("zero quantile in ratio".into()));
                }
                Ok(xp / xq * (self.if_quantile_at(x, p)? / xp - self.if_quantile_at(x, q)? / xq))
            }
            FunctionalKind::RcvQ => {
                let [q1, m, q3] = self.quartiles;
                if m == 0.0 {
                    return Err(RcvError::DegenerateMeasure("median is zero".into()));
                }
                let im = self.if_median(x);
                let ratio = |xp: f64, ip: f64| xp / m * (ip / xp - im / m);
                Ok(IQR_SCALE * (ratio(q3, self.if_quartile(2, x)) - ratio(q1, self.if_quartile(0, x))))
            }
            FunctionalKind::Mad => Ok(MAD_SCALE * self.if_raw_mad(x)),
            FunctionalKind::RcvM => {
                let m = self.median();
                if m == 0.0 {
                    return Err(RcvError::DegenerateMeasure("median is zero".into()));
                }
                let rcv = MAD_SCALE * self.mad.mad / m;
                Ok(MAD_SCALE * self.if_raw_mad(x) / m - rcv * self.if_median(x) / m)
            }
        }
    }

    /// Like [`try_eval`](Self::try_eval) but returns NaN where undefined.
    pub fn eval(&self, kind: FunctionalKind, x: f64) -> f64 {
        self.try_eval(kind, x).unwrap_or(f64::NAN)
    }
}

fn eval_once(kind: FunctionalKind, x: f64, spec: &DistributionSpec) -> Result<f64> {
    InfluenceModel::new(spec)?.try_eval(kind, x)
}

pub fn if_mean(x: f64, spec: &DistributionSpec) -> Result<f64> {
    let mo = spec.central_moments()?;
    mo.mean
        .map(|m| x - m)
        .ok_or_else(|| RcvError::UndefinedMoment(format!("{spec} has no finite mean")))
}

pub fn if_variance(x: f64, spec: &DistributionSpec) -> Result<f64> {
    let mo = spec.central_moments()?;
    match (mo.mean, mo.variance) {
        (Some(m), Some(v)) => Ok((x - m) * (x - m) - v),
        _ => Err(RcvError::UndefinedMoment(format!("{spec} has no finite variance"))),
    }
}

pub fn if_cv(x: f64, spec: &DistributionSpec) -> Result<f64> {
    let mo = spec.central_moments()?;
    match (mo.mean, mo.variance) {
        (Some(mu), Some(var)) if mu != 0.0 => {
            let cv = var.sqrt() / mu;
            Ok(cv * (((x - mu) * (x - mu) - var) / (2.0 * var) - (x - mu) / mu))
        }
        (Some(_), Some(_)) => Err(RcvError::DegenerateMeasure(format!("mean of {spec} is zero"))),
        _ => Err(RcvError::UndefinedMoment(format!("{spec} has no finite variance"))),
    }
}

pub fn if_quantile(x: f64, p: f64, spec: &DistributionSpec) -> Result<f64> {
    let xp = spec.quantile(p)?;
    let g = spec.quantile_density(p)?;
    Ok(quantile_step(x, xp, p) * g)
}

pub fn if_quantile_ratio(x: f64, p: f64, q: f64, spec: &DistributionSpec) -> Result<f64> {
    let xp = spec.quantile(p)?;
    let xq = spec.quantile(q)?;
    if xp == 0.0 || xq == 0.0 {
        return Err(RcvError::DegenerateMeasure("zero quantile in ratio".into()));
    }
    Ok(xp / xq * (if_quantile(x, p, spec)? / xp - if_quantile(x, q, spec)? / xq))
}

pub fn if_rcv_q(x: f64, spec: &DistributionSpec) -> Result<f64> {
    eval_once(FunctionalKind::RcvQ, x, spec)
}

/// Influence function of the standardized MAD.
pub fn if_mad(x: f64, spec: &DistributionSpec) -> Result<f64> {
    eval_once(FunctionalKind::Mad, x, spec)
}

pub fn if_rcv_m(x: f64, spec: &DistributionSpec) -> Result<f64> {
    eval_once(FunctionalKind::RcvM, x, spec)
}

/// The mixture `(1 − ε)F + εΔ_x`.
struct Contaminated<'a> {
    spec: &'a DistributionSpec,
    x: f64,
    eps: f64,
}

impl Contaminated<'_> {
    fn quantile(&self, p: f64) -> f64 {
        let below = (1.0 - self.eps) * self.spec.cdf_unchecked(self.x);
        if p <= below {
            self.spec.quantile_unchecked(p / (1.0 - self.eps))
        } else if p <= below + self.eps {
            self.x
        } else {
            self.spec.quantile_unchecked((p - self.eps) / (1.0 - self.eps))
        }
    }

    /// Mixture probability of `[m − M, m + M]`.
    fn central_mass(&self, m: f64, big_m: f64) -> f64 {
        let atom = if (self.x - m).abs() <= big_m { self.eps } else { 0.0 };
        let inner = self.spec.cdf_unchecked(m + big_m) - self.spec.cdf_unchecked(m - big_m);
        (1.0 - self.eps) * inner + atom
    }

    fn mad(&self, m: f64, hint: f64) -> Result<f64> {
        let mut hi = 2.0 * hint.max(f64::MIN_POSITIVE) + (self.x - m).abs();
        let mut guard = 0;
        while self.central_mass(m, hi) < 0.5 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(RcvError::Numerical("contaminated MAD not bracketed".into()));
            }
        }
        Ok(bisect_monotone(|b| self.central_mass(m, b), 0.5, 0.0, hi, 0.0))
    }
}

/// Difference quotient `[T((1 − ε)F + εΔ_x) − T(F)] / ε`, a numerical
/// oracle for the analytic influence functions.
pub fn if_numeric_check(kind: FunctionalKind, x: f64, spec: &DistributionSpec, eps: f64) -> Result<f64> {
    kind.validate()?;
    if !(eps > 0.0 && eps <= 0.01) {
        return Err(RcvError::Parameter(format!("contamination {eps} not in (0, 0.01]")));
    }
    spec.validate()?;
    let mix = Contaminated { spec, x, eps };
    let moments = || -> Result<(f64, f64, f64, f64)> {
        let mo = spec.central_moments()?;
        let (Some(mu), Some(var)) = (mo.mean, mo.variance) else {
            return Err(RcvError::UndefinedMoment(format!("{spec} has no finite variance")));
        };
        let mix_mean = (1.0 - eps) * mu + eps * x;
        // Central second moment of the mixture about its own mean.
        let d = mu - mix_mean;
        let mix_var = (1.0 - eps) * (var + d * d) + eps * (x - mix_mean) * (x - mix_mean);
        Ok((mu, var, mix_mean, mix_var))
    };
    let value = match kind {
        FunctionalKind::Mean => {
            let (mu, _, mm, _) = moments()?;
            (mm - mu) / eps
        }
        FunctionalKind::Variance => {
            let (_, var, _, mv) = moments()?;
            (mv - var) / eps
        }
        FunctionalKind::Cv => {
            let (mu, var, mm, mv) = moments()?;
            (mv.sqrt() / mm - var.sqrt() / mu) / eps
        }
        FunctionalKind::Quantile(p) => (mix.quantile(p) - spec.quantile_unchecked(p)) / eps,
        FunctionalKind::QuantileRatio(p, q) => {
            let base = spec.quantile_unchecked(p) / spec.quantile_unchecked(q);
            (mix.quantile(p) / mix.quantile(q) - base) / eps
        }
        FunctionalKind::RcvQ => {
            let rcv = |q: &dyn Fn(f64) -> f64| IQR_SCALE * (q(0.75) - q(0.25)) / q(0.5);
            (rcv(&|p| mix.quantile(p)) - rcv(&|p| spec.quantile_unchecked(p))) / eps
        }
        FunctionalKind::Mad | FunctionalKind::RcvM => {
            let t = mad_theory(spec)?;
            let clean = Contaminated { spec, x, eps: 0.0 };
            let m0 = t.median;
            let mad0 = clean.mad(m0, t.mad)?;
            let m1 = mix.quantile(0.5);
            let mad1 = mix.mad(m1, t.mad)?;
            if kind == FunctionalKind::Mad {
                MAD_SCALE * (mad1 - mad0) / eps
            } else {
                MAD_SCALE * (mad1 / m1 - mad0 / m0) / eps
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(RcvError::Numerical(format!(
            "difference quotient for {kind:?} at x = {x} on {spec} is {value}"
        )))
    }
}

/// One row of an influence-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfCurvePoint {
    pub x: f64,
    /// `None` where the CV's influence function is undefined.
    pub if_cv: Option<f64>,
    pub if_rcv_q: f64,
    pub if_rcv_m: f64,
}

/// Influence curves of CV, RCV_Q and RCV_M on `points` equally spaced
/// values over `[Q(0.001), Q(0.999)]`.
pub fn if_curve(spec: &DistributionSpec, points: usize) -> Result<Vec<IfCurvePoint>> {
    if points < 2 {
        return Err(RcvError::Parameter(format!("need at least 2 curve points, got {points}")));
    }
    let model = InfluenceModel::new(spec)?;
    let lo = spec.quantile(0.001)?;
    let hi = spec.quantile(0.999)?;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = if i == points - 1 { hi } else { lo + step * i as f64 };
            Ok(IfCurvePoint {
                x,
                if_cv: model.try_eval(FunctionalKind::Cv, x).ok(),
                if_rcv_q: model.try_eval(FunctionalKind::RcvQ, x)?,
                if_rcv_m: model.try_eval(FunctionalKind::RcvM, x)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::if_moment;
    use crate::numeric::QuadConfig;
    use crate::special::{normal_pdf, normal_quantile};

    fn spec(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn mean_and_variance_examples() {
        let n = spec("normal(5,1)");
        assert_eq!(if_mean(5.0, &n).unwrap(), 0.0);
        assert_eq!(if_variance(5.0, &n).unwrap(), -1.0);
        let e = spec("exp(1)");
        assert_eq!(if_mean(3.0, &e).unwrap(), 2.0);
        assert_eq!(if_variance(3.0, &e).unwrap(), 3.0);
        assert!(matches!(
            if_mean(1.0, &spec("pareto2(1,0.5)")),
            Err(RcvError::UndefinedMoment(_))
        ));
    }

    #[test]
    fn cv_examples() {
        let e = spec("exp(1)");
        assert!((if_cv(1.0, &e).unwrap() + 0.5).abs() < 1e-15);
        let a = if_cv(10.0, &e).unwrap().abs();
        let b = if_cv(100.0, &e).unwrap().abs();
        assert!(b > a);
    }

    #[test]
    fn quantile_examples() {
        let e = spec("exp(1)");
        assert!((if_quantile(0.0, 0.5, &e).unwrap() + 1.0).abs() < 1e-14);
        assert!((if_quantile(1e6, 0.5, &e).unwrap() - 1.0).abs() < 1e-14);
        // Right-limit at the breakpoint.
        assert!((if_quantile(2f64.ln(), 0.5, &e).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quantile_ratio_examples() {
        let e = spec("exp(1)");
        for x in [0.0, 0.5, 3.0] {
            assert_eq!(if_quantile_ratio(x, 0.3, 0.3, &e).unwrap(), 0.0);
        }
        // x = 0 lies below both quantiles: steps are (p − 1)g.
        let (x75, x50) = (4f64.ln(), 2f64.ln());
        let expect = x75 / x50 * ((-0.25 * 4.0) / x75 - (-0.5 * 2.0) / x50);
        assert!((if_quantile_ratio(0.0, 0.75, 0.5, &e).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn rcv_q_piecewise_constant_with_quartile_jumps() {
        let e = spec("exp(1)");
        let model = InfluenceModel::new(&e).unwrap();
        let qs = model.breakpoints(FunctionalKind::RcvQ);
        let mut values = Vec::new();
        for w in [0.0, qs[0], qs[1], qs[2], 20.0].windows(2) {
            let a = model.eval(FunctionalKind::RcvQ, w[0] + 0.25 * (w[1] - w[0]));
            let b = model.eval(FunctionalKind::RcvQ, w[0] + 0.75 * (w[1] - w[0]));
            assert!((a - b).abs() < 1e-14);
            values.push(a);
        }
        for w in values.windows(2) {
            assert!((w[0] - w[1]).abs() > 1e-3);
        }
    }

    #[test]
    fn mad_reduces_to_normal_form() {
        // Standardized MAD at N(μ, 1): sign(|x − μ| − c) / (4 c φ(c)), c = Φ⁻¹(3/4).
        let c = normal_quantile(0.75).unwrap();
        let expect = 1.0 / (4.0 * c * normal_pdf(c));
        for mu in [0.0, 5.0] {
            let n = DistributionSpec::Normal { mean: mu, sd: 1.0 };
            for dx in [-3.0, -1.0, -0.3, 0.2, 0.9, 2.5] {
                let v = if_mad(mu + dx, &n).unwrap();
                let sign = if dx.abs() > c { 1.0 } else { -1.0 };
                // 1.4826 vs 1/c differs in the fifth digit.
                assert!((v - sign * expect).abs() < 1e-4 * expect, "mu={mu} dx={dx}: {v}");
            }
        }
    }

    #[test]
    fn symmetric_spec_has_no_median_term() {
        let model = InfluenceModel::new(&spec("unif(1,3)")).unwrap();
        assert!(model.mad.c3.abs() < 1e-12);
    }

    #[test]
    fn robust_ifs_bounded() {
        let e = spec("exp(1)");
        let model = InfluenceModel::new(&e).unwrap();
        let sup = (0..2000)
            .map(|i| model.eval(FunctionalKind::RcvM, i as f64 * 0.05).abs())
            .fold(0.0, f64::max);
        assert!(sup.is_finite() && sup < 10.0);
        assert_eq!(
            model.eval(FunctionalKind::RcvM, 50.0),
            model.eval(FunctionalKind::RcvM, 5e6)
        );
    }

    #[test]
    fn numeric_check_examples() {
        let e = spec("exp(1)");
        for x in [0.1, 3.0, 40.0] {
            let v = if_numeric_check(FunctionalKind::Mean, x, &e, 1e-3).unwrap();
            assert!((v - (x - 1.0)).abs() < 1e-9);
        }
        let fd = if_numeric_check(FunctionalKind::Quantile(0.5), 3.0, &e, 1e-6).unwrap();
        assert!((fd - if_quantile(3.0, 0.5, &e).unwrap()).abs() < 1e-3);
        let fd = if_numeric_check(FunctionalKind::RcvM, 3.0, &e, 1e-6).unwrap();
        assert!((fd - if_rcv_m(3.0, &e).unwrap()).abs() < 1e-3, "{fd}");
        assert!(if_numeric_check(FunctionalKind::Mean, 1.0, &e, 0.5).is_err());
    }

    #[test]
    fn numeric_check_agrees_on_grid() {
        let kinds = [
            FunctionalKind::Variance,
            FunctionalKind::Cv,
            FunctionalKind::QuantileRatio(0.75, 0.5),
            FunctionalKind::RcvQ,
            FunctionalKind::Mad,
            FunctionalKind::RcvM,
        ];
        for s in ["lnorm(0,1)", "chisq(5)"] {
            let d = spec(s);
            let model = InfluenceModel::new(&d).unwrap();
            for kind in kinds {
                for i in 1..10 {
                    let x = d.quantile(i as f64 / 10.0 - 0.037).unwrap();
                    let a = model.eval(kind, x);
                    let fd = if_numeric_check(kind, x, &d, 1e-6).unwrap();
                    assert!((a - fd).abs() <= 1e-3f64.max(1e-2 * a.abs()), "{s} {kind:?} x={x}: {a} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn influence_functions_have_zero_mean() {
        let cfg = QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 20_000 };
        for s in ["exp(1)", "weibull(1,2)", "pareto2(1,2.5)"] {
            let model = InfluenceModel::new(&spec(s)).unwrap();
            for kind in [FunctionalKind::Quantile(0.3), FunctionalKind::RcvQ, FunctionalKind::Mad, FunctionalKind::RcvM] {
                let m = if_moment(&model, kind, 1, cfg).unwrap();
                assert!(m.abs() < 1e-6, "{s} {kind:?}: {m}");
            }
        }
    }

    #[test]
    fn quantile_if_second_moment() {
        let e = spec("exp(1)");
        let model = InfluenceModel::new(&e).unwrap();
        let p: f64 = 0.3;
        let g = e.quantile_density(p).unwrap();
        let m2 = if_moment(&model, FunctionalKind::Quantile(p), 2, QuadConfig::default()).unwrap();
        assert!((m2 - p * (1.0 - p) * g * g).abs() < 1e-6);
    }

    #[test]
    fn curve_shape() {
        let c = if_curve(&spec("exp(1)"), 401).unwrap();
        assert_eq!(c.len(), 401);
        assert!(c.windows(2).all(|w| w[1].x > w[0].x));
        assert!(c.iter().all(|p| p.if_cv.is_some()));
        let par = if_curve(&spec("pareto2(1,1.5)"), 11).unwrap();
        assert!(par.iter().all(|p| p.if_cv.is_none()));
    }
}
