//! Generalized Lambda Distribution in the FKML parameterization.
//!
//! The distribution is defined through its quantile function
//!
//! ```text
//! Q(p) = l1 + [ (p^l3 - 1)/l3 - ((1-p)^l4 - 1)/l4 ] / l2
//! ```
//!
//! with the logarithmic limit taken for a zero shape parameter. Densities
//! are obtained numerically as `1 / Q'(u)` at the `u` solving `Q(u) = x`.

use serde::{Deserialize, Serialize};

use crate::distributions::MomentSet;
use crate::error::{RcvError, Result};
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::numeric::{integrate, QuadConfig};
use crate::special::ln_beta;

/// Shape parameters closer to zero than this use the logarithmic limit.
const SHAPE_EPS: f64 = 1e-10;
/// Below this magnitude the beta-function moment formulas cancel badly, so
/// moments are computed by quadrature instead.
const CLOSED_FORM_MIN_SHAPE: f64 = 0.02;
/// Probability used to truncate unbounded supports when inverting Q.
const TAIL_PROB: f64 = 1e-12;

/// FKML GLD parameters: location, inverse scale and two tail shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GldFkml {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

/// `(u^s - 1) / s`, or `ln u` in the limit.
fn box_cox(u: f64, s: f64) -> f64 {
    let lu = u.ln();
    if s.abs() < SHAPE_EPS {
        lu
    } else {
        (s * lu).exp_m1() / s
    }
}

impl GldFkml {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64) -> Result<Self> {
        let g = GldFkml {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(RcvError::Parameter("GLD parameters must be finite".into()));
        }
        if !(self.lambda2 > 0.0) {
            return Err(RcvError::Parameter(format!(
                "GLD inverse scale lambda2 = {} must be positive",
                self.lambda2
            )));
        }
        Ok(())
    }

    /// Standardized quantile `(p^l3 - 1)/l3 - ((1-p)^l4 - 1)/l4`.
    fn shape_quantile(&self, p: f64) -> f64 {
        box_cox(p, self.lambda3) - box_cox(1.0 - p, self.lambda4)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(RcvError::Domain(format!("probability {p} not in (0, 1)")));
        }
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        self.lambda1 + self.shape_quantile(p) / self.lambda2
    }

    /// Q'(p) = (p^(l3-1) + (1-p)^(l4-1)) / l2.
    pub fn quantile_density(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(RcvError::Domain(format!("probability {p} not in (0, 1)")));
        }
        Ok(self.quantile_density_unchecked(p))
    }

    pub(crate) fn quantile_density_unchecked(&self, p: f64) -> f64 {
        (p.powf(self.lambda3 - 1.0) + (1.0 - p).powf(self.lambda4 - 1.0)) / self.lambda2
    }

    /// Closed support `[Q(0), Q(1)]`; infinite ends for non-positive shapes.
    pub fn support(&self) -> (f64, f64) {
        let lo = if self.lambda3 > 0.0 {
            self.lambda1 - 1.0 / (self.lambda2 * self.lambda3)
        } else {
            f64::NEG_INFINITY
        };
        let hi = if self.lambda4 > 0.0 {
            self.lambda1 + 1.0 / (self.lambda2 * self.lambda4)
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    /// Solves `Q(u) = x` by bisection on u. `x` must lie strictly inside the
    /// support.
    fn invert(&self, x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.quantile_unchecked(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
            // Absolute tolerance 1e-10 in u, tightened in the tails so that
            // small u keep relative accuracy.
            let scale = lo.min(1.0 - hi).max(1e-300);
            if hi - lo <= 1e-10 * scale.min(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Distribution function, by numerical inversion of the quantile function.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        self.invert(x)
    }

    /// Density `1 / Q'(u*)` with `Q(u*) = x`.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        self.validate()?;
        let lo = self.quantile_unchecked(TAIL_PROB);
        let hi = self.quantile_unchecked(1.0 - TAIL_PROB);
        if !(x >= lo && x <= hi) {
            return Err(RcvError::Domain(format!(
                "x = {x} outside the effective GLD support [{lo}, {hi}]"
            )));
        }
        let u = self.invert(x);
        Ok(1.0 / self.quantile_density_unchecked(u))
    }

    /// Central moments (and the mean) of the fitted distribution. Moments
    /// of order k exist iff `min(l3, l4) > -1/k`.
    pub fn moments(&self) -> MomentSet {
        let std = standardized_moments(self.lambda3, self.lambda4);
        let s = self.lambda2;
        MomentSet {
            mean: std.mean.map(|m| self.lambda1 + m / s),
            variance: std.variance.map(|v| v / (s * s)),
            mu3: std.mu3.map(|v| v / s.powi(3)),
            mu4: std.mu4.map(|v| v / s.powi(4)),
        }
    }
}

/// Moments of `Z = (U^a - 1)/a - ((1-U)^b - 1)/b` for `U ~ Uniform(0, 1)`.
fn standardized_moments(a: f64, b: f64) -> MomentSet {
    let min_shape = a.min(b);
    let exists = |k: f64| min_shape > -1.0 / k;
    let mean = if exists(1.0) {
        Some(1.0 / (b + 1.0) - 1.0 / (a + 1.0))
    } else {
        None
    };
    let (mut c2, mut c3, mut c4) = (None, None, None);
    if exists(2.0) {
        let m = mean.expect("first moment exists when the second does");
        let central = if a.abs() >= CLOSED_FORM_MIN_SHAPE && b.abs() >= CLOSED_FORM_MIN_SHAPE {
            closed_form_central(a, b)
        } else {
            quadrature_central(a, b, m)
        };
        c2 = Some(central[0]);
        if exists(3.0) {
            c3 = Some(central[1]);
        }
        if exists(4.0) {
            c4 = Some(central[2]);
        }
    }
    MomentSet {
        mean,
        variance: c2,
        mu3: c3,
        mu4: c4,
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central moments of orders 2..=4 via raw moments of
/// `S = U^a/a - (1-U)^b/b`, whose k-th raw moment is a finite sum of beta
/// functions. Only meaningful where the moments exist; non-existent orders
/// come back as non-finite values and are discarded by the caller.
fn closed_form_central(a: f64, b: f64) -> [f64; 3] {
    let raw = |k: u32| -> f64 {
        (0..=k)
            .map(|j| {
                let i = k - j;
                let x = a * i as f64 + 1.0;
                let y = b * j as f64 + 1.0;
                if x <= 0.0 || y <= 0.0 {
                    return f64::NAN;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(k, j) * a.powi(-(i as i32)) * b.powi(-(j as i32)) * ln_beta(x, y).exp()
            })
            .sum()
    };
    let m1 = raw(1);
    let m2 = raw(2);
    let m3 = raw(3);
    let m4 = raw(4);
    let c2 = m2 - m1 * m1;
    let c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    [c2, c3, c4]
}

/// `(u^s - 1)/s` from `ln u`, scaled by `e^ln_scale` without forming
/// `u^s` on its own (it overflows deep in a heavy tail).
fn scaled_box_cox(ln_u: f64, s: f64, ln_scale: f64) -> f64 {
    let x = s * ln_u;
    if s.abs() < SHAPE_EPS {
        ln_u * ln_scale.exp()
    } else if x < 700.0 {
        x.exp_m1() / s * ln_scale.exp()
    } else {
        // u^s dominates; the difference no longer cancels.
        ((x + ln_scale).exp() - ln_scale.exp()) / s
    }
}

/// Central moments of orders 2..=4 by quadrature, for shapes near zero.
/// Each half of (0, 1) is put on a logarithmic scale, `w = e^-t` being the
/// distance to the nearer endpoint, and `t` is stretched by the tail's decay
/// rate so the integrand decays like `e^-sigma`.
fn quadrature_central(a: f64, b: f64, mean: f64) -> [f64; 3] {
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let mut out = [f64::NAN; 3];
    for (slot, k) in out.iter_mut().zip(2..=4) {
        let kf = k as f64;
        // `near` is the shape of the tail at this end, `far` the other one.
        let half = |near: f64, far: f64, sign: f64| -> f64 {
            let rate = 1.0 + kf * near.min(0.0);
            if rate <= 0.0 {
                return f64::NAN;
            }
            let integrand = |sigma: f64| {
                let ln_w = -sigma / rate;
                // The Jacobian w goes inside the k-th power as w^(1/k).
                let ln_scale = ln_w / kf;
                let far_term = box_cox(-ln_w.exp_m1(), far) * ln_scale.exp();
                let near_term = scaled_box_cox(ln_w, near, ln_scale);
                (sign * (near_term - far_term) - mean * ln_scale.exp()).powi(k) / rate
            };
            integrate(integrand, std::f64::consts::LN_2 * rate, f64::INFINITY, cfg).map_or(f64::NAN, |r| r.value)
        };
        *slot = half(a, b, 1.0) + half(b, a, -1.0);
    }
    out
}

/// Skewness and kurtosis as functions of the two shape parameters.
fn shape_skew_kurt(a: f64, b: f64) -> Option<(f64, f64)> {
    if !(a.min(b) > -0.25) {
        return None;
    }
    let m = standardized_moments(a, b);
    let (v, c3, c4) = (m.variance?, m.mu3?, m.mu4?);
    if !(v > 0.0) || !c3.is_finite() || !c4.is_finite() {
        return None;
    }
    Some((c3 / v.powf(1.5), c4 / (v * v)))
}

const SHAPE_MAX: f64 = 1e3;

fn residual(a: f64, b: f64, skew: f64, kurt: f64) -> Option<[f64; 2]> {
    if !(a > -0.25 && b > -0.25 && a < SHAPE_MAX && b < SHAPE_MAX) {
        return None;
    }
    let (s, k) = shape_skew_kurt(a, b)?;
    Some([s - skew, k - kurt])
}

fn norm2(r: &[f64; 2]) -> f64 {
    r[0] * r[0] + r[1] * r[1]
}

/// Central-difference Jacobian of the residual, one-sided next to the
/// `-1/4` boundary.
fn jacobian(a: f64, b: f64, r: [f64; 2], skew: f64, kurt: f64) -> Option<[[f64; 2]; 2]> {
    let column = |h: f64, step: &dyn Fn(f64) -> Option<[f64; 2]>| -> Option<[f64; 2]> {
        let up = step(h)?;
        match step(-h) {
            Some(down) => Some([(up[0] - down[0]) / (2.0 * h), (up[1] - down[1]) / (2.0 * h)]),
            None => Some([(up[0] - r[0]) / h, (up[1] - r[1]) / h]),
        }
    };
    let ca = column(1e-6 * a.abs().max(0.1), &|h| residual(a + h, b, skew, kurt))?;
    let cb = column(1e-6 * b.abs().max(0.1), &|h| residual(a, b + h, skew, kurt))?;
    Some([[ca[0], cb[0]], [ca[1], cb[1]]])
}

/// Levenberg-Marquardt descent on the squared (skewness, kurtosis)
/// mismatch from the logistic member `(0, 0)`. Returns the shapes reached
/// and the final squared residual, which is zero up to rounding when the
/// targets are attainable.
fn least_squares_shapes(skew: f64, kurt: f64) -> Option<((f64, f64), f64)> {
    let (mut a, mut b) = (0.0, 0.0);
    let mut r = residual(a, b, skew, kurt)?;
    let mut damping = 1e-3;
    for _ in 0..500 {
        let current = norm2(&r);
        if current < 1e-26 {
            break;
        }
        let Some(j) = jacobian(a, b, r, skew, kurt) else {
            break;
        };
        let jtj = [
            [j[0][0] * j[0][0] + j[1][0] * j[1][0], j[0][0] * j[0][1] + j[1][0] * j[1][1]],
            [j[0][0] * j[0][1] + j[1][0] * j[1][1], j[0][1] * j[0][1] + j[1][1] * j[1][1]],
        ];
        let jtr = [j[0][0] * r[0] + j[1][0] * r[1], j[0][1] * r[0] + j[1][1] * r[1]];
        let mut accepted = false;
        while damping < 1e14 {
            let m00 = jtj[0][0] * (1.0 + damping) + 1e-15;
            let m11 = jtj[1][1] * (1.0 + damping) + 1e-15;
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.is_finite() && det != 0.0 {
                let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
                let db = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
                if let Some(nr) = residual(a + da, b + db, skew, kurt) {
                    if norm2(&nr) < current {
                        let small = da.abs() + db.abs() < 1e-13 * (1.0 + a.abs() + b.abs());
                        a += da;
                        b += db;
                        r = nr;
                        damping = (damping * 0.3).max(1e-12);
                        accepted = !small;
                        break;
                    }
                }
            }
            damping *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    let reached = ((a, b), norm2(&r));
    if reached.1 < 1e-22 {
        return Some(reached);
    }
    // Gauss-Newton steps stall where the moment map folds over; a simplex
    // search finishes the job there.
    Some(match simplex_polish(skew, kurt, (a, b)) {
        Some(p) if p.1 < reached.1 => p,
        _ => reached,
    })
}

struct MomentMismatch {
    skew: f64,
    kurt: f64,
}

impl CostFunction for MomentMismatch {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(residual(p[0], p[1], self.skew, self.kurt).map_or(f64::INFINITY, |r| norm2(&r)))
    }
}

fn simplex_polish(skew: f64, kurt: f64, (a, b): (f64, f64)) -> Option<((f64, f64), f64)> {
    let (ha, hb) = (1e-2 * a.abs().max(0.1), 1e-2 * b.abs().max(0.1));
    let start = vec![vec![a, b], vec![a + ha, b], vec![a, b + hb]];
    let solver = NelderMead::new(start).with_sd_tolerance(1e-26).ok()?;
    let res = Executor::new(MomentMismatch { skew, kurt }, solver)
        .configure(|s| s.max_iters(1000))
        .run()
        .ok()?;
    let best = res.state().get_best_param()?;
    Some(((best[0], best[1]), res.state().get_best_cost()))
}

/// Method-of-moments fit: matches mean and variance exactly, and skewness
/// and kurtosis in the least-squares sense.
///
/// The shape pair is found by a local descent from the logistic member
/// `(0, 0)`. Where the targets lie outside the region reachable with a
/// finite fourth moment, the closest reachable shapes are returned.
pub fn fit_moments(moments: &MomentSet) -> Result<GldFkml> {
    let (mean, var, mu3, mu4) = match (moments.mean, moments.variance, moments.mu3, moments.mu4) {
        (Some(m), Some(v), Some(c3), Some(c4)) => (m, v, c3, c4),
        _ => {
            return Err(RcvError::FitFailure(
                "the first four moments are required".into(),
            ))
        }
    };
    if !(var > 0.0) || ![mean, var, mu3, mu4].iter().all(|x| x.is_finite()) {
        return Err(RcvError::FitFailure(format!(
            "moments must be finite with positive variance (variance = {var})"
        )));
    }
    let skew = mu3 / var.powf(1.5);
    let kurt = mu4 / (var * var);
    // Two-point data sit on the boundary; allow for rounding in the moments.
    if kurt <= (1.0 + skew * skew) * (1.0 + 1e-9) {
        return Err(RcvError::FitFailure(format!(
            "kurtosis {kurt} is not attainable with skewness {skew}"
        )));
    }
    let ((a, b), _) = least_squares_shapes(skew, kurt)
        .ok_or_else(|| RcvError::FitFailure(format!("no usable FKML shapes for skewness {skew} and kurtosis {kurt}")))?;
    let z = standardized_moments(a, b);
    let (zmean, zvar) = match (z.mean, z.variance) {
        (Some(m), Some(v)) if v > 0.0 && v.is_finite() => (m, v),
        _ => return Err(RcvError::FitFailure("degenerate fitted shape moments".into())),
    };
    let lambda2 = (zvar / var).sqrt();
    let lambda1 = mean - zmean / lambda2;
    GldFkml::new(lambda1, lambda2, a, b)
}

/// Fits to the sample moments (n-divisor central moments).
pub fn fit_sample(values: &[f64]) -> Result<GldFkml> {
    fit_moments(&MomentSet::from_sample(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn quantile_examples() {
        let logistic = GldFkml::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(logistic.quantile(0.5).unwrap().abs() < 1e-15);
        // logistic limit: ln(p / (1 - p))
        assert!((logistic.quantile(0.9).unwrap() - 9f64.ln()).abs() < 1e-12);
        let unif = GldFkml::new(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((unif.quantile(0.75).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_density_examples() {
        let g = GldFkml::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let g2 = GldFkml::new(0.0, 2.0, 1.0, 1.0).unwrap();
        for &p in &[0.01, 0.3, 0.5, 0.99] {
            assert!((g.quantile_density(p).unwrap() - 2.0).abs() < 1e-14);
            assert!((g2.quantile_density(p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_density_matches_central_difference() {
        let h = 1e-5;
        for params in [(0.0, 1.0, 0.1, 0.1), (2.0, 0.5, 0.2, 0.4), (1.0, 3.0, -0.2, 1.5), (0.0, 1.0, 0.0, 0.3)] {
            let g = GldFkml::new(params.0, params.1, params.2, params.3).unwrap();
            for &p in &[0.05, 0.25, 0.5, 0.8, 0.95] {
                let fd = (g.quantile(p + h).unwrap() - g.quantile(p - h).unwrap()) / (2.0 * h);
                assert!((g.quantile_density(p).unwrap() - fd).abs() < 1e-5, "{params:?} p={p}");
            }
        }
    }

    #[test]
    fn invalid_scale_rejected() {
        assert!(GldFkml::new(0.0, 0.0, 1.0, 1.0).is_err());
        let bad = GldFkml {
            lambda1: 0.0,
            lambda2: -1.0,
            lambda3: 0.1,
            lambda4: 0.1,
        };
        assert!(bad.quantile(0.5).is_err());
        assert!(bad.quantile_density(0.5).is_err());
    }

    #[test]
    fn density_of_uniform_member() {
        let g = GldFkml::new(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((g.density_at(0.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((g.cdf(0.5) - 0.75).abs() < 1e-9);
    }

    #[test]
    fn density_outside_support_is_domain_error() {
        let g = GldFkml::new(0.0, 1.0, 0.1, 0.1).unwrap();
        let below = g.quantile(1e-12).unwrap() - 1.0;
        assert!(matches!(g.density_at(below), Err(RcvError::Domain(_))));
    }

    #[test]
    fn uniform_moments_closed_form() {
        // GLD(0, 2, 1, 1) is Uniform(0, 1) shifted: Q(p) = p - 1/2.
        let g = GldFkml::new(0.5, 2.0, 1.0, 1.0).unwrap();
        let m = g.moments();
        assert!(close(m.mean.unwrap(), 0.5, 1e-12));
        assert!(close(m.variance.unwrap(), 1.0 / 12.0, 1e-12));
        assert!(m.mu3.unwrap().abs() < 1e-12);
        assert!(close(m.mu4.unwrap(), 1.0 / 80.0, 1e-12));
    }

    #[test]
    fn logistic_limit_moments() {
        // Logistic(0, 1): variance pi^2/3, kurtosis 4.2.
        let g = GldFkml::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let m = g.moments();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(m.mean.unwrap().abs() < 1e-12);
        assert!(close(m.variance.unwrap(), pi2 / 3.0, 1e-9));
        assert!(m.mu3.unwrap().abs() < 1e-9);
        assert!(close(m.kurtosis().unwrap(), 4.2, 1e-8));
    }

    #[test]
    fn moments_continuous_across_quadrature_switch() {
        let below = standardized_moments(0.5, CLOSED_FORM_MIN_SHAPE * 0.999);
        let above = standardized_moments(0.5, CLOSED_FORM_MIN_SHAPE * 1.001);
        assert!(close(below.variance.unwrap(), above.variance.unwrap(), 1e-4));
        assert!(close(below.mu4.unwrap(), above.mu4.unwrap(), 1e-3));
    }

    #[test]
    fn near_zero_shape_moments_match_reference() {
        // Central moments of orders 2..4 from the beta-function sums in
        // 250-digit arithmetic.
        let cases = [
            ((0.0, 0.0), [3.2898681336964529, 0.0, 45.457575815867804]),
            ((0.01, -0.24), [6.106476621800563, 42.196784455649714, 5380.6007042400669]),
            ((-0.245, 0.0), [6.294108722378434, -46.27001269278558, 11715.642586072357]),
            ((0.005, -0.2), [5.2960133201904824, 21.072401479811288, 620.29493055176975]),
        ];
        for ((a, b), want) in cases {
            let m = standardized_moments(a, b);
            let got = [m.variance.unwrap(), m.mu3.unwrap(), m.mu4.unwrap()];
            for k in 0..3 {
                assert!(close(got[k], want[k], 1e-9) || (got[k] - want[k]).abs() < 1e-12, "({a}, {b}) {k}: {got:?}");
            }
        }
    }

    #[test]
    fn moment_existence_markers() {
        let g = GldFkml::new(0.0, 1.0, 0.5, -0.4).unwrap();
        let m = g.moments();
        assert!(m.mean.is_some());
        assert!(m.variance.is_some());
        assert!(m.mu3.is_none());
        assert!(m.mu4.is_none());
    }

    fn assert_roundtrip(l: (f64, f64, f64, f64)) {
        let g = GldFkml::new(l.0, l.1, l.2, l.3).unwrap();
        let target = g.moments();
        let fit = fit_moments(&target).unwrap();
        let got = fit.moments();
        assert!(close(got.mean.unwrap(), target.mean.unwrap(), 1e-6) || (got.mean.unwrap() - target.mean.unwrap()).abs() < 1e-9);
        assert!(close(got.variance.unwrap(), target.variance.unwrap(), 1e-6));
        assert!((got.mu3.unwrap() - target.mu3.unwrap()).abs() <= 1e-6 * target.variance.unwrap().powf(1.5));
        assert!(close(got.mu4.unwrap(), target.mu4.unwrap(), 1e-6));
    }

    #[test]
    fn fit_roundtrips() {
        assert_roundtrip((0.0, 1.0, 0.1, 0.1));
        assert_roundtrip((2.0, 0.5, 0.2, 0.4));
        assert_roundtrip((0.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn fit_uniform_moments_gives_uniform_member() {
        let m = MomentSet {
            mean: Some(0.5),
            variance: Some(1.0 / 12.0),
            mu3: Some(0.0),
            mu4: Some(1.8 / 144.0),
        };
        let g = fit_moments(&m).unwrap();
        assert!((g.lambda3 - 1.0).abs() < 1e-6 && (g.lambda4 - 1.0).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn symmetric_input_gives_symmetric_shapes() {
        let m = MomentSet {
            mean: Some(0.0),
            variance: Some(1.0),
            mu3: Some(0.0),
            mu4: Some(3.0),
        };
        let g = fit_moments(&m).unwrap();
        assert!((g.lambda3 - g.lambda4).abs() < 1e-6);
        // Normal approximation: l3 = l4 ~ 0.1349.
        assert!((g.lambda3 - 0.1349).abs() < 1e-3, "{g:?}");
    }

    #[test]
    fn heavy_skew_fit_stays_on_the_small_shape_branch() {
        // Log-normal-like targets beyond the reachable region: the fit must
        // settle near a heavy right tail, not on a large-shape branch.
        let m = MomentSet {
            mean: Some(1.6),
            variance: Some(4.0),
            mu3: Some(4.83 * 8.0),
            mu4: Some(41.3 * 16.0),
        };
        let g = fit_moments(&m).unwrap();
        assert!(g.lambda4 < 0.0 && g.lambda4 > -0.25, "{g:?}");
        let fitted = g.moments();
        assert!(close(fitted.variance.unwrap(), 4.0, 1e-9));
        assert!(close(fitted.mean.unwrap(), 1.6, 1e-9));
    }

    #[test]
    fn pareto_like_targets_fit_exactly() {
        let d = GldFkml::new(0.0, 1.0, 0.4, -0.1).unwrap();
        let g = fit_moments(&d.moments()).unwrap();
        assert!((g.lambda3 - 0.4).abs() < 1e-6 && (g.lambda4 + 0.1).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn unattainable_kurtosis_fails() {
        let m = MomentSet {
            mean: Some(0.0),
            variance: Some(1.0),
            mu3: Some(0.0),
            mu4: Some(1.0),
        };
        assert!(matches!(fit_moments(&m), Err(RcvError::FitFailure(_))));
    }
}
