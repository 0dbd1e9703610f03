//! Special functions: normal and chi-square quantiles plus thin wrappers over
//! the gamma-family functions from `statrs`.

use std::f64::consts::SQRT_2;

use statrs::function::{beta, erf, gamma};

use crate::error::{RcvError, Result};
use crate::numeric::find_root;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    beta::ln_beta(a, b)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma::gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma::gamma_ur(a, x)
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / SQRT_2)
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * erf::erfc(z / SQRT_2)
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RcvError::Domain(format!("probability {p} not in (0, 1)")))
    }
}

/// Standard normal quantile Φ⁻¹(p).
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(normal_quantile_unchecked(p))
}

pub(crate) fn normal_quantile_unchecked(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    -SQRT_2 * erf::erfc_inv(2.0 * p)
}

pub fn chisq_pdf(nu: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = 0.5 * nu;
    if x == 0.0 {
        return match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        };
    }
    ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gamma(k)).exp()
}

pub fn chisq_cdf(nu: f64, x: f64) -> f64 {
    gamma_p(0.5 * nu, 0.5 * x)
}

/// Chi-square quantile: Wilson–Hilferty starting point, then a bracketed
/// root polish on the regularized incomplete gamma function.
pub fn chisq_quantile(nu: f64, p: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(RcvError::Domain(format!("degrees of freedom {nu} must be positive")));
    }
    check_probability(p)?;
    let z = normal_quantile_unchecked(p);
    let c = 2.0 / (9.0 * nu);
    let wh = nu * (1.0 - c + z * c.sqrt()).powi(3);
    let start = if wh > 0.0 { wh } else { nu * 1e-3 };
    let k = 0.5 * nu;
    // Residual in whichever tail is smaller keeps precision near 0 and 1.
    let objective = |x: f64| {
        if p <= 0.5 {
            gamma_p(k, 0.5 * x) - p
        } else {
            (1.0 - p) - gamma_q(k, 0.5 * x)
        }
    };
    let mut lo = start * 0.5;
    let mut hi = start * 2.0;
    let mut guard = 0;
    while objective(lo) > 0.0 {
        lo *= 0.1;
        guard += 1;
        if guard > 400 || lo < f64::MIN_POSITIVE {
            return Ok(0.0);
        }
    }
    guard = 0;
    while objective(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(RcvError::Numerical(format!(
                "chi-square quantile bracket failed for nu={nu}, p={p}"
            )));
        }
    }
    find_root(objective, lo, hi, 1e-13 * start.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_standard_constants() {
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.75).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-12);
        assert!((1.0 / normal_quantile(0.75).unwrap() - 1.4826).abs() < 1e-4);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn normal_quantile_inverts_cdf_in_tails() {
        for &p in &[1e-12, 1e-8, 1e-4, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-9] {
            let x = normal_quantile(p).unwrap();
            let back = if p < 0.5 { normal_cdf(x) } else { 1.0 - normal_sf(x) };
            assert!(((back - p) / p.min(1.0 - p)).abs() < 1e-8, "p={p}");
        }
    }

    #[test]
    fn normal_quantile_domain() {
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn chisq_two_df_is_exponential() {
        let q = chisq_quantile(2.0, 0.5).unwrap();
        assert!((q - 2.0 * std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn chisq_quantile_reference_values() {
        // qchisq(c(0.025, 0.975), 50)
        assert!((chisq_quantile(50.0, 0.025).unwrap() - 32.357_363_695_658_655).abs() < 1e-7);
        assert!((chisq_quantile(50.0, 0.975).unwrap() - 71.420_195_187_506_42).abs() < 1e-7);
        // qchisq(0.05, 1)
        assert!((chisq_quantile(1.0, 0.05).unwrap() - 0.003_932_140_000_019_52).abs() < 1e-12);
    }

    #[test]
    fn chisq_quantile_roundtrip() {
        for &nu in &[0.5, 1.0, 3.0, 10.0, 99.0, 999.0] {
            for &p in &[0.001, 0.025, 0.5, 0.975, 0.999] {
                let x = chisq_quantile(nu, p).unwrap();
                assert!((chisq_cdf(nu, x) - p).abs() < 1e-10, "nu={nu} p={p}");
            }
        }
    }

    #[test]
    fn chisq_domain_errors() {
        assert!(chisq_quantile(0.0, 0.5).is_err());
        assert!(chisq_quantile(3.0, 1.5).is_err());
    }
}
