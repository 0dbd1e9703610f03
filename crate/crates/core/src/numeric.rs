//! Numerical building blocks: adaptive Gauss–Kronrod quadrature and a
//! bracketing root finder.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{RcvError, Result};

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadConfig {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        resk += WGK[j] * s;
        // Gauss nodes sit at the odd Kronrod indices.
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let value = resk * half;
    let err = ((resk - resg) * half).abs();
    (value, err)
}

fn integrate_finite<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = kronrod15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Err(RcvError::Numerical(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            return Err(RcvError::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total}, error {total_err:e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval collapsed to machine resolution; accept what we have.
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated update drift.
    let intervals = heap.len();
    let (value, abs_error) = heap
        .into_iter()
        .fold((0.0, 0.0), |(s, e), seg| (s + seg.value, e + seg.error));
    Ok(QuadResult {
        value,
        abs_error,
        intervals,
    })
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Either limit may be infinite; half-infinite ranges are mapped onto
/// `[0, 1)` with `x = a + t / (1 - t)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    integrate_dyn(&f, a, b, cfg)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() {
        return Err(RcvError::Domain("NaN integration limit".into()));
    }
    if a > b {
        let r = integrate_dyn(f, b, a, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, cfg),
        (true, false) => {
            let g = |t: f64| {
                let u = 1.0 - t;
                let v = f(a + t / u) / (u * u);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            integrate_finite(&g, 0.0, 1.0, cfg)
        }
        (false, true) => {
            let g = |t: f64| {
                let u = 1.0 - t;
                let v = f(b - t / u) / (u * u);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            integrate_finite(&g, 0.0, 1.0, cfg)
        }
        (false, false) => {
            let half = QuadConfig {
                abs_tol: cfg.abs_tol * 0.5,
                ..cfg
            };
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, half)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, half)?;
            Ok(QuadResult {
                value: left.value + right.value,
                abs_error: left.abs_error + right.abs_error,
                intervals: left.intervals + right.intervals,
            })
        }
    }
}

/// Integrates over `[a, b]` split at the given interior break points, which
/// is how integrands with jumps or kinks are handled accurately.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: QuadConfig,
) -> Result<QuadResult> {
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut knots = Vec::with_capacity(points.len() + 2);
    knots.push(a);
    knots.extend(points);
    knots.push(b);
    let pieces = (knots.len() - 1) as f64;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces,
        ..cfg
    };
    let mut out = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        intervals: 0,
    };
    for w in knots.windows(2) {
        let r = integrate(&f, w[0], w[1], piece_cfg)?;
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.intervals += r.intervals;
    }
    Ok(out)
}

/// Brent's bracketing root finder (bisection, secant and inverse quadratic
/// steps). Requires `f(lo)` and `f(hi)` to differ in sign; converges to an
/// absolute tolerance `xtol` in the abscissa.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(RcvError::Numerical(format!(
            "root not bracketed: f({lo}) = {fa}, f({hi}) = {fb}"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(RcvError::Numerical(format!("objective is NaN at {b}")));
        }
    }
    Err(RcvError::Numerical(format!(
        "root finder did not converge in [{lo}, {hi}]"
    )))
}

/// Bisection for a monotone non-decreasing `f` on `[lo, hi]`, returning the
/// point where `f` crosses `target`. Used where `f` may be flat or have jumps
/// (mixture cdfs) and Brent's interpolation steps buy nothing.
pub fn bisect_monotone<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    for _ in 0..400 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
