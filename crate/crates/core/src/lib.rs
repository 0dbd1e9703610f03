//! Robust, quantile-based relative dispersion: the coefficient of
//! variation (CV) alongside `RCV_Q = 0.75·IQR/median` and
//! `RCV_M = 1.4826·MAD/median`.
//!
//! The crate provides population values for common families, sample
//! estimators, influence functions, asymptotic variances, eleven interval
//! procedures and a Monte-Carlo coverage harness.
//!
//! ```
//! use rcv_core::{DistributionSpec, true_measures, rasd, Measure};
//!
//! let exp: DistributionSpec = "exp(1)".parse().unwrap();
//! let t = true_measures(&exp).unwrap();
//! assert!((t.rcv_q - 1.189).abs() < 1e-3);
//! let r = rasd(Measure::RcvM, &exp).unwrap().unwrap();
//! assert!((r - 0.950).abs() < 1e-3);
//! ```

pub mod asymptotic;
pub mod coverage;
pub mod distributions;
pub mod error;
pub mod gld;
pub mod influence;
pub mod intervals;
pub mod io;
pub mod numeric;
pub mod robust;
pub mod seeding;
pub mod special;

pub use asymptotic::{asv, asv_cv, asv_quadrature_oracle, if_expectation, asv_rcv_m, asv_rcv_q, mad_theory, rasd, MadTheory};
pub use coverage::{emit_results, run_coverage, run_coverage_with_progress, CoverageRow, OutputFormat, SimulationConfig};
pub use distributions::{true_mad, true_measures, DistributionSpec, MomentSet, TrueMeasures, IQR_SCALE, MAD_SCALE};
pub use error::{RcvError, Result};
pub use gld::{fit_moments, fit_sample, GldFkml};
pub use influence::{if_curve, if_numeric_check, FunctionalKind, IfCurvePoint, InfluenceModel};
pub use intervals::{
    ci_ratio_two_sample, compute_interval, Combine, ConfidenceInterval, IntervalOptions, Method, DEFAULT_BOOT_B,
    DEFAULT_LEVEL,
};
pub use io::{parse_sample_csv, read_sample_csv};
pub use robust::{
    bandwidth_qor, estimate, hf8_quantile, quantile_density_estimate, sample_mad, BandwidthReference,
    DispersionEstimate, Measure, Sample,
};
