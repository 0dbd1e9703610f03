//! Shared fixtures for the criterion benchmarks.

use rcv_core::{DistributionSpec, Sample};

/// A reproducible sample of size `n` from the family described by `spec`
/// (e.g. `"lnorm(0,1)"`).
pub fn fixture(spec: &str, n: usize) -> Sample {
    let dist: DistributionSpec = spec.parse().expect("valid distribution spec");
    dist.sample(n, 20_240_601).expect("sample generation")
}
