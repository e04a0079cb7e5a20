//! Randomness certification for sequences of measured polarization angles:
//! histograms, ordinal-pattern (permutation entropy) iid tests, min-entropy
//! estimation, and shuffle-based sanity checks.
//!
//! Angles are degrees in [0, 90]. All procedures are deterministic: anything
//! stochastic (shuffles) takes an explicit seed.

mod circular;
mod entropy;
mod gof;
mod histogram;
mod ordinal;
mod sequence;
mod shuffle;

pub use circular::circular_std_deg;
pub use entropy::{min_entropy_mcv, MinEntropyReport};
pub use gof::{
    chi2_against, chi2_uniform, kolmogorov_sf, ks_exponential_fit, ks_one_sample, ks_two_sample,
    GofResult, KsResult,
};
pub use histogram::histogram;
pub use ordinal::{
    ordinal_encode, pe_battery, pe_test, OrdinalConfig, PeBatteryRow, PeTestReport, PE_THRESHOLDS,
};
pub use sequence::{parse_theta_csv, read_theta_csv, SequenceMeta, ThetaSequence};
pub use shuffle::{shuffle_iid_check, SequenceStatistic, ShuffleCheck, DEFAULT_STATISTICS};
