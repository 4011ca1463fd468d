//! From energies and error bounds to a certified approximation-ratio bound.

mod fraction;
mod pipeline;
mod scan;

pub use fraction::{
    check_min_condition, omega_fraction, omega_fraction_grid, omega_fraction_min, FractionMin, MinCondition, OmegaCounts,
    VERTICES,
};
pub use pipeline::{
    certify_ratio, eligible, filter_with_global_bound, local_corrected, refine_with_local_bound, BoundMode, Candidate,
    CertEntry, CertifyParams, ClassMin, ClassMinima, FilterOutcome, RatioCertificate,
};
pub use scan::{optimize_t_alpha, scan_t_alpha, write_scan_entries_csv, Optimum, ScanEntry, ScanSpec};

/// Threshold used by the global filter at the reference operating point.
pub const DEFAULT_THRESHOLD: f64 = 0.7020;
