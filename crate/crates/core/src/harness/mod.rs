//! Experiment orchestration: configuration, persisted artifacts, manifests
//! and the invariant verification suite.
//!
//! Every run writes its artifacts and a `manifest.json` listing them with
//! SHA-256 checksums into one output directory. Data files are a
//! deterministic function of the config; only the manifest's timestamps vary.

mod config;
mod manifest;
mod run;
mod verify;

pub use config::{ExperimentConfig, Overrides, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV, TOLERANCE_DEFAULTS};
pub use manifest::{check_manifest, sha256_hex, FileEntry, RunManifest, MANIFEST_FILE};
pub use run::{
    parse_rates_csv, rate_rows, rates_to_csv, report, run_bounds, run_rates, run_slopes, RateRow, SlopeEntry,
    SlopesFile, Summary, SummaryRow, RATES_HEADER,
};
pub use verify::{
    builtin_families, concavity_violation, duality_functions, run_verify, sandwich_violation, verify_suite,
    Status, VerifyEntry, VerifyReport, DUALITY_S,
};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::Domain(_) => EXIT_NUMERIC,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_CONFIG,
    }
}
