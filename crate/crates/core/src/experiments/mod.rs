//! Reproducible desk-scale studies behind the `rsvrg` binary.
//!
//! Each `run_*` function takes the flat [`ExperimentConfig`], runs its grid
//! on a rayon pool of `threads` workers, sorts results by their grid key and
//! writes CSV (numbers as `%.12e`) and SVG files to `out_dir`. Because every
//! cell derives its randomness from the run seed and its own grid key, the
//! output files do not depend on the thread count.

use crate::error::{Error, Result};
use crate::solvers::UpdateRule;

pub mod centroid_bench;
pub mod check_geometry;
pub mod config;
pub mod csv;
pub mod params_report;
pub mod pca_eigengap;
pub mod rsgd_rate;
pub mod stats;
pub mod svg;

pub use centroid_bench::{run_centroid_bench, CentroidBenchReport, CentroidCell};
pub use check_geometry::{run_check_geometry, GeometryReport, PerturbedTransport, SuiteResult};
pub use config::{ExperimentConfig, CONFIG_VERSION};
pub use params_report::{run_params_report, ParamsReport, ParamsRow};
pub use pca_eigengap::{run_pca_eigengap, DoublingEstimate, PcaEigengapReport};
pub use rsgd_rate::{rate_slope, rsgd_rate_study, RatePoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Process exit code for an error escaping an experiment.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::ParameterInfeasible(_)
        | Error::Io(_) => EXIT_CONFIG,
        Error::NumericalAbort { .. }
        | Error::Domain(_)
        | Error::NotPositiveDefinite { .. }
        | Error::OracleNotConverged { .. }
        | Error::IndexOutOfRange { .. } => EXIT_NUMERICAL,
    }
}

pub(crate) fn algorithm_name(base: &'static str, update: UpdateRule) -> &'static str {
    match (base, update) {
        ("rsvrg", UpdateRule::Retraction) => "rsvrg-retraction",
        (b, _) => b,
    }
}

/// Runs `f` inside a dedicated pool with `threads` workers.
pub(crate) fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a pool of {threads} threads: {e}")))?;
    Ok(pool.install(f))
}
