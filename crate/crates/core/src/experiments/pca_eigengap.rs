//! Epochs-to-double versus eigengap for RSVRG on leading-eigenvector instances.
//!
//! For each gap `δ` a spiked instance is generated from the run seed and both
//! update rules (exponential map, retraction) are run from the same random
//! start. The relative error `(f(x̃ˢ) − f*)/|f*|` is cut into windows of
//! `window` epochs, and each window yields the number of epochs needed to
//! halve the error at the rate observed in that window.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::Manifold;
use crate::problems::gen_pca_instance;
use crate::rng::{derive_seed, seeded};
use crate::solvers::{rsvrg, RsvrgConfig, UpdateRule};

use super::config::ExperimentConfig;
use super::csv::{Cell, Table};
use super::stats::{linear_fit, median, spearman};
use super::svg::{Mark, Plot};
use super::{algorithm_name, with_pool};

/// Relative errors at or below this are treated as converged: windows that
/// end there say nothing about the rate.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Halving-time estimate from one window of a geometric decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingEstimate {
    pub window_index: usize,
    /// Relative error at the end of the window.
    pub relative_error: f64,
    /// `window·ln 2 / ln(e_start/e_end)`; `None` if the window did not contract
    /// or ended at the floor.
    pub epochs_to_double: Option<f64>,
}

impl DoublingEstimate {
    /// Cuts `errors` (one entry per epoch, starting at epoch 0) into windows.
    pub fn from_errors(errors: &[f64], window: usize) -> Vec<DoublingEstimate> {
        (0..(errors.len().saturating_sub(1)) / window)
            .map(|w| {
                let start = errors[w * window];
                let end = errors[(w + 1) * window];
                let contracting = end > ERROR_FLOOR && start > end && end.is_finite();
                DoublingEstimate {
                    window_index: w,
                    relative_error: end,
                    epochs_to_double: contracting
                        .then(|| window as f64 * std::f64::consts::LN_2 / (start / end).ln()),
                }
            })
            .collect()
    }

    /// Median of the finite estimates over the second half of the windows,
    /// after the start-up transient.
    pub fn aggregate(estimates: &[DoublingEstimate]) -> Option<f64> {
        let late: Vec<f64> = estimates[estimates.len() / 2..]
            .iter()
            .filter_map(|e| e.epochs_to_double)
            .collect();
        median(&late)
    }
}

#[derive(Clone, Debug)]
pub struct EigengapRun {
    pub delta: f64,
    pub algorithm: &'static str,
    pub errors: Vec<f64>,
    pub windows: Vec<DoublingEstimate>,
    pub epochs_to_double: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PcaEigengapReport {
    pub runs: Vec<EigengapRun>,
}

impl PcaEigengapReport {
    /// `(1/δ, epochs_to_double)` for one algorithm, skipping gaps without an estimate.
    pub fn points(&self, algorithm: &str) -> Vec<(f64, f64)> {
        self.runs
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .filter_map(|r| r.epochs_to_double.map(|e| (1.0 / r.delta, e)))
            .collect()
    }

    pub fn spearman(&self, algorithm: &str) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self.points(algorithm).into_iter().unzip();
        spearman(&x, &y)
    }

    pub fn r_squared(&self, algorithm: &str) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self.points(algorithm).into_iter().unzip();
        linear_fit(&x, &y).map(|f| f.2)
    }
}

fn run_one(cfg: &ExperimentConfig, delta: f64, update: UpdateRule) -> Result<EigengapRun> {
    let inst = gen_pca_instance(cfg.d, cfg.n, delta, cfg.seed)?;
    let f_star = inst.ground_truth()?.optimum_value;
    let x0 = inst
        .sphere()
        .random_point(&mut seeded(derive_seed(cfg.seed, 1)));
    let mut rc = RsvrgConfig::new(cfg.inner_len(), cfg.eta, cfg.epochs);
    rc.seed = derive_seed(cfg.seed, 2);
    rc.update = update;
    rc.f_star = Some(f_star);
    rc.track_grad = false;
    let trace = rsvrg(&inst, &x0, &rc)?;
    let errors: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.objective_gap / f_star.abs())
        .collect();
    let windows = DoublingEstimate::from_errors(&errors, cfg.window);
    Ok(EigengapRun {
        delta,
        algorithm: algorithm_name("rsvrg", update),
        epochs_to_double: DoublingEstimate::aggregate(&windows),
        errors,
        windows,
    })
}

/// Runs the study and writes `pca_eigengap.csv`, `pca_eigengap_trace.csv`,
/// `pca_eigengap_summary.csv` and `pca_eigengap.svg` to the output directory.
pub fn run_pca_eigengap(cfg: &ExperimentConfig) -> Result<PcaEigengapReport> {
    cfg.validate_pca()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let cells: Vec<(f64, UpdateRule)> = cfg
        .deltas
        .iter()
        .flat_map(|&d| [(d, UpdateRule::Exp), (d, UpdateRule::Retraction)])
        .collect();
    let mut runs = with_pool(cfg.threads, || {
        cells
            .par_iter()
            .map(|&(delta, update)| run_one(cfg, delta, update))
            .collect::<Result<Vec<_>>>()
    })??;
    runs.sort_by(|a, b| {
        b.delta
            .total_cmp(&a.delta)
            .then(a.algorithm.cmp(b.algorithm))
    });

    let mut windows = Table::new(&[
        "delta",
        "epoch_window_index",
        "algorithm",
        "epochs_to_double",
        "relative_error",
    ]);
    let mut trace = Table::new(&["delta", "algorithm", "epoch", "relative_error"]);
    let mut summary = Table::new(&["delta", "inv_delta", "algorithm", "epochs_to_double"]);
    let mut plot = Plot::new(
        "RSVRG epochs to halve the error",
        "1/delta",
        "epochs to double accuracy",
    );
    for run in &runs {
        for w in &run.windows {
            windows.push(vec![
                Cell::from(run.delta),
                Cell::from(w.window_index),
                Cell::from(run.algorithm),
                Cell::opt(w.epochs_to_double),
                Cell::from(w.relative_error),
            ]);
        }
        for (epoch, e) in run.errors.iter().enumerate() {
            trace.push(vec![
                Cell::from(run.delta),
                Cell::from(run.algorithm),
                Cell::from(epoch),
                Cell::from(*e),
            ]);
        }
        summary.push(vec![
            Cell::from(run.delta),
            Cell::from(1.0 / run.delta),
            Cell::from(run.algorithm),
            Cell::opt(run.epochs_to_double),
        ]);
    }
    let n_windows = runs.first().map_or(0, |r| r.windows.len());
    for algorithm in ["rsvrg", "rsvrg-retraction"] {
        for w in 0..n_windows {
            let pts: Vec<(f64, f64)> = runs
                .iter()
                .filter(|r| r.algorithm == algorithm)
                .filter_map(|r| r.windows[w].epochs_to_double.map(|e| (1.0 / r.delta, e)))
                .collect();
            if !pts.is_empty() {
                plot.add(&format!("{algorithm} w{w}"), Mark::Points, pts);
            }
        }
    }
    windows.write(&cfg.out_dir.join("pca_eigengap.csv"))?;
    trace.write(&cfg.out_dir.join("pca_eigengap_trace.csv"))?;
    summary.write(&cfg.out_dir.join("pca_eigengap_summary.csv"))?;
    plot.write(&cfg.out_dir.join("pca_eigengap.svg"))?;
    cfg.save_resolved("pca_eigengap")?;
    Ok(PcaEigengapReport { runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_of_exact_geometric_decay() {
        // error halves every 3 epochs
        let errors: Vec<f64> = (0..=10).map(|k| 0.5f64.powf(k as f64 / 3.0)).collect();
        let est = DoublingEstimate::from_errors(&errors, 5);
        assert_eq!(est.len(), 2);
        for e in &est {
            assert!((e.epochs_to_double.unwrap() - 3.0).abs() < 1e-12);
        }
        assert!((DoublingEstimate::aggregate(&est).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stalled_and_floored_windows_are_empty() {
        let est = DoublingEstimate::from_errors(&[1.0, 1.0, 1e-20], 1);
        assert_eq!(est[0].epochs_to_double, None);
        assert_eq!(est[1].epochs_to_double, None);
        assert!(DoublingEstimate::aggregate(&est).is_none());
    }
}
