//! RSVRG, RGD and RSGD on synthetic Karcher-mean instances under a shared IFO budget.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::{gen_centroid_instance, FiniteSumProblem};
use crate::rng::derive_seed;
use crate::solvers::{
    estimate_sigma_sq, rgd, rsgd, rsvrg, RgdConfig, RsgdConfig, RsvrgConfig, StepSchedule,
    TraceRecord,
};
use crate::spd::SpdPoint;

use super::config::ExperimentConfig;
use super::csv::{Cell, Table};
use super::svg::{Mark, Plot};
use super::with_pool;

/// Algorithm label written in place of a trace when the reference optimum is unavailable.
pub const ORACLE_FAILED: &str = "oracle-not-converged";

#[derive(Clone, Debug)]
pub struct AlgorithmTrace {
    pub algorithm: &'static str,
    /// `(ifo_calls, objective_gap)`.
    pub points: Vec<(u64, f64)>,
}

impl AlgorithmTrace {
    fn from_records(algorithm: &'static str, records: &[TraceRecord]) -> Self {
        AlgorithmTrace {
            algorithm,
            points: records
                .iter()
                .map(|r| (r.ifo_calls, r.objective_gap))
                .collect(),
        }
    }

    pub fn ifo_to_reach(&self, target: f64) -> Option<u64> {
        self.points.iter().find(|p| p.1 <= target).map(|p| p.0)
    }
}

#[derive(Clone, Debug)]
pub struct CentroidCell {
    pub n: usize,
    pub q: f64,
    /// Reference optimum; `None` when the oracle did not converge.
    pub f_star: Option<f64>,
    pub traces: Vec<AlgorithmTrace>,
}

impl CentroidCell {
    pub fn trace(&self, algorithm: &str) -> Option<&AlgorithmTrace> {
        self.traces.iter().find(|t| t.algorithm == algorithm)
    }
}

#[derive(Clone, Debug)]
pub struct CentroidBenchReport {
    pub cells: Vec<CentroidCell>,
}

/// Instance seed for grid cell `(N, Q)`; independent of the grid's other cells.
pub fn cell_seed(seed: u64, n: usize, q: f64) -> u64 {
    derive_seed(derive_seed(seed, n as u64), q.to_bits())
}

fn rsgd_schedule<P: FiniteSumProblem<M = crate::spd::Spd>>(
    cfg: &ExperimentConfig,
    inst: &P,
    x0: &SpdPoint,
    gap0: f64,
) -> Result<StepSchedule> {
    let n = inst.n() as f64;
    let eta0 = if cfg.rsgd_eta > 0.0 {
        cfg.rsgd_eta
    } else {
        1.0 / (2.0 * n)
    };
    match cfg.rsgd_schedule.as_str() {
        "sqrt-horizon" => {
            StepSchedule::horizon_constant(gap0, inst.smoothness(), estimate_sigma_sq(inst, x0)?)
        }
        "decaying" => Ok(StepSchedule::Decaying {
            eta0,
            decay: cfg.rsgd_decay,
        }),
        "constant" => Ok(StepSchedule::Constant(eta0)),
        other => Err(Error::Config(format!("unknown rsgd_schedule `{other}`"))),
    }
}

fn run_cell(cfg: &ExperimentConfig, n: usize, q: f64) -> Result<CentroidCell> {
    let seed = cell_seed(cfg.seed, n, q);
    let inst = gen_centroid_instance(cfg.centroid_d, n, q, seed)?;
    let f_star = match inst.ground_truth() {
        Ok(o) => o.optimum_value,
        Err(Error::OracleNotConverged { .. }) => {
            return Ok(CentroidCell {
                n,
                q,
                f_star: None,
                traces: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let x0 = inst.arithmetic_mean()?;
    let gap0 = inst.value(&x0)? - f_star;
    let budget = cfg.budget_factor * n;

    let m = if cfg.rsvrg_m > 0 { cfg.rsvrg_m } else { n };
    let eta = if cfg.rsvrg_eta > 0.0 {
        cfg.rsvrg_eta
    } else {
        1.0 / (100.0 * n as f64)
    };
    let mut rc = RsvrgConfig::new(m, eta, (budget / (n + 2 * m)).max(1));
    rc.seed = derive_seed(seed, 1);
    rc.granularity = cfg.granularity()?;
    rc.f_star = Some(f_star);
    rc.track_grad = false;
    let t_rsvrg = rsvrg(&inst, &x0, &rc)?;

    let rgd_eta = if cfg.rgd_eta > 0.0 {
        cfg.rgd_eta
    } else {
        1.0 / inst.smoothness()
    };
    let mut gc = RgdConfig::new(rgd_eta, (budget / n).max(1));
    gc.f_star = Some(f_star);
    gc.track_grad = false;
    let t_rgd = rgd(&inst, &x0, &gc)?;

    let mut sc = RsgdConfig::new(
        rsgd_schedule(cfg, &inst, &x0, gap0)?,
        budget,
        derive_seed(seed, 2),
    );
    sc.record_every = n;
    sc.f_star = Some(f_star);
    sc.track_grad = false;
    let t_rsgd = rsgd(&inst, &x0, &sc)?;

    Ok(CentroidCell {
        n,
        q,
        f_star: Some(f_star),
        traces: vec![
            AlgorithmTrace::from_records("rgd", &t_rgd.records),
            AlgorithmTrace::from_records("rsgd", &t_rsgd.records),
            AlgorithmTrace::from_records("rsvrg", &t_rsvrg.records),
        ],
    })
}

/// Runs every `(N, Q)` cell and writes `centroid_bench.csv` plus one
/// `centroid_N{N}_Q{Q}.svg` per cell with a reference optimum.
pub fn run_centroid_bench(cfg: &ExperimentConfig) -> Result<CentroidBenchReport> {
    cfg.validate_centroid()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let grid: Vec<(usize, f64)> = cfg
        .ns
        .iter()
        .flat_map(|&n| cfg.qs.iter().map(move |&q| (n, q)))
        .collect();
    let mut cells = with_pool(cfg.threads, || {
        grid.par_iter()
            .map(|&(n, q)| run_cell(cfg, n, q))
            .collect::<Result<Vec<_>>>()
    })??;
    cells.sort_by(|a, b| a.n.cmp(&b.n).then(a.q.total_cmp(&b.q)));

    let mut table = Table::new(&["N", "Q", "algorithm", "ifo_calls", "objective_gap"]);
    for cell in &cells {
        if cell.f_star.is_none() {
            table.push(vec![
                Cell::from(cell.n),
                Cell::from(cell.q),
                Cell::from(ORACLE_FAILED),
                Cell::Missing,
                Cell::Missing,
            ]);
            continue;
        }
        let mut plot = Plot::new(
            &format!("Karcher mean, N = {}, Q = {}", cell.n, cell.q),
            "IFO calls",
            "f(x) - f*",
        )
        .log_y();
        for t in &cell.traces {
            for &(ifo, gap) in &t.points {
                table.push(vec![
                    Cell::from(cell.n),
                    Cell::from(cell.q),
                    Cell::from(t.algorithm),
                    Cell::from(ifo),
                    Cell::from(gap),
                ]);
            }
            plot.add(
                t.algorithm,
                Mark::Line,
                t.points.iter().map(|&(i, g)| (i as f64, g)).collect(),
            );
        }
        plot.write(
            &cfg.out_dir
                .join(format!("centroid_N{}_Q{}.svg", cell.n, cell.q)),
        )?;
    }
    table.write(&cfg.out_dir.join("centroid_bench.csv"))?;
    cfg.save_resolved("centroid_bench")?;
    Ok(CentroidBenchReport { cells })
}
