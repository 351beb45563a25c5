use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsvrg::experiments::{
    exit_code, run_centroid_bench, run_check_geometry, run_params_report, run_pca_eigengap,
    ExperimentConfig, EXIT_CONFIG, EXIT_SUITE_FAILED,
};
use rsvrg::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rsvrg",
    version,
    about = "Riemannian SVRG experiments on the sphere and the SPD cone"
)]
struct Cli {
    /// Root seed; every random draw of the run is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat TOML file with `version = 1`; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Epochs to double accuracy versus eigengap on leading-eigenvector instances.
    PcaEigengap(PcaArgs),
    /// RSVRG, RGD and RSGD on Karcher-mean instances at equal IFO budget.
    CentroidBench(CentroidArgs),
    /// Randomized checks of exp/log, transport, the triangle bound and gradients.
    CheckGeometry(GeometryArgs),
    /// Step sizes and loop lengths prescribed by the convergence theorems.
    ParamsReport(ParamsArgs),
}

#[derive(Args)]
struct PcaArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Inner-loop length (default 10·n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct CentroidArgs {
    #[arg(long)]
    centroid_d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    qs: Option<Vec<f64>>,
    #[arg(long)]
    budget_factor: Option<usize>,
    #[arg(long)]
    rsvrg_eta: Option<f64>,
    #[arg(long)]
    rsvrg_m: Option<usize>,
    #[arg(long)]
    rgd_eta: Option<f64>,
    /// sqrt-horizon, decaying or constant.
    #[arg(long)]
    rsgd_schedule: Option<String>,
    #[arg(long)]
    rsgd_eta: Option<f64>,
    #[arg(long)]
    rsgd_decay: Option<f64>,
    /// epoch or step.
    #[arg(long)]
    granularity: Option<String>,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sphere_dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    spd_dims: Option<Vec<usize>>,
    #[arg(long)]
    fd_trials: Option<usize>,
    /// Scale every transported vector by 1 + this (self-test of the checks).
    #[arg(long)]
    transport_perturbation: Option<f64>,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ls: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    zetas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    param_ns: Option<Vec<usize>>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
}

macro_rules! overlay {
    ($cfg:expr, $args:expr, $($field:ident),+) => {
        {
            $( if let Some(v) = $args.$field.clone() { $cfg.$field = v; } )+
        }
    };
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    overlay!(cfg, cli, seed, out_dir, threads);
    match &cli.command {
        Command::PcaEigengap(a) => overlay!(cfg, a, d, n, deltas, epochs, eta, m, window),
        Command::CentroidBench(a) => overlay!(
            cfg,
            a,
            centroid_d,
            ns,
            qs,
            budget_factor,
            rsvrg_eta,
            rsvrg_m,
            rgd_eta,
            rsgd_schedule,
            rsgd_eta,
            rsgd_decay,
            granularity
        ),
        Command::CheckGeometry(a) => {
            overlay!(
                cfg,
                a,
                samples,
                sphere_dims,
                spd_dims,
                fd_trials,
                transport_perturbation
            )
        }
        Command::ParamsReport(a) => {
            overlay!(cfg, a, mus, ls, zetas, taus, param_ns, alpha1, alpha2, mu0, nu)
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::PcaEigengap(_) => {
            let rep = run_pca_eigengap(&cfg)?;
            for alg in ["rsvrg", "rsvrg-retraction"] {
                println!(
                    "{alg}: spearman(1/delta, epochs_to_double) = {}, r^2 = {}",
                    fmt_opt(rep.spearman(alg)),
                    fmt_opt(rep.r_squared(alg))
                );
            }
        }
        Command::CentroidBench(_) => {
            let rep = run_centroid_bench(&cfg)?;
            for c in &rep.cells {
                match c.f_star {
                    None => println!("N={} Q={}: reference optimum did not converge", c.n, c.q),
                    Some(_) => {
                        let finals: Vec<String> = c
                            .traces
                            .iter()
                            .map(|t| {
                                format!(
                                    "{} {:.3e}",
                                    t.algorithm,
                                    t.points.last().map_or(f64::NAN, |p| p.1)
                                )
                            })
                            .collect();
                        println!("N={} Q={}: final gaps {}", c.n, c.q, finals.join(", "));
                    }
                }
            }
        }
        Command::CheckGeometry(_) => {
            let rep = run_check_geometry(&cfg)?;
            for s in &rep.suites {
                println!(
                    "{:<20} {:<6} d={:<4} worst {:.3e} (tol {:.0e}) {}",
                    s.suite,
                    s.manifold,
                    s.dim,
                    s.worst_residual,
                    s.tolerance,
                    if s.passed() { "ok" } else { "FAIL" }
                );
            }
            if !rep.all_passed() {
                return Ok(EXIT_SUITE_FAILED);
            }
        }
        Command::ParamsReport(_) => {
            let rep = run_params_report(&cfg)?;
            println!("{} rows written", rep.rows.len());
        }
    }
    println!("outputs in {}", cfg.out_dir.display());
    Ok(0)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.3}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, Error::Io(_)) {
                EXIT_CONFIG
            } else {
                exit_code(&e)
            };
            ExitCode::from(code as u8)
        }
    }
}
