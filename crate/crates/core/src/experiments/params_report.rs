//! Tabulates the step size, inner-loop length and epoch count prescribed by
//! the convergence theorems over a grid of problem constants.

use crate::error::{Error, Result};
use crate::solvers::{
    corollary1_params, theorem1_alpha, theorem2_params, theorem4_params, TheoremParams,
};

use super::config::ExperimentConfig;
use super::csv::{Cell, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct ParamsRow {
    /// `strongly-convex`, `nonconvex` or `gradient-dominated`.
    pub setting: &'static str,
    pub mu: f64,
    pub l: f64,
    pub zeta: f64,
    pub tau: Option<f64>,
    pub n: usize,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub m: Option<usize>,
    pub s: Option<usize>,
    /// `ok`, `infeasible` or `invalid`.
    pub status: &'static str,
    pub note: String,
}

impl ParamsRow {
    fn blank(
        setting: &'static str,
        mu: f64,
        l: f64,
        zeta: f64,
        tau: Option<f64>,
        n: usize,
    ) -> Self {
        ParamsRow {
            setting,
            mu,
            l,
            zeta,
            tau,
            n,
            alpha: None,
            eta: None,
            m: None,
            s: None,
            status: "ok",
            note: String::new(),
        }
    }

    fn failed(mut self, e: Error) -> Self {
        self.status = match e {
            Error::ParameterInfeasible(_) => "infeasible",
            _ => "invalid",
        };
        self.note = e.to_string();
        self
    }
}

#[derive(Clone, Debug)]
pub struct ParamsReport {
    pub rows: Vec<ParamsRow>,
}

impl ParamsReport {
    pub fn find(&self, setting: &str, mu: f64, l: f64, zeta: f64) -> Option<&ParamsRow> {
        self.rows
            .iter()
            .find(|r| r.setting == setting && r.mu == mu && r.l == l && r.zeta == zeta)
    }
}

fn rows_for(cfg: &ExperimentConfig, mu: f64, l: f64, zeta: f64, n: usize) -> Vec<ParamsRow> {
    let params = match TheoremParams::new(mu, l, zeta) {
        Ok(p) => p,
        Err(e) => {
            let mut out = vec![
                ParamsRow::blank("strongly-convex", mu, l, zeta, None, n)
                    .failed(Error::InvalidArgument(e.to_string())),
                ParamsRow::blank("nonconvex", mu, l, zeta, None, n)
                    .failed(Error::InvalidArgument(e.to_string())),
            ];
            for &tau in &cfg.taus {
                out.push(
                    ParamsRow::blank("gradient-dominated", mu, l, zeta, Some(tau), n)
                        .failed(Error::InvalidArgument(e.to_string())),
                );
            }
            return out;
        }
    };
    let mut out = Vec::new();

    let mut sc = ParamsRow::blank("strongly-convex", mu, l, zeta, None, n);
    let (eta, m) = corollary1_params(&params);
    sc = match theorem1_alpha(&params, eta, m) {
        Ok(alpha) => ParamsRow {
            alpha: Some(alpha),
            eta: Some(eta),
            m: Some(m),
            ..sc
        },
        Err(e) => sc.failed(e),
    };
    out.push(sc);

    let nc = ParamsRow::blank("nonconvex", mu, l, zeta, None, n);
    out.push(
        match theorem2_params(&params, n, cfg.alpha1, cfg.alpha2, cfg.mu0) {
            Ok((eta, m)) => ParamsRow {
                eta: Some(eta),
                m: Some(m),
                ..nc
            },
            Err(e) => nc.failed(e),
        },
    );

    for &tau in &cfg.taus {
        let gd = ParamsRow::blank("gradient-dominated", mu, l, zeta, Some(tau), n);
        let res = params
            .with_tau(tau)
            .and_then(|p| theorem4_params(&p, n, cfg.mu0, cfg.nu));
        out.push(match res {
            Ok(t) => ParamsRow {
                eta: Some(t.eta),
                m: Some(t.m),
                s: Some(t.s),
                ..gd
            },
            Err(e) => gd.failed(e),
        });
    }
    out
}

/// Writes `params_report.csv`: one row per setting and combination of constants.
pub fn run_params_report(cfg: &ExperimentConfig) -> Result<ParamsReport> {
    cfg.validate_params()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut rows = Vec::new();
    for &mu in &cfg.mus {
        for &l in &cfg.ls {
            for &zeta in &cfg.zetas {
                for &n in &cfg.param_ns {
                    rows.extend(rows_for(cfg, mu, l, zeta, n));
                }
            }
        }
    }
    let mut table = Table::new(&[
        "setting", "mu", "L", "zeta", "tau", "n", "alpha", "eta", "m", "S", "status", "note",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::from(r.setting),
            Cell::from(r.mu),
            Cell::from(r.l),
            Cell::from(r.zeta),
            Cell::opt(r.tau),
            Cell::from(r.n),
            Cell::opt(r.alpha),
            Cell::opt(r.eta),
            r.m.map_or(Cell::Missing, Cell::from),
            r.s.map_or(Cell::Missing, Cell::from),
            Cell::from(r.status),
            Cell::Text(r.note.clone()),
        ]);
    }
    table.write(&cfg.out_dir.join("params_report.csv"))?;
    cfg.save_resolved("params_report")?;
    Ok(ParamsReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            out_dir: tempfile::tempdir().unwrap().keep(),
            ..Default::default()
        }
    }

    #[test]
    fn default_grid_rows() {
        let rep = run_params_report(&cfg()).unwrap();
        // 8 combinations, three settings each (one tau)
        assert_eq!(rep.rows.len(), 24);
        for r in rep.rows.iter().filter(|r| r.setting == "strongly-convex") {
            assert_eq!(r.status, "ok");
            assert!(r.alpha.unwrap() <= 0.5);
        }
    }

    #[test]
    fn mu_above_l_is_flagged() {
        let c = ExperimentConfig {
            mus: vec![2.0],
            ls: vec![1.0],
            zetas: vec![1.0],
            ..cfg()
        };
        let rep = run_params_report(&c).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.status == "invalid" && r.eta.is_none()));
    }

    #[test]
    fn zeta_changes_inner_length() {
        let c = ExperimentConfig {
            mus: vec![0.1],
            ls: vec![1.0],
            zetas: vec![1.0, 2.0],
            ..cfg()
        };
        let rep = run_params_report(&c).unwrap();
        let m1 = rep.find("nonconvex", 0.1, 1.0, 1.0).unwrap().m.unwrap() as f64;
        let m2 = rep.find("nonconvex", 0.1, 1.0, 2.0).unwrap().m.unwrap() as f64;
        // m scales as zeta^(2 alpha2 - 1), which is 1 at alpha2 = 1/2
        assert!((m1 / m2 - 1.0).abs() < 1e-3);
    }
}
