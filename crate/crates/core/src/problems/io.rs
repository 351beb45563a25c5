//! Plain-text instance container.
//!
//! ```text
//! rsvrg-instance 1
//! kind pca
//! d 3
//! n 4
//! seed 7
//! delta 1e-2
//! matrix z 3 4
//! <one row per line, space separated>
//! ```
//!
//! Centroid files use `kind centroid`, a `cond_q` header and one
//! `matrix a<i> d d` block per input matrix. Numbers are written with Rust's
//! shortest round-trip formatting, so reading a file back reproduces the
//! instance bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problems::{CentroidInstance, PcaInstance};
use crate::spd::SpdPoint;

const MAGIC: &str = "rsvrg-instance";
const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub enum StoredInstance {
    Pca(PcaInstance),
    Centroid(CentroidInstance),
}

fn write_seed<W: Write>(w: &mut W, seed: Option<u64>) -> Result<()> {
    match seed {
        Some(s) => writeln!(w, "seed {s}")?,
        None => writeln!(w, "seed none")?,
    }
    Ok(())
}

fn write_matrix<W: Write>(w: &mut W, name: &str, m: &DMatrix<f64>) -> Result<()> {
    writeln!(w, "matrix {name} {} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn write_pca<W: Write>(w: &mut W, inst: &PcaInstance) -> Result<()> {
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "kind pca")?;
    writeln!(w, "d {}", inst.d())?;
    writeln!(w, "n {}", inst.n())?;
    write_seed(w, inst.seed())?;
    writeln!(w, "delta {:e}", inst.eigengap())?;
    write_matrix(w, "z", inst.data())
}

pub fn write_centroid<W: Write>(w: &mut W, inst: &CentroidInstance) -> Result<()> {
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "kind centroid")?;
    writeln!(w, "d {}", inst.d())?;
    writeln!(w, "n {}", inst.matrices().len())?;
    write_seed(w, inst.seed())?;
    writeln!(w, "cond_q {:e}", inst.cond_q())?;
    for (i, a) in inst.matrices().iter().enumerate() {
        write_matrix(w, &format!("a{i}"), a.mat())?;
    }
    Ok(())
}

pub fn save(path: &Path, inst: &StoredInstance) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match inst {
        StoredInstance::Pca(p) => write_pca(&mut w, p)?,
        StoredInstance::Centroid(c) => write_centroid(&mut w, c)?,
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<StoredInstance> {
    read_instance(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            self.line_no += 1;
            let line = self
                .inner
                .next()
                .ok_or_else(|| self.err("unexpected end of file"))??;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Config(format!("instance file line {}: {msg}", self.line_no))
    }

    fn header(&mut self, key: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ => Err(self.err(&format!("expected `{key} <value>`, found `{line}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.err(&format!("cannot parse `{s}`")))
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let head = self.next_line()?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "matrix" || parts[1] != name {
            return Err(self.err(&format!("expected `matrix {name} {rows} {cols}`")));
        }
        let (r, c): (usize, usize) = (self.parse(parts[2])?, self.parse(parts[3])?);
        if (r, c) != (rows, cols) {
            return Err(self.err(&format!("matrix {name} is {r}x{c}, expected {rows}x{cols}")));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            let line = self.next_line()?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != cols {
                return Err(self.err(&format!("row has {} values, expected {cols}", vals.len())));
            }
            for (j, v) in vals.iter().enumerate() {
                m[(i, j)] = self.parse(v)?;
            }
        }
        Ok(m)
    }
}

pub fn read_instance<R: BufRead>(r: R) -> Result<StoredInstance> {
    let mut lines = Lines {
        inner: r.lines(),
        line_no: 0,
    };
    let version: u32 = {
        let v = lines.header(MAGIC)?;
        lines.parse(&v)?
    };
    if version != VERSION {
        return Err(lines.err(&format!("unsupported version {version}")));
    }
    let kind = lines.header("kind")?;
    let d: usize = {
        let v = lines.header("d")?;
        lines.parse(&v)?
    };
    let n: usize = {
        let v = lines.header("n")?;
        lines.parse(&v)?
    };
    let seed = match lines.header("seed")?.as_str() {
        "none" => None,
        s => Some(lines.parse::<u64>(s)?),
    };
    match kind.as_str() {
        "pca" => {
            let delta: f64 = {
                let v = lines.header("delta")?;
                lines.parse(&v)?
            };
            let z = lines.matrix("z", d, n)?;
            Ok(StoredInstance::Pca(PcaInstance::from_data(z, delta, seed)?))
        }
        "centroid" => {
            let cond_q: f64 = {
                let v = lines.header("cond_q")?;
                lines.parse(&v)?
            };
            let mut mats = Vec::with_capacity(n);
            for i in 0..n {
                mats.push(SpdPoint::new(lines.matrix(&format!("a{i}"), d, d)?)?);
            }
            Ok(StoredInstance::Centroid(CentroidInstance::new(
                mats, cond_q, seed,
            )?))
        }
        other => Err(lines.err(&format!("unknown instance kind `{other}`"))),
    }
}
