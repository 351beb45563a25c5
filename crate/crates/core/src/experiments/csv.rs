//! CSV writing with C-style `%.12e` numbers.

use std::path::Path;

use crate::error::Result;

/// `printf("%.12e", x)`: twelve fraction digits, signed exponent of at
/// least two digits. Non-finite values print as C does (`nan`, `inf`).
pub fn fmt_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    /// Written as an empty field.
    Missing,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Missing, Cell::Float)
    }

    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_scientific() {
        assert_eq!(fmt_sci(1.0), "1.000000000000e+00");
        assert_eq!(fmt_sci(0.0), "0.000000000000e+00");
        assert_eq!(fmt_sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_sci(6.02214076e23), "6.022140760000e+23");
        assert_eq!(fmt_sci(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_sci(f64::NAN), "nan");
    }

    #[test]
    fn table_render() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::from(1usize), Cell::from(0.5), Cell::Missing]);
        t.push(vec![Cell::from("x"), Cell::opt(None), Cell::opt(Some(2.0))]);
        t.push(vec![Cell::from("p, q"), Cell::Missing, Cell::Missing]);
        assert_eq!(
            t.render(),
            "a,b,c\n1,5.000000000000e-01,\nx,,2.000000000000e+00\n\"p, q\",,\n"
        );
    }
}
