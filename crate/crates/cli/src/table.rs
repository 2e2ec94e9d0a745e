//! Minimal CSV writer: comma separated, LF endings, 17 significant digits.

use std::fmt::Write;

pub enum Cell {
    Int(usize),
    Float(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    text: String,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        let mut text = columns.join(",");
        text.push('\n');
        Table {
            columns: columns.to_vec(),
            text,
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match cell {
                Cell::Int(v) => write!(self.text, "{v}").unwrap(),
                Cell::Float(v) if v.is_nan() => self.text.push_str("NaN"),
                Cell::Float(v) => write!(self.text, "{v:.16e}").unwrap(),
            }
        }
        self.text.push('\n');
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Gnuplot script plotting columns `ys` against column 1 of `csv_name`.
pub fn plot_script(csv_name: &str, columns: &[&str], ys: &[usize], logscale_y: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    writeln!(s, "set xlabel '{}'", columns[0]).unwrap();
    if logscale_y {
        s.push_str("set logscale y\n");
    }
    let plots: Vec<String> = ys
        .iter()
        .map(|&y| format!("'{csv_name}' using 1:{} with lines", y + 1))
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    s
}
