use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use dcf_core::Delay;

use crate::CliError;

/// Header plus string cells, written as UTF-8 CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn write_to(&self, w: impl Write) -> Result<(), CliError> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            csv.write_record(row)?;
        }
        csv.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(())
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => self.write_to(File::create(p).map_err(|e| CliError::io(p, e))?),
            None => self.write_to(io::stdout().lock()),
        }
    }
}

/// Shortest round-trip decimal; infinities read `inf`, NaN reads `nan`.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

pub fn delay(d: Delay<f64>) -> String {
    d.finite().map_or_else(|| "inf".into(), num)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Gnuplot script that plots columns of a CSV by header name.
pub fn gnuplot_script(data: &Path, title: &str, x: &str, ys: &[(&str, &str)], logx: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile missing 'inf'\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{x}'\n"));
    if logx {
        s.push_str("set logscale x\n");
    }
    s.push_str("set key top right\n");
    let file = data.display();
    let plots: Vec<String> = ys
        .iter()
        .map(|(col, style)| format!("'{file}' using \"{x}\":\"{col}\" with {style} title '{col}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
