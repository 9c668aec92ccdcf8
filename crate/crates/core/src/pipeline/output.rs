use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Report file layout: `report.json` with the resolved config and version stamp.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub version: &'a str,
    pub command: &'a str,
    pub config: &'a C,
    pub report: &'a R,
}

/// Destination directory; `None` keeps everything in memory.
#[derive(Clone, Debug, Default)]
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn to_dir(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: Some(dir.to_path_buf()) })
    }

    pub fn discard() -> Self {
        Output { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Sub-directory output, created on demand.
    pub fn child(&self, name: &str) -> Result<Self> {
        match &self.dir {
            Some(d) => Output::to_dir(&d.join(name)),
            None => Ok(Output::discard()),
        }
    }

    pub fn text(&self, name: &str, content: &str) -> Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), content)?;
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if self.dir.is_some() {
            self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))?;
        }
        Ok(())
    }

    pub fn report<C: Serialize, R: Serialize>(&self, command: &str, config: &C, report: &R) -> Result<()> {
        self.json("report.json", &Envelope { version: crate::VERSION, command, config, report })
    }
}

/// CSV text from a header and rows of numbers.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Gnuplot script plotting columns of CSV files on log-log axes.
pub struct Gnuplot {
    title: String,
    xlabel: String,
    ylabel: String,
    logscale: &'static str,
    series: Vec<(String, usize, usize, String)>,
}

impl Gnuplot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Gnuplot { title: title.into(), xlabel: xlabel.into(), ylabel: ylabel.into(), logscale: "xy", series: Vec::new() }
    }

    pub fn logscale(mut self, axes: &'static str) -> Self {
        self.logscale = axes;
        self
    }

    pub fn series(mut self, file: &str, x: usize, y: usize, label: &str) -> Self {
        self.series.push((file.into(), x, y, label.into()));
        self
    }

    pub fn script(&self, png: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set terminal pngcairo size 900,600");
        let _ = writeln!(s, "set output '{png}'");
        let _ = writeln!(s, "set title '{}'", self.title);
        let _ = writeln!(s, "set xlabel '{}'", self.xlabel);
        let _ = writeln!(s, "set ylabel '{}'", self.ylabel);
        if !self.logscale.is_empty() {
            let _ = writeln!(s, "set logscale {}", self.logscale);
        }
        let parts: Vec<String> = self
            .series
            .iter()
            .map(|(f, x, y, l)| format!("'{f}' using {x}:{y} skip 1 with lines title '{l}'"))
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        s
    }

    pub fn write(&self, out: &Output, name: &str) -> Result<()> {
        out.text(&format!("{name}.plt"), &self.script(&format!("{name}.png")))
    }
}
