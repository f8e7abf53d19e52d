//! CSV and gnuplot output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{Axis, Config, Spacing, COLUMNS};
use crate::error::{CliError, Result};
use crate::sweep::{evaluate, Row};

pub const HEADER: &str = "nex_or_gtint,Q_e,Q_g,Qt_e,Qt_g,Q_f,mean_Ne,mean_Ng,method,window,status";

/// The CSV text of a sweep. Numbers use the shortest round-trip form, so
/// equal inputs give byte-identical files.
pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let values = match &r.report {
            Some(q) => [q.q_e, q.q_g, q.qt_e, q.qt_g, q.q_f, q.mean_ne, q.mean_ng],
            None => [f64::NAN; 7],
        };
        let _ = write!(out, "{}", r.x);
        for v in values {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{},{},{}", r.method, r.windows.label(), r.status);
    }
    out
}

fn column_index(name: &str) -> usize {
    COLUMNS.iter().position(|c| *c == name).expect("validated column") + 2
}

/// A gnuplot script that draws the configured columns from `csv_name`,
/// one curve per column, method and window.
pub fn gnuplot(config: &Config, csv_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}: {}", config.name, config.plot.title);
    let _ = writeln!(s, "set datafile separator \",\"");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output \"{}.png\"", config.name);
    let _ = writeln!(s, "set title \"{}\"", config.plot.title.replace('"', "'"));
    let _ = writeln!(s, "set xlabel \"{}\"", config.sweep.axis.label());
    let _ = writeln!(s, "set ylabel \"Q\"");
    let _ = writeln!(s, "set key outside right");
    if config.sweep.spacing == Spacing::Log && config.sweep.axis == Axis::NEx {
        let _ = writeln!(s, "set logscale x");
    }
    let many = config.sweep.methods.len() * config.sweep.windows.len() > 1;
    let mut curves = Vec::new();
    for m in &config.sweep.methods {
        for w in &config.sweep.windows {
            for c in &config.plot.columns {
                let scale = if c == "Q_f" { config.plot.q_f_scale } else { 1.0 };
                let value = if scale == 1.0 {
                    format!("${}", column_index(c))
                } else {
                    format!("${}*{scale}", column_index(c))
                };
                let mut title = if scale == 1.0 {
                    c.clone()
                } else {
                    format!("{scale} {c}")
                };
                if many {
                    title = format!("{title} {m} {}", w.label());
                }
                curves.push(format!(
                    "\"{csv_name}\" skip 1 using 1:((strcol(9) eq \"{m}\" && strcol(10) eq \"{}\") ? {value} : NaN) with lines title \"{title}\"",
                    w.label()
                ));
            }
        }
    }
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    s
}

/// Files written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub script: PathBuf,
    pub rows: Vec<Row>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Evaluates the sweep and writes `<name>.csv` and `<name>.gp` into `dir`.
/// Nothing is written if the configuration is invalid.
pub fn run(config: &Config, dir: &Path) -> Result<RunOutput> {
    config.validate()?;
    let rows = evaluate(config)?;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_name = format!("{}.csv", config.name);
    let csv_path = dir.join(&csv_name);
    let script = dir.join(format!("{}.gp", config.name));
    write(&csv_path, &csv(&rows))?;
    write(&script, &gnuplot(config, &csv_name))?;
    Ok(RunOutput {
        csv: csv_path,
        script,
        rows,
    })
}
