//! Evaluation of a sweep on a bounded worker pool.

use micromaser::oracle;
use micromaser::stats::q_report;
use micromaser::{Method, QReport, Windows};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{CliError, Result};

/// One CSV row: a report, or the reason there is none.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub method: Method,
    pub windows: Windows,
    pub report: Option<QReport>,
    /// `ok`, or the error code of a point that could not be evaluated.
    pub status: String,
}

/// Stream seed of one Monte Carlo cell, independent of scheduling.
pub fn cell_seed(seed: u64, point: usize, cell: usize) -> u64 {
    seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (cell as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn point_rows(config: &Config, index: usize, x: f64) -> Vec<Row> {
    let s = &config.sweep;
    let cfg = s.pump(x);
    let mut rows = Vec::with_capacity(s.methods.len() * s.windows.len());
    for &method in &s.methods {
        for &windows in &s.windows {
            let cell = rows.len();
            let result = match method {
                Method::MonteCarlo => {
                    oracle::simulate(&cfg, config.trajectories, windows, cell_seed(config.seed, index, cell))
                }
                _ => q_report(&cfg, windows, method),
            };
            let (report, status) = match result {
                Ok(r) => (Some(r), "ok".to_string()),
                Err(e) => {
                    log::warn!("{} = {x}, {method}, {}: {e}", s.axis.label(), windows.label());
                    (None, e.code().to_string())
                }
            };
            rows.push(Row {
                x,
                method,
                windows,
                report,
                status,
            });
        }
    }
    rows
}

/// Every row of the sweep, in axis order, then method, then window.
pub fn evaluate(config: &Config) -> Result<Vec<Row>> {
    config.validate()?;
    let points = config.sweep.points();
    let work = || -> Vec<Row> {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &x)| point_rows(config, i, x))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    match config.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Inconsistent(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}
