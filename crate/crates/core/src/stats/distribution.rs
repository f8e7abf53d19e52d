//! Joint distribution of excited and ground detections in a finite window.
//!
//! The counting map with marks `y` (excited) and `z` (ground) is a
//! polynomial in `y, z`. Its coefficients are propagated directly: the
//! population vector attached to `y^a z^b` after the window is exactly the
//! unnormalized weight of `N_e = a`, `N_g = b`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::superop::PumpConfig;

use super::process::{start_populations, Clock, CountingProcess};
use super::{Level, Window};

/// Default largest total count tracked by [`count_distribution`].
pub const DEFAULT_CAP: usize = 200;
/// Largest `qΔ` per uniformization chunk; `e^{−qΔ}` must stay normal.
const CHUNK_RATE: f64 = 500.0;
/// Coefficients below this fraction of the start mass are dropped from the
/// top of a uniformization table and booked as truncated mass.
const PRUNE: f64 = 1e-30;

/// Triangular index of `(a, b)` with `a + b = s`.
fn tri(a: usize, b: usize) -> usize {
    let s = a + b;
    s * (s + 1) / 2 + b
}

/// `w(N_e, N_g)` on `N_e + N_g ≤ size`.
#[derive(Debug, Clone)]
pub struct CountDistribution {
    pub window: Window,
    size: usize,
    table: Vec<f64>,
    /// Probability of more than `size` detections. Zero for discrete
    /// windows, whose counts never exceed the number of atoms or slots.
    pub truncated_mass: f64,
}

impl CountDistribution {
    pub fn size(&self) -> usize {
        self.size
    }

    /// `w(a, b)`; zero outside the table.
    pub fn probability(&self, a: usize, b: usize) -> f64 {
        if a + b > self.size {
            0.0
        } else {
            self.table[tri(a, b)]
        }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Marginal distribution of one level's count.
    pub fn marginal(&self, level: Level) -> Vec<f64> {
        let mut out = vec![0.0; self.size + 1];
        for s in 0..=self.size {
            for b in 0..=s {
                let a = s - b;
                let n = match level {
                    Level::Excited => a,
                    Level::Ground => b,
                };
                out[n] += self.table[tri(a, b)];
            }
        }
        out
    }

    /// `⟨N⟩` and `⟨N(N−1)⟩` of one level.
    pub fn factorial_moments(&self, level: Level) -> (f64, f64) {
        let w = self.marginal(level);
        let m1 = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let m2 = w
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum();
        (m1, m2)
    }

    /// `⟨N(N−1)⟩/⟨N⟩ − ⟨N⟩`.
    pub fn mandel_q(&self, level: Level) -> Result<f64> {
        let (m1, m2) = self.factorial_moments(level);
        if !(m1 > 0.0) {
            return Err(Error::UndefinedQ);
        }
        Ok(m2 / m1 - m1)
    }
}

impl CountingProcess {
    /// Joint count distribution from the given start populations, tracking
    /// totals up to `cap`.
    pub fn distribution(&self, start: &DVector<f64>, cap: usize) -> Result<CountDistribution> {
        let f_ed = self.detection(Level::Excited);
        let f_gd = self.detection(Level::Ground);
        let d = start.len();
        match &self.clock {
            Clock::Discrete { a, q0, c, steps } => {
                let k = steps.ok_or_else(|| Error::InvalidWindow("distributions need a finite window".into()))?;
                let size = k as usize;
                if size > cap {
                    return Err(Error::WindowCap { size, cap });
                }
                let stay = DMatrix::identity(d, d) * *q0 + &self.undetected * *c;
                let marks = stack(&stay, &(&f_ed * *c), &(&f_gd * *c));
                let mut cur = DMatrix::from_column_slice(d, 1, start.as_slice());
                for step in 0..size {
                    cur = a * mark_step(&(&marks * &cur), step, step + 1);
                }
                Ok(CountDistribution {
                    window: self.window,
                    size,
                    table: column_sums(&cur),
                    truncated_mass: 0.0,
                })
            }
            Clock::Continuous { rate, time, .. } => {
                let t = time.ok_or_else(|| Error::InvalidWindow("distributions need a finite window".into()))?;
                // uniformization: G(y,z) = q[P_0 + y P_e + z P_g − 1] with
                // nonnegative P's
                let b0 = &self.lindblad + (&self.undetected - DMatrix::identity(d, d)) * *rate;
                let q = b0.diagonal().iter().fold(1e-300f64, |m, x| m.max(x.abs()));
                let p0 = DMatrix::identity(d, d) + &b0 / q;
                let marks = stack(&p0, &(&f_ed * (*rate / q)), &(&f_gd * (*rate / q)));
                let start_mass = start.sum();
                let tiny = PRUNE * start_mass;
                let mut cur = DMatrix::from_column_slice(d, 1, start.as_slice());
                let mut reach = 0;
                let chunks = (q * t / CHUNK_RATE).ceil().max(1.0) as usize;
                let lam = q * t / chunks as f64;
                for _ in 0..chunks {
                    (cur, reach) = uniformized_chunk(&cur, reach, &marks, lam, cap, tiny);
                }
                let mut table = column_sums(&cur);
                table.resize(tri(0, cap) + 1, 0.0);
                let kept: f64 = table.iter().sum();
                Ok(CountDistribution {
                    window: self.window,
                    size: cap,
                    table,
                    truncated_mass: (start_mass - kept).max(0.0),
                })
            }
        }
    }
}

fn column_sums(m: &DMatrix<f64>) -> Vec<f64> {
    m.column_iter().map(|c| c.sum()).collect()
}

/// `[stay; up_e; up_g]`, so one product yields all three images.
fn stack(stay: &DMatrix<f64>, up_e: &DMatrix<f64>, up_g: &DMatrix<f64>) -> DMatrix<f64> {
    let d = stay.nrows();
    let mut out = DMatrix::zeros(3 * d, d);
    out.rows_mut(0, d).copy_from(stay);
    out.rows_mut(d, d).copy_from(up_e);
    out.rows_mut(2 * d, d).copy_from(up_g);
    out
}

/// Combines the stacked no-mark, `y` and `z` images of a coefficient table
/// whose totals reach `from` into a table whose totals reach `to`.
fn mark_step(images: &DMatrix<f64>, from: usize, to: usize) -> DMatrix<f64> {
    let d = images.nrows() / 3;
    let mut out = DMatrix::zeros(d, tri(0, to) + 1);
    for s in 0..=to {
        for b in 0..=s {
            let a = s - b;
            let mut col = out.column_mut(tri(a, b));
            if s <= from {
                col += images.view((0, tri(a, b)), (d, 1));
            }
            if a > 0 && s - 1 <= from {
                col += images.view((d, tri(a - 1, b)), (d, 1));
            }
            if b > 0 && s - 1 <= from {
                col += images.view((2 * d, tri(a, b - 1)), (d, 1));
            }
        }
    }
    out
}

/// Drops the highest totals while every entry there is below `tiny`;
/// returns the remaining reach.
fn prune(m: &mut DMatrix<f64>, mut reach: usize, tiny: f64) -> usize {
    let top = reach;
    while reach > 0 {
        let first = tri(reach, 0);
        let negligible = m.columns(first, reach + 1).iter().all(|x| x.abs() < tiny);
        if !negligible {
            break;
        }
        reach -= 1;
    }
    if reach < top {
        *m = m.columns(0, tri(0, reach) + 1).into_owned();
    }
    reach
}

/// `Σ_n Pois(n; λ) P(y,z)^n` applied to a coefficient table with totals up
/// to `reach`; returns the new table and its reach, at most `cap`.
fn uniformized_chunk(
    cur: &DMatrix<f64>,
    reach: usize,
    marks: &DMatrix<f64>,
    lam: f64,
    cap: usize,
    tiny: f64,
) -> (DMatrix<f64>, usize) {
    let mut weight = (-lam).exp();
    let mut out = DMatrix::zeros(cur.nrows(), tri(0, cap) + 1);
    out.columns_mut(0, cur.ncols()).zip_apply(cur, |o, x| *o += weight * x);
    let mut term = cur.clone();
    let mut term_reach = reach;
    let mut out_reach = reach;
    let mut n = 0usize;
    while n < 10 || (n as f64) < lam || weight > 1e-18 {
        n += 1;
        let to = (term_reach + 1).min(cap);
        term = mark_step(&(marks * &term), term_reach, to);
        term_reach = prune(&mut term, to, tiny);
        weight *= lam / n as f64;
        out.columns_mut(0, term.ncols())
            .zip_apply(&term, |o, x| *o += weight * x);
        out_reach = out_reach.max(term_reach);
        if n > 100_000 {
            break;
        }
    }
    (out.columns(0, tri(0, out_reach) + 1).into_owned(), out_reach)
}

/// Joint distribution of detections over a finite window, started from
/// `state`. Only the diagonal of `state` matters.
pub fn count_distribution(
    window: Window,
    cfg: &PumpConfig,
    state: &DensityMatrix,
    cap: usize,
) -> Result<CountDistribution> {
    let process = CountingProcess::new(cfg, window, state.space())?;
    let start = start_populations(state.space(), state)?;
    process.distribution(&start, cap)
}

/// `⟨N⟩` and `⟨N(N−1)⟩` for one level over a finite window from `state`.
pub fn moments(window: Window, cfg: &PumpConfig, state: &DensityMatrix, level: Level) -> Result<(f64, f64)> {
    let process = CountingProcess::new(cfg, window, state.space())?;
    let start = start_populations(state.space(), state)?;
    process.factorial_moments(level, &start)
}
