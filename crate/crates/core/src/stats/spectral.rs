//! Mode-by-mode evaluation of the Q-parameters on a biorthonormal
//! eigenbasis of the window's step map or generator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Eigensystem;
use crate::maps::{DEGENERACY_GAP, FIXED_POINT_TOL};

use super::kernel;
use super::process::{Clock, CountingProcess};
use super::Level;

/// Right eigenvectors `ρ_i` (columns) and dual vectors `ρ̃_i` (rows) with
/// `ρ̃_i · ρ_j = δ_ij`. Index 0 is the stationary mode, scaled to unit trace
/// so that `ρ̃_0` is the trace functional.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub right: DMatrix<Complex64>,
    pub left: DMatrix<Complex64>,
    /// Whether the decomposed matrix is a generator (stationary value 0)
    /// rather than a map (stationary value 1).
    pub generator: bool,
    pub condition: f64,
}

impl SpectralDecomposition {
    pub fn new(m: &DMatrix<f64>, generator: bool) -> Result<Self> {
        let es = Eigensystem::new(m)?;
        let target = Complex64::new(if generator { 0.0 } else { 1.0 }, 0.0);
        let scale = if generator {
            m.diagonal().iter().fold(1.0f64, |a, x| a.max(x.abs()))
        } else {
            1.0
        };
        let mut order: Vec<usize> = (0..es.values.len()).collect();
        order.sort_by(|&a, &b| {
            (es.values[a] - target)
                .norm()
                .total_cmp(&(es.values[b] - target).norm())
        });
        let dist = |i: usize| (es.values[i] - target).norm() / scale;
        if dist(order[0]) > FIXED_POINT_TOL {
            return Err(Error::NoFixedPoint {
                closest: format!("{:.3e}", es.values[order[0]]),
                tolerance: FIXED_POINT_TOL,
            });
        }
        if order.len() > 1 && dist(order[1]) < DEGENERACY_GAP {
            return Err(Error::AmbiguousSteadyState {
                first: format!("{:.12e}", es.values[order[0]]),
                second: format!("{:.12e}", es.values[order[1]]),
                gap: DEGENERACY_GAP,
            });
        }
        // stationary mode first, the rest in their original order
        let i0 = order[0];
        let perm: Vec<usize> = std::iter::once(i0)
            .chain((0..es.values.len()).filter(|&i| i != i0))
            .collect();
        let n = perm.len();
        let mut right = DMatrix::zeros(n, n);
        let mut left = DMatrix::zeros(n, n);
        for (new, &old) in perm.iter().enumerate() {
            right.set_column(new, &es.right.column(old));
            left.set_row(new, &es.left.row(old));
        }
        let tr = right.column(0).sum();
        right.column_mut(0).iter_mut().for_each(|z| *z /= tr);
        left.row_mut(0).iter_mut().for_each(|z| *z *= tr);
        Ok(Self {
            eigenvalues: perm.iter().map(|&i| es.values[i]).collect(),
            right,
            left,
            generator,
            condition: es.condition,
        })
    }

    /// Largest entry of `ρ̃ ρ − 1`.
    pub fn biorthonormality_error(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.right.nrows(), self.right.ncols());
        (&self.left * &self.right - id).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Largest `|Tr ρ_i|` over the non-stationary modes.
    pub fn trace_defect(&self) -> f64 {
        (1..self.right.ncols()).fold(0.0, |a, i| a.max(self.right.column(i).sum().norm()))
    }

    /// The stationary populations `ρ_0`.
    pub fn stationary(&self) -> DVector<f64> {
        self.right.column(0).map(|z| z.re)
    }

    /// The diagonal density-matrix form of mode `i`.
    pub fn right_matrix(&self, i: usize) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&self.right.column(i).into_owned())
    }

    /// Overlaps `C_{i0} = ρ̃_0 · W ρ_i` and `C_{0i} = ρ̃_i · W ρ_0`.
    pub fn overlaps(&self, weight: &DMatrix<f64>) -> (DVector<Complex64>, DVector<Complex64>) {
        let w = weight.map(|x| Complex64::new(x, 0.0));
        let row0 = self.left.row(0) * &w * &self.right;
        let col0 = &self.left * (&w * self.right.column(0));
        (row0.transpose(), col0)
    }

    /// The full overlap matrix `C_{ij} = ρ̃_j · W ρ_i`.
    pub fn coefficients(&self, weight: &DMatrix<f64>) -> DMatrix<Complex64> {
        let w = weight.map(|x| Complex64::new(x, 0.0));
        (&self.left * w * &self.right).transpose()
    }
}

impl CountingProcess {
    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::new(&self.evolution, matches!(self.clock, Clock::Continuous { .. }))
    }

    /// Mandel Q from the mode sum over the non-stationary eigenvalues.
    pub fn q_spectral_with(&self, level: Level, sd: &SpectralDecomposition) -> Result<f64> {
        let scale = self.count_scale(level);
        let f = self.emission(level);
        let (weight, sum_kernel): (DMatrix<f64>, Box<dyn Fn(Complex64) -> Complex64>) = match &self.clock {
            Clock::Discrete { a, steps, .. } => {
                let steps = *steps;
                (a * f, Box::new(move |l| kernel::discrete(l, steps)))
            }
            Clock::Continuous { time, .. } => {
                let time = *time;
                (f.clone(), Box::new(move |mu| kernel::continuous(mu, time)))
            }
        };
        let (c_i0, c_0i) = sd.overlaps(&weight);
        let c00 = c_i0[0].re;
        if !(scale * c00 > 0.0) {
            return Err(Error::UndefinedQ);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 1..sd.eigenvalues.len() {
            sum += sum_kernel(sd.eigenvalues[i]) * c_i0[i] * c_0i[i];
        }
        let pairs = 2.0 * scale / c00 * sum.re;
        Ok(match self.clock {
            Clock::Discrete { .. } => pairs - scale * c00,
            Clock::Continuous { .. } => pairs,
        })
    }

    pub fn q_spectral(&self, level: Level) -> Result<f64> {
        self.q_spectral_with(level, &self.spectral()?)
    }
}
