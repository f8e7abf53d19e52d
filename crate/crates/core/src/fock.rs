//! Truncated photon-number space and density matrices on it.
//!
//! The space keeps the Fock states `|0⟩ … |n_max⟩`. Ladder operators are the
//! usual truncated matrices: `a†|n_max⟩` is dropped, so `[a, a†] = 1` holds on
//! every level except the top one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `ρ − ρ†` for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `Tr ρ − 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as "positive".
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Thermal tail mass beyond `n_max` that triggers a truncation warning.
pub const THERMAL_TAIL_WARN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    /// Space spanned by `|0⟩ … |n_max⟩`. Rejects `n_max = 0`.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: 0.0,
                reason: "the space needs at least two levels",
            });
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `a†|n⟩ = √(n+1) |n+1⟩`, with `a†|n_max⟩` truncated to zero.
    pub fn creation(&self) -> DMatrix<Complex64> {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Make a truncated Fock space.
pub fn make_space(n_max: usize) -> Result<FockSpace> {
    FockSpace::new(n_max)
}

/// A Hermitian, unit-trace, positive matrix on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: FockSpace, entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self { space, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// Hermitizes and trace-normalizes `entries` before validating. Used on
    /// the output of maps, where rounding leaves `1e-16`-sized asymmetries.
    pub fn normalized(space: FockSpace, entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(&space, entries.nrows(), entries.ncols())?;
        let herm = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = herm.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidState(format!("trace {tr} cannot be normalized")));
        }
        Self::new(space, herm / Complex64::new(tr, 0.0))
    }

    /// Diagonal state with the given photon-number populations.
    pub fn from_populations(space: FockSpace, populations: &[f64]) -> Result<Self> {
        check_shape(&space, populations.len(), populations.len())?;
        let entries = DMatrix::from_diagonal(&DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(space, entries)
    }

    /// The Fock state `|n⟩⟨n|`.
    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        if n > space.n_max() {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n as f64,
                reason: "Fock level above n_max",
            });
        }
        let mut pops = vec![0.0; space.dim()];
        pops[n] = 1.0;
        Self::from_populations(space, &pops)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Diagonal `ρ_nn`.
    pub fn populations(&self) -> DVector<f64> {
        DVector::from_iterator(self.space.dim(), (0..self.space.dim()).map(|n| self.entries[(n, n)].re))
    }

    /// Whether every off-diagonal entry is below `tol` in modulus.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.space.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[(i, j)].norm() < tol))
    }

    /// `⟨n⟩ = Σ n ρ_nn`.
    pub fn mean_photon_number(&self) -> f64 {
        self.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `(⟨n⟩, ⟨n²⟩)` from the diagonal.
    pub fn number_moments(&self) -> (f64, f64) {
        self.populations()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(m1, m2), (n, &p)| {
                let n = n as f64;
                (m1 + n * p, m2 + n * n * p)
            })
    }

    /// `½‖ρ − σ‖₁`, from the eigenvalues of the Hermitian difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * herm.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.entries;
        check_shape(&self.space, e.nrows(), e.ncols())?;
        if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let asym = (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (|ρ−ρ†| = {asym:e})")));
        }
        let tr = e.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = if self.is_diagonal(0.0) {
            (0..e.nrows()).map(|n| e[(n, n)].re).fold(f64::INFINITY, f64::min)
        } else {
            let herm = (e + e.adjoint()) * Complex64::new(0.5, 0.0);
            herm.symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        };
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}

fn check_shape(space: &FockSpace, rows: usize, cols: usize) -> Result<()> {
    if rows != space.dim() || cols != space.dim() {
        return Err(Error::Dimension {
            expected: space.dim(),
            found: rows.max(cols),
        });
    }
    Ok(())
}

/// Geometric populations of a thermal field, `p_n ∝ (n̄/(1+n̄))^n`,
/// renormalized over the truncated space.
pub fn thermal_populations(nbar: f64, space: &FockSpace) -> Result<DVector<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nbar",
            value: nbar,
            reason: "mean thermal photon number must be finite and non-negative",
        });
    }
    let d = space.dim();
    if nbar == 0.0 {
        let mut p = DVector::zeros(d);
        p[0] = 1.0;
        return Ok(p);
    }
    let ratio = nbar / (1.0 + nbar);
    let tail = ratio.powi(d as i32);
    if tail > THERMAL_TAIL_WARN {
        log::warn!(
            "thermal state with nbar = {nbar} loses {tail:e} of its mass above n_max = {}",
            space.n_max()
        );
    }
    let mut p = DVector::from_iterator(d, (0..d).map(|n| ratio.powi(n as i32)));
    let norm = p.sum();
    p /= norm;
    Ok(p)
}

/// Thermal field state with mean photon number `nbar` (before truncation).
pub fn thermal_state(nbar: f64, space: &FockSpace) -> Result<DensityMatrix> {
    let p = thermal_populations(nbar, space)?;
    DensityMatrix::from_populations(*space, p.as_slice())
}

/// Mandel Q of the field, `(⟨n²⟩ − ⟨n⟩²)/⟨n⟩ − 1`.
pub fn mandel_qf(rho: &DensityMatrix) -> Result<f64> {
    let (m1, m2) = rho.number_moments();
    if m1 <= 1e-300 {
        return Err(Error::UndefinedQ);
    }
    Ok((m2 - m1 * m1) / m1 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn rejects_single_level_space() {
        assert!(make_space(0).is_err());
    }

    #[test]
    fn two_level_ladder() {
        let s = make_space(1).unwrap();
        assert_eq!(s.dim(), 2);
        let a = s.annihilation();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        let n = s.creation() * &a;
        assert_eq!(n[(0, 0)], c(0.0));
        assert_eq!(n[(1, 1)], c(1.0));
        assert_eq!(n, s.number());
    }

    #[test]
    fn commutator_is_identity_below_truncation() {
        let s = make_space(30).unwrap();
        let a = s.annihilation();
        let ad = s.creation();
        let comm = &a * &ad - &ad * &a;
        for i in 0..30 {
            for j in 0..30 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((comm[(i, j)] - c(expect)).norm() < 1e-13, "entry ({i},{j})");
            }
        }
        // the top level carries the truncation defect
        assert!((comm[(30, 30)] - c(-30.0)).norm() < 1e-12);
    }

    #[test]
    fn thermal_zero_temperature_is_vacuum() {
        let s = make_space(5).unwrap();
        let rho = thermal_state(0.0, &s).unwrap();
        assert_eq!(rho, DensityMatrix::fock(s, 0).unwrap());
    }

    #[test]
    fn thermal_geometric_law() {
        let s = make_space(80).unwrap();
        let p = thermal_populations(1.0, &s).unwrap();
        // p_n = nbar^n / (1+nbar)^(n+1)
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.25).abs() < 1e-15);
        let rho = thermal_state(0.1, &s).unwrap();
        assert!((rho.mean_photon_number() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn thermal_rejects_negative_nbar() {
        let s = make_space(3).unwrap();
        assert!(thermal_state(-0.1, &s).is_err());
    }

    #[test]
    fn qf_of_fock_and_thermal() {
        let s = make_space(80).unwrap();
        for n in 1..6 {
            assert_eq!(mandel_qf(&DensityMatrix::fock(s, n).unwrap()).unwrap(), -1.0);
        }
        let q = mandel_qf(&thermal_state(0.5, &s).unwrap()).unwrap();
        assert!((q - 0.5).abs() < 1e-12, "{q}");
        assert!(matches!(
            mandel_qf(&DensityMatrix::fock(s, 0).unwrap()),
            Err(Error::UndefinedQ)
        ));
    }

    #[test]
    fn qf_of_poissonian_diagonal() {
        let s = make_space(80).unwrap();
        let mu: f64 = 3.0;
        let mut pops = Vec::with_capacity(s.dim());
        let mut term = (-mu).exp();
        for n in 0..s.dim() {
            if n > 0 {
                term *= mu / n as f64;
            }
            pops.push(term);
        }
        let rho = DensityMatrix::from_populations(s, &pops).unwrap();
        assert!(mandel_qf(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn validation_catches_bad_states() {
        let s = make_space(1).unwrap();
        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(s, not_herm).is_err());
        let bad_trace = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(DensityMatrix::new(s, bad_trace).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.2), c(0.0), c(0.0), c(-0.2)]);
        assert!(DensityMatrix::new(s, negative).is_err());
        let coherent = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        assert!(DensityMatrix::new(s, coherent).is_ok());
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let s = make_space(2).unwrap();
        let a = DensityMatrix::fock(s, 0).unwrap();
        let b = DensityMatrix::fock(s, 2).unwrap();
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-14);
        assert_eq!(a.trace_distance(&a), 0.0);
    }
}
