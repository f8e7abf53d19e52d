//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest eigenvector condition number accepted for a biorthogonal basis.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e12;

/// Right and left eigenvectors of a real, generally non-normal matrix,
/// normalized so that `left.row(i) · right.column(j) = δ_ij`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    /// Eigenvectors as columns.
    pub right: DMatrix<Complex64>,
    /// Dual basis as rows; the inverse of `right`.
    pub left: DMatrix<Complex64>,
    /// 2-norm condition number of `right`.
    pub condition: f64,
}

impl Eigensystem {
    /// Eigendecomposition through the complex Schur form `M = Q T Q†`:
    /// eigenvectors of the triangular factor by back substitution, then the
    /// dual basis by inversion.
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let mc = m.map(|x| Complex64::new(x, 0.0));
        let (q, t) = nalgebra::linalg::Schur::new(mc).unpack();
        let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

        let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let small = f64::EPSILON * scale;
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            let lambda = values[k];
            y[(k, k)] = Complex64::new(1.0, 0.0);
            for j in (0..k).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in (j + 1)..=k {
                    acc += t[(j, l)] * y[(l, k)];
                }
                let mut denom = t[(j, j)] - lambda;
                if denom.norm() < small {
                    denom = Complex64::new(small, 0.0);
                }
                y[(j, k)] = -acc / denom;
            }
        }
        let mut right = q * y;
        for mut col in right.column_iter_mut() {
            let norm = col.norm();
            col /= Complex64::new(norm, 0.0);
        }

        let sv = right.clone().svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= MAX_EIGENVECTOR_CONDITION) {
            return Err(Error::Biorthogonalization {
                condition,
                limit: MAX_EIGENVECTOR_CONDITION,
            });
        }
        let mut left = right.clone().try_inverse().ok_or(Error::Biorthogonalization {
            condition: f64::INFINITY,
            limit: MAX_EIGENVECTOR_CONDITION,
        })?;
        // Newton–Schulz steps pull the dual basis back to the inverse
        let id = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..2 {
            let residual = &id - &left * &right;
            left += &residual * &left;
        }
        Ok(Self {
            values,
            right,
            left,
            condition,
        })
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn closest(&self, target: Complex64) -> usize {
        closest_index(&self.values, target)
    }
}

pub fn closest_index(values: &[Complex64], target: Complex64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .map(|(i, _)| i)
        .expect("empty spectrum")
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &DMatrix<f64>, mut k: u64) -> DMatrix<f64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Solves `S y = rhs` for a singular `S` whose null vector is `stationary`
/// (unit trace) and whose left null vector is the all-ones trace functional.
/// `rhs` must be trace-free; the returned `y` is trace-free too.
pub fn solve_trace_free(s: &DMatrix<f64>, stationary: &DVector<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = s.nrows();
    let ones = DVector::from_element(n, 1.0);
    let bordered = s + stationary * ones.transpose();
    bordered
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::SingularMap("trace-free solve failed".into()))
}

/// Removes the component of `v` along `stationary` so that the result has
/// zero trace.
pub fn trace_free_part(v: &DVector<f64>, stationary: &DVector<f64>) -> DVector<f64> {
    v - stationary * v.sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biorthonormal_basis_reconstructs_matrix() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.2, 0.0, 0.1, //
                0.1, 0.3, 0.4, 0.0, //
                0.2, 0.0, 0.6, 0.3, //
                0.0, 0.7, 0.1, 0.2,
            ],
        );
        let es = Eigensystem::new(&m).unwrap();
        let id = &es.left * &es.right;
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - Complex64::new(e, 0.0)).norm() < 1e-12);
            }
        }
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(es.values.clone()));
        let rebuilt = &es.right * lambda * &es.left;
        let mc = m.map(|x| Complex64::new(x, 0.0));
        assert!((rebuilt - mc).norm() < 1e-12);
    }

    #[test]
    fn handles_complex_pairs() {
        // rotation: eigenvalues ±i
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let es = Eigensystem::new(&m).unwrap();
        let mut ims: Vec<f64> = es.values.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn defective_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(Eigensystem::new(&m), Err(Error::Biorthogonalization { .. })));
    }

    #[test]
    fn power_by_squaring_matches_product() {
        let m = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, 0.8]);
        let mut direct = DMatrix::identity(2, 2);
        for _ in 0..13 {
            direct = &direct * &m;
        }
        assert!((matrix_power(&m, 13) - direct).norm() < 1e-14);
        assert_eq!(matrix_power(&m, 0), DMatrix::identity(2, 2));
    }

    #[test]
    fn trace_free_solve_inverts_on_complement() {
        // column-stochastic M with stationary r
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.6, 0.2, 0.2, 0.2, 0.7]);
        let s = DMatrix::identity(3, 3) - &m;
        let es = Eigensystem::new(&m).unwrap();
        let k = es.closest(Complex64::new(1.0, 0.0));
        let mut r = es.right.column(k).map(|z| z.re);
        r /= r.sum();
        let rhs = DVector::from_vec(vec![0.3, -0.1, -0.2]);
        let y = solve_trace_free(&s, &r, &rhs).unwrap();
        assert!(y.sum().abs() < 1e-14);
        assert!((&s * &y - &rhs).norm() < 1e-14);
    }
}
