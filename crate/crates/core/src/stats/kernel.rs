//! Scalar window functions that weight each eigenmode in the Q formulas.

use num_complex::Complex64;

/// `f(λ; K) = [K(1−λ) − 1 + λ^K] / (K (1−λ)²)`, the weight of a mode with
/// eigenvalue `λ` in the pair sum of a `K`-step window, and `1/(1−λ)` when
/// `K` is infinite. `f(1; K) = (K−1)/2`.
pub fn discrete(lambda: Complex64, steps: Option<u64>) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let u = one - lambda;
    let Some(k) = steps else {
        return one / u;
    };
    let kf = k as f64;
    if (u * kf).norm() < 0.5 {
        // f = (1/K) Σ_{j=2}^{K} C(K,j) (−u)^{j−2}
        let mut binom = kf * (kf - 1.0) / 2.0;
        let mut power = one;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut j = 2u64;
        while j <= k {
            let term = power * binom;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
            power *= -u;
            binom *= (kf - j as f64) / (j as f64 + 1.0);
            j += 1;
        }
        return sum / kf;
    }
    let lk = if lambda == Complex64::new(0.0, 0.0) {
        lambda
    } else if k <= u32::MAX as u64 {
        lambda.powu(k as u32)
    } else {
        (lambda.ln() * kf).exp()
    };
    (u * kf - one + lk) / (u * u * kf)
}

/// `g(μ; t) = (e^{μt} − 1 − μt) / (μ² t)`, the weight of a generator mode
/// `μ` in a window of duration `t`, and `−1/μ` when `t` is infinite.
pub fn continuous(mu: Complex64, time: Option<f64>) -> Complex64 {
    let Some(t) = time else {
        return -mu.inv();
    };
    let x = mu * t;
    if x.norm() < 0.5 {
        // t Σ_{j≥0} x^j / (j+2)!
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for j in 1..40 {
            term *= x / (j as f64 + 2.0);
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        return sum * t;
    }
    (x.exp() - 1.0 - x) / (mu * mu * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lambda: Complex64, k: u64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..k.saturating_sub(1) {
            s += lambda.powu(j as u32) * (k - 1 - j) as f64;
        }
        s / k as f64
    }

    #[test]
    fn discrete_matches_pair_sum() {
        for &l in &[
            Complex64::new(0.3, 0.0),
            Complex64::new(0.999_999, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.7, 0.2),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.95, -0.04),
        ] {
            for k in [1u64, 2, 5, 20, 50, 300] {
                let a = discrete(l, Some(k));
                let b = brute(l, k);
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "λ={l} K={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn discrete_limit_at_unit_eigenvalue() {
        let f = discrete(Complex64::new(1.0, 0.0), Some(11));
        assert!((f.re - 5.0).abs() < 1e-15);
    }

    #[test]
    fn continuous_matches_quadrature() {
        for &mu in &[
            Complex64::new(-0.3, 0.0),
            Complex64::new(-2.0, 1.5),
            Complex64::new(-1e-9, 0.0),
        ] {
            for t in [0.1, 1.0, 7.0] {
                // ∫_0^t (t−s) e^{μs} ds / t by Simpson
                let n = 20_000;
                let h = t / n as f64;
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..=n {
                    let x = i as f64 * h;
                    let w = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    s += (mu * x).exp() * (t - x) * w;
                }
                let quad = s * h / 3.0 / t;
                assert!((continuous(mu, Some(t)) - quad).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn asymptotic_forms() {
        let l = Complex64::new(0.4, 0.1);
        assert!((discrete(l, None) - (Complex64::new(1.0, 0.0) - l).inv()).norm() < 1e-15);
        assert!((discrete(l, Some(1 << 40)) - discrete(l, None)).norm() < 1e-11);
        let mu = Complex64::new(-0.5, 0.3);
        assert!((continuous(mu, Some(1e6)) - continuous(mu, None)).norm() < 1e-5);
    }
}
