//! Exact asymptotic Q-parameters at the one-photon trapping point
//! `gt_int = π/√2`, `n̄ = 0`, where the field never leaves `{|0⟩, |1⟩}`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::superop::{beta, PumpConfig};

use super::{Level, Window};

/// Rabi angle of the solvable point.
pub const SOLVABLE_GT: f64 = PI / SQRT_2;

fn check_point(cfg: &PumpConfig) -> Result<()> {
    if (cfg.gt_int - SOLVABLE_GT).abs() > 1e-12 || cfg.nbar != 0.0 {
        return Err(Error::OutsideSolvablePoint {
            gt_int: cfg.gt_int,
            nbar: cfg.nbar,
        });
    }
    Ok(())
}

/// Asymptotic Q of one level at the solvable point, for `N → ∞`
/// (`Window::Atoms(None)`) or `t → ∞` (`Window::Time(None)`).
///
/// With `d = exp(−p/N_ex)` and `D = 1 − d + pβ₁d`:
///
/// - `Q̃_e = −η_e/D · [2p²β₁²(1−d)(α₁+pβ₁d−d)d / (D(α₁(1−d)+pβ₁d)) + p(α₁(1−d)+pβ₁d)]`
/// - `Q̃_g = −η_g/D · [2pβ₁(1−pβ₁)(1−d)d / D + pβ₁(1−d)]`
/// - `Q_e = −η_e/D · [2pβ₁²α₁(1−d)²d / (D(α₁(1−d)+pβ₁d)) + α₁(1−d) + pβ₁d]`
/// - `Q_g = −η_g/D · [2pβ₁α₁(1−d)d / D + β₁(1−d)]`
///
/// and their `p → 0` limits for Poisson pumping.
pub fn q_closed_form_two_level(cfg: &PumpConfig, level: Level, window: Window) -> Result<f64> {
    check_point(cfg)?;
    cfg.validate()?;
    let b1 = beta(SOLVABLE_GT, 1);
    let a1 = 1.0 - b1;
    let n = cfg.n_ex();
    let fixed_time = match window {
        Window::Atoms(None) => false,
        Window::Time(None) => true,
        _ => {
            return Err(Error::InvalidWindow(
                "closed forms are asymptotic; use an infinite window".into(),
            ))
        }
    };
    let (eta, q1) = match level {
        Level::Excited => (cfg.eta_e, 0),
        Level::Ground => (cfg.eta_g, 1),
    };
    let unit = if cfg.is_poisson() {
        let bn = b1 * n;
        match (fixed_time, q1) {
            (true, 0) => 2.0 * b1.powi(3) * n * n / ((bn + a1) * (bn + 1.0).powi(2)),
            (true, _) => -2.0 * bn / (bn + 1.0).powi(2),
            (false, 0) => -(2.0 * b1 * b1 * a1 * n / ((bn + 1.0) * (bn + a1)) + bn + a1) / (bn + 1.0),
            (false, _) => -(2.0 * b1 * a1 * n / (bn + 1.0) + b1) / (bn + 1.0),
        }
    } else {
        let p = cfg.p;
        let d = (-p / n).exp();
        let big = 1.0 - d + p * b1 * d;
        let excited_weight = a1 * (1.0 - d) + p * b1 * d;
        let inner = match (fixed_time, q1) {
            (true, 0) => {
                2.0 * p * p * b1 * b1 * (1.0 - d) * (a1 + p * b1 * d - d) * d / (big * excited_weight)
                    + p * excited_weight
            }
            (true, _) => 2.0 * p * b1 * (1.0 - p * b1) * (1.0 - d) * d / big + p * b1 * (1.0 - d),
            (false, 0) => 2.0 * p * b1 * b1 * a1 * (1.0 - d).powi(2) * d / (big * excited_weight) + excited_weight,
            (false, _) => 2.0 * p * b1 * a1 * (1.0 - d) * d / big + b1 * (1.0 - d),
        };
        -inner / big
    };
    Ok(eta * unit)
}

/// Field Q at the solvable point: the field is `|1⟩` with probability
/// `x = pβ₁d / (1 − d + pβ₁d)` (`N_exβ₁/(1 + N_exβ₁)` for Poisson pumping),
/// so `Q_f = −x`.
pub fn q_field_two_level(cfg: &PumpConfig) -> Result<f64> {
    check_point(cfg)?;
    let b1 = beta(SOLVABLE_GT, 1);
    let n = cfg.n_ex();
    let x = if cfg.is_poisson() {
        n * b1 / (1.0 + n * b1)
    } else {
        let d = (-cfg.p / n).exp();
        cfg.p * b1 * d / (1.0 - d + cfg.p * b1 * d)
    };
    Ok(-x)
}
