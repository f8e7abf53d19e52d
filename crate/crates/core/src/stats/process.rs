//! Counting processes on the population sector.
//!
//! Every window reduces to one of two shapes. A discrete window applies a
//! step map `M = A(q_0 + c F_0)` a fixed number `K` of times, and a detection
//! at level ν inserts `c η_ν A F_ν` in place of one step. A continuous window
//! evolves under `G = L + R(F_0 − 1)` for a time `t`, and a detection
//! inserts `R η_ν F_ν`. Counting statistics only involve traces of such
//! products applied to a diagonal state, so the population sector is exact.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockSpace};
use crate::linalg::solve_trace_free;
use crate::maps::{steady_state_in, FieldModel, MapKind};
use crate::superop::{damping_propagator, PumpConfig, Sector};

use super::{Level, Window};

/// Relative gap between `R t / p` and its nearest integer above which a
/// rounding warning is logged.
pub const ROUNDING_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum Clock {
    /// `K` applications of the step map; `None` for `K → ∞`.
    Discrete {
        a: DMatrix<f64>,
        q0: f64,
        c: f64,
        steps: Option<u64>,
    },
    /// Evolution under the generator for a time; `None` for `t → ∞`.
    Continuous {
        generator: DMatrix<f64>,
        rate: f64,
        time: Option<f64>,
    },
}

/// Everything needed to count detections in one window.
#[derive(Debug, Clone)]
pub struct CountingProcess {
    pub cfg: PumpConfig,
    pub space: FockSpace,
    pub window: Window,
    pub clock: Clock,
    /// `M` for a discrete clock, `G` for a continuous one.
    pub evolution: DMatrix<f64>,
    /// Populations of the steady state of this window's map.
    pub stationary: DVector<f64>,
    /// Unweighted `F_e`, `F_g`.
    pub emission: [DMatrix<f64>; 2],
    /// `F_nd`, the atom passes undetected.
    pub undetected: DMatrix<f64>,
    pub lindblad: DMatrix<f64>,
}

fn idx(level: Level) -> usize {
    match level {
        Level::Excited => 0,
        Level::Ground => 1,
    }
}

impl CountingProcess {
    pub fn new(cfg: &PumpConfig, window: Window, space: FockSpace) -> Result<Self> {
        cfg.validate()?;
        let model = FieldModel::new(cfg, space, Sector::Populations)?;
        let f0 = model.f0.populations()?.clone();
        let l = model.lindblad.populations()?.clone();
        let emission = [
            model.gain.excited.populations()?.clone(),
            model.gain.ground.populations()?.clone(),
        ];
        let undetected = model.detection()?.undetected.populations()?.clone();
        let id = DMatrix::identity(space.dim(), space.dim());
        let (clock, evolution, kind) = match window {
            Window::Atoms(n) => {
                if n == Some(0) {
                    return Err(Error::InvalidWindow("a fixed-N window needs N ≥ 1".into()));
                }
                let kind = MapKind::fixed_n(cfg);
                let a = if cfg.is_poisson() {
                    model.poisson_gap(cfg.rate)?.populations()?.clone()
                } else {
                    let e = damping_propagator(&model.lindblad, cfg.slot())?;
                    let ep = e.populations()?;
                    let resolvent = (&id - ep * (1.0 - cfg.p))
                        .try_inverse()
                        .ok_or_else(|| Error::SingularMap("1 − (1−p) exp(LT)".into()))?;
                    resolvent * ep * cfg.p
                };
                let m = &a * &f0;
                let clock = Clock::Discrete {
                    a,
                    q0: 0.0,
                    c: 1.0,
                    steps: n.map(|n| n as u64),
                };
                (clock, m, kind)
            }
            Window::Time(t) => {
                if let Some(t) = t {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(Error::InvalidWindow(format!("collection time {t} must be positive")));
                    }
                }
                let kind = MapKind::fixed_t(cfg);
                if cfg.is_poisson() {
                    let g = model.generator()?.populations()?.clone();
                    let clock = Clock::Continuous {
                        generator: g.clone(),
                        rate: cfg.rate,
                        time: t,
                    };
                    (clock, g, kind)
                } else {
                    let steps = t.map(|t| slots_in(t, cfg)).transpose()?;
                    let a = damping_propagator(&model.lindblad, cfg.slot())?.populations()?.clone();
                    let m = &a * (&id * (1.0 - cfg.p) + &f0 * cfg.p);
                    let clock = Clock::Discrete {
                        a,
                        q0: 1.0 - cfg.p,
                        c: cfg.p,
                        steps,
                    };
                    (clock, m, kind)
                }
            }
        };
        let stationary = steady_state_in(kind, cfg, space)?.populations();
        Ok(Self {
            cfg: *cfg,
            space,
            window,
            clock,
            evolution,
            stationary,
            emission,
            undetected,
            lindblad: l,
        })
    }

    pub fn eta(&self, level: Level) -> f64 {
        match level {
            Level::Excited => self.cfg.eta_e,
            Level::Ground => self.cfg.eta_g,
        }
    }

    pub fn emission(&self, level: Level) -> &DMatrix<f64> {
        &self.emission[idx(level)]
    }

    /// `F_{ν,d} = η_ν F_ν`.
    pub fn detection(&self, level: Level) -> DMatrix<f64> {
        self.emission(level) * self.eta(level)
    }

    /// `Tr[F_ν ρ_ss]`, the probability that an active atom leaves in ν.
    pub fn exit_probability(&self, level: Level) -> f64 {
        (self.emission(level) * &self.stationary).sum()
    }

    /// Detections of level ν per active atom in the steady state.
    pub fn mean_per_atom(&self, level: Level) -> f64 {
        self.eta(level) * self.exit_probability(level)
    }

    /// The operator inserted by one detection: `c A F_ν` or `R F_ν`, without
    /// the efficiency.
    pub fn click(&self, level: Level) -> DMatrix<f64> {
        match &self.clock {
            Clock::Discrete { a, c, .. } => a * self.emission(level) * *c,
            Clock::Continuous { rate, .. } => self.emission(level) * *rate,
        }
    }

    /// `c η_ν` or `R η_ν`: the factor that turns `Tr[F_ν ρ_ss]` into counts
    /// per step or per unit time.
    pub fn count_scale(&self, level: Level) -> f64 {
        let base = match &self.clock {
            Clock::Discrete { c, .. } => *c,
            Clock::Continuous { rate, .. } => *rate,
        };
        base * self.eta(level)
    }

    /// Mean count over a finite window from the steady state.
    pub fn mean_count(&self, level: Level) -> Option<f64> {
        let length = match &self.clock {
            Clock::Discrete { steps, .. } => steps.map(|k| k as f64),
            Clock::Continuous { time, .. } => *time,
        };
        length.map(|len| len * self.count_scale(level) * self.exit_probability(level))
    }

    /// Mandel Q from the direct operator formula, with the stationary
    /// component of the pair sum summed in closed form and the rest by
    /// linear solves on the trace-free subspace.
    pub fn q_direct(&self, level: Level) -> Result<f64> {
        let t_nu = self.exit_probability(level);
        let scale = self.count_scale(level);
        if !(scale * t_nu > 0.0) {
            return Err(Error::UndefinedQ);
        }
        let f = self.emission(level);
        let r = &self.stationary;
        match &self.clock {
            Clock::Discrete { a, steps, .. } => {
                let w = a * (f * r);
                let w_perp = &w - r * w.sum();
                let s = DMatrix::identity(r.len(), r.len()) - &self.evolution;
                let y1 = solve_trace_free(&s, r, &w_perp)?;
                let fw = match steps {
                    None => y1,
                    Some(k) => {
                        let y2 = solve_trace_free(&s, r, &y1)?;
                        let mk_y2 = power_apply(&self.evolution, *k, &y2);
                        &y1 - (&y2 - mk_y2) / (*k as f64)
                    }
                };
                Ok(-scale * t_nu + 2.0 * scale / t_nu * (f * fw).sum())
            }
            Clock::Continuous { generator, time, .. } => {
                let w = f * r;
                let w_perp = &w - r * w.sum();
                let neg_g = -generator;
                // y1 = G⁻¹ w⊥ on the trace-free subspace
                let y1 = -solve_trace_free(&neg_g, r, &w_perp)?;
                let gw = match time {
                    None => -y1,
                    Some(t) => {
                        let y2 = -solve_trace_free(&neg_g, r, &y1)?;
                        let e = (generator * *t).exp();
                        (&e * &y2 - &y2 - &y1 * *t) / *t
                    }
                };
                Ok(2.0 * scale / t_nu * (f * gw).sum())
            }
        }
    }

    /// `⟨N⟩` and `⟨N(N−1)⟩` of level ν over a finite window starting from
    /// the given populations, by propagating the first two derivatives of
    /// the counting map alongside the state.
    pub fn factorial_moments(&self, level: Level, start: &DVector<f64>) -> Result<(f64, f64)> {
        let x = self.click(level) * self.eta(level);
        match &self.clock {
            Clock::Discrete { steps, .. } => {
                let k = steps.ok_or_else(|| Error::InvalidWindow("moments need a finite window".into()))?;
                let m = &self.evolution;
                let (mut s0, mut s1, mut s2) =
                    (start.clone(), DVector::zeros(start.len()), DVector::zeros(start.len()));
                for _ in 0..k {
                    let n2 = m * &s2 + &x * &s1 * 2.0;
                    let n1 = m * &s1 + &x * &s0;
                    s0 = m * &s0;
                    s1 = n1;
                    s2 = n2;
                }
                Ok((s1.sum(), s2.sum()))
            }
            Clock::Continuous { generator, time, .. } => {
                let t = time.ok_or_else(|| Error::InvalidWindow("moments need a finite window".into()))?;
                let d = start.len();
                // d/dt (σ2, σ1, σ0) = [[G, 2X, 0], [0, G, X], [0, 0, G]] (σ2, σ1, σ0)
                let mut b = DMatrix::zeros(3 * d, 3 * d);
                for blk in 0..3 {
                    b.view_mut((blk * d, blk * d), (d, d)).copy_from(generator);
                }
                b.view_mut((0, d), (d, d)).copy_from(&(&x * 2.0));
                b.view_mut((d, 2 * d), (d, d)).copy_from(&x);
                let mut v = DVector::zeros(3 * d);
                v.rows_mut(2 * d, d).copy_from(start);
                let out = (b * t).exp() * v;
                Ok((out.rows(d, d).sum(), out.rows(0, d).sum()))
            }
        }
    }
}

/// Number of slots `K = round(R t / p)` in a fixed-time window.
pub fn slots_in(t: f64, cfg: &PumpConfig) -> Result<u64> {
    let exact = t / cfg.slot();
    let k = exact.round();
    if k < 1.0 {
        return Err(Error::InvalidWindow(format!(
            "collection time {t} is shorter than one slot ({})",
            cfg.slot()
        )));
    }
    if (exact - k).abs() > ROUNDING_TOL * k.max(1.0) {
        log::warn!("R t / p = {exact} is not an integer; using K = {k}");
    }
    Ok(k as u64)
}

/// `M^k v` by repeated squaring of `M`.
pub(crate) fn power_apply(m: &DMatrix<f64>, mut k: u64, v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            out = &base * out;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    out
}

/// Populations of a start state on the process space.
pub(crate) fn start_populations(space: FockSpace, state: &DensityMatrix) -> Result<DVector<f64>> {
    if state.space() != space {
        return Err(Error::Dimension {
            expected: space.dim(),
            found: state.space().dim(),
        });
    }
    Ok(state.populations())
}
