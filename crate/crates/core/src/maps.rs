//! Stroboscopic field evolution: conditional updates on detection, joint
//! probabilities of detection sequences, ensemble-averaged one-step maps and
//! the steady state they share.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{make_space, DensityMatrix, FockSpace};
use crate::superop::{
    composite_maps, damping_propagator, detection_maps, gain_maps, lindblad, DetectionMaps, GainMaps, PumpConfig,
    Sector, Superoperator,
};

/// Eigenvalues this close to the fixed point count as the fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-9;
/// A second eigenvalue this close to the fixed point makes it ambiguous.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Steady-state mass on `|n_max⟩` above which a boundary leak is reported.
pub const BOUNDARY_LEAK_WARN: f64 = 1e-10;
/// Largest population allowed in the top quarter of an adaptive truncation.
pub const TRUNCATION_TAIL: f64 = 1e-13;
/// Hard ceiling for adaptive truncation.
pub const MAX_N_MAX: usize = 400;
/// Probabilities below this are treated as impossible outcomes.
pub const IMPOSSIBLE: f64 = 1e-300;

/// Detection result for one exiting atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Detected in the upper state.
    Excited,
    /// Detected in the lower state.
    Ground,
    /// Missed by both detectors.
    Undetected,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Excited, Outcome::Ground, Outcome::Undetected];

    pub fn label(self) -> char {
        match self {
            Outcome::Excited => 'e',
            Outcome::Ground => 'g',
            Outcome::Undetected => 'n',
        }
    }
}

/// Ensemble-averaged one-step maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    /// One atom every `tau`: `D(τ) F_0`.
    Regular { tau: f64 },
    /// One slot of binomial pumping: `exp(LT) [1 − p + p F_0]`.
    FixedT { p: f64, slot: f64 },
    /// From one active atom to the next: `p exp(LT) F_0 / [1 − (1−p) exp(LT)]`.
    FixedN { p: f64, slot: f64 },
    /// Poisson pumping over a time `dt`: `exp(G dt)`.
    PoissonFixedT { rate: f64, dt: f64 },
    /// Poisson pumping, one active atom: `(1 − L/R)⁻¹ F_0`.
    PoissonFixedN { rate: f64 },
}

impl MapKind {
    /// The fixed-time map of `cfg`: one slot, or one mean atom spacing for
    /// Poisson pumping.
    pub fn fixed_t(cfg: &PumpConfig) -> Self {
        if cfg.is_poisson() {
            MapKind::PoissonFixedT {
                rate: cfg.rate,
                dt: 1.0 / cfg.rate,
            }
        } else {
            MapKind::FixedT {
                p: cfg.p,
                slot: cfg.slot(),
            }
        }
    }

    /// The fixed-atom-number map of `cfg`.
    pub fn fixed_n(cfg: &PumpConfig) -> Self {
        if cfg.is_poisson() {
            MapKind::PoissonFixedN { rate: cfg.rate }
        } else {
            MapKind::FixedN {
                p: cfg.p,
                slot: cfg.slot(),
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                })
            }
        };
        match *self {
            MapKind::Regular { tau } => {
                if !(tau >= 0.0 && tau.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "tau",
                        value: tau,
                        reason: "must be finite and non-negative",
                    });
                }
                Ok(())
            }
            MapKind::FixedT { p, slot } | MapKind::FixedN { p, slot } => {
                positive("p", p)?;
                crate::superop::check_unit("p", p)?;
                positive("slot", slot)
            }
            MapKind::PoissonFixedT { rate, dt } => {
                positive("rate", rate)?;
                positive("dt", dt)
            }
            MapKind::PoissonFixedN { rate } => positive("rate", rate),
        }
    }

    fn cache_key(&self) -> [u64; 3] {
        let b = f64::to_bits;
        match *self {
            MapKind::Regular { tau } => [0, b(tau), 0],
            MapKind::FixedT { p, slot } => [1, b(p), b(slot)],
            MapKind::FixedN { p, slot } => [2, b(p), b(slot)],
            MapKind::PoissonFixedT { rate, dt } => [3, b(rate), b(dt)],
            MapKind::PoissonFixedN { rate } => [4, b(rate), 0],
        }
    }
}

/// Damping and gain maps of one parameter point on one truncated space.
#[derive(Debug, Clone)]
pub struct FieldModel {
    pub cfg: PumpConfig,
    pub space: FockSpace,
    pub lindblad: Superoperator,
    pub gain: GainMaps,
    pub f0: Superoperator,
}

impl FieldModel {
    pub fn new(cfg: &PumpConfig, space: FockSpace, sector: Sector) -> Result<Self> {
        cfg.validate()?;
        let lindblad = lindblad(cfg, space, sector)?;
        let gain = gain_maps(cfg.gt_int, space, sector)?;
        let f0 = gain.total()?;
        Ok(Self {
            cfg: *cfg,
            space,
            lindblad,
            gain,
            f0,
        })
    }

    pub fn detection(&self) -> Result<DetectionMaps> {
        detection_maps(&self.gain.excited, &self.gain.ground, self.cfg.eta_e, self.cfg.eta_g)
    }

    /// `G = L + R(F_0 − 1)` for the configured rate.
    pub fn generator(&self) -> Result<Superoperator> {
        let sector = self.f0.sector();
        let id = Superoperator::identity(self.space, sector);
        self.lindblad.add(&self.f0.sub(&id)?.scale(self.cfg.rate))
    }

    /// `(1 − L/R)⁻¹`, the mean damping between Poisson arrivals.
    pub fn poisson_gap(&self, rate: f64) -> Result<Superoperator> {
        let id = Superoperator::identity(self.space, self.lindblad.sector());
        id.sub(&self.lindblad.scale(1.0 / rate))?.inverse()
    }

    /// The one-step map of `kind`.
    pub fn one_step(&self, kind: MapKind) -> Result<Superoperator> {
        kind.validate()?;
        match kind {
            MapKind::Regular { tau } => damping_propagator(&self.lindblad, tau)?.compose(&self.f0),
            MapKind::FixedT { p, slot } | MapKind::FixedN { p, slot } => {
                let cfg = PumpConfig {
                    p,
                    rate: p / slot,
                    ..self.cfg
                };
                let cm = composite_maps(&cfg, &self.lindblad, &self.f0)?;
                if matches!(kind, MapKind::FixedT { .. }) {
                    cm.lambda_slot.compose(&cm.f0_slot)
                } else {
                    cm.lambda.compose(&self.f0)
                }
            }
            MapKind::PoissonFixedT { rate, dt } => {
                let model = Self {
                    cfg: PumpConfig { rate, ..self.cfg },
                    ..self.clone()
                };
                model.generator()?.exp_scaled(dt)
            }
            MapKind::PoissonFixedN { rate } => self.poisson_gap(rate)?.compose(&self.f0),
        }
    }
}

fn sector_for(rho: &DensityMatrix) -> Sector {
    if rho.is_diagonal(0.0) {
        Sector::Populations
    } else {
        Sector::Full
    }
}

fn trace(m: &DMatrix<Complex64>) -> f64 {
    m.trace().re
}

/// Detects one atom leaving a field `ρ` and damps the field for `τ`.
///
/// Returns the normalized field `D(τ) F_{ν,d} ρ / P(ν)` and `P(ν) = Tr F_{ν,d} ρ`.
pub fn conditional_update(
    rho: &DensityMatrix,
    outcome: Outcome,
    tau: f64,
    cfg: &PumpConfig,
) -> Result<(DensityMatrix, f64)> {
    let model = FieldModel::new(cfg, rho.space(), sector_for(rho))?;
    let detected = model.detection()?.get(outcome).apply(rho.entries())?;
    let probability = trace(&detected);
    if !(probability >= IMPOSSIBLE) {
        return Err(Error::ImpossibleOutcome { outcome, probability });
    }
    let damped = damping_propagator(&model.lindblad, tau)?.apply(&detected)?;
    let next = DensityMatrix::normalized(rho.space(), damped / Complex64::new(probability, 0.0))?;
    Ok((next, probability))
}

/// Arrival times of the atoms in a detection sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Gaps `τ_1 … τ_{N−1}` between successive atoms; the first atom meets
    /// the given field directly.
    Regular(Vec<f64>),
    /// Binomial pumping with slot `T = p/R` from the configuration: the
    /// atoms in slots `k_1 < … < k_N` (counted from 1) are the excited
    /// ones among `total` slots, and the given field is the one at time 0.
    Binomial { slots: Vec<usize>, total: usize },
}

/// Joint probability of a detection sequence.
///
/// In binomial mode the field is damped for `(K − k_N + 1)T` after the last
/// atom. The trace is insensitive to that final stretch since damping keeps
/// the trace, so the result equals the one with `(K − k_N)T`.
pub fn sequence_probability(
    outcomes: &[Outcome],
    rho: &DensityMatrix,
    schedule: &Schedule,
    cfg: &PumpConfig,
) -> Result<f64> {
    let model = FieldModel::new(cfg, rho.space(), sector_for(rho))?;
    let det = model.detection()?;
    let damp = |tau: f64| damping_propagator(&model.lindblad, tau);
    let mut state = rho.entries().clone();
    match schedule {
        Schedule::Regular(gaps) => {
            if !outcomes.is_empty() && gaps.len() != outcomes.len() - 1 {
                return Err(Error::Dimension {
                    expected: outcomes.len() - 1,
                    found: gaps.len(),
                });
            }
            for (i, &o) in outcomes.iter().enumerate() {
                if i > 0 {
                    state = damp(gaps[i - 1])?.apply(&state)?;
                }
                state = det.get(o).apply(&state)?;
            }
            Ok(trace(&state))
        }
        Schedule::Binomial { slots, total } => {
            if slots.len() != outcomes.len() {
                return Err(Error::Dimension {
                    expected: outcomes.len(),
                    found: slots.len(),
                });
            }
            let increasing = slots.windows(2).all(|w| w[0] < w[1]);
            if !increasing || slots.first().is_some_and(|&k| k == 0) || slots.last().is_some_and(|&k| k > *total) {
                return Err(Error::InvalidParameter {
                    name: "slots",
                    value: *total as f64,
                    reason: "slots must increase strictly within 1..=total",
                });
            }
            let t = cfg.slot();
            let mut previous = 1;
            for (&k, &o) in slots.iter().zip(outcomes) {
                state = damp((k - previous) as f64 * t)?.apply(&state)?;
                state = det.get(o).apply(&state)?;
                previous = k;
            }
            let last = slots.last().copied().unwrap_or(0);
            state = damp((total - last + 1) as f64 * t)?.apply(&state)?;
            let n = outcomes.len() as i32;
            let weight = cfg.p.powi(n) * (1.0 - cfg.p).powi(*total as i32 - n);
            Ok(weight * trace(&state))
        }
    }
}

/// One application of the ensemble-averaged map of `kind`.
pub fn step(rho: &DensityMatrix, kind: MapKind, cfg: &PumpConfig) -> Result<DensityMatrix> {
    let model = FieldModel::new(cfg, rho.space(), sector_for(rho))?;
    let out = model.one_step(kind)?.apply(rho.entries())?;
    DensityMatrix::normalized(rho.space(), out)
}

/// Master-equation generator `G = L + R(F_0 − 1)` of Poisson pumping.
pub fn poisson_generator(cfg: &PumpConfig, space: FockSpace, sector: Sector) -> Result<Superoperator> {
    FieldModel::new(cfg, space, sector)?.generator()
}

/// Population vector of the unique fixed point of a trace-preserving
/// population map, or of the null space of a generator.
pub fn stationary_populations(m: &DMatrix<f64>, generator: bool) -> Result<DVector<f64>> {
    let d = m.nrows();
    let target = if generator { 0.0 } else { 1.0 };
    let scale = if generator {
        m.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0)
    } else {
        1.0
    };
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    let dist = |z: Complex64| (z - target).norm() / scale;
    if dist(ev[0]) > FIXED_POINT_TOL {
        return Err(Error::NoFixedPoint {
            closest: format!("{:.3e}", ev[0]),
            tolerance: FIXED_POINT_TOL,
        });
    }
    if ev.len() > 1 && dist(ev[1]) < DEGENERACY_GAP {
        return Err(Error::AmbiguousSteadyState {
            first: format!("{:.12e}", ev[0]),
            second: format!("{:.12e}", ev[1]),
            gap: DEGENERACY_GAP,
        });
    }
    // The rows of (M − 1) sum to zero, so one of them can be traded for the
    // normalization condition.
    let mut a = if generator {
        m.clone()
    } else {
        m - DMatrix::identity(d, d)
    };
    a.row_mut(0).fill(1.0);
    let mut rhs = DVector::zeros(d);
    rhs[0] = 1.0;
    let mut x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularMap("stationary solve failed".into()))?;
    let total = x.sum();
    x /= total;
    Ok(x)
}

type CacheKey = ([u64; 3], [u64; 7], usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, DensityMatrix>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, DensityMatrix>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cfg_key(cfg: &PumpConfig) -> [u64; 7] {
    [cfg.gt_int, cfg.nbar, cfg.kappa, cfg.p, cfg.rate, cfg.eta_e, cfg.eta_g].map(f64::to_bits)
}

/// Steady state of `kind` on an explicit truncated space.
///
/// Solved on the population sector: every map keeps diagonal matrices
/// diagonal and the fixed point is unique, so it is diagonal.
pub fn steady_state_in(kind: MapKind, cfg: &PumpConfig, space: FockSpace) -> Result<DensityMatrix> {
    let key = (kind.cache_key(), cfg_key(cfg), space.n_max());
    if let Some(rho) = cache().read().expect("steady-state cache poisoned").get(&key) {
        return Ok(rho.clone());
    }
    let model = FieldModel::new(cfg, space, Sector::Populations)?;
    let pops = match kind {
        MapKind::PoissonFixedT { rate, .. } => {
            let model = FieldModel {
                cfg: PumpConfig { rate, ..*cfg },
                ..model
            };
            stationary_populations(model.generator()?.populations()?, true)?
        }
        _ => stationary_populations(model.one_step(kind)?.populations()?, false)?,
    };
    // Population parked on a trapping level cannot leak upwards.
    let sealed = cfg.nbar == 0.0 && trapping_level(cfg.gt_int, space.n_max()) == Some(space.n_max());
    let top = pops[space.n_max()];
    if top > BOUNDARY_LEAK_WARN && !sealed {
        log::warn!(
            "steady state puts {top:.3e} on the truncation level n_max = {}",
            space.n_max()
        );
    }
    let rho = DensityMatrix::from_populations(space, pops.as_slice())?;
    cache()
        .write()
        .expect("steady-state cache poisoned")
        .insert(key, rho.clone());
    Ok(rho)
}

/// Steady state of `kind` on the truncation picked by [`choose_truncation`].
pub fn steady_state(kind: MapKind, cfg: &PumpConfig) -> Result<DensityMatrix> {
    let space = make_space(choose_truncation(cfg)?)?;
    steady_state_in(kind, cfg, space)
}

/// Lowest photon number `n_q` with `gt_int √(n_q+1) = rπ` for an integer
/// `r ≥ 1`, searched up to `limit`.
pub fn trapping_level(gt_int: f64, limit: usize) -> Option<usize> {
    (0..=limit).find(|&n| {
        let x = gt_int * ((n + 1) as f64).sqrt() / PI;
        let r = x.round();
        r >= 1.0 && (x - r).abs() <= 1e-12 * x.max(1.0)
    })
}

/// Highest retained photon number for `cfg`.
///
/// At zero temperature a trapping level `n_q` caps the photon number in the
/// steady state, so `n_max = n_q` is exact. Otherwise the space grows until
/// the steady state puts less than [`TRUNCATION_TAIL`] on each level in its
/// top quarter.
pub fn choose_truncation(cfg: &PumpConfig) -> Result<usize> {
    cfg.validate()?;
    if cfg.nbar == 0.0 {
        if let Some(nq) = trapping_level(cfg.gt_int, MAX_N_MAX) {
            return Ok(nq.max(1));
        }
    }
    let kind = MapKind::fixed_n(cfg);
    if cfg.rate == 0.0 {
        // no pumping: the field is thermal
        let thermal_reach = if cfg.nbar > 0.0 {
            (30.0 / ((1.0 + cfg.nbar) / cfg.nbar).ln()).ceil() as usize
        } else {
            1
        };
        return Ok(thermal_reach.clamp(1, MAX_N_MAX));
    }
    let mut n_max = 24usize;
    loop {
        let space = make_space(n_max)?;
        let model = FieldModel::new(cfg, space, Sector::Populations)?;
        let pops = stationary_populations(model.one_step(kind)?.populations()?, false)?;
        let quarter = n_max - n_max / 4;
        let tail = pops.iter().skip(quarter).fold(0.0f64, |a, &x| a.max(x.abs()));
        if tail < TRUNCATION_TAIL {
            return Ok(n_max);
        }
        if n_max >= MAX_N_MAX {
            log::warn!("truncation capped at n_max = {MAX_N_MAX}; tail population {tail:.3e}");
            return Ok(MAX_N_MAX);
        }
        n_max = (n_max * 3 / 2).min(MAX_N_MAX);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;
    use crate::superop::beta;
    use std::f64::consts::SQRT_2;

    const TRAP: f64 = PI / SQRT_2;

    fn mixed(space: FockSpace) -> DensityMatrix {
        let d = space.dim();
        let m = DMatrix::from_fn(d, d, |i, j| {
            Complex64::new(((i + 1) * (j + 2)) as f64 * 0.01, (i as f64 - j as f64) * 0.003)
        });
        let rho = &m * m.adjoint();
        DensityMatrix::normalized(space, rho).unwrap()
    }

    #[test]
    fn no_emission_without_interaction() {
        let space = make_space(3).unwrap();
        let cfg = PumpConfig::new(0.0, 0.0, 1.0, 1.0);
        let rho = DensityMatrix::fock(space, 1).unwrap();
        assert!(matches!(
            conditional_update(&rho, Outcome::Ground, 1.0, &cfg),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn ground_detection_from_vacuum_adds_a_photon() {
        let space = make_space(1).unwrap();
        let cfg = PumpConfig::new(TRAP, 0.0, 1.0, 1.0);
        let vac = DensityMatrix::fock(space, 0).unwrap();
        let (next, p) = conditional_update(&vac, Outcome::Ground, 0.0, &cfg).unwrap();
        assert!((p - beta(TRAP, 1)).abs() < 1e-15);
        assert!((next.populations()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let space = make_space(4).unwrap();
        let cfg = PumpConfig::new(1.2, 0.1, 0.5, 2.0).with_efficiencies(0.3, 0.7);
        let rho = mixed(space);
        let total: f64 = Outcome::ALL
            .iter()
            .map(|&o| conditional_update(&rho, o, 0.3, &cfg).unwrap().1)
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sequences_are_complete_and_marginalize() {
        let space = make_space(4).unwrap();
        let cfg = PumpConfig::new(1.2, 0.1, 0.5, 2.0).with_efficiencies(0.6, 0.9);
        let rho = mixed(space);
        let gaps = Schedule::Regular(vec![0.4, 0.7]);
        let mut total = 0.0;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                let short = sequence_probability(&[a, b], &rho, &Schedule::Regular(vec![0.4]), &cfg).unwrap();
                let mut marg = 0.0;
                for c in Outcome::ALL {
                    let p = sequence_probability(&[a, b, c], &rho, &gaps, &cfg).unwrap();
                    marg += p;
                    total += p;
                }
                assert!((marg - short).abs() < 1e-12);
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_sequence_is_detection_probability() {
        let space = make_space(4).unwrap();
        let cfg = PumpConfig::new(1.2, 0.1, 0.5, 2.0).with_efficiencies(0.6, 0.9);
        let rho = mixed(space);
        let p = sequence_probability(&[Outcome::Ground], &rho, &Schedule::Regular(vec![]), &cfg).unwrap();
        let (_, q) = conditional_update(&rho, Outcome::Ground, 0.0, &cfg).unwrap();
        assert!((p - q).abs() < 1e-15);
    }

    #[test]
    fn binomial_sequences_sum_over_slots() {
        // Summing the binomial joint probability over outcomes and slot
        // choices with N active atoms among K slots gives C(K,N) p^N (1−p)^(K−N).
        let space = make_space(3).unwrap();
        let cfg = PumpConfig::new(1.0, 0.2, 0.3, 1.5).with_efficiencies(0.5, 0.5);
        let rho = mixed(space);
        let k = 4;
        let mut total = 0.0;
        for k1 in 1..=k {
            for k2 in (k1 + 1)..=k {
                for a in Outcome::ALL {
                    for b in Outcome::ALL {
                        let s = Schedule::Binomial {
                            slots: vec![k1, k2],
                            total: k,
                        };
                        total += sequence_probability(&[a, b], &rho, &s, &cfg).unwrap();
                    }
                }
            }
        }
        let expected = 6.0 * 0.3f64.powi(2) * 0.7f64.powi(2);
        assert!((total - expected).abs() < 1e-13);
    }

    #[test]
    fn binomial_with_unit_p_is_regular() {
        let space = make_space(4).unwrap();
        let rho = mixed(space);
        let mut cfg = PumpConfig::new(1.2, 0.1, 1.0, 2.0);
        let reg = step(&rho, MapKind::Regular { tau: cfg.slot() }, &cfg).unwrap();
        let fixt = step(&rho, MapKind::fixed_t(&cfg), &cfg).unwrap();
        assert!((reg.entries() - fixt.entries()).norm() < 1e-14);
        cfg.eta_e = 0.4;
        cfg.eta_g = 0.2;
        let other = step(&rho, MapKind::fixed_t(&cfg), &cfg).unwrap();
        assert_eq!(other.entries(), fixt.entries());
    }

    #[test]
    fn fixed_n_tends_to_poisson() {
        let space = make_space(5).unwrap();
        let rho = mixed(space);
        let base = PumpConfig::new(1.1, 0.2, 0.0, 3.0);
        let poisson = step(&rho, MapKind::PoissonFixedN { rate: 3.0 }, &base).unwrap();
        let err = |p: f64| {
            let kind = MapKind::FixedN { p, slot: p / 3.0 };
            (step(&rho, kind, &base).unwrap().entries() - poisson.entries()).norm()
        };
        let (e1, e2) = (err(2e-4), err(1e-4));
        assert!(e1 < 1e-3);
        // first-order convergence
        assert!((e1 / e2 - 2.0).abs() < 0.05);
    }

    #[test]
    fn generator_without_pumping_is_damping() {
        let space = make_space(3).unwrap();
        let cfg = PumpConfig::new(1.0, 0.3, 0.0, 0.0);
        let g = poisson_generator(&cfg, space, Sector::Full).unwrap();
        let l = lindblad(&cfg, space, Sector::Full).unwrap();
        assert_eq!(g.matrix().unwrap(), l.matrix().unwrap());
    }

    #[test]
    fn trapping_generator_null_space() {
        let space = make_space(1).unwrap();
        let cfg = PumpConfig::new(TRAP, 0.0, 0.0, 1e3);
        let g = poisson_generator(&cfg, space, Sector::Populations).unwrap();
        let pops = stationary_populations(g.populations().unwrap(), true).unwrap();
        // two-level balance: gain N_ex β₁ out of |0⟩ against unit decay out of |1⟩
        let gain = 1e3 * beta(TRAP, 1);
        assert!((pops[1] - gain / (gain + 1.0)).abs() < 1e-12);
        assert!(pops[1] > 0.998);
    }

    #[test]
    fn weak_pumping_leaves_the_field_thermal() {
        let cfg = PumpConfig::new(1.54, 0.145, 0.5, 1e-4);
        let rho = steady_state(MapKind::fixed_n(&cfg), &cfg).unwrap();
        let th = thermal_state(0.145, &rho.space()).unwrap();
        assert!(rho.trace_distance(&th) < 1e-6);
    }

    #[test]
    fn strong_pumping_reaches_the_trap() {
        let cfg = PumpConfig::new(TRAP, 0.0, 0.5, 1e4);
        assert_eq!(choose_truncation(&cfg).unwrap(), 1);
        let rho = steady_state(MapKind::fixed_t(&cfg), &cfg).unwrap();
        assert!(rho.populations()[1] > 0.999);
    }

    #[test]
    fn fixed_time_and_fixed_number_share_the_steady_state() {
        let cfg = PumpConfig::new(1.54, 0.145, 0.5, 5.0);
        let a = steady_state(MapKind::fixed_t(&cfg), &cfg).unwrap();
        let b = steady_state(MapKind::fixed_n(&cfg), &cfg).unwrap();
        assert!(a.trace_distance(&b) < 1e-10);
        let fixed = step(&a, MapKind::fixed_t(&cfg), &cfg).unwrap();
        let residual: f64 = (fixed.populations() - a.populations()).abs().sum();
        assert!(residual < 1e-11);
    }

    #[test]
    fn trapping_levels() {
        assert_eq!(trapping_level(TRAP, 50), Some(1));
        assert_eq!(trapping_level(PI / 2.0, 50), Some(3));
        assert_eq!(trapping_level(PI / 19f64.sqrt(), 50), Some(18));
        assert_eq!(trapping_level(1.54, 50), None);
        assert_eq!(trapping_level(0.0, 50), None);
    }

    #[test]
    fn degenerate_fixed_point_is_reported() {
        let m = DMatrix::identity(3, 3);
        assert!(matches!(
            stationary_populations(&m, false),
            Err(Error::AmbiguousSteadyState { .. })
        ));
    }
}
