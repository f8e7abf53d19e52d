//! Monte Carlo trajectories of the full measurement chain.
//!
//! Atoms arrive in Bernoulli slots (or as a Poisson stream), interact with
//! the field, and are detected with finite efficiency. The cavity damping is
//! unravelled into photon loss and gain jumps as well, so each conditional
//! field is a Fock state. Averaging over the unobserved cavity jumps gives
//! back the conditional density matrix of [`conditional_update`] followed by
//! damping, so the atomic records have exactly the analytic statistics. The
//! sampler shares no code with the superoperator machinery beyond the
//! parameter type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{make_space, DensityMatrix};
use crate::maps::{choose_truncation, conditional_update, steady_state_in, MapKind, Outcome};
use crate::stats::{slots_in, Method, QReport, StdErrors, Windows};
use crate::superop::PumpConfig;

/// Fewest trajectories [`simulate`] accepts.
pub const MIN_TRAJECTORIES: usize = 1000;
/// Number of jackknife blocks.
pub const JACKKNIFE_BLOCKS: usize = 200;
/// Default burn-in before the fixed-t window, in cavity decay times.
pub const BURN_IN_DECAY_TIMES: f64 = 20.0;

/// Sampling options. The defaults burn in for 20 decay times before the
/// fixed-t window and for `⌈20 N_ex⌉` atoms before the fixed-N window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulation {
    pub n_traj: usize,
    pub windows: Windows,
    pub seed: u64,
    pub burn_in_time: f64,
    pub burn_in_atoms: Option<usize>,
}

impl Simulation {
    pub fn new(n_traj: usize, windows: Windows, seed: u64) -> Self {
        Self {
            n_traj,
            windows,
            seed,
            burn_in_time: f64::NAN,
            burn_in_atoms: None,
        }
    }
}

/// One detection-relevant atom: its arrival time, its slot in binomial mode,
/// and what the detectors reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub slot: Option<u64>,
    pub outcome: Outcome,
}

/// Window counts of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tallies {
    /// `(N_e, N_g)` over the fixed-N window.
    pub atoms: (u64, u64),
    /// `(N_e, N_g)` over the fixed-t window.
    pub time: (u64, u64),
    /// Photon number when the fixed-t window opens.
    pub photons: u64,
}

/// A recorded trajectory: the atoms inside the fixed-t window, then those
/// inside the fixed-N window.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub index: u64,
    pub time_events: Vec<Event>,
    pub atom_events: Vec<Event>,
    pub tallies: Tallies,
}

/// Photon-number dynamics on the truncated ladder.
#[derive(Debug, Clone)]
struct Ladder {
    n_max: usize,
    /// `β_{n+1}`: probability that an excited atom meeting `|n⟩` emits.
    emit: Vec<f64>,
    down: Vec<f64>,
    up: Vec<f64>,
    start: Vec<f64>,
}

impl Ladder {
    fn new(cfg: &PumpConfig, start: Vec<f64>) -> Self {
        let n_max = start.len() - 1;
        let gt = cfg.gt_int;
        let two_kappa = 2.0 * cfg.kappa;
        let emit = (0..=n_max)
            .map(|n| {
                if n < n_max {
                    (gt * ((n + 1) as f64).sqrt()).sin().powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let down = (0..=n_max).map(|n| two_kappa * (cfg.nbar + 1.0) * n as f64).collect();
        let up = (0..=n_max)
            .map(|n| {
                if n < n_max {
                    two_kappa * cfg.nbar * (n + 1) as f64
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            n_max,
            emit,
            down,
            up,
            start,
        }
    }

    /// Runs the cavity jump process for `tau`.
    fn damp(&self, n: &mut usize, mut tau: f64, rng: &mut ChaCha8Rng) {
        loop {
            let total = self.down[*n] + self.up[*n];
            if total == 0.0 {
                return;
            }
            let wait = exponential(rng) / total;
            if wait >= tau {
                return;
            }
            tau -= wait;
            if rng.random::<f64>() * total < self.down[*n] {
                *n -= 1;
            } else {
                *n += 1;
            }
        }
    }

    fn sample_start(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (n, &w) in self.start.iter().enumerate() {
            acc += w;
            if u < acc {
                return n;
            }
        }
        self.n_max
    }
}

fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Everything fixed across trajectories.
#[derive(Debug, Clone)]
struct Sampler {
    cfg: PumpConfig,
    ladder: Ladder,
    slots: Option<u64>,
    burn_in_slots: u64,
    burn_in_time: f64,
    burn_in_atoms: usize,
    atoms: usize,
    time: f64,
}

impl Sampler {
    fn new(cfg: &PumpConfig, sim: &Simulation) -> Result<Self> {
        cfg.validate()?;
        if cfg.rate == 0.0 {
            return Err(Error::MonteCarlo("no atoms arrive at zero pumping rate".into()));
        }
        let atoms = sim
            .windows
            .atoms
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidWindow("sampling needs a finite fixed-N window".into()))?;
        let time = sim
            .windows
            .time
            .filter(|t| *t > 0.0 && t.is_finite())
            .ok_or_else(|| Error::InvalidWindow("sampling needs a finite fixed-t window".into()))?;
        let burn_in_time = if sim.burn_in_time.is_nan() {
            BURN_IN_DECAY_TIMES * cfg.decay_time()
        } else {
            sim.burn_in_time
        };
        if !(burn_in_time >= 0.0 && burn_in_time.is_finite()) {
            return Err(Error::MonteCarlo(format!(
                "burn-in time {burn_in_time} must be finite and non-negative"
            )));
        }
        let burn_in_atoms = sim
            .burn_in_atoms
            .unwrap_or_else(|| (BURN_IN_DECAY_TIMES * cfg.n_ex()).ceil().max(1.0) as usize);
        let space = make_space(choose_truncation(cfg)?)?;
        let start = steady_state_in(MapKind::fixed_t(cfg), cfg, space)?
            .populations()
            .iter()
            .map(|x| x.max(0.0))
            .collect();
        let (slots, burn_in_slots) = if cfg.is_poisson() {
            (None, 0)
        } else {
            (Some(slots_in(time, cfg)?), (burn_in_time / cfg.slot()).ceil() as u64)
        };
        Ok(Self {
            cfg: *cfg,
            ladder: Ladder::new(cfg, start),
            slots,
            burn_in_slots,
            burn_in_time,
            burn_in_atoms,
            atoms,
            time,
        })
    }

    /// One atom meets `|n⟩`; returns the detector report.
    fn atom(&self, n: &mut usize, rng: &mut ChaCha8Rng) -> Outcome {
        let emits = rng.random::<f64>() < self.ladder.emit[*n];
        let (level, eta) = if emits {
            *n += 1;
            (Outcome::Ground, self.cfg.eta_g)
        } else {
            (Outcome::Excited, self.cfg.eta_e)
        };
        if rng.random::<f64>() < eta {
            level
        } else {
            Outcome::Undetected
        }
    }

    fn run(&self, seed: u64, index: u64, mut log: Option<(&mut Vec<Event>, &mut Vec<Event>)>) -> Tallies {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut n = self.ladder.sample_start(&mut rng);
        let mut tallies = Tallies::default();
        let tally = |counts: &mut (u64, u64), o: Outcome| match o {
            Outcome::Excited => counts.0 += 1,
            Outcome::Ground => counts.1 += 1,
            Outcome::Undetected => {}
        };
        match self.slots {
            Some(k) => {
                let p = self.cfg.p;
                let slot = self.cfg.slot();
                // a slot: an excited atom with probability p, then damping for T
                for _ in 0..self.burn_in_slots {
                    if rng.random::<f64>() < p {
                        self.atom(&mut n, &mut rng);
                    }
                    self.ladder.damp(&mut n, slot, &mut rng);
                }
                tallies.photons = n as u64;
                for s in 0..k {
                    if rng.random::<f64>() < p {
                        let o = self.atom(&mut n, &mut rng);
                        tally(&mut tallies.time, o);
                        if let Some((events, _)) = log.as_mut() {
                            events.push(Event {
                                time: s as f64 * slot,
                                slot: Some(s),
                                outcome: o,
                            });
                        }
                    }
                    self.ladder.damp(&mut n, slot, &mut rng);
                }
                let mut seen = 0usize;
                let mut s = k;
                while seen < self.burn_in_atoms + self.atoms {
                    if rng.random::<f64>() < p {
                        let o = self.atom(&mut n, &mut rng);
                        if seen >= self.burn_in_atoms {
                            tally(&mut tallies.atoms, o);
                            if let Some((_, events)) = log.as_mut() {
                                events.push(Event {
                                    time: s as f64 * slot,
                                    slot: Some(s),
                                    outcome: o,
                                });
                            }
                        }
                        seen += 1;
                    }
                    self.ladder.damp(&mut n, slot, &mut rng);
                    s += 1;
                }
            }
            None => {
                let rate = self.cfg.rate;
                let mut clock = -self.burn_in_time;
                let mut next = clock + exponential(&mut rng) / rate;
                while next < 0.0 {
                    self.ladder.damp(&mut n, next - clock, &mut rng);
                    self.atom(&mut n, &mut rng);
                    clock = next;
                    next += exponential(&mut rng) / rate;
                }
                self.ladder.damp(&mut n, -clock, &mut rng);
                clock = 0.0;
                tallies.photons = n as u64;
                while next < self.time {
                    self.ladder.damp(&mut n, next - clock, &mut rng);
                    let o = self.atom(&mut n, &mut rng);
                    tally(&mut tallies.time, o);
                    if let Some((events, _)) = log.as_mut() {
                        events.push(Event {
                            time: next,
                            slot: None,
                            outcome: o,
                        });
                    }
                    clock = next;
                    next += exponential(&mut rng) / rate;
                }
                for seen in 0..self.burn_in_atoms + self.atoms {
                    self.ladder.damp(&mut n, next - clock, &mut rng);
                    let o = self.atom(&mut n, &mut rng);
                    if seen >= self.burn_in_atoms {
                        tally(&mut tallies.atoms, o);
                        if let Some((_, events)) = log.as_mut() {
                            events.push(Event {
                                time: next,
                                slot: None,
                                outcome: o,
                            });
                        }
                    }
                    clock = next;
                    next += exponential(&mut rng) / rate;
                }
            }
        }
        tallies
    }
}

/// Replays trajectory `index` of the stream seeded by `sim.seed`, keeping
/// every counted event.
pub fn trajectory(cfg: &PumpConfig, sim: &Simulation, index: u64) -> Result<Trajectory> {
    let sampler = Sampler::new(cfg, sim)?;
    let (mut time_events, mut atom_events) = (Vec::new(), Vec::new());
    let tallies = sampler.run(sim.seed, index, Some((&mut time_events, &mut atom_events)));
    Ok(Trajectory {
        seed: sim.seed,
        index,
        time_events,
        atom_events,
        tallies,
    })
}

/// Window tallies of every trajectory, in index order.
pub fn tallies(cfg: &PumpConfig, sim: &Simulation) -> Result<Vec<Tallies>> {
    let sampler = Sampler::new(cfg, sim)?;
    Ok((0..sim.n_traj as u64)
        .into_par_iter()
        .map(|i| sampler.run(sim.seed, i, None))
        .collect())
}

/// Empirical report from `n_traj` trajectories with default burn-in.
pub fn simulate(cfg: &PumpConfig, n_traj: usize, windows: Windows, seed: u64) -> Result<QReport> {
    simulate_with(cfg, &Simulation::new(n_traj, windows, seed))
}

/// Empirical report with block-jackknife standard errors.
pub fn simulate_with(cfg: &PumpConfig, sim: &Simulation) -> Result<QReport> {
    if sim.n_traj < MIN_TRAJECTORIES {
        return Err(Error::MonteCarlo(format!(
            "{} trajectories requested; at least {MIN_TRAJECTORIES} are needed",
            sim.n_traj
        )));
    }
    let all = tallies(cfg, sim)?;
    let column = |f: &dyn Fn(&Tallies) -> u64| all.iter().map(|t| f(t) as f64).collect::<Vec<_>>();
    let ne = column(&|t| t.atoms.0);
    let ng = column(&|t| t.atoms.1);
    let nte = column(&|t| t.time.0);
    let ntg = column(&|t| t.time.1);
    let photons = column(&|t| t.photons);
    let (q_e, se_q_e) = jackknife(&ne, mandel);
    let (q_g, se_q_g) = jackknife(&ng, mandel);
    let (qt_e, se_qt_e) = jackknife(&nte, mandel);
    let (qt_g, se_qt_g) = jackknife(&ntg, mandel);
    let (mean_ne, se_ne) = jackknife(&ne, |m| m.mean());
    let (mean_ng, se_ng) = jackknife(&ng, |m| m.mean());
    Ok(QReport {
        q_e,
        q_g,
        qt_e,
        qt_g,
        q_f: mandel(&Moments::of(&photons)),
        mean_ne,
        mean_ng,
        windows: sim.windows,
        method: Method::MonteCarlo,
        std_errors: Some(StdErrors {
            q_e: se_q_e,
            q_g: se_q_g,
            qt_e: se_qt_e,
            qt_g: se_qt_g,
            mean_ne: se_ne,
            mean_ng: se_ng,
        }),
    })
}

/// Count, sum and sum of squares of a sample.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    s1: f64,
    s2: f64,
}

impl Moments {
    fn of(x: &[f64]) -> Self {
        x.iter().fold(Self::default(), |m, &v| Self {
            n: m.n + 1.0,
            s1: m.s1 + v,
            s2: m.s2 + v * v,
        })
    }

    fn minus(self, o: Self) -> Self {
        Self {
            n: self.n - o.n,
            s1: self.s1 - o.s1,
            s2: self.s2 - o.s2,
        }
    }

    fn mean(&self) -> f64 {
        self.s1 / self.n
    }
}

/// `Var/mean − 1` with the unbiased variance; NaN for a zero mean.
fn mandel(m: &Moments) -> f64 {
    let mean = m.mean();
    if mean == 0.0 {
        return f64::NAN;
    }
    let var = (m.s2 - m.n * mean * mean) / (m.n - 1.0);
    var / mean - 1.0
}

/// Full-sample estimate and delete-one-block jackknife standard error over
/// contiguous blocks.
fn jackknife(x: &[f64], stat: impl Fn(&Moments) -> f64) -> (f64, f64) {
    let total = Moments::of(x);
    let estimate = stat(&total);
    let blocks = JACKKNIFE_BLOCKS.min(x.len());
    let size = x.len().div_ceil(blocks);
    let partial: Vec<f64> = x.chunks(size).map(|c| stat(&total.minus(Moments::of(c)))).collect();
    let b = partial.len() as f64;
    let mean = partial.iter().sum::<f64>() / b;
    let var = partial.iter().map(|q| (q - mean).powi(2)).sum::<f64>() * (b - 1.0) / b;
    (estimate, var.sqrt())
}

/// Detector reports for `n` atoms meeting the same frozen field, as counts
/// of `[excited, ground, undetected]`.
pub fn sample_outcomes(rho: &DensityMatrix, cfg: &PumpConfig, n: usize, seed: u64) -> Result<[usize; 3]> {
    let probs = outcome_probabilities(rho, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 3];
    for _ in 0..n {
        counts[pick(&probs, rng.random())] += 1;
    }
    Ok(counts)
}

fn outcome_probabilities(rho: &DensityMatrix, cfg: &PumpConfig) -> Result<[f64; 3]> {
    let mut probs = [0.0; 3];
    for (i, &o) in Outcome::ALL.iter().enumerate() {
        probs[i] = match conditional_update(rho, o, 0.0, cfg) {
            Ok((_, p)) => p,
            Err(Error::ImpossibleOutcome { .. }) => 0.0,
            Err(e) => return Err(e),
        };
    }
    Ok(probs)
}

fn pick(probs: &[f64; 3], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p / total;
        if u < acc {
            return i;
        }
    }
    2
}

/// Average of `n` conditional fields after one atom and a damping interval
/// `tau`, each branch sampled with its detection probability. It converges
/// to the unconditional one-step map as `n` grows.
pub fn ensemble_step(rho: &DensityMatrix, tau: f64, cfg: &PumpConfig, n: usize, seed: u64) -> Result<DensityMatrix> {
    let probs = outcome_probabilities(rho, cfg)?;
    let mut branches = Vec::with_capacity(3);
    for (&o, &p) in Outcome::ALL.iter().zip(&probs) {
        branches.push(if p > 0.0 {
            Some(conditional_update(rho, o, tau, cfg)?.0)
        } else {
            None
        });
    }
    let counts = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = [0usize; 3];
        for _ in 0..n {
            c[pick(&probs, rng.random())] += 1;
        }
        c
    };
    let mut avg = nalgebra::DMatrix::zeros(rho.space().dim(), rho.space().dim());
    for (b, &c) in branches.iter().zip(&counts) {
        if let Some(state) = b {
            avg += state.entries() * num_complex::Complex64::new(c as f64 / n as f64, 0.0);
        }
    }
    DensityMatrix::normalized(rho.space(), avg)
}

/// Photon-number histogram after `n` sampled trajectories of one atom plus
/// damping for `tau`, starting from `|n0⟩`. Its expectation is the diagonal
/// of the unconditional one-step map applied to `|n0⟩⟨n0|`.
pub fn photon_histogram(cfg: &PumpConfig, n_max: usize, n0: usize, tau: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    if n0 > n_max {
        return Err(Error::InvalidParameter {
            name: "n0",
            value: n0 as f64,
            reason: "must not exceed n_max",
        });
    }
    let mut start = vec![0.0; n_max + 1];
    start[n0] = 1.0;
    let sampler_cfg = *cfg;
    let ladder = Ladder::new(&sampler_cfg, start);
    let sampler = Sampler {
        cfg: sampler_cfg,
        ladder,
        slots: None,
        burn_in_slots: 0,
        burn_in_time: 0.0,
        burn_in_atoms: 0,
        atoms: 1,
        time: 0.0,
    };
    let mut hist = vec![0.0; n_max + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let mut k = n0;
        sampler.atom(&mut k, &mut rng);
        sampler.ladder.damp(&mut k, tau, &mut rng);
        hist[k] += 1.0 / n as f64;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;
    use crate::maps::step;
    use crate::stats::{q_direct, Level, Window, SOLVABLE_GT};
    use crate::superop::beta;

    fn windows(n: usize, t: f64) -> Windows {
        Windows {
            atoms: Some(n),
            time: Some(t),
        }
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = PumpConfig::new(1.54, 0.145, 0.5, 3.0);
        let a = simulate(&cfg, 1000, windows(10, 4.0), 7).unwrap();
        let b = simulate(&cfg, 1000, windows(10, 4.0), 7).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg, 1000, windows(10, 4.0), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn replayed_trajectory_matches_batch() {
        let cfg = PumpConfig::new(1.54, 0.1, 0.0, 2.0).with_efficiencies(0.8, 0.5);
        let sim = Simulation::new(1000, windows(12, 3.0), 11);
        let all = tallies(&cfg, &sim).unwrap();
        for i in [0u64, 17, 999] {
            let t = trajectory(&cfg, &sim, i).unwrap();
            assert_eq!(t.tallies, all[i as usize]);
            let count = |ev: &[Event], o| ev.iter().filter(|e| e.outcome == o).count() as u64;
            assert_eq!(count(&t.atom_events, Outcome::Excited), t.tallies.atoms.0);
            assert_eq!(count(&t.time_events, Outcome::Ground), t.tallies.time.1);
            assert_eq!(t.atom_events.len(), 12);
            assert!(t.time_events.iter().all(|e| e.time < 3.0));
        }
    }

    #[test]
    fn binomial_slots_are_whole() {
        let cfg = PumpConfig::new(1.54, 0.1, 0.5, 2.0);
        let sim = Simulation::new(1000, windows(5, 2.5), 3);
        let t = trajectory(&cfg, &sim, 4).unwrap();
        for e in &t.time_events {
            assert!(e.slot.unwrap() < 10);
        }
    }

    #[test]
    fn weak_pumping_ground_counts_are_binomial() {
        let cfg = PumpConfig::new(SOLVABLE_GT, 0.0, 0.5, 1e-4).with_efficiencies(1.0, 0.8);
        let r = simulate(&cfg, 20_000, windows(50, 1e5), 5).unwrap();
        let target = -0.8 * beta(SOLVABLE_GT, 1);
        let se = r.std_errors.unwrap();
        assert!(
            (r.q_g - target).abs() < 3.0 * se.q_g,
            "{} ± {} vs {target}",
            r.q_g,
            se.q_g
        );
    }

    #[test]
    fn poisson_window_matches_analytic_q() {
        let cfg = PumpConfig::new(SOLVABLE_GT, 0.0, 0.0, 1.0);
        let r = simulate(&cfg, 20_000, windows(30, 30.0), 9).unwrap();
        let se = r.std_errors.unwrap();
        let qt = q_direct(Window::Time(Some(30.0)), &cfg, Level::Ground).unwrap();
        let q = q_direct(Window::Atoms(Some(30)), &cfg, Level::Excited).unwrap();
        assert!((r.qt_g - qt).abs() < 3.0 * se.qt_g, "{} ± {} vs {qt}", r.qt_g, se.qt_g);
        assert!((r.q_e - q).abs() < 3.0 * se.q_e, "{} ± {} vs {q}", r.q_e, se.q_e);
    }

    #[test]
    fn frozen_field_outcome_frequencies() {
        let cfg = PumpConfig::new(1.54, 0.1, 0.5, 1.0).with_efficiencies(0.7, 0.6);
        let space = make_space(12).unwrap();
        let rho = thermal_state(1.0, &space).unwrap();
        let n = 100_000;
        let counts = sample_outcomes(&rho, &cfg, n, 1).unwrap();
        let probs = outcome_probabilities(&rho, &cfg).unwrap();
        for (c, p) in counts.iter().zip(probs) {
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn conditional_ensemble_reproduces_the_map() {
        let cfg = PumpConfig::new(1.54, 0.1, 0.5, 1.0).with_efficiencies(0.7, 0.6);
        let space = make_space(10).unwrap();
        let d = space.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            num_complex::Complex64::new(0.3f64.powi((i + j) as i32), 0.01 * (i as f64 - j as f64))
        });
        let rho = DensityMatrix::normalized(space, &m * m.adjoint()).unwrap();
        let avg = ensemble_step(&rho, 0.4, &cfg, 100_000, 2).unwrap();
        let exact = step(&rho, MapKind::Regular { tau: 0.4 }, &cfg).unwrap();
        assert!(avg.trace_distance(&exact) < 5e-3);
    }

    #[test]
    fn photon_jumps_reproduce_the_map() {
        let cfg = PumpConfig::new(1.54, 0.3, 0.5, 1.0);
        let n_max = 14;
        let hist = photon_histogram(&cfg, n_max, 3, 0.7, 100_000, 4).unwrap();
        let space = make_space(n_max).unwrap();
        let exact = step(
            &DensityMatrix::fock(space, 3).unwrap(),
            MapKind::Regular { tau: 0.7 },
            &cfg,
        )
        .unwrap()
        .populations();
        let distance: f64 = hist.iter().zip(exact.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(distance < 5e-3, "{distance}");
    }

    #[test]
    fn rejects_bad_requests() {
        let cfg = PumpConfig::new(1.54, 0.1, 0.5, 1.0);
        assert!(simulate(&cfg, 10, windows(5, 2.0), 0).is_err());
        assert!(matches!(
            simulate(
                &cfg,
                1000,
                Windows {
                    atoms: None,
                    time: Some(2.0)
                },
                0
            ),
            Err(Error::InvalidWindow(_))
        ));
        let sim = Simulation {
            burn_in_time: -1.0,
            ..Simulation::new(1000, windows(5, 2.0), 0)
        };
        assert!(simulate_with(&cfg, &sim).is_err());
    }

    #[test]
    fn jackknife_of_the_mean_is_the_standard_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let (m, se) = jackknife(&x, |m| m.mean());
        let mean = x.iter().sum::<f64>() / 1000.0;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 999.0).sqrt();
        assert!((m - mean).abs() < 1e-12);
        assert!((se / (sd / 1000f64.sqrt()) - 1.0).abs() < 0.2);
    }
}
