//! Superoperators of the micromaser: field damping, Jaynes–Cummings gain
//! maps, detection-weighted maps and the composite pumping maps.
//!
//! Every map in the theory sends the diagonal band `k = m − n` of a density
//! matrix to a single band `k + shift`. A [`Superoperator`] therefore stores
//! one block per source band instead of a dense `dim² × dim²` matrix; the
//! dense form is assembled on request by [`Superoperator::matrix`]. Maps with
//! `shift = 0` also carry a real matrix on the photon-number populations,
//! which is all the counting statistics need.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pumping statistics, interaction strength and detector efficiencies.
///
/// Time is measured in units of the cavity decay time `T_c = 1/(2κ)`; with
/// the default `κ = 1/2` the active-atom rate equals `N_ex`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    /// Rabi angle `g·t_int`.
    pub gt_int: f64,
    /// Mean thermal photon number of the bath.
    pub nbar: f64,
    /// Field amplitude decay rate.
    pub kappa: f64,
    /// Probability that an atom in a slot is excited. `p = 0` selects
    /// continuous Poisson pumping.
    pub p: f64,
    /// Mean active-atom rate `R`.
    pub rate: f64,
    pub eta_e: f64,
    pub eta_g: f64,
}

impl PumpConfig {
    /// Configuration with `κ = 1/2`, so that `R = N_ex`, and perfect detectors.
    pub fn new(gt_int: f64, nbar: f64, p: f64, n_ex: f64) -> Self {
        Self {
            gt_int,
            nbar,
            kappa: 0.5,
            p,
            rate: n_ex,
            eta_e: 1.0,
            eta_g: 1.0,
        }
    }

    pub fn with_efficiencies(mut self, eta_e: f64, eta_g: f64) -> Self {
        self.eta_e = eta_e;
        self.eta_g = eta_g;
        self
    }

    /// `N_ex = R/(2κ)`, the active atoms per cavity decay time.
    pub fn n_ex(&self) -> f64 {
        self.rate / (2.0 * self.kappa)
    }

    /// `T_c = 1/(2κ)`.
    pub fn decay_time(&self) -> f64 {
        1.0 / (2.0 * self.kappa)
    }

    pub fn is_poisson(&self) -> bool {
        self.p == 0.0
    }

    /// Slot length `T = p/R` of binomial pumping.
    pub fn slot(&self) -> f64 {
        self.p / self.rate
    }

    pub fn validate(&self) -> Result<()> {
        check_finite_nonneg("gt_int", self.gt_int)?;
        check_finite_nonneg("nbar", self.nbar)?;
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "must be positive",
            });
        }
        check_unit("p", self.p)?;
        check_unit("eta_e", self.eta_e)?;
        check_unit("eta_g", self.eta_g)?;
        check_finite_nonneg("rate", self.rate)?;
        if self.p > 0.0 && self.rate == 0.0 {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: self.rate,
                reason: "binomial pumping needs a positive rate",
            });
        }
        Ok(())
    }
}

fn check_finite_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

/// Which part of the density matrix a superoperator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// All matrix elements.
    Full,
    /// Only the photon-number populations.
    Populations,
}

/// Linear map on density matrices of a [`FockSpace`], stored band by band.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    space: FockSpace,
    shift: isize,
    /// Indexed by `k + n_max` for source band `k`; maps the band vector of
    /// length `dim − |k|` to the band vector of band `k + shift`.
    blocks: Vec<Option<DMatrix<Complex64>>>,
    populations: Option<DMatrix<f64>>,
}

/// Band vector element `j` of band `k` is `ρ[j + max(k,0), j + max(−k,0)]`.
fn band_position(k: isize, j: usize) -> (usize, usize) {
    (j + k.max(0) as usize, j + (-k).max(0) as usize)
}

fn band_len(space: &FockSpace, k: isize) -> usize {
    let d = space.dim() as isize;
    if k.abs() >= d {
        0
    } else {
        (d - k.abs()) as usize
    }
}

impl Superoperator {
    /// Builds a map from its element rule: `rule(m, n, push)` must call
    /// `push(m', n', c)` once per source element with
    /// `(Sρ)[m,n] = Σ c·ρ[m',n']`, and every source must lie on band
    /// `m − n − shift`.
    pub fn from_rule<F>(space: FockSpace, shift: isize, sector: Sector, rule: F) -> Self
    where
        F: Fn(usize, usize, &mut dyn FnMut(usize, usize, Complex64)),
    {
        let n_max = space.n_max() as isize;
        let mut blocks = vec![None; space.dim() * 2 - 1];
        if sector == Sector::Full {
            for k in -n_max..=n_max {
                let target = k + shift;
                let mut block = DMatrix::zeros(band_len(&space, target), band_len(&space, k));
                for jt in 0..block.nrows() {
                    let (m, n) = band_position(target, jt);
                    rule(m, n, &mut |ms, ns, c| {
                        debug_assert_eq!(ms as isize - ns as isize, k);
                        block[(jt, ms.min(ns))] += c;
                    });
                }
                blocks[(k + n_max) as usize] = Some(block);
            }
        }
        let populations = (shift == 0).then(|| {
            let d = space.dim();
            let mut pops = DMatrix::zeros(d, d);
            for m in 0..d {
                rule(m, m, &mut |ms, _, c| pops[(m, ms)] += c.re);
            }
            pops
        });
        Self {
            space,
            shift,
            blocks,
            populations,
        }
    }

    pub fn identity(space: FockSpace, sector: Sector) -> Self {
        Self::from_rule(space, 0, sector, |m, n, push| push(m, n, Complex64::new(1.0, 0.0)))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Output band minus input band.
    pub fn shift(&self) -> isize {
        self.shift
    }

    pub fn sector(&self) -> Sector {
        if self.blocks.iter().all(Option::is_some) {
            Sector::Full
        } else {
            Sector::Populations
        }
    }

    /// Block acting on source band `k`, if stored.
    pub fn block(&self, k: isize) -> Option<&DMatrix<Complex64>> {
        let idx = k + self.space.n_max() as isize;
        if idx < 0 {
            return None;
        }
        self.blocks.get(idx as usize).and_then(Option::as_ref)
    }

    /// The real matrix acting on the population vector `ρ_nn`.
    pub fn populations(&self) -> Result<&DMatrix<f64>> {
        self.populations.as_ref().ok_or(Error::MissingBand { band: 0 })
    }

    /// Drops every band except the populations.
    pub fn into_populations(self) -> Result<Self> {
        let populations = Some(self.populations()?.clone());
        Ok(Self {
            blocks: vec![None; self.blocks.len()],
            populations,
            ..self
        })
    }

    /// `S ρ` on a full matrix. Bands of `ρ` that are exactly zero may lack a
    /// block; a diagonal `ρ` only needs the population matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let d = self.space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                found: rho.nrows(),
            });
        }
        let n_max = self.space.n_max() as isize;
        let mut out = DMatrix::zeros(d, d);
        for k in -n_max..=n_max {
            let len = band_len(&self.space, k);
            let v = DVector::from_iterator(len, (0..len).map(|j| rho[band_position(k, j)]));
            if v.iter().all(|z| *z == ZERO) {
                continue;
            }
            let target = k + self.shift;
            let w = match (self.block(k), k, &self.populations) {
                (Some(b), _, _) => b * v,
                (None, 0, Some(p)) => p.map(|x| Complex64::new(x, 0.0)) * v,
                _ => return Err(Error::MissingBand { band: k }),
            };
            for (j, z) in w.iter().enumerate() {
                out[band_position(target, j)] += *z;
            }
        }
        Ok(out)
    }

    /// `S` on a population vector; requires `shift = 0`.
    pub fn apply_populations(&self, pops: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.populations()?;
        if pops.len() != p.ncols() {
            return Err(Error::Dimension {
                expected: p.ncols(),
                found: pops.len(),
            });
        }
        Ok(p * pops)
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Dimension {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(())
    }

    /// `self ∘ rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_space(rhs)?;
        let n_max = self.space.n_max() as isize;
        let blocks = (-n_max..=n_max)
            .map(|k| {
                let inner = rhs.block(k)?;
                let mid = k + rhs.shift;
                if band_len(&self.space, mid) == 0 {
                    let out = band_len(&self.space, mid + self.shift);
                    return Some(DMatrix::zeros(out, inner.ncols()));
                }
                Some(self.block(mid)? * inner)
            })
            .collect();
        let populations = match (&self.populations, &rhs.populations) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Ok(Self {
            space: self.space,
            shift: self.shift + rhs.shift,
            blocks,
            populations,
        })
    }

    fn zip(&self, rhs: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_space(rhs)?;
        if self.shift != rhs.shift {
            return Err(Error::ShiftMismatch {
                op,
                left: self.shift,
                right: rhs.shift,
            });
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&rhs.blocks)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a.zip_map(b, |x, y| Complex64::new(f(x.re, y.re), f(x.im, y.im)))),
                _ => None,
            })
            .collect();
        let populations = match (&self.populations, &rhs.populations) {
            (Some(a), Some(b)) => Some(a.zip_map(b, &f)),
            _ => None,
        };
        Ok(Self {
            space: self.space,
            shift: self.shift,
            blocks,
            populations,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, "subtract", |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let c = Complex64::new(s, 0.0);
        Self {
            space: self.space,
            shift: self.shift,
            blocks: self.blocks.iter().map(|b| b.as_ref().map(|b| b * c)).collect(),
            populations: self.populations.as_ref().map(|p| p * s),
        }
    }

    fn require_band_preserving(&self, op: &'static str) -> Result<()> {
        if self.shift != 0 {
            return Err(Error::ShiftMismatch {
                op,
                left: self.shift,
                right: 0,
            });
        }
        Ok(())
    }

    /// `exp(τ S)` by Padé scaling and squaring on every block.
    pub fn exp_scaled(&self, tau: f64) -> Result<Self> {
        self.require_band_preserving("exponentiate")?;
        let c = Complex64::new(tau, 0.0);
        Ok(Self {
            space: self.space,
            shift: 0,
            blocks: self.blocks.iter().map(|b| b.as_ref().map(|b| (b * c).exp())).collect(),
            populations: self.populations.as_ref().map(|p| (p * tau).exp()),
        })
    }

    /// `S⁻¹` block by block.
    pub fn inverse(&self) -> Result<Self> {
        self.require_band_preserving("invert")?;
        let singular = || Error::SingularMap("superoperator block is not invertible".into());
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.as_ref()
                    .map(|b| b.clone().try_inverse().ok_or_else(singular))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let populations = self
            .populations
            .as_ref()
            .map(|p| p.clone().try_inverse().ok_or_else(singular))
            .transpose()?;
        Ok(Self {
            space: self.space,
            shift: 0,
            blocks,
            populations,
        })
    }

    /// Dense matrix on column-stacked density matrices: `ρ[i,j]` sits at
    /// index `i + dim·j`. Needs the full sector.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        let d = self.space.dim();
        let n_max = self.space.n_max() as isize;
        let mut out = DMatrix::zeros(d * d, d * d);
        for k in -n_max..=n_max {
            let block = self.block(k).ok_or(Error::MissingBand { band: k })?;
            for js in 0..block.ncols() {
                let (ms, ns) = band_position(k, js);
                for jt in 0..block.nrows() {
                    let (mt, nt) = band_position(k + self.shift, jt);
                    out[(mt + d * nt, ms + d * ns)] = block[(jt, js)];
                }
            }
        }
        Ok(out)
    }
}

/// Field damping generator `L` of the thermal master equation:
///
/// `Lρ = κ(n̄+1)(2aρa† − a†aρ − ρa†a) + κn̄(2a†ρa − aa†ρ − ρaa†)`
///
/// with truncated ladder operators, so that `Tr Lρ = 0` exactly and the
/// truncated thermal state is stationary.
pub fn lindblad(cfg: &PumpConfig, space: FockSpace, sector: Sector) -> Result<Superoperator> {
    if !(cfg.kappa > 0.0 && cfg.kappa.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: cfg.kappa,
            reason: "must be positive",
        });
    }
    check_finite_nonneg("nbar", cfg.nbar)?;
    let down = cfg.kappa * (cfg.nbar + 1.0);
    let up = cfg.kappa * cfg.nbar;
    let n_max = space.n_max();
    let aad = move |m: usize| if m < n_max { (m + 1) as f64 } else { 0.0 };
    Ok(Superoperator::from_rule(space, 0, sector, move |m, n, push| {
        let (mf, nf) = (m as f64, n as f64);
        if m < n_max && n < n_max {
            push(
                m + 1,
                n + 1,
                Complex64::new(2.0 * down * ((mf + 1.0) * (nf + 1.0)).sqrt(), 0.0),
            );
        }
        if m > 0 && n > 0 {
            push(m - 1, n - 1, Complex64::new(2.0 * up * (mf * nf).sqrt(), 0.0));
        }
        push(m, n, Complex64::new(-down * (mf + nf) - up * (aad(m) + aad(n)), 0.0));
    }))
}

/// `D(τ) = exp(Lτ)`.
pub fn damping_propagator(l: &Superoperator, tau: f64) -> Result<Superoperator> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "must be finite and non-negative",
        });
    }
    l.exp_scaled(tau)
}

/// `cos(θ√j)` and `sin(θ√j)` for `j = 0 … n_max+1`. The excited atom cannot
/// emit out of the top level, so the last entry is `(1, 0)`.
fn rabi_table(gt_int: f64, space: &FockSpace) -> (Vec<f64>, Vec<f64>) {
    let top = space.n_max() + 1;
    let mut c: Vec<f64> = (0..=top).map(|j| (gt_int * (j as f64).sqrt()).cos()).collect();
    let mut s: Vec<f64> = (0..=top).map(|j| (gt_int * (j as f64).sqrt()).sin()).collect();
    c[top] = 1.0;
    s[top] = 0.0;
    (c, s)
}

/// `α_n = cos²(gt_int √n)` as used on the truncated space.
pub fn alpha(gt_int: f64, n: usize) -> f64 {
    (gt_int * (n as f64).sqrt()).cos().powi(2)
}

/// `β_n = sin²(gt_int √n)`, the probability that an excited atom emits into
/// a field holding `n − 1` photons.
pub fn beta(gt_int: f64, n: usize) -> f64 {
    (gt_int * (n as f64).sqrt()).sin().powi(2)
}

/// The three pieces of the field map after one excited atom has passed.
#[derive(Debug, Clone)]
pub struct GainMaps {
    /// Field conditioned on the atom leaving in `|e⟩`.
    pub excited: Superoperator,
    /// Field conditioned on the atom leaving in `|g⟩`.
    pub ground: Superoperator,
    /// Atomic coherence `⟨e|…|g⟩` block. Always built in the full sector.
    pub coherence: Superoperator,
}

impl GainMaps {
    /// `F_0 = F_e + F_g`.
    pub fn total(&self) -> Result<Superoperator> {
        self.excited.add(&self.ground)
    }
}

/// Gain maps of the resonant Jaynes–Cummings interaction over `gt_int`:
///
/// - `(F_e ρ)[m,n] = c_{m+1} c_{n+1} ρ[m,n]`
/// - `(F_g ρ)[m,n] = s_m s_n ρ[m−1,n−1]`
/// - `(F_eg ρ)[m,n] = i c_{m+1} s_n ρ[m,n−1]`
///
/// with `c_j = cos(gt_int√j)` and `s_j = sin(gt_int√j)`.
pub fn gain_maps(gt_int: f64, space: FockSpace, sector: Sector) -> Result<GainMaps> {
    check_finite_nonneg("gt_int", gt_int)?;
    let (c, s) = rabi_table(gt_int, &space);
    let excited = {
        let c = c.clone();
        Superoperator::from_rule(space, 0, sector, move |m, n, push| {
            push(m, n, Complex64::new(c[m + 1] * c[n + 1], 0.0))
        })
    };
    let ground = {
        let s = s.clone();
        Superoperator::from_rule(space, 0, sector, move |m, n, push| {
            if m > 0 && n > 0 {
                push(m - 1, n - 1, Complex64::new(s[m] * s[n], 0.0));
            }
        })
    };
    let coherence = Superoperator::from_rule(space, -1, Sector::Full, move |m, n, push| {
        if n > 0 {
            push(m, n - 1, Complex64::new(0.0, c[m + 1] * s[n]));
        }
    });
    Ok(GainMaps {
        excited,
        ground,
        coherence,
    })
}

/// Field maps for the three detection outcomes.
#[derive(Debug, Clone)]
pub struct DetectionMaps {
    /// `η_e F_e`.
    pub excited: Superoperator,
    /// `η_g F_g`.
    pub ground: Superoperator,
    /// `(1−η_e) F_e + (1−η_g) F_g`, the atom slipped through undetected.
    pub undetected: Superoperator,
}

impl DetectionMaps {
    pub fn get(&self, outcome: crate::maps::Outcome) -> &Superoperator {
        use crate::maps::Outcome;
        match outcome {
            Outcome::Excited => &self.excited,
            Outcome::Ground => &self.ground,
            Outcome::Undetected => &self.undetected,
        }
    }
}

pub fn detection_maps(f_e: &Superoperator, f_g: &Superoperator, eta_e: f64, eta_g: f64) -> Result<DetectionMaps> {
    check_unit("eta_e", eta_e)?;
    check_unit("eta_g", eta_g)?;
    Ok(DetectionMaps {
        excited: f_e.scale(eta_e),
        ground: f_g.scale(eta_g),
        undetected: f_e.scale(1.0 - eta_e).add(&f_g.scale(1.0 - eta_g))?,
    })
}

/// `D_p(x) = [1 − x(1−p) exp(LT)]⁻¹` with `T = p/R`, by direct inversion.
pub fn dp_resolvent(x: f64, cfg: &PumpConfig, l: &Superoperator) -> Result<Superoperator> {
    cfg.validate()?;
    if cfg.is_poisson() {
        return Err(Error::InvalidParameter {
            name: "p",
            value: cfg.p,
            reason: "the resolvent needs binomial pumping (p > 0)",
        });
    }
    let sector = l.sector();
    let q = x * (1.0 - cfg.p);
    if q == 0.0 {
        return Ok(Superoperator::identity(l.space(), sector));
    }
    if !(q.abs() < 1.0) {
        return Err(Error::SingularMap(format!(
            "geometric series in x(1−p) = {q} does not converge"
        )));
    }
    let e = damping_propagator(l, cfg.slot())?;
    Superoperator::identity(l.space(), sector).sub(&e.scale(q))?.inverse()
}

/// The composite maps of binomial pumping.
#[derive(Debug, Clone)]
pub struct CompositeMaps {
    /// `Λ_p = D_p(1) p exp(LT)`: damping from one active atom to the next.
    pub lambda: Superoperator,
    /// `Λ̃_p = exp(LT)`: damping over one slot.
    pub lambda_slot: Superoperator,
    /// `F̃_0 = 1 − p + p F_0`: one slot, active or not.
    pub f0_slot: Superoperator,
}

pub fn composite_maps(cfg: &PumpConfig, l: &Superoperator, f0: &Superoperator) -> Result<CompositeMaps> {
    let d1 = dp_resolvent(1.0, cfg, l)?;
    let e = damping_propagator(l, cfg.slot())?;
    let lambda = d1.compose(&e)?.scale(cfg.p);
    let f0_slot = Superoperator::identity(l.space(), f0.sector())
        .scale(1.0 - cfg.p)
        .add(&f0.scale(cfg.p))?;
    Ok(CompositeMaps {
        lambda,
        lambda_slot: e,
        f0_slot,
    })
}
