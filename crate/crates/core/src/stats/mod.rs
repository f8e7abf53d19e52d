//! Counting statistics of the detected atoms.
//!
//! A window is either a fixed number of active atoms (`Q_e`, `Q_g`) or a
//! fixed collection time (`Q̃_e`, `Q̃_g`); `None` stands for the asymptotic
//! window. Every quantity starts from the steady state of the window's own
//! stroboscopic map.

pub mod closed_form;
pub mod distribution;
pub mod kernel;
pub mod process;
pub mod spectral;

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{make_space, mandel_qf, thermal_state, FockSpace};
use crate::maps::{choose_truncation, steady_state_in, trapping_level, MapKind};
use crate::superop::{gain_maps, PumpConfig, Sector};

pub use closed_form::{q_closed_form_two_level, q_field_two_level, SOLVABLE_GT};
pub use distribution::{count_distribution, moments, CountDistribution, DEFAULT_CAP};
pub use process::{slots_in, Clock, CountingProcess};
pub use spectral::SpectralDecomposition;

/// Exit level of a detected atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Excited,
    Ground,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Excited, Level::Ground];
}

/// A counting window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `N` active atoms, or `N → ∞`.
    Atoms(Option<usize>),
    /// Collection time `t` in units of the cavity decay time, or `t → ∞`.
    Time(Option<f64>),
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Atoms(Some(n)) => write!(f, "N={n}"),
            Window::Time(Some(t)) => write!(f, "t={t}"),
            Window::Atoms(None) | Window::Time(None) => write!(f, "inf"),
        }
    }
}

/// The pair of windows a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Windows {
    pub atoms: Option<usize>,
    pub time: Option<f64>,
}

impl Windows {
    pub const ASYMPTOTIC: Windows = Windows {
        atoms: None,
        time: None,
    };

    /// `inf`, `N=20`, `t=5` or `N=20;t=5`.
    pub fn label(&self) -> String {
        match (self.atoms, self.time) {
            (None, None) => "inf".into(),
            (Some(n), None) => format!("N={n}"),
            (None, Some(t)) => format!("t={t}"),
            (Some(n), Some(t)) => format!("N={n};t={t}"),
        }
    }

    pub fn is_asymptotic(&self) -> bool {
        self.atoms.is_none() && self.time.is_none()
    }
}

/// How a report was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Direct,
    Spectral,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Direct, Method::Spectral, Method::ClosedForm, Method::MonteCarlo];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Spectral => "spectral",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Standard errors attached to an empirical report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdErrors {
    pub q_e: f64,
    pub q_g: f64,
    pub qt_e: f64,
    pub qt_g: f64,
    pub mean_ne: f64,
    pub mean_ng: f64,
}

/// Q-parameters of both levels in both windows, plus the field Q.
///
/// Undefined entries (a level that is never detected) are NaN. The means
/// belong to the fixed-N window: counts over `N` atoms, or counts per
/// active atom when that window is asymptotic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QReport {
    pub q_e: f64,
    pub q_g: f64,
    pub qt_e: f64,
    pub qt_g: f64,
    pub q_f: f64,
    pub mean_ne: f64,
    pub mean_ng: f64,
    pub windows: Windows,
    pub method: Method,
    pub std_errors: Option<StdErrors>,
}

impl QReport {
    /// `Q` of one level in one of the report's windows.
    pub fn q(&self, level: Level, fixed_time: bool) -> f64 {
        match (level, fixed_time) {
            (Level::Excited, false) => self.q_e,
            (Level::Ground, false) => self.q_g,
            (Level::Excited, true) => self.qt_e,
            (Level::Ground, true) => self.qt_g,
        }
    }

    pub fn mean(&self, level: Level) -> f64 {
        match level {
            Level::Excited => self.mean_ne,
            Level::Ground => self.mean_ng,
        }
    }
}

fn undefined_as_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::UndefinedQ) => Ok(f64::NAN),
        other => other,
    }
}

fn auto_space(cfg: &PumpConfig) -> Result<FockSpace> {
    make_space(choose_truncation(cfg)?)
}

/// Mandel Q of one level in one window by the direct operator formula.
pub fn q_direct(window: Window, cfg: &PumpConfig, level: Level) -> Result<f64> {
    CountingProcess::new(cfg, window, auto_space(cfg)?)?.q_direct(level)
}

/// Mandel Q of one level in one window by the eigenmode sum.
pub fn q_spectral(window: Window, cfg: &PumpConfig, level: Level) -> Result<f64> {
    CountingProcess::new(cfg, window, auto_space(cfg)?)?.q_spectral(level)
}

/// Both levels in both windows by one analytic method. Monte Carlo reports
/// come from [`crate::oracle::simulate`].
pub fn q_report(cfg: &PumpConfig, windows: Windows, method: Method) -> Result<QReport> {
    cfg.validate()?;
    match method {
        Method::Direct | Method::Spectral => numeric_report(cfg, windows, method),
        Method::ClosedForm => closed_form_report(cfg, windows),
        Method::MonteCarlo => Err(Error::MonteCarlo(
            "sampled reports need a trajectory count and seed; use oracle::simulate".into(),
        )),
    }
}

fn numeric_report(cfg: &PumpConfig, windows: Windows, method: Method) -> Result<QReport> {
    let space = auto_space(cfg)?;
    let atoms = CountingProcess::new(cfg, Window::Atoms(windows.atoms), space)?;
    let time = CountingProcess::new(cfg, Window::Time(windows.time), space)?;
    let (qa, qt) = match method {
        Method::Spectral => {
            let sa = atoms.spectral()?;
            let st = time.spectral()?;
            let qa = |l| undefined_as_nan(atoms.q_spectral_with(l, &sa));
            let qt = |l| undefined_as_nan(time.q_spectral_with(l, &st));
            (
                [qa(Level::Excited)?, qa(Level::Ground)?],
                [qt(Level::Excited)?, qt(Level::Ground)?],
            )
        }
        _ => {
            let qa = |l| undefined_as_nan(atoms.q_direct(l));
            let qt = |l| undefined_as_nan(time.q_direct(l));
            (
                [qa(Level::Excited)?, qa(Level::Ground)?],
                [qt(Level::Excited)?, qt(Level::Ground)?],
            )
        }
    };
    let q_f = undefined_as_nan(mandel_qf(&steady_state_in(MapKind::fixed_n(cfg), cfg, space)?))?;
    let mean = |l| atoms.mean_count(l).unwrap_or_else(|| atoms.mean_per_atom(l));
    Ok(QReport {
        q_e: qa[0],
        q_g: qa[1],
        qt_e: qt[0],
        qt_g: qt[1],
        q_f,
        mean_ne: mean(Level::Excited),
        mean_ng: mean(Level::Ground),
        windows,
        method,
        std_errors: None,
    })
}

fn closed_form_report(cfg: &PumpConfig, windows: Windows) -> Result<QReport> {
    if !windows.is_asymptotic() {
        return Err(Error::InvalidWindow(
            "closed forms only cover asymptotic windows".into(),
        ));
    }
    let q = |l, w| q_closed_form_two_level(cfg, l, w);
    let q_f = q_field_two_level(cfg)?;
    // the atom meets |1⟩ with probability −Q_f and |0⟩ otherwise
    let ground = crate::superop::beta(SOLVABLE_GT, 1) * (1.0 + q_f);
    Ok(QReport {
        q_e: q(Level::Excited, Window::Atoms(None))?,
        q_g: q(Level::Ground, Window::Atoms(None))?,
        qt_e: q(Level::Excited, Window::Time(None))?,
        qt_g: q(Level::Ground, Window::Time(None))?,
        q_f,
        mean_ne: cfg.eta_e * (1.0 - ground),
        mean_ng: cfg.eta_g * ground,
        windows,
        method: Method::ClosedForm,
        std_errors: None,
    })
}

/// Analytic predictions for weak and strong pumping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPredictions {
    /// `N_ex → 0`: atoms see the thermal field and leave independently.
    pub weak: QReport,
    /// `N_ex → ∞`: only defined at `n̄ = 0` with a trapping level, where the
    /// field locks in `|n_q⟩` and every atom leaves excited.
    pub strong: Option<QReport>,
}

/// `N_ex → 0`: `Q_ν = −η_ν P_ν` and `Q̃_ν = −p η_ν P_ν`, with
/// `P_g = β_g = Tr[F_g ρ_th]` and `P_e = 1 − β_g`. `N_ex → ∞` at a trapping
/// point: `Q_e = −η_e`, `Q̃_e = −p η_e` and `Q_g = Q̃_g = 0`.
pub fn limit_predictions(cfg: &PumpConfig) -> Result<LimitPredictions> {
    cfg.validate()?;
    let n_max = if cfg.nbar == 0.0 {
        4
    } else {
        // thermal reach, as used for the weak-pumping truncation
        choose_truncation(&PumpConfig {
            rate: 0.0,
            p: 0.0,
            ..*cfg
        })?
    };
    let space = make_space(n_max)?;
    let thermal = thermal_state(cfg.nbar, &space)?;
    let gain = gain_maps(cfg.gt_int, space, Sector::Populations)?;
    let beta_g = gain.ground.apply_populations(&thermal.populations())?.sum();
    let binomial = |eta: f64, prob: f64| (-eta * prob, -cfg.p * eta * prob);
    let (q_e, qt_e) = binomial(cfg.eta_e, 1.0 - beta_g);
    let (q_g, qt_g) = binomial(cfg.eta_g, beta_g);
    let weak = QReport {
        q_e,
        q_g,
        qt_e,
        qt_g,
        q_f: cfg.nbar,
        mean_ne: cfg.eta_e * (1.0 - beta_g),
        mean_ng: cfg.eta_g * beta_g,
        windows: Windows::ASYMPTOTIC,
        method: Method::ClosedForm,
        std_errors: None,
    };
    let strong = (cfg.nbar == 0.0 && trapping_level(cfg.gt_int, crate::maps::MAX_N_MAX).is_some()).then(|| QReport {
        q_e: -cfg.eta_e,
        q_g: 0.0,
        qt_e: -cfg.p * cfg.eta_e,
        qt_g: 0.0,
        q_f: -1.0,
        mean_ne: cfg.eta_e,
        mean_ng: 0.0,
        windows: Windows::ASYMPTOTIC,
        method: Method::ClosedForm,
        std_errors: None,
    });
    Ok(LimitPredictions { weak, strong })
}
