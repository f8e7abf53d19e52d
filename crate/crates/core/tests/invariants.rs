//! Structural invariants over random parameter points.

use micromaser::maps::{choose_truncation, steady_state_in, FieldModel};
use micromaser::stats::{q_closed_form_two_level, q_direct, CountingProcess, SOLVABLE_GT};
use micromaser::{make_space, q_report, Error, Level, MapKind, Method, PumpConfig, Sector, Window, Windows};
use proptest::prelude::*;

fn pump() -> impl Strategy<Value = PumpConfig> {
    let p = prop_oneof![Just(0.0), 0.05..=1.0f64];
    (0.3..4.0f64, 0.0..0.3f64, p, 0.05..12.0f64).prop_map(|(gt, nbar, p, n_ex)| PumpConfig::new(gt, nbar, p, n_ex))
}

fn efficiencies() -> impl Strategy<Value = (f64, f64)> {
    (0.05..=1.0f64, 0.05..=1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_step_maps_are_stochastic(cfg in pump()) {
        let space = make_space(30).unwrap();
        let model = FieldModel::new(&cfg, space, Sector::Populations).unwrap();
        for kind in [MapKind::fixed_n(&cfg), MapKind::fixed_t(&cfg)] {
            let m = model.one_step(kind).unwrap().populations().unwrap().clone();
            for col in m.column_iter() {
                prop_assert!((col.sum() - 1.0).abs() < 1e-11);
                prop_assert!(col.iter().all(|&x| x > -1e-13));
            }
        }
    }

    #[test]
    fn both_windows_share_one_steady_state(cfg in pump()) {
        let space = make_space(choose_truncation(&cfg).unwrap()).unwrap();
        let n = steady_state_in(MapKind::fixed_n(&cfg), &cfg, space).unwrap();
        let t = steady_state_in(MapKind::fixed_t(&cfg), &cfg, space).unwrap();
        prop_assert!(n.trace_distance(&t) < 1e-9);
        prop_assert!(n.populations().iter().all(|&x| x > -1e-13));
    }

    #[test]
    fn detection_efficiency_scales_q(cfg in pump(), (eta_e, eta_g) in efficiencies()) {
        let windows = Windows { atoms: Some(8), time: Some(3.0) };
        let unit = q_report(&cfg, windows, Method::Direct).unwrap();
        let seen = q_report(&cfg.with_efficiencies(eta_e, eta_g), windows, Method::Direct).unwrap();
        prop_assert!((seen.q_e - eta_e * unit.q_e).abs() < 1e-10);
        prop_assert!((seen.qt_g - eta_g * unit.qt_g).abs() < 1e-10);
        prop_assert_eq!(seen.q_f, unit.q_f);
    }

    #[test]
    fn counts_are_never_narrower_than_a_constant(cfg in pump(), k in 1usize..40) {
        for level in Level::ALL {
            for w in [Window::Atoms(Some(k)), Window::Atoms(None), Window::Time(None)] {
                let q = q_direct(w, &cfg, level).unwrap();
                prop_assert!(q >= -1.0 - 1e-10, "{w:?} {level:?}: {q}");
            }
        }
    }

    #[test]
    fn direct_and_spectral_agree(cfg in pump(), k in 1usize..30, (eta_e, eta_g) in efficiencies()) {
        let cfg = cfg.with_efficiencies(eta_e, eta_g);
        let space = make_space(choose_truncation(&cfg).unwrap()).unwrap();
        for w in [Window::Atoms(Some(k)), Window::Time(Some(k as f64 / cfg.rate))] {
            let pr = CountingProcess::new(&cfg, w, space).unwrap();
            // an ill-conditioned eigenbasis is refused, never used
            let sd = match pr.spectral() {
                Ok(sd) => sd,
                Err(Error::Biorthogonalization { .. }) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            for level in Level::ALL {
                let d = pr.q_direct(level).unwrap();
                let s = pr.q_spectral_with(level, &sd).unwrap();
                prop_assert!((d - s).abs() < 1e-7 * (1.0 + d.abs()), "{w:?} {level:?}: {d} vs {s}");
            }
        }
    }

    #[test]
    fn unit_efficiency_counts_split_every_atom(cfg in pump(), n in 1usize..16) {
        let space = make_space(choose_truncation(&cfg).unwrap()).unwrap();
        let pr = CountingProcess::new(&cfg, Window::Atoms(Some(n)), space).unwrap();
        let dist = pr.distribution(&pr.stationary, 64).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
        let (we, wg) = (dist.marginal(Level::Excited), dist.marginal(Level::Ground));
        for a in 0..=n {
            prop_assert!((we[a] - wg[n - a]).abs() < 1e-12);
        }
    }

    #[test]
    fn trapping_angle_matches_two_level_forms(p in prop_oneof![Just(0.0), 0.05..=1.0f64], n_ex in 0.05..200.0f64) {
        let cfg = PumpConfig::new(SOLVABLE_GT, 0.0, p, n_ex);
        for level in Level::ALL {
            for w in [Window::Atoms(None), Window::Time(None)] {
                let exact = q_closed_form_two_level(&cfg, level, w).unwrap();
                prop_assert!((q_direct(w, &cfg, level).unwrap() - exact).abs() < 1e-9);
            }
        }
    }
}
