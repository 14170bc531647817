use levygap::bounds::{compute_delta, lambda1_lower};
use levygap::config::{RunConfig, PRESETS};
use levygap::harmonic::HarmonicEvaluator;
use levygap::sim::process::{clock, sample_base_path, Increments};
use levygap::sim::{estimate_decay_rate, simulate_ensemble, FitConfig, InitialLaw, Observable, SimConfig};
use levygap::speed::SpeedFunction;
use levygap::symbol::CharacteristicExponent;
use proptest::prelude::*;

fn quick_fit() -> FitConfig {
    FitConfig {
        bootstrap: 40,
        ..FitConfig::default()
    }
}

#[test]
fn fitted_rates_respect_the_lower_bound_on_every_preset() {
    for name in PRESETS {
        let cfg = RunConfig::preset(name).unwrap();
        let (psi, sp) = (cfg.symbol().unwrap(), cfg.speed().unwrap());
        let sim = SimConfig {
            n_paths: 3000,
            horizon: 8.0,
            ..cfg.sim.clone().unwrap()
        };
        let ens = simulate_ensemble(&psi, &sp, &sim).unwrap();
        let est = estimate_decay_rate(&ens, &sim.observable, &sp, None, &quick_fit()).unwrap();
        let ev = HarmonicEvaluator::new(psi);
        let bound = lambda1_lower(compute_delta(&ev, &sp, &cfg.bounds.scan).unwrap().delta.value).unwrap();
        assert!(est.rate >= 0.9 * bound, "{name}: rate {} vs bound {bound}", est.rate);
    }
}

#[test]
fn constant_speed_scales_the_clock() {
    // a ≡ c runs Y_t = X_{ct}; the fitted rate scales by c. μ(ℝ) = ∞, so the
    // target is the symmetric limit 0.
    let psi = CharacteristicExponent::stable(1.5).unwrap();
    let base = SimConfig {
        n_paths: 4000,
        horizon: 4.0,
        dt: Some(0.005),
        output_step: 0.05,
        init: InitialLaw::Point(1.0),
        seed: 3,
        far_field: None,
        ..SimConfig::default()
    };
    let f = Observable::Clipped { cap: 1.0 };
    let rate = |c: f64, horizon: f64| {
        let sp = SpeedFunction::constant(c).unwrap();
        let sim = SimConfig {
            horizon,
            output_step: base.output_step / c,
            dt: Some(0.005),
            ..base.clone()
        };
        let ens = simulate_ensemble(&psi, &sp, &sim).unwrap();
        estimate_decay_rate(&ens, &f, &sp, Some(0.0), &quick_fit()).unwrap().rate
    };
    let c = 2.0;
    let (r1, rc) = (rate(1.0, 4.0), rate(c, 2.0));
    let ratio = rc / r1;
    assert!((0.8 * c..=1.2 * c).contains(&ratio), "{rc} / {r1} = {ratio}");
}

#[test]
fn threads_do_not_change_the_ensemble() {
    let psi = CharacteristicExponent::cauchy_plus_brownian();
    let sp = SpeedFunction::exp_growth(1.0).unwrap();
    let sim = SimConfig {
        n_paths: 300,
        horizon: 3.0,
        init: InitialLaw::Stationary,
        ..SimConfig::default()
    };
    let runs: Vec<_> = [1, 3, 8]
        .into_iter()
        .map(|n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| simulate_ensemble(&psi, &sp, &sim).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clock_is_strictly_increasing(seed in 0u64..1000, alpha in 1.05f64..2.0, b in 0.2f64..3.0) {
        let inc = Increments::from_symbol(&CharacteristicExponent::stable(alpha).unwrap()).unwrap();
        let path = sample_base_path(&inc, 0.5, 500, 0.01, seed, 0);
        let sp = SpeedFunction::exp_growth(b).unwrap();
        let a = clock(&path, &sp, 0.01).unwrap();
        // Strict wherever dt/a(X_k) is above the clock's rounding unit;
        // far jumps can make it underflow relative to A_k.
        for k in 0..a.len() - 1 {
            let inc = 0.01 / sp.a(path[k]).unwrap();
            prop_assert!(a[k + 1] >= a[k]);
            if inc > 2.0 * f64::EPSILON * a[k] {
                prop_assert!(a[k + 1] > a[k]);
            }
        }
    }

    #[test]
    fn clipped_observable_is_bounded_and_odd(x in -1e6f64..1e6, cap in 0.01f64..10.0) {
        let f = Observable::Clipped { cap };
        prop_assert!(f.eval(x).abs() <= cap);
        prop_assert_eq!(f.eval(-x), -f.eval(x));
    }
}
