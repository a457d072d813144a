use mapcfo::*;

fn tracking(ar_rho: f64, ar_noise_var: f64, frames: usize, runs: u64) -> TrackingConfig {
    TrackingConfig {
        rx_antennas: 2,
        pilot: PilotSpec::new(PilotKind::Periodic, 2, 16),
        channel_variance: 1.0,
        ar_rho,
        ar_mean: 0.1,
        ar_noise_var,
        frames,
        runs,
        snr_db: 10.0,
        method: Method::General,
        seed: 12,
    }
}

#[test]
fn prior_update_examples() {
    let p = ar1_prior_update(0.2, 1e-7, 0.9, 0.1, 1e-8).unwrap();
    assert!((p.variance() - 9.1e-8).abs() < 1e-20);
    assert!((p.mean() - 0.19).abs() < 1e-15);

    let p = ar1_prior_update(0.3, 4e-7, 1.0, 0.1, 0.0).unwrap();
    assert_eq!((p.mean(), p.variance()), (0.3, 4e-7));

    let p = ar1_prior_update(0.3, 4e-7, 0.0, 0.1, 2e-6).unwrap();
    assert_eq!((p.mean(), p.variance()), (0.1, 2e-6));

    assert!(ar1_prior_update(0.3, 0.0, 1.0, 0.1, 0.0).is_err());
    assert!(ar1_prior_update(0.3, -1.0, 0.9, 0.1, 1e-8).is_err());
}

#[test]
fn memoryless_process_gives_flat_prior_after_one_frame() {
    let res = run_tracking(&tracking(0.0, 1e-6, 6, 20)).unwrap();
    for r in &res.records[1..] {
        assert_eq!(r.prior_variance, 1e-6);
        assert_eq!(r.bcrlb, res.records[1].bcrlb);
    }
}

#[test]
fn frozen_cfo_prior_variance_shrinks_monotonically() {
    let res = run_tracking(&tracking(1.0, 0.0, 12, 4)).unwrap();
    let v: Vec<f64> = res.records[1..].iter().map(|r| r.prior_variance).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn prior_variance_settles_on_the_recursion_fixed_point() {
    let cfg = tracking(0.9, 1e-8, 120, 2);
    let res = run_tracking(&cfg).unwrap();
    let tail = &res.records[60..];
    let avg = tail.iter().map(|r| r.prior_variance).sum::<f64>() / tail.len() as f64;
    let beta = mapcfo_core::beta_iid(&cfg.pilot.build(power_for_snr(10.0, 1.0)).unwrap(), 1.0, 2).unwrap();
    let fixed = stationary_prior_variance(beta, 0.9, 1e-8);
    assert!((avg - fixed).abs() <= 0.1 * fixed, "{avg} vs {fixed}");
    assert!((res.stationary_bcrlb - 1.0 / (beta + 1.0 / fixed)).abs() < 1e-20);
}

fn sweep(points: Vec<f64>, trials: u64, seed: u64) -> SweepConfig {
    SweepConfig {
        rx_antennas: 2,
        pilot: PilotSpec::new(PilotKind::Td, 2, 16),
        channel_variance: 1.0,
        cfo: CfoPriorSpec { mean: 0.0, variance: Some(1e-5) },
        points,
        snr_db: 20.0,
        trials,
        modes: vec![Mode::Map, Mode::Ml],
        method: Method::General,
        seed,
    }
}

#[test]
fn sweeps_are_seed_deterministic() {
    let a = run_mse_vs_snr(&sweep(vec![0.0, 10.0], 1, 3)).unwrap();
    assert_eq!(a, run_mse_vs_snr(&sweep(vec![0.0, 10.0], 1, 3)).unwrap());
    assert_ne!(a, run_mse_vs_snr(&sweep(vec![0.0, 10.0], 1, 4)).unwrap());
}

#[test]
fn ml_records_report_the_crlb() {
    let res = run_mse_vs_snr(&sweep(vec![10.0], 5, 1)).unwrap();
    let ml = res.get(10.0, Mode::Ml).unwrap();
    let map = res.get(10.0, Mode::Map).unwrap();
    assert_eq!(ml.bcrlb, ml.crlb);
    assert!(map.bcrlb < map.crlb);
}

#[test]
fn usable_range_stops_at_first_blown_point() {
    let rec = |x: f64, mse: f64| SweepRecord { x, mode: Mode::Ml, mse, trials: 1, bcrlb: 1.0, crlb: 1.0, failures: 0 };
    let result = SweepResult {
        records: vec![rec(-0.2, 1.0), rec(-0.1, 1.0), rec(0.0, 1.0), rec(0.1, 2.0), rec(0.2, 9.0), rec(0.3, 1.0)],
    };
    assert!((usable_range(&result, Mode::Ml, 0.0, 3.0) - 0.1).abs() < 1e-12);
    assert_eq!(usable_range(&result, Mode::Map, 0.0, 3.0), 0.0);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_mse_vs_snr(&sweep(vec![], 10, 0)).is_err());
    assert!(run_mse_vs_snr(&sweep(vec![0.0], 0, 0)).is_err());
    assert!(run_tracking(&tracking(1.2, 1e-8, 5, 5)).is_err());
    assert!(run_tracking(&tracking(0.9, 1e-8, 0, 5)).is_err());
}
