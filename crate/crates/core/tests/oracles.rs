//! Slow cross-checks of the closed-form estimator and bounds against brute force.

use mapcfo_core::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn periodic_pilot(rho: f64) -> PilotMatrix {
    let cfg = MimoConfig::new(2, 2, 16).unwrap();
    make_periodic_pilot(&cfg, 8, rho, Some(&zadoff_chu(1, 16)), None).unwrap()
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Coarse scan of the whole band followed by a fine scan around the winner.
fn refined_oracle(y: &Frame, ws: &EstimatorWorkspace<'_>, prior: &CfoPrior) -> f64 {
    let coarse = grid_search_oracle(y, ws, prior, -0.5, 0.5, 1e-4).unwrap().value;
    grid_search_oracle(y, ws, prior, coarse - 1e-4, coarse + 1e-4, 1e-8).unwrap().value
}

#[test]
fn closed_form_tracks_grid_argmax_at_20_db() {
    let pilot = periodic_pilot(db(20.0));
    let channel = ChannelPrior::iid(2, 2, 1.0).unwrap();
    let cfo = CfoPrior::new(0.01, 1e-5).unwrap();
    let ws = build_workspace(&pilot, &channel, ChannelMode::Mmse).unwrap();
    for trial in 0..100 {
        let s = Seed(2024).derive(trial);
        let f = sample_cfo(&cfo, s.derive(0)).unwrap();
        let h = sample_channel(&channel, s.derive(1));
        let y = synthesize_frame(&pilot, &h, f, 1.0, s.derive(2)).unwrap();
        let closed = estimate_frame(&y, &ws, &cfo, CorrelationMethod::General).unwrap().value;
        let oracle = refined_oracle(&y, &ws, &cfo);
        assert!((closed - oracle).abs() < 2e-6, "trial {trial}: {closed} vs {oracle}");

        // The derivative changes sign across the oracle's maximum.
        let lo = objective_g_derivative(&y, &ws, &cfo, oracle - 1e-6).unwrap();
        let hi = objective_g_derivative(&y, &ws, &cfo, oracle + 1e-6).unwrap();
        assert!(lo > 0.0 && hi < 0.0, "trial {trial}: {lo} {hi}");
    }
}

#[test]
fn closed_form_is_nearly_stationary_at_30_db() {
    let pilot = periodic_pilot(db(30.0));
    let channel = ChannelPrior::iid(2, 2, 1.0).unwrap();
    let cfo = CfoPrior::new(0.01, 1e-5).unwrap();
    let ws = build_workspace(&pilot, &channel, ChannelMode::Mmse).unwrap();
    for trial in 0..10 {
        let s = Seed(31).derive(trial);
        let f = sample_cfo(&cfo, s.derive(0)).unwrap();
        let y = synthesize_frame(&pilot, &sample_channel(&channel, s.derive(1)), f, 1.0, s.derive(2)).unwrap();
        let f_hat = estimate_frame(&y, &ws, &cfo, CorrelationMethod::General).unwrap().value;
        let step = 1e-7;
        let g = |x: f64| objective_g(&y, &ws, &cfo, x).unwrap();
        let at_hat = ((g(f_hat + step) - g(f_hat - step)) / (2.0 * step)).abs();
        let max = (0..200)
            .map(|i| -0.5 + 0.005 * i as f64)
            .map(|x| objective_g_derivative(&y, &ws, &cfo, x).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(at_hat < 1e-3 * max, "trial {trial}: {at_hat} vs {max}");
    }
}

#[test]
fn oracle_and_closed_form_within_bound_scale() {
    let channel = ChannelPrior::iid(2, 2, 1.0).unwrap();
    let cfo = CfoPrior::new(0.01, 1e-5).unwrap();
    for snr in [10.0, 20.0] {
        let pilot = periodic_pilot(db(snr));
        let ws = build_workspace(&pilot, &channel, ChannelMode::Mmse).unwrap();
        let bound = make_bounds(beta_iid(&pilot, 1.0, 2).unwrap(), &cfo).unwrap();
        let tol = (2e-5f64).max(3.0 * bound.bcrlb.sqrt());
        for trial in 0..20 {
            let s = Seed(5).derive_path(&[snr as u64, trial]);
            let f = sample_cfo(&cfo, s.derive(0)).unwrap();
            let y = synthesize_frame(&pilot, &sample_channel(&channel, s.derive(1)), f, 1.0, s.derive(2)).unwrap();
            let closed = estimate_frame(&y, &ws, &cfo, CorrelationMethod::General).unwrap().value;
            let oracle = grid_search_oracle(&y, &ws, &cfo, -0.5, 0.5, 1e-5).unwrap().value;
            assert!((closed - oracle).abs() <= tol);
        }
    }
}

/// `log det(I + Sigma_h X^H X)` with the rotation folded into `X`.
fn log_det_with_rotation(pilot: &PilotMatrix, cov: &CMatrix, f: f64) -> f64 {
    let (n, lt) = (pilot.symbols(), pilot.tx_antennas());
    let lr = cov.nrows() / lt;
    let mut x = CMatrix::zeros(n * lr, lt * lr);
    for r in 0..lr {
        for k in 0..n {
            let rot = Complex64::from_polar(1.0, std::f64::consts::TAU * f * k as f64);
            for t in 0..lt {
                x[(r * n + k, r * lt + t)] = rot * pilot.symbol(k, t);
            }
        }
    }
    let m = CMatrix::identity(lt * lr, lt * lr) + cov * x.adjoint() * x;
    m.determinant().ln().re
}

#[test]
fn determinant_does_not_depend_on_cfo() {
    let pilot = periodic_pilot(2.0);
    let l = CMatrix::from_fn(4, 4, |i, j| if j <= i { c(0.5 + 0.1 * i as f64, 0.1 * j as f64) } else { c(0.0, 0.0) });
    let cov = &l * l.adjoint();
    let a = log_det_with_rotation(&pilot, &cov, 0.0);
    let b = log_det_with_rotation(&pilot, &cov, 0.3);
    assert!((a - b).abs() < 1e-9);
}

/// Joint log density over `(f, h)` for one transmit and one receive antenna.
fn joint_log_density(y: &Frame, pilot: &PilotMatrix, mu: Complex64, var: f64, cfo: &CfoPrior, f: f64, h: Complex64) -> f64 {
    let mut resid = 0.0;
    for k in 0..pilot.symbols() {
        let model = Complex64::from_polar(1.0, std::f64::consts::TAU * f * k as f64) * pilot.symbol(k, 0) * h;
        resid += (y.sample(k, 0) - model).norm_sqr();
    }
    -resid - (h - mu).norm_sqr() / var - 0.5 * cfo.precision() * (f - cfo.mean()).powi(2)
}

fn nested_profile(y: &Frame, pilot: &PilotMatrix, mu: Complex64, var: f64, cfo: &CfoPrior, f: f64) -> f64 {
    let mut best = (f64::NEG_INFINITY, c(0.0, 0.0));
    for i in -40..=40 {
        for j in -40..=40 {
            let h = mu + c(0.1 * i as f64, 0.1 * j as f64);
            let v = joint_log_density(y, pilot, mu, var, cfo, f, h);
            if v > best.0 {
                best = (v, h);
            }
        }
    }
    let center = best.1;
    for i in -100..=100 {
        for j in -100..=100 {
            let h = center + c(0.001 * i as f64, 0.001 * j as f64);
            best.0 = best.0.max(joint_log_density(y, pilot, mu, var, cfo, f, h));
        }
    }
    best.0
}

#[test]
fn joint_map_separates_on_micro_instance() {
    let cfg = MimoConfig::new(1, 1, 4).unwrap();
    let pilot = make_td_pilot(&cfg, 4, 2.0, None).unwrap();
    let mu = c(0.4, -0.3);
    let var = 0.8;
    let channel = ChannelPrior::new(CVector::from_element(1, mu), CMatrix::from_element(1, 1, c(var, 0.0))).unwrap();
    let cfo = CfoPrior::new(0.05, 0.01).unwrap();
    let ws = build_workspace(&pilot, &channel, ChannelMode::Mmse).unwrap();
    let step = 0.004;
    for seed in 0..3 {
        let s = Seed(88).derive(seed);
        let f = sample_cfo(&cfo, s.derive(0)).unwrap();
        let y = synthesize_frame(&pilot, &sample_channel(&channel, s.derive(1)), f, 1.0, s.derive(2)).unwrap();
        let sequential = grid_search_oracle(&y, &ws, &cfo, -0.5, 0.5, step).unwrap().value;
        // Only scan the joint grid near the answer to keep the test short.
        let (mut best_f, mut best_v) = (0.0, f64::NEG_INFINITY);
        for i in -10..=10 {
            let fi = sequential + step * i as f64;
            let v = nested_profile(&y, &pilot, mu, var, &cfo, fi);
            if v > best_v {
                best_v = v;
                best_f = fi;
            }
        }
        assert!((best_f - sequential).abs() <= step * 1.000001, "seed {seed}: {best_f} vs {sequential}");
    }
}

#[test]
fn fisher_information_matches_monte_carlo() {
    let pilot = periodic_pilot(db(10.0));
    let l = CMatrix::from_fn(4, 4, |i, j| if j <= i { c(0.6 - 0.05 * i as f64, 0.05 * (i + j) as f64) } else { c(0.0, 0.0) });
    let cov = &l * l.adjoint() + CMatrix::identity(4, 4).scale(0.1);
    let mean = CVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.2), c(0.0, -0.4), c(0.25, 0.0)]);
    let channel = ChannelPrior::new(mean, cov).unwrap();
    let ws = build_workspace(&pilot, &channel, ChannelMode::Mmse).unwrap();
    let flat = CfoPrior::flat(0.0);
    let beta = beta_general(&pilot, &channel).unwrap();
    let frames = 20_000u64;
    let h = 1e-4;
    let f0 = 0.07;
    let samples: Vec<f64> = (0..frames)
        .map(|i| {
            let s = Seed(404).derive(i);
            let y = synthesize_frame(&pilot, &sample_channel(&channel, s.derive(1)), f0, 1.0, s.derive(2)).unwrap();
            let g = |x: f64| objective_g(&y, &ws, &flat, x).unwrap();
            -(g(f0 + h) - 2.0 * g(f0) + g(f0 - h)) / (h * h)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / frames as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (frames - 1) as f64;
    let se = (var / frames as f64).sqrt();
    assert!((mean - beta).abs() < 3.0 * se, "MC {mean} +- {se}, analytic {beta}");
}
