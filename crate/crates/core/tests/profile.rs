use gdp_core::model::*;
use gdp_core::profile::*;

fn build(params: &ModelParameters, amp: f64, samples: usize) -> (ProfileSolution, DerivedConstants) {
    let derived = validate_parameters(params).unwrap();
    let wave = wave_from_amplitude(params, &derived, amp).unwrap();
    let opts = ProfileOptions { samples, ..Default::default() };
    (integrate_profile(&wave, &derived, &opts).unwrap(), derived)
}

/// `η(ω) = ∫_ω^1 dw / (w ℓ(w))` by midpoint sums, with `ℓ` from the plain
/// polynomial-plus-power formula. Above `w = 1/2` the variable `w = 1 − s²`
/// removes the crest singularity; below it `y = ln w` flattens the tail.
fn eta_oracle(wave: &WaveParameters, r: f64, omega: f64) -> f64 {
    let (p, q) = (wave.p, wave.q);
    let a = (2.0 - q) / (2.0 - r);
    let b = (1.0 - q) / (1.0 - r);
    let c = 1.0 - 2.0 * a + b;
    let kappa = 2.0 - 2.0 / r;
    let ell = |w: f64| {
        let big_w = p * w;
        let z = 1.0 - big_w;
        (r * (z * z - 2.0 * a * z + b - c * z.powf(kappa)) / (big_w * big_w)).sqrt()
    };
    let midpoint = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| f(lo + (i as f64 + 0.5) * h) * h).sum::<f64>()
    };
    let split = omega.max(0.5);
    let crest = midpoint(0.0, (1.0 - split).sqrt(), &|s: f64| {
        let w = 1.0 - s * s;
        2.0 * s / (w * ell(w))
    });
    if omega >= 0.5 {
        return crest;
    }
    crest + midpoint(omega.ln(), 0.5f64.ln(), &|y: f64| 1.0 / ell(y.exp()))
}

#[test]
fn camassa_holm_profile_shape() {
    let params = ModelParameters::camassa_holm(1.0);
    let (prof, derived) = build(&params, 2.0, 2048);
    assert!((prof.omega_values[0] - 1.0).abs() < 1e-12);
    assert!((prof.g_values[0].powf(derived.r) - (1.0 - prof.wave.p)).abs() < 1e-10);
    assert!(prof.omega_prime[0].abs() <= 1e-6);
    assert!(prof.corner_slope.is_none());
    assert!(prof.eta_grid.windows(2).all(|w| w[1] > w[0]));
    assert!(prof.omega_values.windows(2).all(|w| w[1] < w[0]));
    assert!(prof.g_values.windows(2).all(|w| w[1] > w[0]));
    assert!(prof.g_values.iter().all(|&g| g >= prof.wave.gstar && g < 1.0));
    for omega in [0.9, 0.5, 0.1, 1e-3] {
        let idx = prof.omega_values.partition_point(|&w| w > omega);
        let oracle = eta_oracle(&prof.wave, derived.r, prof.omega_values[idx]);
        assert!((prof.eta_grid[idx] - oracle).abs() < 1e-6, "ω={omega}: {} vs {oracle}", prof.eta_grid[idx]);
    }
}

#[test]
fn tail_slope_matches_sqrt_q() {
    let params = ModelParameters::camassa_holm(1.0);
    let (prof, _) = build(&params, 2.0, 2048);
    let delta = 1e-8;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (e, g) in prof.eta_grid.iter().zip(&prof.g_values) {
        let gap = 1.0 - g;
        if gap <= 10.0 * delta * 1.0000001 {
            xs.push(*e);
            ys.push(gap.ln());
        }
    }
    assert!(xs.len() >= 3, "too few samples in the last decade");
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let target = -prof.wave.q.sqrt();
    assert!(((slope - target) / target).abs() < 0.01, "slope {slope} vs {target}");
    assert_eq!(prof.tail_decay, prof.wave.q.sqrt());
}

#[test]
fn residual_is_second_order() {
    let params = ModelParameters::camassa_holm(1.0);
    let res: Vec<f64> = [256, 512, 1024].iter().map(|&n| residual_second_order(&build(&params, 2.0, n).0)).collect();
    let o1 = (res[0] / res[1]).log2();
    let o2 = (res[1] / res[2]).log2();
    assert!(o1 >= 1.9 && o2 >= 1.9, "residuals {res:?}, orders {o1} {o2}");
}

#[test]
fn residual_detects_noise() {
    let params = ModelParameters::camassa_holm(1.0);
    let (prof, derived) = build(&params, 2.0, 1024);
    let clean = residual_second_order(&prof);
    let w_noisy: Vec<f64> = prof
        .g_values
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let bump = if i % 2 == 0 { 1e-3 } else { -1e-3 };
            1.0 - (g + bump).min(1.0).powf(derived.r)
        })
        .collect();
    let noisy = second_order_residual(&prof.eta_grid, &w_noisy, prof.wave.q, derived.r);
    assert!(noisy > 1e3 * clean, "noisy {noisy} clean {clean}");
}

#[test]
fn peakon_corner_slopes() {
    let dp = ModelParameters::degasperis_procesi();
    let (prof, _) = build(&dp, 1.0, 512);
    let q = prof.wave.q;
    let slope = prof.corner_slope.unwrap();
    assert!((slope - (-(1.0 - q).sqrt() / prof.wave.p)).abs() < 1e-12);
    assert!((slope + 0.5f64.sqrt()).abs() < 1e-10);
    let (left, right) = prof.crest_slopes();
    assert_eq!(left, -right);
    assert!((right - slope).abs() < 1e-12);
    // the peakon is an exact exponential
    for eta in [0.3, 2.0, 9.0, 40.0] {
        let exact = (-(0.5f64).sqrt() * eta).exp();
        assert!((prof.omega(eta) - exact).abs() < 1e-12 * exact.max(1e-3), "η={eta}");
    }

    let ch = ModelParameters::camassa_holm(0.0);
    let (prof, derived) = build(&ch, 2.0, 512);
    let q = prof.wave.q;
    assert!((q - 2.0 / 3.0).abs() < 1e-12);
    let slope = prof.corner_slope.unwrap();
    assert!((slope - (-(2.0 * (1.0 - q)).sqrt() / prof.wave.p)).abs() < 1e-10);
    assert!((slope + derived.r.sqrt()).abs() < 1e-12);
}

#[test]
fn view_parity_and_crest() {
    let params = ModelParameters::camassa_holm(1.0);
    let (prof, _) = build(&params, 2.0, 1024);
    let view = interpolated_omega_derivatives(&prof);
    assert_eq!(view.omega_prime(0.0), 0.0);
    for eta in [0.01, 0.7, 3.0, 25.0, 80.0] {
        assert_eq!(view.omega(eta), view.omega(-eta));
        assert_eq!(view.omega_prime(eta), -view.omega_prime(-eta));
        // exact-from-ODE slope agrees with the interpolant's own derivative
        let fast = prof.sample_interpolated(eta).d1;
        assert!((fast - view.omega_prime(eta)).abs() < 1e-8 * (1.0 + fast.abs()), "η={eta}");
    }
}

#[test]
fn physical_samples() {
    let params = ModelParameters::camassa_holm(1.0);
    let (prof, derived) = build(&params, 2.0, 2048);
    let (xc, t) = (0.0, 0.0);
    let peak = xc + prof.wave.velocity * t;
    let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
    let u = sample_physical(&prof, &params, &derived, xc, t, &xs);
    assert!((u[400] - 2.0).abs() < 1e-12);
    for d in 1..=400 {
        assert_eq!(u[400 + d], u[400 - d]);
    }
    let rate = prof.wave.q.sqrt() * derived.beta / params.epsilon;
    for (x, v) in xs.iter().zip(&u) {
        let bound = 2.0 * (-rate * (x - peak).abs()).exp();
        assert!(*v <= bound * 3.0 + 1e-15);
    }
}
