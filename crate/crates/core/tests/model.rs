use gdp_core::model::*;
use gdp_core::Error;
use proptest::prelude::*;

/// Exhaustive sign-change scan of `F` on (0, 1) followed by plain bisection.
/// Independent of the bracket logic in the library.
fn scan_root(q: f64, r: f64, step: f64) -> f64 {
    scan_root_in(q, r, step, |g| g)
}

/// Same scan in `z = g^r`; returns the root as a `g` value.
fn scan_root_z(q: f64, r: f64, step: f64) -> f64 {
    scan_root_in(q, r, step, |z| z.powf(1.0 / r)).powf(r)
}

fn scan_root_in(q: f64, r: f64, step: f64, to_g: impl Fn(f64) -> f64) -> f64 {
    let f = |s: f64| {
        let g = to_g(s);
        let a = (2.0 - q) / (2.0 - r);
        let b = (1.0 - q) / (1.0 - r);
        let c = 1.0 - 2.0 * a + b;
        g * g - 2.0 * a * g.powf(2.0 - r) + b * g.powf(2.0 - 2.0 * r) - c
    };
    let mut g = step;
    let mut prev = f(g);
    while g < 1.0 - step {
        let next = g + step;
        let v = f(next);
        if prev < 0.0 && v > 0.0 {
            let (mut lo, mut hi) = (g, next);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return to_g(0.5 * (lo + hi));
        }
        prev = v;
        g = next;
    }
    panic!("scan found no sign change");
}

#[test]
fn camassa_holm_closed_form_soliton() {
    let params = ModelParameters::camassa_holm(1.0);
    let derived = validate_parameters(&params).unwrap();
    let wave = wave_from_amplitude(&params, &derived, 2.0).unwrap();
    assert_eq!(wave.regime, Regime::SmoothSoliton);
    assert!((wave.velocity - 5.0).abs() < 1e-10, "V = {}", wave.velocity);
    assert!((wave.gstar - 5f64.powf(-1.5)).abs() < 1e-10);
    assert!((wave.p - 0.8).abs() < 1e-10);
    assert!((wave.q - 8.0 / 15.0).abs() < 1e-10);
    let f = structural_f(wave.gstar, wave.q, derived.r).unwrap();
    assert!(f.abs() < 1e-12, "F(g*) = {f}");

    // closed form g* = (1 + c3 A/(c0 α²))^{-3/2} across amplitudes
    for a in [0.05, 0.5, 1.0, 3.0, 10.0] {
        let w = wave_from_amplitude(&params, &derived, a).unwrap();
        let expected = (1.0 + params.c3 * a / params.c0).powf(-1.5);
        assert!((w.gstar - expected).abs() < 1e-10, "A={a}: {} vs {expected}", w.gstar);
        assert!((w.velocity - (params.c0 + params.c3 * a)).abs() < 1e-9 * w.velocity);
    }
}

#[test]
fn degasperis_procesi_is_a_peakon() {
    let params = ModelParameters::degasperis_procesi();
    let derived = validate_parameters(&params).unwrap();
    let wave = wave_from_amplitude(&params, &derived, 1.0).unwrap();
    assert_eq!(wave.regime, Regime::Peakon);
    assert_eq!(wave.p, 1.0);
    assert_eq!(wave.gstar, 0.0);
    assert!((wave.velocity - 2.0).abs() < 1e-14);
    assert!((wave.q - 0.5).abs() < 1e-15);
    let c = existence_criterion(&params, 1.0, wave.gstar, derived.r);
    assert!(!c.smooth);
}

#[test]
fn camassa_holm_without_linear_term_is_a_peakon() {
    let params = ModelParameters::camassa_holm(0.0);
    let derived = validate_parameters(&params).unwrap();
    let wave = wave_from_amplitude(&params, &derived, 2.0).unwrap();
    assert_eq!(wave.regime, Regime::Peakon);
    assert!((wave.velocity - 4.0).abs() < 1e-14);
    let c = existence_criterion(&params, 2.0, wave.gstar, derived.r);
    assert_eq!(c.lhs, 2.0);
    assert_eq!(c.rhs, 2.0);
    assert!(!c.smooth);
}

#[test]
fn existence_criterion_for_camassa_holm() {
    let params = ModelParameters::camassa_holm(1.0);
    let derived = validate_parameters(&params).unwrap();
    let c = existence_criterion(&params, 2.0, 5f64.powf(-1.5), derived.r);
    assert!((c.lhs - 1.6).abs() < 1e-14);
    assert!((c.rhs - 2.0).abs() < 1e-14);
    assert!(c.smooth);
}

#[test]
fn velocity_free_turning_point_matches_scan() {
    let params = ModelParameters::velocity_free_turning_point();
    let derived = validate_parameters(&params).unwrap();
    let q_expected = params.c3 / (params.alpha * params.alpha * params.c1);
    assert!((q_expected - 0.25).abs() < 1e-15);
    let g_oracle = scan_root(q_expected, derived.r, 1e-6);
    for a in [0.3, 1.0, 4.0] {
        let wave = wave_from_amplitude(&params, &derived, a).unwrap();
        assert_eq!(wave.regime, Regime::SmoothSoliton);
        assert!((wave.q - 0.25).abs() < 1e-12);
        assert!((wave.gstar - g_oracle).abs() < 1e-10, "{} vs {g_oracle}", wave.gstar);
        let v = params.c3 * a / ((1.0 - g_oracle.powf(derived.r)) * params.alpha * params.alpha);
        assert!((wave.velocity - v).abs() < 1e-9 * v);
    }
}

#[test]
fn inverse_relation_round_trips() {
    let params = ModelParameters::camassa_holm(1.0);
    let derived = validate_parameters(&params).unwrap();
    let w = amplitude_from_velocity(&params, &derived, 5.0).unwrap();
    assert!((w.amplitude - 2.0).abs() < 1e-10);
    for a in [0.1, 0.7, 2.0, 6.0] {
        let forward = wave_from_amplitude(&params, &derived, a).unwrap();
        let back = amplitude_from_velocity(&params, &derived, forward.velocity).unwrap();
        assert!((back.amplitude - a).abs() < 1e-10 * a.max(1.0), "A={a}: {}", back.amplitude);
    }
}

#[test]
fn z_space_root_with_r_two_fifths() {
    // c2 = 3 c3 / 2 gives r = 2/5.
    let params = ModelParameters { alpha: 1.0, c0: 1.0, c1: 2.0, c2: 3.0, c3: 2.0, gamma: 0.5, epsilon: 0.1 };
    let derived = validate_parameters(&params).unwrap();
    assert!((derived.r - 0.4).abs() < 1e-15);
    for v in [1.3, 1.5, 1.8] {
        let wave = amplitude_from_velocity(&params, &derived, v).unwrap();
        let q = wave.q;
        let z = wave.gstar.powf(derived.r);
        let z_oracle = scan_root_z(q, derived.r, 1e-6);
        assert!((z - z_oracle).abs() < 1e-9);
        // F = (1 − z)² f with the cubic re-derived for r = 2/5
        let cubic = |z: f64| z.powi(3) + (1.25 * q - 0.5) * z * z + (5.0 * q / 6.0 - 1.0 / 3.0) * z + (5.0 * q / 12.0 - 1.0 / 6.0);
        assert!(cubic(z).abs() < 1e-12, "re-derived cubic residual {}", cubic(z));
        // the stated cubic does not vanish at the actual root
        let printed = |z: f64| z.powi(3) + 2.0 * z * z - (1.0 - 5.0 * q) * z / 3.0 - 0.8 * (4.0 - 5.0 * q);
        assert!(printed(z).abs() > 1e-3);
        let amp = (params.gamma + v) * (1.0 - z) / params.c3;
        assert!((wave.amplitude - amp).abs() < 1e-12);
    }
}

#[test]
fn no_root_reports_interval() {
    let params = ModelParameters { alpha: 1.0, c0: 0.0, c1: 2.0, c2: 2.0, c3: 2.0, gamma: 0.0, epsilon: 0.1 };
    let derived = validate_parameters(&params).unwrap();
    match amplitude_from_velocity(&params, &derived, 2.0) {
        Err(Error::NoRoot { lo, hi, .. }) => assert!(lo < hi),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn f_and_slope_vanish_at_one(q in 0.01f64..0.99, r in 0.01f64..0.99) {
        let f = |g: f64| structural_f(g, q, r).unwrap();
        prop_assert!(f(1.0).abs() < 1e-15);
        let h = 1e-5;
        // centred difference straddling g = 1 (F is smooth there)
        let slope = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        prop_assert!(slope.abs() < 1e-8, "slope {}", slope);
    }

    #[test]
    fn positive_constant_iff_q_below_r(q in 0.0f64..1.0, r in 0.01f64..0.99) {
        let c = StructuralFunction::new(q, r).constant();
        let a = (2.0 - q) / (2.0 - r);
        let b = (1.0 - q) / (1.0 - r);
        prop_assert!((c - (1.0 - 2.0 * a + b)).abs() < 1e-12);
        if (q - r).abs() > 1e-12 {
            prop_assert_eq!(c > 0.0, q < r);
        }
    }

    #[test]
    fn wave_invariants_and_criterion_agree(c0 in 0.0f64..3.0, gamma in 0.0f64..2.0, c2 in 0.3f64..3.0, amp in 0.05f64..5.0) {
        let params = ModelParameters { alpha: 1.0, c0, c1: 3.0, c2, c3: 2.0, gamma, epsilon: 0.1 };
        let derived = validate_parameters(&params).unwrap();
        let wave = wave_from_amplitude(&params, &derived, amp).unwrap();
        let p_formula = params.c3 * amp / (gamma + wave.velocity);
        prop_assert!((wave.p - p_formula).abs() < 1e-12);
        let crit = existence_criterion(&params, amp, wave.gstar, derived.r);
        match wave.regime {
            Regime::SmoothSoliton => {
                prop_assert!(wave.gstar > 0.0 && wave.gstar < 1.0);
                prop_assert!((1.0 - wave.gstar.powf(derived.r) - wave.p).abs() < 1e-14);
                let f = structural_f(wave.gstar, wave.q, derived.r).unwrap();
                prop_assert!(f.abs() < 1e-12);
                prop_assert!(crit.smooth || (crit.lhs - crit.rhs).abs() < 1e-8);
            }
            Regime::Peakon => prop_assert!((crit.lhs - crit.rhs).abs() < 1e-8),
            Regime::NoSolitaryWave => prop_assert!(!crit.smooth),
        }
    }
}
