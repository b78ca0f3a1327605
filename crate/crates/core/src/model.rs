//! Model parameters, the structural function F(g), and the amplitude–velocity
//! relation of a single solitary wave.
//!
//! The traveling-wave ansatz `u = A ω(β(x − Vt)/ε)` reduces the PDE to
//! `r (dg/dη)² = F(g)` with `W = p ω = 1 − g^r`. A smooth soliton exists iff
//! the turning point `g* ∈ (0, 1)` with `F(g*) = 0` exists, which happens
//! exactly when `q < r`; `q = r` is the peakon boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// |q − r| at or below this is classified as a peakon.
pub const PEAKON_TOLERANCE: f64 = 1e-9;

/// Offset of the first velocity probe above the admissible lower bound.
const SCAN_OFFSET: f64 = 1e-8;
/// Number of doublings of the velocity scan before giving up.
const SCAN_DOUBLINGS: u32 = 40 + 27;

/// The six physical constants plus the dispersion scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl ModelParameters {
    /// Camassa–Holm coefficients (`c1 = 3c3/(2α²)`, `c2 = c3/2`, `γ = 0`)
    /// with `α = 1`, `c3 = 2`.
    pub fn camassa_holm(c0: f64) -> Self {
        Self { alpha: 1.0, c0, c1: 3.0, c2: 1.0, c3: 2.0, gamma: 0.0, epsilon: 0.1 }
    }

    /// Degasperis–Procesi coefficients (`c1 = 2c3/α²`, `c2 = c3`, `c0 = γ = 0`)
    /// with `α = 1`, `c3 = 2`.
    pub fn degasperis_procesi() -> Self {
        Self { alpha: 1.0, c0: 0.0, c1: 4.0, c2: 2.0, c3: 2.0, gamma: 0.0, epsilon: 0.1 }
    }

    /// A non-integrable member with `c0 = γ = 0` and `α²c1 > c2 + c3`, where the
    /// turning point does not depend on the velocity.
    pub fn velocity_free_turning_point() -> Self {
        Self { alpha: 2.0, c0: 0.0, c1: 2.0, c2: 1.0, c3: 2.0, gamma: 0.0, epsilon: 0.1 }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// `q(V) = c3 (V − c0) / (c1 (γ + α² V))`.
    pub fn q_of_velocity(&self, velocity: f64) -> f64 {
        self.c3 * (velocity - self.c0) / (self.c1 * self.speed_scale(velocity))
    }

    /// `p = c3 A / (γ + α² V)`.
    pub fn p_of(&self, amplitude: f64, velocity: f64) -> f64 {
        self.c3 * amplitude / self.speed_scale(velocity)
    }

    /// Velocity for which `p(A, V) = p`.
    pub fn velocity_for(&self, amplitude: f64, p: f64) -> f64 {
        (self.c3 * amplitude / p - self.gamma) / (self.alpha * self.alpha)
    }

    /// `γ + α² V`.
    pub fn speed_scale(&self, velocity: f64) -> f64 {
        self.gamma + self.alpha * self.alpha * velocity
    }
}

/// Constants fixed by the model parameters alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Spatial scaling, `β² = c1/c3`.
    pub beta: f64,
    /// `r = c3/(c2 + c3)`, always in (0, 1).
    pub r: f64,
}

/// Checks the sign assumptions on the model and returns `β` and `r`.
pub fn validate_parameters(params: &ModelParameters) -> Result<DerivedConstants> {
    let mut violations = Vec::new();
    let mut check = |name: &str, value: f64, strict: bool| {
        if !value.is_finite() {
            violations.push(format!("{name} must be finite (got {value})"));
        } else if strict && value <= 0.0 {
            violations.push(format!("{name} must be > 0 (got {value})"));
        } else if !strict && value < 0.0 {
            violations.push(format!("{name} must be >= 0 (got {value})"));
        }
    };
    check("alpha", params.alpha, true);
    check("c0", params.c0, false);
    check("c1", params.c1, true);
    check("c2", params.c2, true);
    check("c3", params.c3, true);
    check("gamma", params.gamma, false);
    check("epsilon", params.epsilon, true);
    if !violations.is_empty() {
        return Err(Error::Domain(violations));
    }
    Ok(DerivedConstants { beta: (params.c1 / params.c3).sqrt(), r: params.c3 / (params.c2 + params.c3) })
}

/// `F(g) = g² − 2a g^{2−r} + b g^{2−2r} − C` with `a = (2−q)/(2−r)`,
/// `b = (1−q)/(1−r)` and `C` chosen so that `F(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralFunction {
    pub q: f64,
    pub r: f64,
    a: f64,
    b: f64,
    c: f64,
}

/// Below this distance from g = 1 the Taylor series about g = 1 is used.
const F_SERIES_WINDOW: f64 = 0.05;

impl StructuralFunction {
    pub fn new(q: f64, r: f64) -> Self {
        let a = (2.0 - q) / (2.0 - r);
        let b = (1.0 - q) / (1.0 - r);
        Self { q, r, a, b, c: integration_constant(q, r) }
    }

    /// The integration constant `C = 1 − 2a + b = r(r − q)/((2 − r)(1 − r))`.
    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn value(&self, g: f64) -> f64 {
        let w = 1.0 - g;
        if w.abs() < F_SERIES_WINDOW {
            return self.value_near_one(w);
        }
        let r = self.r;
        g * g - 2.0 * self.a * g.powf(2.0 - r) + self.b * g.powf(2.0 - 2.0 * r) - self.c
    }

    pub fn derivative(&self, g: f64) -> f64 {
        let r = self.r;
        2.0 * g - 2.0 * self.a * (2.0 - r) * g.powf(1.0 - r) + self.b * (2.0 - 2.0 * r) * g.powf(1.0 - 2.0 * r)
    }

    /// `F(1 − w)` by its binomial series; the constant and linear terms
    /// vanish identically, so no cancellation is incurred.
    fn value_near_one(&self, w: f64) -> f64 {
        let r = self.r;
        let exps = [(2.0, 1.0), (2.0 - r, -2.0 * self.a), (2.0 - 2.0 * r, self.b)];
        let mut binoms = [1.0f64; 3];
        let mut sum = 0.0;
        let mut wn = 1.0;
        for n in 1..80u32 {
            let nf = n as f64;
            wn *= -w;
            let mut coef = 0.0;
            for (k, (m, scale)) in exps.iter().enumerate() {
                binoms[k] *= (m - nf + 1.0) / nf;
                coef += scale * binoms[k];
            }
            if n >= 2 {
                let term = coef * wn;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() && n > 4 {
                    break;
                }
            }
        }
        sum
    }
}

/// `C` in closed form; positive iff `q < r`.
pub fn integration_constant(q: f64, r: f64) -> f64 {
    r * (r - q) / ((2.0 - r) * (1.0 - r))
}

/// Evaluates `F(g; q, r)`.
pub fn structural_f(g: f64, q: f64, r: f64) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain(format!("F(g) requires g > 0 (got {g})")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("F(g) requires 0 < r < 1 (got {r})")));
    }
    Ok(StructuralFunction::new(q, r).value(g))
}

/// Solitary-wave regime of one amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SmoothSoliton,
    Peakon,
    NoSolitaryWave,
}

/// One solitary wave: amplitude, speed and the profile constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParameters {
    pub amplitude: f64,
    pub velocity: f64,
    pub p: f64,
    pub q: f64,
    pub gstar: f64,
    /// Integration constant `C` of the structural function.
    pub c: f64,
    pub regime: Regime,
}

impl WaveParameters {
    pub fn structural(&self, derived: &DerivedConstants) -> StructuralFunction {
        StructuralFunction::new(self.q, derived.r)
    }
}

fn classify(q: f64, r: f64) -> Regime {
    if (q - r).abs() <= PEAKON_TOLERANCE {
        Regime::Peakon
    } else if q < r {
        Regime::SmoothSoliton
    } else {
        Regime::NoSolitaryWave
    }
}

/// Root `g* ∈ (0, 1)` of `F(·; q, r)`; `None` unless `q < r`.
///
/// `F(0) = −C < 0` and `F > 0` on `(g*, 1)`, so the first probe with a
/// positive value brackets the root.
pub fn turning_point(q: f64, r: f64) -> Option<f64> {
    if !(q < r) || !(r > 0.0 && r < 1.0) {
        return None;
    }
    let f = StructuralFunction::new(q, r);
    let mut probes: Vec<f64> = (1..=60).rev().map(|k| 0.5f64.powi(k)).collect();
    probes.extend((2..=52).map(|k| 1.0 - 0.5f64.powi(k)));
    let mut lo = 0.0;
    for &g in &probes {
        if f.value(g) > 0.0 {
            return Some(bisect(|x| f.value(x), lo, g));
        }
        lo = g;
    }
    None
}

/// Bisection for a sign change from negative at `lo` to positive at `hi`,
/// down to adjacent floating-point numbers.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn assemble_wave(params: &ModelParameters, derived: &DerivedConstants, amplitude: f64, velocity: f64) -> WaveParameters {
    let p = params.p_of(amplitude, velocity);
    let q = params.q_of_velocity(velocity);
    let regime = classify(q, derived.r);
    let gstar = if regime == Regime::SmoothSoliton { (1.0 - p).max(0.0).powf(1.0 / derived.r) } else { 0.0 };
    WaveParameters { amplitude, velocity, p, q, gstar, c: integration_constant(q, derived.r), regime }
}

/// Solves the amplitude–velocity relation for a given amplitude.
///
/// The residual `Φ(V) = F(g*(V); q(V), r)` with `g*(V) = (1 − p(V))^{1/r}` is
/// scanned from the smallest admissible speed (`p ≤ 1`, `V ≥ c0`) with
/// geometrically growing offsets, then bisected.
pub fn wave_from_amplitude(params: &ModelParameters, derived: &DerivedConstants, amplitude: f64) -> Result<WaveParameters> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::domain(format!("amplitude must be > 0 (got {amplitude})")));
    }
    let r = derived.r;
    let alpha2 = params.alpha * params.alpha;
    let v_unit_p = (params.c3 * amplitude - params.gamma) / alpha2;
    let p_bound_active = v_unit_p >= params.c0;
    let v_lo = v_unit_p.max(params.c0);

    if p_bound_active {
        let q_lo = params.q_of_velocity(v_lo);
        match classify(q_lo, r) {
            Regime::Peakon => {
                let mut wave = assemble_wave(params, derived, amplitude, v_lo);
                wave.p = 1.0;
                wave.gstar = 0.0;
                return Ok(wave);
            }
            Regime::NoSolitaryWave => {
                let mut wave = assemble_wave(params, derived, amplitude, v_lo);
                wave.p = 1.0;
                wave.gstar = 0.0;
                return Ok(wave);
            }
            Regime::SmoothSoliton => {}
        }
    }

    let phi = |v: f64| -> f64 {
        let p = params.p_of(amplitude, v).min(1.0);
        let q = params.q_of_velocity(v);
        let g = (1.0 - p).max(0.0).powf(1.0 / r);
        StructuralFunction::new(q, r).value(g)
    };

    let scale = v_lo.abs().max(1.0);
    let mut lo = v_lo;
    let mut found = None;
    for k in 0..=SCAN_DOUBLINGS {
        let v = v_lo + SCAN_OFFSET * scale * 2f64.powi(k as i32);
        if phi(v) > 0.0 {
            found = Some((lo, v));
            break;
        }
        lo = v;
    }
    let (lo, hi) =
        found.ok_or_else(|| Error::NoRoot { reason: format!("amplitude {amplitude}: F(g*(V)) never changes sign"), lo: v_lo, hi: lo })?;
    let v = bisect(phi, lo, hi);
    Ok(assemble_wave(params, derived, amplitude, v))
}

/// Inverse relation: amplitude of the solitary wave travelling at speed `V`.
pub fn amplitude_from_velocity(params: &ModelParameters, derived: &DerivedConstants, velocity: f64) -> Result<WaveParameters> {
    if !(velocity > params.c0) || !velocity.is_finite() {
        return Err(Error::domain(format!("velocity must exceed c0 = {} for a decaying tail (got {velocity})", params.c0)));
    }
    let r = derived.r;
    let q = params.q_of_velocity(velocity);
    let scale = params.speed_scale(velocity);
    match classify(q, r) {
        Regime::Peakon => {
            let amplitude = scale / params.c3;
            let mut wave = assemble_wave(params, derived, amplitude, velocity);
            wave.p = 1.0;
            wave.gstar = 0.0;
            Ok(wave)
        }
        Regime::NoSolitaryWave => {
            Err(Error::NoRoot { reason: format!("q = {q} exceeds r = {r}; F has no root in (0, 1)"), lo: 0.0, hi: 1.0 })
        }
        Regime::SmoothSoliton => {
            let g = turning_point(q, r).ok_or_else(|| Error::NoRoot {
                reason: format!("no turning point for q = {q}, r = {r}"),
                lo: 0.0,
                hi: 1.0,
            })?;
            let z = g.powf(r);
            let amplitude = scale * (1.0 - z) / params.c3;
            Ok(WaveParameters {
                amplitude,
                velocity,
                p: 1.0 - z,
                q,
                gstar: g,
                c: integration_constant(q, r),
                regime: Regime::SmoothSoliton,
            })
        }
    }
}

/// Both sides of the smooth-soliton existence inequality
/// `c3 − A⁻¹(γ + c0 α²)(1 − g*^r) < c1 r α²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCriterion {
    pub lhs: f64,
    pub rhs: f64,
    pub smooth: bool,
}

pub fn existence_criterion(params: &ModelParameters, amplitude: f64, gstar: f64, r: f64) -> ExistenceCriterion {
    let alpha2 = params.alpha * params.alpha;
    let lhs = params.c3 - (params.gamma + params.c0 * alpha2) * (1.0 - gstar.powf(r)) / amplitude;
    let rhs = params.c1 * r * alpha2;
    ExistenceCriterion { lhs, rhs, smooth: lhs < rhs }
}
