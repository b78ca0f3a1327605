//! Solitary-wave profiles `ω(η)`.
//!
//! With `W = p ω = 1 − g^r` and `z = g^r`, the first integral of the profile
//! equation reads `(dW/dη)² = r H(z)` with
//! `H(z) = z² − 2a z + b − C z^{2 − 2/r}`, so on `η > 0`
//!
//! ```text
//! ω' = −ω ℓ(ω),   ℓ(ω) = √(r H / W²).
//! ```
//!
//! Writing `ω = exp(−t²)` turns the crest singularity (`ℓ ~ √(1 − ω)` for a
//! smooth soliton) into a regular integrand, so `η(t) = ∫ 2t/ℓ dt` is computed
//! with Gauss–Legendre panels on a uniform `t` grid. Samples carry exact
//! first and second derivatives from the profile ODE and are joined by
//! quintic Hermite interpolation; beyond `η_c` the exponential tail is used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParameters, Regime, WaveParameters};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    /// Number of stored samples on `[0, η_c]`.
    pub samples: usize,
    /// Switch to the analytic tail once `1 − g ≤ tail_delta`.
    pub tail_delta: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { samples: 2048, tail_delta: 1e-8 }
    }
}

const PANEL_NODES: usize = 12;
const TAIL_SERIES_WINDOW: f64 = 0.05;

/// The reduced profile equation of one wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Shape {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    zstar: f64,
    a: f64,
    b: f64,
    c: f64,
    kappa: f64,
    peakon: bool,
}

impl Shape {
    pub(crate) fn new(wave: &WaveParameters, r: f64) -> Self {
        let peakon = wave.regime == Regime::Peakon;
        // on the peakon boundary q = r exactly and C = 0
        let q = if peakon { r } else { wave.q };
        let a = (2.0 - q) / (2.0 - r);
        let b = (1.0 - q) / (1.0 - r);
        let c = if peakon { 0.0 } else { wave.c };
        Self {
            p: if peakon { 1.0 } else { wave.p },
            q,
            r,
            zstar: if peakon { 0.0 } else { 1.0 - wave.p },
            a,
            b,
            c,
            kappa: 2.0 - 2.0 / r,
            peakon,
        }
    }

    /// `H/W²` at `W = p ω`, given `1 − ω` separately to keep the crest
    /// distance `z − z* = p(1 − ω)` exact.
    fn h(&self, omega: f64, one_minus_omega: f64) -> f64 {
        if self.peakon {
            return 1.0;
        }
        let w = self.p * omega;
        let d = self.p * one_minus_omega;
        if d < 0.5 * self.p {
            let z = self.zstar + d;
            let big_h = d * (z + self.zstar - 2.0 * self.a)
                - self.c * self.zstar.powf(self.kappa) * (self.kappa * (d / self.zstar).ln_1p()).exp_m1();
            return big_h / (w * w);
        }
        if w < TAIL_SERIES_WINDOW {
            return self.h_series(w);
        }
        let z = 1.0 - w;
        (z * z - 2.0 * self.a * z + self.b - self.c * z.powf(self.kappa)) / (w * w)
    }

    /// `1 − C Σ_{n≥2} binom(κ, n) (−W)^{n−2}`; tends to `q/r` as `W → 0`.
    fn h_series(&self, w: f64) -> f64 {
        let kappa = self.kappa;
        let mut binom = kappa * (kappa - 1.0) / 2.0;
        let mut pow = 1.0;
        let mut sum = binom;
        for n in 3..200u32 {
            let nf = n as f64;
            binom *= (kappa - nf + 1.0) / nf;
            pow *= -w;
            let term = binom * pow;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        1.0 - self.c * sum
    }

    /// Logarithmic decay rate `ℓ = −ω'/ω` on `η > 0`.
    pub(crate) fn ell(&self, omega: f64, one_minus_omega: f64) -> f64 {
        (self.r * self.h(omega, one_minus_omega)).max(0.0).sqrt()
    }

    pub(crate) fn tail_rate(&self) -> f64 {
        if self.peakon {
            self.r.sqrt()
        } else {
            self.q.sqrt()
        }
    }

    /// `ω''` from the second-order profile equation
    /// `(1 − pω) ω'' = ((1−r)/r) p ω'² + q ω − p ω²`.
    fn second_derivative(&self, omega: f64, d1: f64) -> f64 {
        if self.peakon {
            return self.r * omega;
        }
        let p = self.p;
        (((1.0 - self.r) / self.r) * p * d1 * d1 + self.q * omega - p * omega * omega) / (1.0 - p * omega)
    }

    fn g_of(&self, omega: f64) -> f64 {
        (1.0 - self.p * omega).max(0.0).powf(1.0 / self.r)
    }
}

/// Value and the first two derivatives of `ω` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSample {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Sampled half-line profile of one solitary wave.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub eta_grid: Vec<f64>,
    pub g_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub omega_prime: Vec<f64>,
    pub omega_second: Vec<f64>,
    pub tail_start: f64,
    pub tail_decay: f64,
    pub wave: WaveParameters,
    pub corner_slope: Option<f64>,
    pub r: f64,
    pub(crate) shape: Shape,
}

/// Builds the profile of a smooth soliton or peakon.
pub fn integrate_profile(wave: &WaveParameters, derived: &DerivedConstants, opts: &ProfileOptions) -> Result<ProfileSolution> {
    if wave.regime == Regime::NoSolitaryWave {
        return Err(Error::domain("no solitary wave exists for these parameters (q > r)"));
    }
    if opts.samples < 8 {
        return Err(Error::domain(format!("profile needs at least 8 samples (got {})", opts.samples)));
    }
    if !(opts.tail_delta > 0.0 && opts.tail_delta < 0.1) {
        return Err(Error::domain(format!("tail_delta must lie in (0, 0.1) (got {})", opts.tail_delta)));
    }
    let r = derived.r;
    let shape = Shape::new(wave, r);
    let w_tail = -(r * (-opts.tail_delta).ln_1p()).exp_m1();
    let omega_tail = w_tail / shape.p;
    if !(omega_tail < 1.0) {
        return Err(Error::Integration(format!("amplitude too small: tail threshold W = {w_tail:e} exceeds p = {:e}", shape.p)));
    }
    let t_end = (-omega_tail.ln()).sqrt();
    let n = opts.samples;
    let dt = t_end / (n - 1) as f64;
    let gl = GaussLegendre::new(PANEL_NODES);

    let integrand = |tau: f64| -> Result<f64> {
        let sq = tau * tau;
        let ell = shape.ell((-sq).exp(), -(-sq).exp_m1());
        if !(ell > 0.0) {
            return Err(Error::Integration(format!("profile left [g*, 1): non-positive decay rate at t = {tau}")));
        }
        Ok(2.0 * tau / ell)
    };

    let mut eta = Vec::with_capacity(n);
    eta.push(0.0);
    for j in 1..n {
        let (lo, hi) = (dt * (j - 1) as f64, if j == n - 1 { t_end } else { dt * j as f64 });
        let mut panel = 0.0;
        for (tau, w) in gl.mapped(lo, hi) {
            panel += w * integrand(tau)?;
        }
        if !(panel > 0.0) || !panel.is_finite() {
            return Err(Error::Integration(format!("step control failed on panel {j}")));
        }
        eta.push(eta[j - 1] + panel);
    }

    let mut omega = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for j in 0..n {
        let t = if j == n - 1 { t_end } else { dt * j as f64 };
        let (om, one_minus) = ((-t * t).exp(), -(-t * t).exp_m1());
        let slope = -om * shape.ell(om, one_minus);
        omega.push(om);
        d1.push(slope);
        d2.push(shape.second_derivative(om, slope));
        g.push(shape.g_of(om));
    }

    let corner_slope = (wave.regime == Regime::Peakon).then(|| -r.sqrt() / shape.p);
    Ok(ProfileSolution {
        tail_start: eta[n - 1],
        tail_decay: shape.tail_rate(),
        eta_grid: eta,
        g_values: g,
        omega_values: omega,
        omega_prime: d1,
        omega_second: d2,
        wave: *wave,
        corner_slope,
        r,
        shape,
    })
}

impl ProfileSolution {
    /// Rebuilds a profile from stored `(η, ω)` samples; derivatives and `g`
    /// are recomputed from the profile ODE.
    pub fn from_samples(wave: &WaveParameters, derived: &DerivedConstants, eta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if eta.len() != omega.len() || eta.len() < 2 {
            return Err(Error::domain("profile samples must be non-empty and of equal length"));
        }
        if eta.windows(2).any(|w| !(w[1] > w[0])) || omega.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("profile samples must be strictly monotone"));
        }
        let shape = Shape::new(wave, derived.r);
        let d1: Vec<f64> = omega.iter().map(|&om| -om * shape.ell(om, 1.0 - om)).collect();
        let d2 = omega.iter().zip(&d1).map(|(&om, &s)| shape.second_derivative(om, s)).collect();
        let g = omega.iter().map(|&om| shape.g_of(om)).collect();
        Ok(Self {
            tail_start: *eta.last().expect("non-empty"),
            tail_decay: shape.tail_rate(),
            eta_grid: eta,
            g_values: g,
            omega_values: omega,
            omega_prime: d1,
            omega_second: d2,
            wave: *wave,
            corner_slope: (wave.regime == Regime::Peakon).then(|| -derived.r.sqrt() / shape.p),
            r: derived.r,
            shape,
        })
    }

    pub fn len(&self) -> usize {
        self.eta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta_grid.is_empty()
    }

    /// Quintic Hermite value of `ω(|η|)` on the sampled range, or the tail.
    pub fn omega(&self, eta: f64) -> f64 {
        let a = eta.abs();
        if a >= self.tail_start {
            return self.tail_value(a);
        }
        let j = self.locate(a);
        self.hermite(j, a).0
    }

    fn tail_value(&self, a: f64) -> f64 {
        let last = self.omega_values[self.len() - 1];
        last * (-self.tail_decay * (a - self.tail_start)).exp()
    }

    fn locate(&self, a: f64) -> usize {
        let idx = self.eta_grid.partition_point(|&e| e <= a);
        idx.clamp(1, self.len() - 1) - 1
    }

    /// Value, first and second derivative of the interpolant on interval `j`.
    fn hermite(&self, j: usize, a: f64) -> (f64, f64, f64) {
        let (x0, x1) = (self.eta_grid[j], self.eta_grid[j + 1]);
        let h = x1 - x0;
        let s = (a - x0) / h;
        let (f0, f1) = (self.omega_values[j], self.omega_values[j + 1]);
        let (d0, d1) = (self.omega_prime[j] * h, self.omega_prime[j + 1] * h);
        let (e0, e1) = (self.omega_second[j] * h * h, self.omega_second[j + 1] * h * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h21 = 0.5 * (s3 - 2.0 * s4 + s5);
        let value = h00 * f0 + h01 * f1 + h10 * d0 + h11 * d1 + h20 * e0 + h21 * e1;

        let dh00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
        let dh10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
        let dh11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
        let dh20 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
        let dh21 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
        let deriv = (dh00 * (f0 - f1) + dh10 * d0 + dh11 * d1 + dh20 * e0 + dh21 * e1) / h;

        let ddh00 = -60.0 * s + 180.0 * s2 - 120.0 * s3;
        let ddh10 = -36.0 * s + 96.0 * s2 - 60.0 * s3;
        let ddh11 = -24.0 * s + 84.0 * s2 - 60.0 * s3;
        let ddh20 = 0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3);
        let ddh21 = 0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3);
        let second = (ddh00 * (f0 - f1) + ddh10 * d0 + ddh11 * d1 + ddh20 * e0 + ddh21 * e1) / (h * h);
        (value, deriv, second)
    }

    /// `ω`, `ω'`, `ω''` at any `η`, with derivatives taken from the profile
    /// ODE. `ω` is even and `ω'` odd; at `η = 0` the right limit is returned.
    pub fn sample(&self, eta: f64) -> OmegaSample {
        let a = eta.abs();
        let sign = if eta >= 0.0 { -1.0 } else { 1.0 };
        if a >= self.tail_start {
            let v = self.tail_value(a);
            return OmegaSample { value: v, d1: sign * self.tail_decay * v, d2: self.tail_decay * self.tail_decay * v };
        }
        let j = self.locate(a);
        let v = self.hermite(j, a).0;
        let rate = v * self.shape.ell(v, 1.0 - v);
        OmegaSample { value: v, d1: sign * rate, d2: self.shape.second_derivative(v, -rate) }
    }

    /// Same as [`sample`](Self::sample) but with derivatives of the
    /// interpolant itself; cheaper, used for dense overlap integrals.
    pub fn sample_interpolated(&self, eta: f64) -> OmegaSample {
        let a = eta.abs();
        let sign = if eta >= 0.0 { 1.0 } else { -1.0 };
        if a >= self.tail_start {
            let v = self.tail_value(a);
            return OmegaSample { value: v, d1: -sign * self.tail_decay * v, d2: self.tail_decay * self.tail_decay * v };
        }
        let (v, d, dd) = self.hermite(self.locate(a), a);
        OmegaSample { value: v, d1: sign * d, d2: dd }
    }

    /// One-sided slopes `(ω'(0⁻), ω'(0⁺))` at the crest.
    pub fn crest_slopes(&self) -> (f64, f64) {
        let right = self.omega_prime[0];
        (-right, right)
    }

    /// Half-width in `η` beyond which `ω` stays below `level`.
    pub fn support_radius(&self, level: f64) -> f64 {
        let last = self.omega_values[self.len() - 1];
        if level >= last {
            let idx = self.omega_values.partition_point(|&w| w > level);
            return self.eta_grid[idx.min(self.len() - 1)];
        }
        self.tail_start + (last / level).ln() / self.tail_decay
    }

    /// The smooth-soliton derivative `dω/dη` at the first sample past the crest.
    pub fn launch_slope(&self) -> f64 {
        self.omega_prime[1]
    }
}

/// `u(x, t) = A ω(β (x − x_center − V t)/ε)` on a grid of `x` values.
pub fn sample_physical(
    profile: &ProfileSolution,
    params: &ModelParameters,
    derived: &DerivedConstants,
    x_center: f64,
    t: f64,
    x_grid: &[f64],
) -> Vec<f64> {
    let wave = &profile.wave;
    let scale = derived.beta / params.epsilon;
    x_grid.iter().map(|&x| wave.amplitude * profile.omega(scale * (x - x_center - wave.velocity * t))).collect()
}

/// Max-norm residual of `(1−W)W'' − ((1−r)/r)W'² − qW + W²` on interior
/// samples, with three-point finite differences on the (possibly
/// non-uniform) grid.
pub fn second_order_residual(eta: &[f64], w: &[f64], q: f64, r: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 1..eta.len().saturating_sub(1) {
        let h1 = eta[j] - eta[j - 1];
        let h2 = eta[j + 1] - eta[j];
        let (wm, w0, wp) = (w[j - 1], w[j], w[j + 1]);
        let d1 = -h2 / (h1 * (h1 + h2)) * wm + (h2 - h1) / (h1 * h2) * w0 + h1 / (h2 * (h1 + h2)) * wp;
        let d2 = 2.0 * (wm / (h1 * (h1 + h2)) - w0 / (h1 * h2) + wp / (h2 * (h1 + h2)));
        let res = (1.0 - w0) * d2 - ((1.0 - r) / r) * d1 * d1 - q * w0 + w0 * w0;
        worst = worst.max(res.abs());
    }
    worst
}

/// Residual of the second-order profile equation for the sampled `W = pω`.
pub fn residual_second_order(profile: &ProfileSolution) -> f64 {
    let p = profile.shape.p;
    let w: Vec<f64> = profile.omega_values.iter().map(|&o| p * o).collect();
    second_order_residual(&profile.eta_grid, &w, profile.shape.q, profile.r)
}

/// Evaluation view handed to the moment engine.
#[derive(Debug, Clone, Copy)]
pub struct OmegaView<'a> {
    profile: &'a ProfileSolution,
}

impl OmegaView<'_> {
    pub fn omega(&self, eta: f64) -> f64 {
        self.profile.omega(eta)
    }

    pub fn omega_prime(&self, eta: f64) -> f64 {
        self.profile.sample(eta).d1
    }

    pub fn sample(&self, eta: f64) -> OmegaSample {
        self.profile.sample(eta)
    }
}

pub fn interpolated_omega_derivatives(profile: &ProfileSolution) -> OmegaView<'_> {
    OmegaView { profile }
}
