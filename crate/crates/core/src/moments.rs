//! Profile moments, the five density/flux/source laws, and the two-wave
//! overlap functionals.
//!
//! Every integral here lives in the stretched variable `η`; `ε` never
//! appears. Two-wave quantities take one profile per wave, with wave 1
//! shifted to `η − σ` and wave 2 centred at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParameters};
use crate::profile::{OmegaSample, ProfileSolution};
use crate::quadrature::{panel_breaks, GaussLegendre};

const NODES: usize = 8;
const REFINE_TOLERANCE: f64 = 1e-6;

/// The laws carried by the weak formulation, as functions of `u` and
/// `v = ε u_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Law {
    /// `u`
    #[serde(rename = "Q1")]
    Mass,
    /// `c0 u + c1 u² − (c2 − c3) v²`
    #[serde(rename = "P1")]
    MassFlux,
    /// `u² + α² v²`
    #[serde(rename = "Q2")]
    Energy,
    /// `c0 u² + (4/3) c1 u³ − (3γ + (2c2 − 5c3) u) v²`
    #[serde(rename = "P2")]
    EnergyFlux,
    /// `(2c2 − c3) v³`
    #[serde(rename = "K2")]
    Source,
}

impl Law {
    pub const ALL: [Law; 5] = [Law::Mass, Law::MassFlux, Law::Energy, Law::EnergyFlux, Law::Source];

    pub fn symbol(self) -> &'static str {
        match self {
            Law::Mass => "Q1",
            Law::MassFlux => "P1",
            Law::Energy => "Q2",
            Law::EnergyFlux => "P2",
            Law::Source => "K2",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Law::ALL.into_iter().find(|l| l.symbol().eq_ignore_ascii_case(s))
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Even in `v`; only the source is odd.
    pub fn is_even(self) -> bool {
        self != Law::Source
    }

    pub fn eval(self, m: &ModelParameters, u: f64, v: f64) -> f64 {
        match self {
            Law::Mass => u,
            Law::MassFlux => m.c0 * u + m.c1 * u * u - (m.c2 - m.c3) * v * v,
            Law::Energy => u * u + m.alpha * m.alpha * v * v,
            Law::EnergyFlux => m.c0 * u * u + (4.0 / 3.0) * m.c1 * u * u * u - (3.0 * m.gamma + (2.0 * m.c2 - 5.0 * m.c3) * u) * v * v,
            Law::Source => (2.0 * m.c2 - m.c3) * v * v * v,
        }
    }

    /// `(∂F/∂u, ∂F/∂v)`.
    pub fn gradient(self, m: &ModelParameters, u: f64, v: f64) -> (f64, f64) {
        match self {
            Law::Mass => (1.0, 0.0),
            Law::MassFlux => (m.c0 + 2.0 * m.c1 * u, -2.0 * (m.c2 - m.c3) * v),
            Law::Energy => (2.0 * u, 2.0 * m.alpha * m.alpha * v),
            Law::EnergyFlux => {
                let k = 2.0 * m.c2 - 5.0 * m.c3;
                (2.0 * m.c0 * u + 4.0 * m.c1 * u * u - k * v * v, -2.0 * (3.0 * m.gamma + k * u) * v)
            }
            Law::Source => (0.0, 3.0 * (2.0 * m.c2 - m.c3) * v * v),
        }
    }
}

/// Single-wave moments of one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    /// `∫ ω dη`
    pub a1: f64,
    /// `∫ ω² dη`
    pub a2: f64,
    /// `∫ ω³ dη`
    pub a3: f64,
    /// `∫ (ω')² dη`
    pub a2_prime: f64,
    /// `∫ η (ω')³ dη`
    pub a3_1: f64,
    /// `∫ ω (ω')² dη`
    pub m12: f64,
    /// `∫ ω ω' dη`, zero by parity.
    pub m11: f64,
}

impl MomentTable {
    pub fn power(&self, k: u32) -> Option<f64> {
        match k {
            1 => Some(self.a1),
            2 => Some(self.a2),
            3 => Some(self.a3),
            _ => None,
        }
    }
}

/// `∫_{-∞}^{∞} η^n ω^k (ω')^l dη` over the sampled profile plus its
/// exponential tail, with `2^level` Gauss–Legendre sub-panels per grid cell.
/// Odd integrands return 0.
fn profile_integral(profile: &ProfileSolution, n: u32, k: f64, l: i32, level: u32) -> f64 {
    if (n as i32 + l) % 2 != 0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(NODES);
    let f = |eta: f64| {
        let s = profile.sample_interpolated(eta);
        eta.powi(n as i32) * s.value.powf(k) * s.d1.powi(l)
    };
    let body = gl.composite(&profile.eta_grid, level, f);
    // ω = ω_c e^{−λ(η−η_c)}, ω' = −λ ω on the tail
    let lambda = profile.tail_decay;
    let wc = profile.omega_values[profile.len() - 1];
    let rate = (k + l as f64) * lambda;
    let amp = wc.powf(k + l as f64) * (-lambda).powi(l);
    let ec = profile.tail_start;
    let tail = match n {
        0 => amp / rate,
        _ => amp * (ec / rate + 1.0 / (rate * rate)),
    };
    2.0 * (body + tail)
}

fn refined(profile: &ProfileSolution, n: u32, k: f64, l: i32, what: &str) -> Result<f64> {
    let coarse = profile_integral(profile, n, k, l, 0);
    let fine = profile_integral(profile, n, k, l, 1);
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel > REFINE_TOLERANCE && (fine - coarse).abs() > 1e-14 {
        return Err(Error::Convergence { what: what.to_string(), rel_change: rel });
    }
    Ok(fine)
}

/// `a_k = ∫ ω^k dη` for any `k > 0`.
pub fn power_moment(profile: &ProfileSolution, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain(format!("moment order must be positive (got {k})")));
    }
    refined(profile, 0, k, 0, "a_k")
}

/// `m_{k,l} = ∫ ω^k (ω')^l dη`.
pub fn mixed_moment(profile: &ProfileSolution, k: u32, l: u32) -> Result<f64> {
    refined(profile, 0, k as f64, l as i32, "m_kl")
}

pub fn compute_moments(profile: &ProfileSolution) -> Result<MomentTable> {
    Ok(MomentTable {
        a1: refined(profile, 0, 1.0, 0, "a1")?,
        a2: refined(profile, 0, 2.0, 0, "a2")?,
        a3: refined(profile, 0, 3.0, 0, "a3")?,
        a2_prime: refined(profile, 0, 0.0, 2, "a2'")?,
        a3_1: refined(profile, 1, 0.0, 3, "a3^(1)")?,
        m12: refined(profile, 0, 1.0, 2, "m12")?,
        m11: 0.0,
    })
}

/// Closed-form `a_F = ∫ F(A ω, β A ω') dη` for an even law.
pub fn a_f(moments: &MomentTable, law: Law, params: &ModelParameters, derived: &DerivedConstants, amplitude: f64) -> Result<f64> {
    let m = moments;
    let a = amplitude;
    let b2 = derived.beta * derived.beta;
    Ok(match law {
        Law::Mass => m.a1 * a,
        Law::MassFlux => params.c0 * m.a1 * a + params.c1 * m.a2 * a * a - (params.c2 - params.c3) * b2 * a * a * m.a2_prime,
        Law::Energy => m.a2 * a * a + params.alpha * params.alpha * b2 * a * a * m.a2_prime,
        Law::EnergyFlux => {
            params.c0 * m.a2 * a * a + (4.0 / 3.0) * params.c1 * m.a3 * a.powi(3)
                - 3.0 * params.gamma * b2 * a * a * m.a2_prime
                - (2.0 * params.c2 - 5.0 * params.c3) * b2 * a.powi(3) * m.m12
        }
        Law::Source => return Err(Error::Parity("K2")),
    })
}

/// `a_F` by direct quadrature of the law along the profile.
pub fn a_f_quadrature(
    profile: &ProfileSolution,
    law: Law,
    params: &ModelParameters,
    derived: &DerivedConstants,
    amplitude: f64,
) -> Result<f64> {
    if !law.is_even() {
        return Err(Error::Parity("K2"));
    }
    let beta = derived.beta;
    let run = |level: u32| {
        let gl = GaussLegendre::new(NODES);
        let body = gl.composite(&profile.eta_grid, level, |eta| {
            let s = profile.sample_interpolated(eta);
            law.eval(params, amplitude * s.value, beta * amplitude * s.d1)
        });
        // tail: integrate the law itself on a few decay lengths past η_c
        let ec = profile.tail_start;
        let span = 60.0 / profile.tail_decay;
        let breaks = panel_breaks(ec, ec + span, 1.0 / profile.tail_decay, &[]);
        let tail = gl.composite(&breaks, level, |eta| {
            let s = profile.sample_interpolated(eta);
            law.eval(params, amplitude * s.value, beta * amplitude * s.d1)
        });
        2.0 * (body + tail)
    };
    let (coarse, fine) = (run(0), run(1));
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel > REFINE_TOLERANCE && (fine - coarse).abs() > 1e-14 {
        return Err(Error::Convergence { what: format!("a_{}", law.symbol()), rel_change: rel });
    }
    Ok(fine)
}

/// Two waves: `first` sits at `η − σ`, `second` at `η`.
#[derive(Debug, Clone, Copy)]
pub struct WavePair<'a> {
    pub first: &'a ProfileSolution,
    pub second: &'a ProfileSolution,
}

impl<'a> WavePair<'a> {
    pub fn new(first: &'a ProfileSolution, second: &'a ProfileSolution) -> Self {
        Self { first, second }
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        (self.first.wave.amplitude, self.second.wave.amplitude)
    }

    fn reach(&self, level: f64) -> f64 {
        self.first.support_radius(level).max(self.second.support_radius(level))
    }

    fn breaks(&self, sigma: f64, width: f64) -> Vec<f64> {
        let reach = self.reach(1e-13);
        panel_breaks(sigma.min(0.0) - reach, sigma.max(0.0) + reach, width, &[0.0, sigma])
    }
}

/// Cross-correlation `∫ ω₁^{(k)}(η − σ) ω₂^{(l)}(η) dη`, normalised by
/// `√(a'₂,₁ a'₂,₂)` (the plain `a'₂` when both waves share a profile).
pub fn lambda_correlation(pair: WavePair<'_>, k: u8, l: u8, sigma: f64) -> Result<f64> {
    if k > 1 || l > 1 {
        return Err(Error::domain("correlation orders must be 0 or 1"));
    }
    let pick = |s: OmegaSample, order: u8| if order == 0 { s.value } else { s.d1 };
    let gl = GaussLegendre::new(NODES);
    let breaks = pair.breaks(sigma, 0.25);
    let run = |level| gl.composite(&breaks, level, |eta| pick(pair.first.sample(eta - sigma), k) * pick(pair.second.sample(eta), l));
    let (coarse, fine) = (run(0), run(1));
    let norm = (refined(pair.first, 0, 0.0, 2, "a2'")? * refined(pair.second, 0, 0.0, 2, "a2'")?).sqrt();
    if (fine - coarse).abs() > REFINE_TOLERANCE * norm {
        return Err(Error::Convergence { what: "lambda".into(), rel_change: (fine - coarse).abs() / norm });
    }
    Ok(fine / norm)
}

/// Every overlap functional the interaction system needs, from one pass
/// over the quadrature nodes. Indices: `[law][n]` with `n ∈ {0, 1}` the
/// power of `η` in the weight.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OverlapIntegrals {
    pub r: [[f64; 2]; 5],
    /// `∂R/∂G₁`
    pub d_g1: [[f64; 2]; 5],
    /// `∂R/∂G₂`
    pub d_g2: [[f64; 2]; 5],
    /// `∂R/∂σ`
    pub d_sigma: [[f64; 2]; 5],
    /// `∫ ω₁'(η − σ) ω₂(η) dη`
    pub cross_10: f64,
    /// `∫ ω₁'(η − σ) ω₂'(η) dη`
    pub cross_11: f64,
}

impl OverlapIntegrals {
    pub fn value(&self, law: Law, n: usize) -> f64 {
        self.r[law.index()][n]
    }

    pub fn d_g1(&self, law: Law, n: usize) -> f64 {
        self.d_g1[law.index()][n]
    }

    pub fn d_g2(&self, law: Law, n: usize) -> f64 {
        self.d_g2[law.index()][n]
    }

    pub fn d_sigma(&self, law: Law, n: usize) -> f64 {
        self.d_sigma[law.index()][n]
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        for i in 0..5 {
            for n in 0..2 {
                self.r[i][n] += w * other.r[i][n];
                self.d_g1[i][n] += w * other.d_g1[i][n];
                self.d_g2[i][n] += w * other.d_g2[i][n];
                self.d_sigma[i][n] += w * other.d_sigma[i][n];
            }
        }
        self.cross_10 += w * other.cross_10;
        self.cross_11 += w * other.cross_11;
    }
}

/// Quadrature settings for [`overlap_integrals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverlapOptions {
    /// Widest quadrature panel in `η`.
    pub panel_width: f64,
    /// Sub-panel doublings.
    pub level: u32,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        Self { panel_width: 0.25, level: 0 }
    }
}

/// Integrand of all overlap functionals at one `η`.
fn overlap_point(pair: WavePair<'_>, params: &ModelParameters, beta: f64, g: (f64, f64), sigma: f64, eta: f64) -> OverlapIntegrals {
    let (a1, a2) = pair.amplitudes();
    let s1 = pair.first.sample(eta - sigma);
    let s2 = pair.second.sample(eta);
    let u = g.0 * s1.value + g.1 * s2.value;
    let v = beta * (g.0 * s1.d1 + g.1 * s2.d1);
    let (u1, v1) = (a1 * s1.value, beta * a1 * s1.d1);
    let (u2, v2) = (a2 * s2.value, beta * a2 * s2.d1);
    // σ-derivatives of the shifted wave
    let (u_sig, v_sig) = (-g.0 * s1.d1, -beta * g.0 * s1.d2);
    let (u1_sig, v1_sig) = (-a1 * s1.d1, -beta * a1 * s1.d2);

    let mut out = OverlapIntegrals { cross_10: s1.d1 * s2.value, cross_11: s1.d1 * s2.d1, ..Default::default() };
    for law in Law::ALL {
        let i = law.index();
        let diff = law.eval(params, u, v) - law.eval(params, u1, v1) - law.eval(params, u2, v2);
        let (fu, fv) = law.gradient(params, u, v);
        let (f1u, f1v) = law.gradient(params, u1, v1);
        let dg1 = fu * s1.value + fv * beta * s1.d1;
        let dg2 = fu * s2.value + fv * beta * s2.d1;
        let dsig = fu * u_sig + fv * v_sig - (f1u * u1_sig + f1v * v1_sig);
        for (n, weight) in [1.0, eta].into_iter().enumerate() {
            out.r[i][n] = weight * diff;
            out.d_g1[i][n] = weight * dg1;
            out.d_g2[i][n] = weight * dg2;
            out.d_sigma[i][n] = weight * dsig;
        }
    }
    out
}

/// All overlap functionals at amplitudes `G = (G₁, G₂)` and shift `σ`.
pub fn overlap_integrals(
    pair: WavePair<'_>,
    params: &ModelParameters,
    derived: &DerivedConstants,
    g: (f64, f64),
    sigma: f64,
    opts: &OverlapOptions,
) -> OverlapIntegrals {
    let gl = GaussLegendre::new(NODES);
    let breaks = pair.breaks(sigma, opts.panel_width);
    let split = 1usize << opts.level;
    let mut total = OverlapIntegrals::default();
    for win in breaks.windows(2) {
        let h = (win[1] - win[0]) / split as f64;
        for s in 0..split {
            let lo = win[0] + h * s as f64;
            for (eta, w) in gl.mapped(lo, lo + h) {
                total.add_scaled(&overlap_point(pair, params, derived.beta, g, sigma, eta), w);
            }
        }
    }
    total
}

/// `R_F^{(n)}(S, σ)`: the two-wave integral of `F` minus the sum of the
/// undistorted single-wave integrals, weighted by `η^n`.
pub fn interaction_functional(
    pair: WavePair<'_>,
    law: Law,
    params: &ModelParameters,
    derived: &DerivedConstants,
    s: (f64, f64),
    sigma: f64,
    n: usize,
) -> Result<f64> {
    if n > 1 {
        return Err(Error::domain("only n = 0 and n = 1 weights are defined"));
    }
    let (a1, a2) = pair.amplitudes();
    let g = (a1 + s.0, a2 + s.1);
    if !(g.0 > 0.0 && g.1 > 0.0) {
        return Err(Error::domain(format!("distorted amplitudes must stay positive (got {:?})", g)));
    }
    let at = |level| overlap_integrals(pair, params, derived, g, sigma, &OverlapOptions { level, ..Default::default() }).value(law, n);
    let (coarse, fine) = (at(0), at(1));
    let scale = a1.max(a2).powi(3).max(1.0);
    if (fine - coarse).abs() > REFINE_TOLERANCE * fine.abs().max(1e-6 * scale) {
        return Err(Error::Convergence { what: format!("R_{}^({n})", law.symbol()), rel_change: (fine - coarse).abs() / fine.abs() });
    }
    Ok(fine)
}

/// Which reading of the displayed `𝔏` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LVariant {
    /// Cross term `β G₁G₂ (φ̇₁ + φ̇₂) λ₁₁`.
    #[default]
    Symmetric,
    /// Cross term with the repeated index, `β G₁G₂ (φ̇₁ + φ̇₁) λ₁₁`.
    Printed,
    /// Diagonal term re-derived from `ε² u_x u_t`:
    /// `β Σ a'₂ (G_i² φ̇_i − A_i² V_i)` in place of `ψ̇₀ β Σ φ'_{i1}(G_i² − A_i²)`.
    Rederived,
}

/// `a'₂ 𝔏 = l0 + l_s S₁' + l_1 φ₁₁' + l_2 φ₂₁'`, affine in the derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCoefficients {
    pub l0: f64,
    pub l_s: f64,
    pub l_1: f64,
    pub l_2: f64,
}

impl LCoefficients {
    pub fn eval(&self, ds1: f64, dphi11: f64, dphi21: f64) -> f64 {
        self.l0 + self.l_s * ds1 + self.l_1 * dphi11 + self.l_2 * dphi21
    }
}

/// Coefficients of `a'₂ 𝔏` given the two-wave state. `mass_ratio` is
/// `μ` in `S₂ = −μ S₁`; `cross` holds the unnormalised correlations
/// `(∫ω₁'ω₂, ∫ω₁'ω₂')`.
#[allow(clippy::too_many_arguments)]
pub fn l_functional(
    variant: LVariant,
    pair: WavePair<'_>,
    moments: (&MomentTable, &MomentTable),
    beta: f64,
    psi0_dot: f64,
    g: (f64, f64),
    mass_ratio: f64,
    cross: (f64, f64),
) -> LCoefficients {
    let (a1, a2) = pair.amplitudes();
    let (v1, v2) = (pair.first.wave.velocity, pair.second.wave.velocity);
    let (d1, d2) = (moments.0.a2_prime, moments.1.a2_prime);
    let (lam10, lam11) = cross;
    let gg = g.0 * g.1;
    let l_s = psi0_dot * (mass_ratio * g.0 + g.1) * lam10;
    let cross_each = beta * psi0_dot * gg * lam11;
    match variant {
        LVariant::Symmetric => LCoefficients {
            l0: beta * gg * (v1 + v2) * lam11,
            l_s,
            l_1: psi0_dot * beta * d1 * (g.0 * g.0 - a1 * a1) + cross_each,
            l_2: psi0_dot * beta * d2 * (g.1 * g.1 - a2 * a2) + cross_each,
        },
        LVariant::Printed => LCoefficients {
            l0: 2.0 * beta * gg * v1 * lam11,
            l_s,
            l_1: psi0_dot * beta * d1 * (g.0 * g.0 - a1 * a1) + 2.0 * cross_each,
            l_2: psi0_dot * beta * d2 * (g.1 * g.1 - a2 * a2),
        },
        LVariant::Rederived => LCoefficients {
            l0: beta * gg * (v1 + v2) * lam11 + beta * (d1 * (g.0 * g.0 - a1 * a1) * v1 + d2 * (g.1 * g.1 - a2 * a2) * v2),
            l_s,
            l_1: psi0_dot * beta * d1 * g.0 * g.0 + cross_each,
            l_2: psi0_dot * beta * d2 * g.1 * g.1 + cross_each,
        },
    }
}
