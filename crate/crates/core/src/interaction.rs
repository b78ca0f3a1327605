//! The slow-time system for two colliding solitary waves.
//!
//! Unknowns are the amplitude distortion `S₁(τ)` and the trajectory
//! corrections `φ₁₁(τ), φ₂₁(τ)`. Mass balance at the crossing point forces
//! `a₁,₁ S₁ + a₁,₂ S₂ = 0`, so `S₂ = −μ S₁` with `μ = a₁,₁ / a₁,₂`; for
//! waves of one shape `μ = 1`. The remaining three relations are affine in
//! `(S₁', φ₁₁', φ₂₁')` and are solved as a 3×3 linear system at each stage
//! of a classical RK4 step.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParameters, Regime, WaveParameters};
use crate::moments::{a_f, l_functional, overlap_integrals, LVariant, Law, MomentTable, OverlapIntegrals, OverlapOptions, WavePair};
use crate::profile::ProfileSolution;

const SINGULAR_CONDITION: f64 = 1e12;
const FAR_FIELD: f64 = 1e-12;

/// Two waves on crossing trajectories `x = V_i t + x_i⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSetup {
    pub waves: (WaveParameters, WaveParameters),
    pub x0: (f64, f64),
    pub t_star: f64,
    pub x_star: f64,
    /// `β (V₂ − V₁)`
    pub psi0_dot: f64,
}

impl ScatteringSetup {
    /// Slow wave first. Trajectories meet at `(t_star, x_star)`.
    pub fn new(derived: &DerivedConstants, slow: WaveParameters, fast: WaveParameters, t_star: f64, x_star: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(slow.amplitude > 0.0 && fast.amplitude > slow.amplitude) {
            problems.push(format!("need A2 > A1 > 0 (got A1 = {}, A2 = {})", slow.amplitude, fast.amplitude));
        }
        if !(fast.velocity > slow.velocity) {
            problems.push(format!("need V2 > V1 (got V1 = {}, V2 = {})", slow.velocity, fast.velocity));
        }
        for w in [&slow, &fast] {
            if w.regime != Regime::SmoothSoliton {
                problems.push(format!("wave with A = {} is {:?}; interaction needs smooth solitons", w.amplitude, w.regime));
            }
        }
        if !(t_star.is_finite() && x_star.is_finite()) {
            problems.push("crossing point must be finite".into());
        }
        if !problems.is_empty() {
            return Err(Error::Domain(problems));
        }
        let x0 = (x_star - slow.velocity * t_star, x_star - fast.velocity * t_star);
        Ok(Self { waves: (slow, fast), x0, t_star, x_star, psi0_dot: derived.beta * (fast.velocity - slow.velocity) })
    }
}

/// How the overlap shift `σ` depends on the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// `σ = −τ + β(φ₁₁ − φ₂₁)`
    #[default]
    Coupled,
    /// `σ = −τ`
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionOptions {
    /// Half-length of the `τ` interval; `None` puts the waves
    /// `30 / min √q_i` apart at both ends.
    pub tau_max: Option<f64>,
    pub step: f64,
    pub sigma_mode: SigmaMode,
    pub l_variant: LVariant,
    pub overlap: OverlapOptions,
    /// Control run with every overlap functional set to zero.
    pub zero_forcing: bool,
}

impl Default for InteractionOptions {
    fn default() -> Self {
        Self {
            tau_max: None,
            step: 0.05,
            sigma_mode: SigmaMode::Coupled,
            l_variant: LVariant::Symmetric,
            overlap: OverlapOptions::default(),
            zero_forcing: false,
        }
    }
}

/// Residuals of the single-wave relations for one wave, each normalised
/// by its largest term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Residuals {
    /// `a₁ V A − a_{P1}`
    pub mass: f64,
    /// `a₂ V β² A² + a_{Q2} V − a_{P2} + a₃⁽¹⁾ β² A³`
    pub energy_printed: f64,
    /// The stated relation with `(2c₂ − c₃)` on the `a₃⁽¹⁾` term.
    pub energy_with_source_factor: f64,
    /// `a_{Q2} V − a_{P2} + 2α² β² a'₂ V A² + (2c₂ − c₃) β² a₃⁽¹⁾ A³`, the
    /// `δ'` balance of the energy law for one travelling wave.
    pub energy_balance: f64,
}

fn normalised(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

/// Evaluates both single-wave relations for `wave` (which may differ from
/// `profile.wave`, e.g. for sensitivity checks).
pub fn verify_lemma1(
    params: &ModelParameters,
    derived: &DerivedConstants,
    wave: &WaveParameters,
    moments: &MomentTable,
) -> Result<Lemma1Residuals> {
    let (a, v) = (wave.amplitude, wave.velocity);
    let b2 = derived.beta * derived.beta;
    let m = moments;
    let a_p1 = a_f(m, Law::MassFlux, params, derived, a)?;
    let a_q2 = a_f(m, Law::Energy, params, derived, a)?;
    let a_p2 = a_f(m, Law::EnergyFlux, params, derived, a)?;
    let source = 2.0 * params.c2 - params.c3;
    let printed = [m.a2 * v * b2 * a * a, a_q2 * v, -a_p2, m.a3_1 * b2 * a.powi(3)];
    let mut with_factor = printed;
    with_factor[3] *= source;
    let balance = [a_q2 * v, -a_p2, 2.0 * params.alpha * params.alpha * b2 * m.a2_prime * v * a * a, source * b2 * m.a3_1 * a.powi(3)];
    Ok(Lemma1Residuals {
        mass: normalised(&[m.a1 * v * a, -a_p1]),
        energy_printed: normalised(&printed),
        energy_with_source_factor: normalised(&with_factor),
        energy_balance: normalised(&balance),
    })
}

/// State `(S₁, φ₁₁, φ₂₁)`.
pub type State = [f64; 3];

/// Everything the right-hand side needs, precomputed once.
pub struct InteractionSystem<'a> {
    pub params: ModelParameters,
    pub derived: DerivedConstants,
    pub setup: ScatteringSetup,
    pub pair: WavePair<'a>,
    pub moments: (MomentTable, MomentTable),
    pub opts: InteractionOptions,
    mass_ratio: f64,
    a_q2: (f64, f64),
}

/// The assembled linear system at one `(τ, state)`.
#[derive(Debug, Clone, Copy)]
pub struct AssembledSystem {
    pub matrix: Matrix3<f64>,
    pub rhs: Vector3<f64>,
    pub sigma: f64,
    pub overlap: OverlapIntegrals,
    pub far_field: bool,
}

impl<'a> InteractionSystem<'a> {
    pub fn new(
        params: &ModelParameters,
        derived: &DerivedConstants,
        setup: &ScatteringSetup,
        profiles: (&'a ProfileSolution, &'a ProfileSolution),
        moments: (MomentTable, MomentTable),
        opts: &InteractionOptions,
    ) -> Result<Self> {
        if !(opts.step > 0.0) {
            return Err(Error::domain("interaction step must be positive"));
        }
        let (a1, a2) = (setup.waves.0.amplitude, setup.waves.1.amplitude);
        Ok(Self {
            params: *params,
            derived: *derived,
            setup: *setup,
            pair: WavePair::new(profiles.0, profiles.1),
            mass_ratio: moments.0.a1 / moments.1.a1,
            a_q2: (a_f(&moments.0, Law::Energy, params, derived, a1)?, a_f(&moments.1, Law::Energy, params, derived, a2)?),
            moments,
            opts: *opts,
        })
    }

    /// `μ` in `S₂ = −μ S₁`.
    pub fn mass_ratio(&self) -> f64 {
        self.mass_ratio
    }

    pub fn amplitudes(&self, s1: f64) -> (f64, f64) {
        (self.setup.waves.0.amplitude + s1, self.setup.waves.1.amplitude - self.mass_ratio * s1)
    }

    pub fn sigma(&self, tau: f64, y: &State) -> f64 {
        match self.opts.sigma_mode {
            SigmaMode::Coupled => -tau + self.derived.beta * (y[1] - y[2]),
            SigmaMode::Decoupled => -tau,
        }
    }

    /// `χ_i = V_i τ / ψ̇₀ + φ_{i1}`.
    pub fn chi(&self, tau: f64, y: &State) -> (f64, f64) {
        let p = self.setup.psi0_dot;
        (self.setup.waves.0.velocity * tau / p + y[1], self.setup.waves.1.velocity * tau / p + y[2])
    }

    pub fn assemble(&self, tau: f64, y: &State) -> AssembledSystem {
        let beta = self.derived.beta;
        let psi = self.setup.psi0_dot;
        let mu = self.mass_ratio;
        let g = self.amplitudes(y[0]);
        let sigma = self.sigma(tau, y);
        let ov = if self.opts.zero_forcing {
            OverlapIntegrals::default()
        } else {
            overlap_integrals(self.pair, &self.params, &self.derived, g, sigma, &self.opts.overlap)
        };
        let (chi1, chi2) = self.chi(tau, y);
        let (v2, coupled) = (self.setup.waves.1.velocity, self.opts.sigma_mode == SigmaMode::Coupled);
        // dσ/dτ = −1 + c (φ₁₁' − φ₂₁')
        let c = if coupled { beta } else { 0.0 };
        let r = |law, n| ov.value(law, n);
        let r_s = |law, n| ov.d_g1(law, n) - mu * ov.d_g2(law, n);
        let r_sig = |law, n| ov.d_sigma(law, n);

        let mut m = Matrix3::zeros();
        let mut b = Vector3::zeros();

        // energy at the crossing: ψ̇₀ dR_Q2/dτ + R_K2 = 0
        m[(0, 0)] = psi * r_s(Law::Energy, 0);
        m[(0, 1)] = psi * c * r_sig(Law::Energy, 0);
        m[(0, 2)] = -psi * c * r_sig(Law::Energy, 0);
        b[0] = -r(Law::Source, 0) + psi * r_sig(Law::Energy, 0);

        // mass flux: ψ̇₀ d/dτ Σ a₁,ᵢ (Aᵢ φᵢ₁ + χᵢ Sᵢ) = R_P1
        let (a11, a12) = (self.moments.0.a1, self.moments.1.a1);
        m[(1, 0)] = psi * a11 * (chi1 - chi2);
        m[(1, 1)] = psi * a11 * g.0;
        m[(1, 2)] = psi * a12 * g.1;
        b[1] = r(Law::MassFlux, 0) + psi * a11 * y[0] / beta;

        // energy flux: ψ̇₀ d/dτ {Σ a_Q2,ᵢ φᵢ₁ + χ₂ R_Q2 + R¹_Q2/β} = F
        let t_s = chi2 * r_s(Law::Energy, 0) + r_s(Law::Energy, 1) / beta;
        let t_sig = chi2 * r_sig(Law::Energy, 0) + r_sig(Law::Energy, 1) / beta;
        let l =
            l_functional(self.opts.l_variant, self.pair, (&self.moments.0, &self.moments.1), beta, psi, g, mu, (ov.cross_10, ov.cross_11));
        let k = 2.0 * self.params.alpha * self.params.alpha * beta;
        m[(2, 0)] = psi * t_s + k * l.l_s;
        m[(2, 1)] = psi * self.a_q2.0 + psi * c * t_sig + k * l.l_1;
        m[(2, 2)] = psi * self.a_q2.1 + psi * r(Law::Energy, 0) - psi * c * t_sig + k * l.l_2;
        b[2] =
            r(Law::EnergyFlux, 0) - k * l.l0 - chi2 * r(Law::Source, 0) - r(Law::Source, 1) / beta - v2 * r(Law::Energy, 0) + psi * t_sig;

        AssembledSystem { matrix: m, rhs: b, sigma, far_field: ov.max_abs() < FAR_FIELD, overlap: ov }
    }

    /// `(S₁', φ₁₁', φ₂₁')` at `(τ, y)`.
    pub fn derivative(&self, tau: f64, y: &State) -> Result<State> {
        let sys = self.assemble(tau, y);
        let cond = condition_number(&sys.matrix);
        if cond <= SINGULAR_CONDITION {
            if let Some(x) = sys.matrix.lu().solve(&sys.rhs) {
                return Ok([x[0], x[1], x[2]]);
            }
        }
        if sys.far_field {
            // row 1 reads 0 = 0; hold S₁ and solve rows 2–3 for φ'
            let m = sys.matrix.fixed_view::<2, 2>(1, 1).into_owned();
            let rhs = nalgebra::Vector2::new(sys.rhs[1], sys.rhs[2]);
            if let Some(x) = m.lu().solve(&rhs) {
                return Ok([0.0, x[0], x[1]]);
            }
        }
        Err(Error::SingularSystem { tau, cond })
    }

    pub fn default_tau_max(&self) -> f64 {
        let q = self.pair.first.wave.q.min(self.pair.second.wave.q);
        30.0 / q.sqrt()
    }
}

fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTrajectory {
    pub tau: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub phi11: Vec<f64>,
    pub phi21: Vec<f64>,
    pub chi1: Vec<f64>,
    pub chi2: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Right-hand side `R_P1` of the mass-flux row along the run.
    pub mass_flux_forcing: Vec<f64>,
    pub tau_max: f64,
    pub phase_shifts: (f64, f64),
    /// `(φ₁₁', φ₂₁')` at the last recorded point.
    pub end_slopes: (f64, f64),
    pub mass_ratio: f64,
    /// Error that stopped the run before `τ_max`, if any.
    pub failure: Option<String>,
}

impl InteractionTrajectory {
    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrates from `τ = −τ_max` to `τ_max` with zero initial data. A run
/// that stops early still returns the recorded part with `failure` set; use
/// [`integrate_interaction`] to get the error instead.
pub fn run_interaction(system: &InteractionSystem<'_>) -> (InteractionTrajectory, Option<Error>) {
    let tau_max = system.opts.tau_max.unwrap_or_else(|| system.default_tau_max());
    let steps = ((2.0 * tau_max) / system.opts.step).ceil().max(1.0) as usize;
    let h = 2.0 * tau_max / steps as f64;
    let limit = 0.5 * system.setup.waves.0.amplitude;

    let mut traj = InteractionTrajectory {
        tau: Vec::with_capacity(steps + 1),
        s1: Vec::new(),
        s2: Vec::new(),
        phi11: Vec::new(),
        phi21: Vec::new(),
        chi1: Vec::new(),
        chi2: Vec::new(),
        sigma: Vec::new(),
        mass_flux_forcing: Vec::new(),
        tau_max,
        phase_shifts: (0.0, 0.0),
        end_slopes: (0.0, 0.0),
        mass_ratio: system.mass_ratio(),
        failure: None,
    };
    let record = |traj: &mut InteractionTrajectory, tau: f64, y: &State| {
        let (c1, c2) = system.chi(tau, y);
        traj.tau.push(tau);
        traj.s1.push(y[0]);
        traj.s2.push(-system.mass_ratio() * y[0]);
        traj.phi11.push(y[1]);
        traj.phi21.push(y[2]);
        traj.chi1.push(c1);
        traj.chi2.push(c2);
        traj.sigma.push(system.sigma(tau, y));
        let forcing = system.assemble(tau, y).overlap.value(Law::MassFlux, 0);
        traj.mass_flux_forcing.push(if system.opts.zero_forcing { 0.0 } else { forcing });
    };

    let mut y: State = [0.0; 3];
    let mut tau = -tau_max;
    record(&mut traj, tau, &y);
    let mut failure = None;
    let add = |y: &State, k: &State, s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    for i in 0..steps {
        let step = (|| -> Result<State> {
            let k1 = system.derivative(tau, &y)?;
            let k2 = system.derivative(tau + 0.5 * h, &add(&y, &k1, 0.5 * h))?;
            let k3 = system.derivative(tau + 0.5 * h, &add(&y, &k2, 0.5 * h))?;
            let k4 = system.derivative(tau + h, &add(&y, &k3, h))?;
            Ok([0, 1, 2].map(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])))
        })();
        let next_tau = -tau_max + h * (i + 1) as f64;
        match step {
            Ok(next) if next.iter().all(|v| v.is_finite()) && next[0].abs() <= limit => {
                y = next;
                tau = next_tau;
                record(&mut traj, tau, &y);
            }
            Ok(next) => {
                failure = Some(Error::Blowup { t: next_tau, reason: format!("|S1| = {:e} exceeds A1/2 = {limit}", next[0].abs()) });
                break;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let n = traj.tau.len();
    let window = ((n as f64) * 0.05).ceil().max(1.0) as usize;
    let mean = |v: &[f64]| v[n - window..].iter().sum::<f64>() / window as f64;
    traj.phase_shifts = (mean(&traj.phi11), mean(&traj.phi21));
    match system.derivative(tau, &y) {
        Ok(d) => traj.end_slopes = (d[1], d[2]),
        Err(_) => traj.end_slopes = (f64::NAN, f64::NAN),
    }
    traj.failure = failure.as_ref().map(|e| e.to_string());
    (traj, failure)
}

pub fn integrate_interaction(system: &InteractionSystem<'_>) -> Result<InteractionTrajectory> {
    match run_interaction(system) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Endpoint tolerances of the elastic scenario.
pub const ENDPOINT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityReport {
    pub max_abs_s1: f64,
    pub s1_start: f64,
    pub s1_end: f64,
    pub end_slopes: (f64, f64),
    pub phase_shifts: (f64, f64),
    /// Largest change of a phase shift against a run with doubled `τ_max`.
    pub phase_shift_drift: Option<f64>,
    /// Largest `|μ S₁ + S₂|` and `|S₁ + S₂|` along the run.
    pub weighted_mass_defect: f64,
    pub amplitude_sum_defect: f64,
    pub elastic: bool,
    pub failing: Vec<String>,
}

pub fn elasticity_report(traj: &InteractionTrajectory, doubled: Option<&InteractionTrajectory>) -> ElasticityReport {
    let max_abs_s1 = traj.s1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s1_start = traj.s1.first().copied().unwrap_or(0.0);
    let s1_end = traj.s1.last().copied().unwrap_or(0.0);
    let amplitude_sum_defect = traj.s1.iter().zip(&traj.s2).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
    let weighted_mass_defect = traj.s1.iter().zip(&traj.s2).fold(0.0f64, |m, (a, b)| m.max((traj.mass_ratio * a + b).abs()));
    let phase_shift_drift =
        doubled.map(|d| (d.phase_shifts.0 - traj.phase_shifts.0).abs().max((d.phase_shifts.1 - traj.phase_shifts.1).abs()));

    let mut failing = Vec::new();
    if let Some(f) = &traj.failure {
        failing.push(format!("run stopped early: {f}"));
    }
    if s1_start.abs() > ENDPOINT_TOLERANCE || s1_end.abs() > ENDPOINT_TOLERANCE {
        failing.push(format!("S1 at the endpoints ({s1_start:e}, {s1_end:e}) exceeds {ENDPOINT_TOLERANCE:e}"));
    }
    let (d1, d2) = traj.end_slopes;
    if !(d1.abs() <= ENDPOINT_TOLERANCE && d2.abs() <= ENDPOINT_TOLERANCE) {
        failing.push(format!("endpoint dphi/dtau ({d1:e}, {d2:e}) exceeds {ENDPOINT_TOLERANCE:e}"));
    }
    if let Some(drift) = phase_shift_drift {
        if !(drift <= ENDPOINT_TOLERANCE) {
            failing.push(format!("phase shifts move by {drift:e} when tau_max doubles"));
        }
    }
    ElasticityReport {
        max_abs_s1,
        s1_start,
        s1_end,
        end_slopes: traj.end_slopes,
        phase_shifts: traj.phase_shifts,
        phase_shift_drift,
        weighted_mass_defect,
        amplitude_sum_defect,
        elastic: failing.is_empty(),
        failing,
    }
}
