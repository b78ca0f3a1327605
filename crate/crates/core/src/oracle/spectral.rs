//! Pseudospectral RK4 solver for the full equation on a periodic domain.
//!
//! The evolution is written as
//! `u_t = −D⁻¹ ∂_x Φ`, `D = 1 − α²ε²∂_xx`,
//! `Φ = c0 u + c1 u² − c2 ε² u_x² + ε² (γ − c3 u) u_xx`.
//! `D` is diagonal in Fourier space; the linear part of `Φ` is applied
//! spectrally and the three quadratic products are formed on the grid with
//! 2/3-rule truncation.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParameters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationGrid {
    /// Period of the domain, which is `[−L/2, L/2)`.
    pub length: f64,
    pub modes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub dealias_fraction: f64,
}

impl Default for SimulationGrid {
    fn default() -> Self {
        Self { length: 40.0, modes: 4096, dt: 2e-4, t_final: 8.0, dealias_fraction: 2.0 / 3.0 }
    }
}

impl SimulationGrid {
    pub fn spacing(&self) -> f64 {
        self.length / self.modes as f64
    }

    pub fn x(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.modes).map(|j| -0.5 * self.length + dx * j as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.length > 0.0) {
            problems.push(format!("domain length must be positive (got {})", self.length));
        }
        if self.modes < 16 || !self.modes.is_power_of_two() {
            problems.push(format!("modes must be a power of two ≥ 16 (got {})", self.modes));
        }
        if !(self.dt > 0.0) {
            problems.push(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.t_final >= 0.0) {
            problems.push(format!("t_final must be non-negative (got {})", self.t_final));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            problems.push(format!("dealias_fraction must lie in (0, 1] (got {})", self.dealias_fraction));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Integrals of the balance-law densities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationSample {
    pub t: f64,
    /// `∫ u dx`
    pub mass: f64,
    /// `∫ (u² + α² (ε u_x)²) dx`
    pub energy: f64,
    /// `ε⁻¹ ∫ (2c2 − c3)(ε u_x)³ dx`, so that `d/dt energy = −source`.
    pub source: f64,
}

pub struct Simulator {
    pub grid: SimulationGrid,
    pub params: ModelParameters,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    wavenumber: Vec<f64>,
    keep: Vec<bool>,
    /// `(c0 − γ ε² k²)` and `1 / (1 + α² ε² k²)`
    linear: Vec<f64>,
    inv_d: Vec<f64>,
}

type Spectrum = Vec<Complex<f64>>;

impl Simulator {
    pub fn new(grid: &SimulationGrid, params: &ModelParameters) -> Result<Self> {
        grid.validate()?;
        let n = grid.modes;
        let mut planner = RealFftPlanner::<f64>::new();
        let eps2 = params.epsilon * params.epsilon;
        let cutoff = (grid.dealias_fraction * n as f64 / 2.0).floor() as usize;
        let wavenumber: Vec<f64> = (0..=n / 2).map(|j| 2.0 * std::f64::consts::PI * j as f64 / grid.length).collect();
        Ok(Self {
            grid: *grid,
            params: *params,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            keep: (0..=n / 2).map(|j| j <= cutoff && j < n / 2).collect(),
            linear: wavenumber.iter().map(|k| params.c0 - params.gamma * eps2 * k * k).collect(),
            inv_d: wavenumber.iter().map(|k| 1.0 / (1.0 + params.alpha * params.alpha * eps2 * k * k)).collect(),
            wavenumber,
        })
    }

    fn to_spectrum(&self, u: &[f64]) -> Spectrum {
        let mut input = u.to_vec();
        let mut out = self.forward.make_output_vec();
        self.forward.process(&mut input, &mut out).expect("forward transform length");
        out
    }

    fn to_grid(&self, spec: &[Complex<f64>]) -> Vec<f64> {
        let mut input = spec.to_vec();
        input[0].im = 0.0;
        if let Some(last) = input.last_mut() {
            last.im = 0.0;
        }
        let mut out = self.inverse.make_output_vec();
        self.inverse.process(&mut input, &mut out).expect("inverse transform length");
        let scale = 1.0 / self.grid.modes as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    fn truncate(&self, spec: &mut [Complex<f64>]) {
        for (c, &k) in spec.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex::new(0.0, 0.0);
            }
        }
    }

    /// `(u_x, u_xx)` on the grid.
    fn derivatives(&self, spec: &[Complex<f64>]) -> (Vec<f64>, Vec<f64>) {
        let ux: Spectrum = spec.iter().zip(&self.wavenumber).map(|(c, k)| c * Complex::new(0.0, *k)).collect();
        let uxx: Spectrum = spec.iter().zip(&self.wavenumber).map(|(c, k)| c * (-k * k)).collect();
        (self.to_grid(&ux), self.to_grid(&uxx))
    }

    fn rhs(&self, spec: &[Complex<f64>]) -> Spectrum {
        let p = &self.params;
        let eps2 = p.epsilon * p.epsilon;
        let u = self.to_grid(spec);
        let (ux, uxx) = self.derivatives(spec);
        let products: Vec<f64> =
            (0..u.len()).map(|i| p.c1 * u[i] * u[i] - p.c2 * eps2 * ux[i] * ux[i] - p.c3 * eps2 * u[i] * uxx[i]).collect();
        let mut nl = self.to_spectrum(&products);
        for j in 0..nl.len() {
            let flux = spec[j] * self.linear[j] + nl[j];
            nl[j] = if self.keep[j] { flux * Complex::new(0.0, -self.wavenumber[j]) * self.inv_d[j] } else { Complex::new(0.0, 0.0) };
        }
        nl
    }

    fn rk4(&self, spec: &mut Spectrum, h: f64) {
        let combine = |a: &Spectrum, b: &Spectrum, s: f64| -> Spectrum { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
        let k1 = self.rhs(spec);
        let k2 = self.rhs(&combine(spec, &k1, 0.5 * h));
        let k3 = self.rhs(&combine(spec, &k2, 0.5 * h));
        let k4 = self.rhs(&combine(spec, &k3, h));
        for j in 0..spec.len() {
            spec[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
    }

    /// One step of length `grid.dt`.
    pub fn step(&self, state: &FieldState) -> Result<FieldState> {
        let mut spec = self.to_spectrum(&state.u);
        self.truncate(&mut spec);
        self.rk4(&mut spec, self.grid.dt);
        let u = self.to_grid(&spec);
        let start = max_abs(&state.u);
        if !u.iter().all(|v| v.is_finite()) || max_abs(&u) > 10.0 * start {
            return Err(Error::Blowup { t: state.t + self.grid.dt, reason: "max|u| exceeded 10x its initial value".into() });
        }
        Ok(FieldState { t: state.t + self.grid.dt, u })
    }

    /// Advances to `grid.t_final`, keeping a snapshot every
    /// `snapshot_every` steps (plus the first and last) and a conservation
    /// sample every `monitor_every` steps.
    pub fn run(&self, initial: &FieldState, snapshot_every: usize, monitor_every: usize) -> Result<RunOutput> {
        let steps = ((self.grid.t_final / self.grid.dt).round() as usize).max(1);
        let h = self.grid.t_final / steps as f64;
        let start = max_abs(&initial.u);
        let mut spec = self.to_spectrum(&initial.u);
        self.truncate(&mut spec);
        let mut snapshots = vec![FieldState { t: initial.t, u: self.to_grid(&spec) }];
        let mut series = vec![self.sample_spectrum(initial.t, &spec)];
        for i in 1..=steps {
            self.rk4(&mut spec, h);
            let t = initial.t + h * i as f64;
            let snap = i % snapshot_every.max(1) == 0 || i == steps;
            let mon = i % monitor_every.max(1) == 0 || i == steps;
            if snap || i % 50 == 0 {
                let u = self.to_grid(&spec);
                if !u.iter().all(|v| v.is_finite()) || max_abs(&u) > 10.0 * start {
                    return Err(Error::Blowup { t, reason: "max|u| exceeded 10x its initial value".into() });
                }
                if snap {
                    snapshots.push(FieldState { t, u });
                }
            }
            if mon {
                series.push(self.sample_spectrum(t, &spec));
            }
        }
        Ok(RunOutput { snapshots, series, step: h })
    }

    fn sample_spectrum(&self, t: f64, spec: &[Complex<f64>]) -> ConservationSample {
        let p = &self.params;
        let dx = self.grid.spacing();
        let u = self.to_grid(spec);
        let (ux, _) = self.derivatives(spec);
        let a2e2 = p.alpha * p.alpha * p.epsilon * p.epsilon;
        let mass = dx * u.iter().sum::<f64>();
        let energy = dx * u.iter().zip(&ux).map(|(a, b)| a * a + a2e2 * b * b).sum::<f64>();
        let cube = dx * ux.iter().map(|b| (p.epsilon * b).powi(3)).sum::<f64>();
        ConservationSample { t, mass, energy, source: (2.0 * p.c2 - p.c3) * cube / p.epsilon }
    }

    /// Balance-law integrals of each snapshot.
    pub fn conservation_monitor(&self, snapshots: &[FieldState]) -> Vec<ConservationSample> {
        snapshots
            .iter()
            .map(|s| {
                let mut spec = self.to_spectrum(&s.u);
                self.truncate(&mut spec);
                self.sample_spectrum(s.t, &spec)
            })
            .collect()
    }

    /// Spectral derivative `u_x` of grid values.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        self.derivatives(&self.to_spectrum(u)).0
    }

    /// Periodic translation by `shift` via the Fourier shift theorem.
    pub fn translate(&self, u: &[f64], shift: f64) -> Vec<f64> {
        let spec: Spectrum =
            self.to_spectrum(u).iter().zip(&self.wavenumber).map(|(c, k)| c * Complex::from_polar(1.0, -k * shift)).collect();
        self.to_grid(&spec)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<FieldState>,
    pub series: Vec<ConservationSample>,
    /// Time step actually used (`t_final` divided evenly).
    pub step: f64,
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Relative drift of `∫u dx` over a series.
pub fn mass_drift(series: &[ConservationSample]) -> f64 {
    let m0 = series[0].mass;
    series.iter().fold(0.0f64, |m, s| m.max((s.mass - m0).abs())) / m0.abs().max(f64::MIN_POSITIVE)
}

/// Largest `|E(t) − E(0) + ∫₀ᵗ source|`, relative to `E(0)`; the source
/// integral uses the trapezoid rule on the series times.
pub fn energy_balance_residual(series: &[ConservationSample]) -> f64 {
    let e0 = series[0].energy;
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for w in series.windows(2) {
        integral += 0.5 * (w[1].t - w[0].t) * (w[0].source + w[1].source);
        worst = worst.max((w[1].energy - e0 + integral).abs());
    }
    worst / e0.abs().max(f64::MIN_POSITIVE)
}

/// Discrete `L²` norm on the grid.
pub fn l2(u: &[f64], dx: f64) -> f64 {
    (dx * u.iter().map(|v| v * v).sum::<f64>()).sqrt()
}
