//! Weak residuals of two-wave ansatz fields against bump test functions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interaction::{InteractionSystem, InteractionTrajectory};
use crate::model::ModelParameters;
use crate::moments::Law;
use crate::profile::ProfileSolution;
use crate::quadrature::{panel_breaks, GaussLegendre};

/// `ψ(x) = exp(−1/(1 − s²))`, `s = (x − center)/half_width`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
}

impl TestFunction {
    /// `(ψ, ψ', ψ'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let s = (x - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let m = 1.0 - s * s;
        let v = (-1.0 / m).exp();
        let d = -2.0 * s / (m * m);
        let dd = d * d - (2.0 + 6.0 * s * s) / (m * m * m);
        let w = self.half_width;
        (v, v * d / w, v * dd / (w * w))
    }

    /// Three bumps of different widths around `x`.
    pub fn family(x: f64) -> Vec<Self> {
        vec![Self { center: x, half_width: 1.0 }, Self { center: x + 0.25, half_width: 0.6 }, Self { center: x - 0.5, half_width: 1.5 }]
    }
}

/// Which terms enter the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakForm {
    /// The conservation/balance laws as stated, with densities `u` and
    /// `u² + α²(εu_x)²`; exact solutions leave an `O(ε²)` remainder.
    #[default]
    Asymptotic,
    /// Adds the `ε² ψ''` terms that make exact solutions give zero.
    Exact,
}

/// One wave of the ansatz at a fixed time: `G ω(β(x − φ)/ε)` with
/// `dG/dt = rate`, `dφ/dt = speed`.
#[derive(Debug, Clone, Copy)]
pub struct AnsatzWave<'a> {
    pub profile: &'a ProfileSolution,
    pub amplitude: f64,
    pub rate: f64,
    pub position: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Fields {
    u: f64,
    ux: f64,
    ut: f64,
    uxt: f64,
}

fn fields(waves: &[AnsatzWave<'_>], k: f64, x: f64) -> Fields {
    let mut f = Fields::default();
    for w in waves {
        let s = w.profile.sample(k * (x - w.position));
        f.u += w.amplitude * s.value;
        f.ux += w.amplitude * k * s.d1;
        f.ut += w.rate * s.value - w.amplitude * k * s.d1 * w.speed;
        f.uxt += w.rate * k * s.d1 - w.amplitude * k * k * s.d2 * w.speed;
    }
    f
}

/// `(mass, energy)` residuals
/// `∫ ∂_t Q ψ − P ψ' + ε⁻¹ K ψ dx` for the ansatz at one instant.
pub fn weak_residual(params: &ModelParameters, beta: f64, waves: &[AnsatzWave<'_>], psi: &TestFunction, form: WeakForm) -> [f64; 2] {
    let eps = params.epsilon;
    let k = beta / eps;
    let a2 = params.alpha * params.alpha;
    let e2 = eps * eps;
    let decay = waves.iter().fold(0.0f64, |m, w| m.max(w.profile.tail_decay));
    let width = (0.25 / (k * decay)).min(psi.half_width / 4.0);
    let breaks = panel_breaks(psi.center - psi.half_width, psi.center + psi.half_width, width, &[]);
    let rule = GaussLegendre::new(8);
    let mut out = [0.0; 2];
    for w in breaks.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            let (p, dp, ddp) = psi.eval(x);
            if p == 0.0 {
                continue;
            }
            let f = fields(waves, k, x);
            let v = eps * f.ux;
            let mass_flux = Law::MassFlux.eval(params, f.u, v);
            let energy_rate = 2.0 * f.u * f.ut + 2.0 * a2 * e2 * f.ux * f.uxt;
            let energy_flux = Law::EnergyFlux.eval(params, f.u, v) + 2.0 * a2 * e2 * f.ux * f.ut;
            let source = Law::Source.eval(params, f.u, v) / eps;
            let mut r1 = f.ut * p - mass_flux * dp;
            let mut r2 = energy_rate * p - energy_flux * dp + source * p;
            if form == WeakForm::Exact {
                r1 += e2 * ((params.gamma - params.c3 * f.u) * f.ux - a2 * f.ut) * ddp;
                r2 += e2 * (2.0 * params.gamma * f.u * f.ux - 2.0 * params.c3 * f.u * f.u * f.ux - 2.0 * a2 * f.u * f.ut) * ddp;
            }
            out[0] += wt * r1;
            out[1] += wt * r2;
        }
    }
    out
}

/// The two-wave ansatz at node `i` of an interaction trajectory, for
/// dispersion `eps`.
pub fn ansatz_at<'a>(
    system: &InteractionSystem<'a>,
    traj: &InteractionTrajectory,
    i: usize,
    eps: f64,
) -> Result<(f64, [AnsatzWave<'a>; 2])> {
    let setup = &system.setup;
    let tau = traj.tau[i];
    let y = [traj.s1[i], traj.phi11[i], traj.phi21[i]];
    let d = system.derivative(tau, &y)?;
    let psi = setup.psi0_dot;
    let t = setup.t_star + eps * tau / psi;
    let mu = system.mass_ratio();
    let (a1, a2) = system.pair.amplitudes();
    let (v1, v2) = (setup.waves.0.velocity, setup.waves.1.velocity);
    let waves = [
        AnsatzWave {
            profile: system.pair.first,
            amplitude: a1 + y[0],
            rate: d[0] * psi / eps,
            position: setup.x0.0 + v1 * t + eps * y[1],
            speed: v1 + psi * d[1],
        },
        AnsatzWave {
            profile: system.pair.second,
            amplitude: a2 - mu * y[0],
            rate: -mu * d[0] * psi / eps,
            position: setup.x0.1 + v2 * t + eps * y[2],
            speed: v2 + psi * d[2],
        },
    ];
    Ok((t, waves))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualEntry {
    pub law: Law,
    pub test_function: usize,
    pub coarse: f64,
    pub fine: f64,
    /// `log₂(coarse/fine)`
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualReport {
    pub epsilon: (f64, f64),
    pub form: WeakForm,
    pub tests: Vec<TestFunction>,
    pub entries: Vec<WeakResidualEntry>,
    pub min_order: f64,
}

/// Largest `|residual|` over the trajectory nodes (every `stride`-th), per
/// test function and law.
pub fn max_residuals(
    system: &InteractionSystem<'_>,
    traj: &InteractionTrajectory,
    tests: &[TestFunction],
    eps: f64,
    stride: usize,
    form: WeakForm,
) -> Result<Vec<[f64; 2]>> {
    let params = system.params.with_epsilon(eps);
    let mut worst = vec![[0.0f64; 2]; tests.len()];
    for i in (0..traj.tau.len()).step_by(stride.max(1)) {
        let (_, waves) = ansatz_at(system, traj, i, eps)?;
        for (j, psi) in tests.iter().enumerate() {
            let r = weak_residual(&params, system.derived.beta, &waves, psi, form);
            worst[j][0] = worst[j][0].max(r[0].abs());
            worst[j][1] = worst[j][1].max(r[1].abs());
        }
    }
    Ok(worst)
}

/// Fits `κ` in `residual = O(ε^κ)` from `ε` and `ε/2`.
pub fn weak_residual_order(
    system: &InteractionSystem<'_>,
    traj: &InteractionTrajectory,
    tests: &[TestFunction],
    eps: f64,
    stride: usize,
    form: WeakForm,
) -> Result<WeakResidualReport> {
    let coarse = max_residuals(system, traj, tests, eps, stride, form)?;
    let fine = max_residuals(system, traj, tests, 0.5 * eps, stride, form)?;
    let mut entries = Vec::new();
    for (j, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        for (n, law) in [Law::Mass, Law::Energy].into_iter().enumerate() {
            entries.push(WeakResidualEntry { law, test_function: j, coarse: c[n], fine: f[n], order: (c[n] / f[n]).log2() });
        }
    }
    let min_order = entries.iter().map(|e| e.order).fold(f64::INFINITY, f64::min);
    Ok(WeakResidualReport { epsilon: (eps, 0.5 * eps), form, tests: tests.to_vec(), entries, min_order })
}
