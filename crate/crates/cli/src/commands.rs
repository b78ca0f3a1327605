use std::path::PathBuf;

use gdp_core::interaction::{
    elasticity_report, run_interaction, verify_lemma1, ElasticityReport, InteractionSystem, Lemma1Residuals, ScatteringSetup,
};
use gdp_core::model::{
    existence_criterion, validate_parameters, wave_from_amplitude, DerivedConstants, ExistenceCriterion, Regime, WaveParameters,
};
use gdp_core::moments::{a_f, compute_moments, Law, MomentTable};
use gdp_core::oracle::{
    energy_balance_residual, local_maxima, mass_drift, run_two_soliton, tallest_peak_speed, weak_residual_order, ConservationSample,
    FieldState, Peak, SimulationGrid, Simulator, TestFunction, WeakResidualReport,
};
use gdp_core::profile::{residual_second_order, sample_physical, ProfileSolution};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{load_profile, OutDir, VERSION};
use crate::{CliError, Common};

struct Context {
    cfg: RunConfig,
    hash: String,
    derived: DerivedConstants,
    out: Option<OutDir>,
}

impl Context {
    fn open(c: &Common, default_out: bool) -> Result<Self, CliError> {
        let cfg = RunConfig::load(&c.config)?;
        let derived = validate_parameters(&cfg.model)?;
        let dir = match (&c.out, default_out) {
            (Some(d), _) => Some(d.clone()),
            (None, true) => Some(PathBuf::from("gdp-out")),
            (None, false) => None,
        };
        let out = dir.as_deref().map(OutDir::create).transpose()?;
        Ok(Self { hash: cfg.hash(), cfg, derived, out })
    }

    fn out(&self) -> &OutDir {
        self.out.as_ref().expect("output directory")
    }

    fn waves(&self) -> Result<Vec<WaveParameters>, CliError> {
        self.cfg.waves.iter().map(|&a| Ok(wave_from_amplitude(&self.cfg.model, &self.derived, a)?)).collect()
    }

    fn profiles(&self, waves: &[WaveParameters]) -> Result<Vec<ProfileSolution>, CliError> {
        let cache = match (&self.out, self.cfg.output.cache) {
            (Some(o), true) => Some(o.path("cache")),
            _ => None,
        };
        waves.iter().map(|w| load_profile(cache.as_deref(), &self.cfg.model, &self.derived, w, &self.cfg.profile)).collect()
    }

    fn pair(&self) -> Result<(Vec<WaveParameters>, Vec<ProfileSolution>, ScatteringSetup), CliError> {
        if self.cfg.waves.len() != 2 {
            return Err(CliError::Config(format!("this command needs exactly two waves (got {})", self.cfg.waves.len())));
        }
        let waves = self.waves()?;
        let setup = ScatteringSetup::new(&self.derived, waves[0], waves[1], self.cfg.scattering.t_star, self.cfg.scattering.x_star)?;
        let profiles = self.profiles(&waves)?;
        Ok((waves, profiles, setup))
    }

    fn system<'a>(&self, profiles: &'a [ProfileSolution], setup: &ScatteringSetup) -> Result<InteractionSystem<'a>, CliError> {
        let moments = (compute_moments(&profiles[0])?, compute_moments(&profiles[1])?);
        Ok(InteractionSystem::new(&self.cfg.model, &self.derived, setup, (&profiles[0], &profiles[1]), moments, &self.cfg.interaction)?)
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    version: &'static str,
    config_hash: &'a str,
    #[serde(flatten)]
    body: T,
}

fn stamp<'a, T: Serialize>(ctx: &'a Context, body: T) -> Stamped<'a, T> {
    Stamped { version: VERSION, config_hash: &ctx.hash, body }
}

#[derive(Serialize)]
struct Classified {
    amplitude: f64,
    regime: Regime,
    velocity: f64,
    p: f64,
    q: f64,
    gstar: f64,
    existence: ExistenceCriterion,
}

#[derive(Serialize)]
struct ClassifyReport {
    beta: f64,
    r: f64,
    waves: Vec<Classified>,
}

pub fn classify(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, false)?;
    let waves = ctx
        .waves()?
        .into_iter()
        .map(|w| Classified {
            amplitude: w.amplitude,
            regime: w.regime,
            velocity: w.velocity,
            p: w.p,
            q: w.q,
            gstar: w.gstar,
            existence: existence_criterion(&ctx.cfg.model, w.amplitude, w.gstar, ctx.derived.r),
        })
        .collect();
    let report = stamp(&ctx, ClassifyReport { beta: ctx.derived.beta, r: ctx.derived.r, waves });
    match &ctx.out {
        Some(o) => o.json("classify.json", &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).expect("serialisable report")),
    }
    Ok(())
}

#[derive(Serialize)]
struct ProfileRow {
    eta: f64,
    g: f64,
    omega: f64,
    omega_prime: f64,
}

#[derive(Serialize)]
struct ProfileMeta {
    wave: WaveParameters,
    samples: usize,
    tail_start: f64,
    tail_decay: f64,
    corner_slope: Option<f64>,
    residual_second_order: f64,
}

pub fn profile(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let waves = ctx.waves()?;
    for (k, prof) in ctx.profiles(&waves)?.iter().enumerate() {
        let rows = (0..prof.len()).map(|i| ProfileRow {
            eta: prof.eta_grid[i],
            g: prof.g_values[i],
            omega: prof.omega_values[i],
            omega_prime: prof.omega_prime[i],
        });
        ctx.out().csv(&format!("profile_{}.csv", k + 1), rows)?;
        let meta = ProfileMeta {
            wave: prof.wave,
            samples: prof.len(),
            tail_start: prof.tail_start,
            tail_decay: prof.tail_decay,
            corner_slope: prof.corner_slope,
            residual_second_order: residual_second_order(prof),
        };
        ctx.out().json(&format!("profile_{}.meta.json", k + 1), &stamp(&ctx, meta))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LawCoefficients {
    #[serde(rename = "Q1")]
    q1: f64,
    #[serde(rename = "P1")]
    p1: f64,
    #[serde(rename = "Q2")]
    q2: f64,
    #[serde(rename = "P2")]
    p2: f64,
}

#[derive(Serialize)]
struct WaveMoments {
    amplitude: f64,
    velocity: f64,
    moments: MomentTable,
    coefficients: LawCoefficients,
}

#[derive(Serialize)]
struct WaveList<T> {
    waves: Vec<T>,
}

pub fn moments(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let waves = ctx.waves()?;
    let mut list = Vec::new();
    for prof in ctx.profiles(&waves)? {
        let m = compute_moments(&prof)?;
        let a = prof.wave.amplitude;
        let coef = |law| a_f(&m, law, &ctx.cfg.model, &ctx.derived, a);
        list.push(WaveMoments {
            amplitude: a,
            velocity: prof.wave.velocity,
            moments: m,
            coefficients: LawCoefficients {
                q1: coef(Law::Mass)?,
                p1: coef(Law::MassFlux)?,
                q2: coef(Law::Energy)?,
                p2: coef(Law::EnergyFlux)?,
            },
        });
    }
    ctx.out().json("moments.json", &stamp(&ctx, WaveList { waves: list }))
}

#[derive(Serialize)]
struct WaveRelations {
    amplitude: f64,
    residuals: Lemma1Residuals,
}

pub fn single_wave_relations(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let waves = ctx.waves()?;
    let mut list = Vec::new();
    for prof in ctx.profiles(&waves)? {
        let m = compute_moments(&prof)?;
        let residuals = verify_lemma1(&ctx.cfg.model, &ctx.derived, &prof.wave, &m)?;
        list.push(WaveRelations { amplitude: prof.wave.amplitude, residuals });
    }
    ctx.out().json("single_wave_relations.json", &stamp(&ctx, WaveList { waves: list }))
}

#[derive(Serialize)]
struct InteractionRow {
    tau: f64,
    s1: f64,
    s2: f64,
    phi11: f64,
    phi21: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct PhaseShifts {
    tau_max: f64,
    complete: bool,
    failure: Option<String>,
    mass_ratio: f64,
    phase_shifts: (f64, f64),
    end_slopes: (f64, f64),
    elasticity: ElasticityReport,
}

pub fn interact(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let (_, profiles, setup) = ctx.pair()?;
    let system = ctx.system(&profiles, &setup)?;
    let (traj, err) = run_interaction(&system);
    let rows = (0..traj.tau.len()).map(|i| InteractionRow {
        tau: traj.tau[i],
        s1: traj.s1[i],
        s2: traj.s2[i],
        phi11: traj.phi11[i],
        phi21: traj.phi21[i],
        sigma: traj.sigma[i],
    });
    ctx.out().csv("interaction.csv", rows)?;
    let shifts = PhaseShifts {
        tau_max: traj.tau_max,
        complete: traj.complete(),
        failure: traj.failure.clone(),
        mass_ratio: traj.mass_ratio,
        phase_shifts: traj.phase_shifts,
        end_slopes: traj.end_slopes,
        elasticity: elasticity_report(&traj, None),
    };
    ctx.out().json("phase_shifts.json", &stamp(&ctx, shifts))?;
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct TrackRow {
    snapshot: usize,
    t: f64,
    peak: usize,
    x: f64,
    amplitude: f64,
}

#[derive(Serialize)]
struct XuRow {
    x: f64,
    u: f64,
}

#[derive(Serialize)]
struct SimulationManifest<'a> {
    params: gdp_core::model::ModelParameters,
    grid: SimulationGrid,
    step: f64,
    amplitudes: &'a [f64],
    velocities: Vec<f64>,
    snapshot_times: Vec<f64>,
    mass_drift: f64,
    energy_balance_residual: f64,
    /// Tallest-peak speed for one wave; pre/post pairs for two.
    speed: Option<f64>,
    pre: Option<Vec<Peak>>,
    post: Option<Vec<Peak>>,
    pre_speeds: Option<(f64, f64)>,
    post_speeds: Option<(f64, f64)>,
    post_offsets: Option<(f64, f64)>,
    amplitude_defect: Option<f64>,
    series: &'a [ConservationSample],
}

pub fn simulate(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let oc = ctx.cfg.oracle;
    let grid = oc.grid;
    let params = ctx.cfg.model;
    let (snapshots, series, step, peaks, mut manifest_extra) = match ctx.cfg.waves.len() {
        1 => {
            let waves = ctx.waves()?;
            let prof = &ctx.profiles(&waves)?[0];
            let sc = ctx.cfg.scattering;
            let x0 = sc.x_star - waves[0].velocity * sc.t_star;
            let u = sample_physical(prof, &params, &ctx.derived, x0, 0.0, &grid.x());
            let run = Simulator::new(&grid, &params)?.run(&FieldState { t: 0.0, u }, oc.snapshot_every, oc.monitor_every)?;
            let x = grid.x();
            let peaks: Vec<Vec<Peak>> = run.snapshots.iter().map(|s| local_maxima(&x, &s.u, 0.2 * waves[0].amplitude)).collect();
            let times: Vec<f64> = run.snapshots.iter().map(|s| s.t).collect();
            let extra = Extra { speed: tallest_peak_speed(&times, &peaks, grid.length), ..Extra::default() };
            (run.snapshots, run.series, run.step, peaks, extra)
        }
        2 => {
            let (_, profiles, setup) = ctx.pair()?;
            let (run, track) = run_two_soliton(&params, &ctx.derived, &setup, (&profiles[0], &profiles[1]), &grid, oc.snapshot_every)?;
            let extra = Extra {
                speed: None,
                pre: Some(track.pre.clone()),
                post: Some(track.post.clone()),
                pre_speeds: track.pre_speeds,
                post_speeds: track.post_speeds,
                post_offsets: track.post_offsets,
                amplitude_defect: track.amplitude_defect,
            };
            (run.snapshots, run.series, run.step, track.peaks, extra)
        }
        n => return Err(CliError::Config(format!("simulate needs one or two waves (got {n})"))),
    };
    let out = ctx.out();
    let rows = peaks.iter().enumerate().flat_map(|(i, ps)| {
        let t = snapshots[i].t;
        ps.iter().enumerate().map(move |(j, p)| TrackRow { snapshot: i, t, peak: j, x: p.x, amplitude: p.amplitude })
    });
    out.csv("tracks.csv", rows)?;
    if ctx.cfg.output.snapshots {
        let x = grid.x();
        for (i, s) in snapshots.iter().enumerate() {
            out.csv(&format!("snapshots/snapshot_{i:05}.csv"), x.iter().zip(&s.u).map(|(&x, &u)| XuRow { x, u }))?;
        }
    }
    let velocities = ctx.waves()?.iter().map(|w| w.velocity).collect();
    let manifest = SimulationManifest {
        params,
        grid,
        step,
        amplitudes: &ctx.cfg.waves,
        velocities,
        snapshot_times: snapshots.iter().map(|s| s.t).collect(),
        mass_drift: mass_drift(&series),
        energy_balance_residual: energy_balance_residual(&series),
        speed: manifest_extra.speed.take(),
        pre: manifest_extra.pre.take(),
        post: manifest_extra.post.take(),
        pre_speeds: manifest_extra.pre_speeds,
        post_speeds: manifest_extra.post_speeds,
        post_offsets: manifest_extra.post_offsets,
        amplitude_defect: manifest_extra.amplitude_defect,
        series: &series,
    };
    out.json("simulation.json", &stamp(&ctx, manifest))
}

#[derive(Default)]
struct Extra {
    speed: Option<f64>,
    pre: Option<Vec<Peak>>,
    post: Option<Vec<Peak>>,
    pre_speeds: Option<(f64, f64)>,
    post_speeds: Option<(f64, f64)>,
    post_offsets: Option<(f64, f64)>,
    amplitude_defect: Option<f64>,
}

#[derive(Serialize)]
struct ResidualOutput {
    trajectory_complete: bool,
    trajectory_failure: Option<String>,
    #[serde(flatten)]
    report: WeakResidualReport,
}

pub fn residual(c: &Common) -> Result<(), CliError> {
    let ctx = Context::open(c, true)?;
    let (_, profiles, setup) = ctx.pair()?;
    let system = ctx.system(&profiles, &setup)?;
    let (traj, err) = run_interaction(&system);
    if traj.tau.len() < 2 {
        return Err(err.map(CliError::from).unwrap_or_else(|| CliError::Config("empty interaction trajectory".into())));
    }
    let rc = &ctx.cfg.residual;
    let tests = rc.tests.clone().unwrap_or_else(|| TestFunction::family(setup.x_star));
    let report = weak_residual_order(&system, &traj, &tests, rc.epsilon, rc.stride, rc.form)?;
    let out = ResidualOutput { trajectory_complete: traj.complete(), trajectory_failure: traj.failure.clone(), report };
    ctx.out().json("residual_order.json", &stamp(&ctx, out))
}
